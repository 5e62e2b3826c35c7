#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "instanton/errors.hpp"
#include "instanton/frame_sync.hpp"

namespace instanton::frame_sync {
namespace {

constexpr char kMagic[4] = {'I', 'O', 'S', 'N'};

class Writer {
public:
    void u(std::uint64_t v, int bytes) {
        for (int i = bytes - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u(std::bit_cast<std::uint64_t>(v), 8); }
    std::vector<std::uint8_t>& bytes() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
    std::uint64_t u(int bytes) {
        if (pos_ + static_cast<std::size_t>(bytes) > b_.size()) throw SnapshotFormatError("snapshot truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v = (v << 8) | b_[pos_++];
        return v;
    }
    std::int64_t i(int bytes) {
        const std::uint64_t v = u(bytes);
        const int shift = 64 - 8 * bytes;
        return static_cast<std::int64_t>(v << shift) >> shift;
    }
    double f64() { return std::bit_cast<double>(u(8)); }
    std::size_t pos() const { return pos_; }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

std::uint32_t crc(std::span<const std::uint8_t> b) {
    return static_cast<std::uint32_t>(::crc32(0L, b.data(), static_cast<uInt>(b.size())));
}

}  // namespace

std::vector<std::uint8_t> serialize_snapshot(const PersistedSnapshot& s) {
    s.validate();
    if (s.ephemeris_ids.size() > 0xFFFF) throw ValidationError("too many ephemeris tags");
    Writer w;
    for (char c : kMagic) w.u(static_cast<std::uint8_t>(c), 1);
    w.u(kSnapshotVersion, 2);
    w.u(static_cast<std::uint64_t>(s.word_index), 1);
    w.u(static_cast<std::uint64_t>(s.bit_index), 1);
    w.u(static_cast<std::uint32_t>(s.tow), 4);
    w.u(static_cast<std::uint64_t>(s.rtc_count), 8);
    w.f64(s.carrier_doppler_hz);
    w.f64(s.code_phase_chips);
    w.u(static_cast<std::uint32_t>(s.rco.week), 4);
    w.f64(s.rco.second);
    w.u(s.ephemeris_ids.size(), 2);
    for (const auto& e : s.ephemeris_ids) {
        w.u(static_cast<std::uint64_t>(e.sat_id), 1);
        w.f64(e.epoch_s);
    }
    w.u(crc(w.bytes()), 4);
    return w.bytes();
}

PersistedSnapshot parse_snapshot(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw SnapshotFormatError("not a snapshot file");
    Reader r(bytes);
    r.u(4);
    const auto version = r.u(2);
    if (version != kSnapshotVersion)
        throw SnapshotFormatError("unsupported snapshot version " + std::to_string(version));
    PersistedSnapshot s;
    s.word_index = static_cast<int>(r.u(1));
    s.bit_index = static_cast<int>(r.u(1));
    s.tow = static_cast<int>(r.i(4));
    s.rtc_count = r.i(8);
    s.carrier_doppler_hz = r.f64();
    s.code_phase_chips = r.f64();
    s.rco.week = static_cast<int>(r.i(4));
    s.rco.second = r.f64();
    const auto n = r.u(2);
    for (std::uint64_t k = 0; k < n; ++k) {
        EphemerisTag t;
        t.sat_id = static_cast<int>(r.u(1));
        t.epoch_s = r.f64();
        s.ephemeris_ids.push_back(t);
    }
    const std::size_t body = r.pos();
    const auto stored = static_cast<std::uint32_t>(r.u(4));
    if (r.pos() != bytes.size()) throw SnapshotFormatError("trailing bytes after snapshot");
    if (stored != crc(bytes.first(body))) throw SnapshotFormatError("snapshot checksum mismatch");
    try {
        s.validate();
    } catch (const ValidationError& e) {
        throw SnapshotFormatError(e.what());
    }
    return s;
}

std::string describe_snapshot(const PersistedSnapshot& s) {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "version = " << kSnapshotVersion << '\n'
       << "word_index = " << s.word_index << '\n'
       << "bit_index = " << s.bit_index << '\n'
       << "tow = " << s.tow << '\n'
       << "rtc_count = " << s.rtc_count << '\n'
       << "carrier_doppler_hz = " << num(s.carrier_doppler_hz) << '\n'
       << "code_phase_chips = " << num(s.code_phase_chips) << '\n'
       << "rco_week = " << s.rco.week << '\n'
       << "rco_second = " << num(s.rco.second) << '\n'
       << "ephemerides = " << s.ephemeris_ids.size() << '\n';
    for (const auto& e : s.ephemeris_ids) os << "  prn " << e.sat_id << " epoch_s " << num(e.epoch_s) << '\n';
    return os.str();
}

void write_snapshot_file(const std::string& path, const PersistedSnapshot& snapshot) {
    const auto bytes = serialize_snapshot(snapshot);
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError(path, "cannot open for writing");
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError(path, "write failed");
    }
    const std::string sidecar = path + ".txt";
    std::ofstream t(sidecar, std::ios::trunc);
    if (!t) throw IoError(sidecar, "cannot open for writing");
    t << describe_snapshot(snapshot);
    if (!t) throw IoError(sidecar, "write failed");
}

PersistedSnapshot read_snapshot_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(path, "cannot open for reading");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_snapshot(bytes);
}

}  // namespace instanton::frame_sync
