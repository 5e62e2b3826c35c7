#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "instanton/errors.hpp"
#include "instanton/nav_message.hpp"

namespace instanton::nav {
namespace {

constexpr char kMagic[4] = {'N', 'A', 'V', 'B'};

std::vector<std::uint8_t> pack_bits(std::span<const Bit> bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] & 1u) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return out;
}

Bitstream unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count) {
    if (bytes.size() < (count + 7) / 8) throw DecodeError("bitstream payload truncated");
    Bitstream out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return out;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

}  // namespace

std::vector<std::uint8_t> pack_bitstream(std::span<const Bit> bits) {
    const auto n = static_cast<std::uint32_t>(bits.size());
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
    const auto payload = pack_bits(bits);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Bitstream unpack_bitstream(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
        throw DecodeError("not a NAVB bitstream");
    std::uint32_t n = 0;
    for (int i = 4; i < 8; ++i) n = (n << 8) | bytes[i];
    return unpack_bits(bytes.subspan(8), n);
}

void write_bitstream_file(const std::string& path, std::span<const Bit> bits) {
    const auto bytes = pack_bitstream(bits);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(path, "cannot open for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError(path, "write failed");
}

Bitstream read_bitstream_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(path, "cannot open for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return unpack_bitstream(bytes);
}

std::string to_hex_dump(std::span<const Bit> bits) {
    std::ostringstream os;
    os << "navbits " << bits.size() << '\n';
    const auto bytes = pack_bits(bits);
    char buf[3];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%02x", bytes[i]);
        os << buf;
        if (i % 16 == 15 || i + 1 == bytes.size()) os << '\n';
    }
    return os.str();
}

Bitstream from_hex_dump(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    std::size_t count = 0;
    if (!(is >> tag >> count) || tag != "navbits") throw DecodeError("hex dump header missing");
    std::vector<std::uint8_t> bytes;
    int hi = -1;
    for (char c; is.get(c);) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        const int v = hex_value(c);
        if (v < 0) throw DecodeError(std::string("bad hex digit '") + c + "'");
        if (hi < 0) {
            hi = v;
        } else {
            bytes.push_back(static_cast<std::uint8_t>(hi << 4 | v));
            hi = -1;
        }
    }
    if (hi >= 0) throw DecodeError("odd number of hex digits");
    return unpack_bits(bytes, count);
}

}  // namespace instanton::nav
