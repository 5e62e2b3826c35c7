#include "instanton/nav_message.hpp"

#include <bit>
#include <initializer_list>

#include "instanton/errors.hpp"

namespace instanton::nav {
namespace {

// Mask over d1..d24 with d1 in bit 23.
constexpr std::uint32_t data_mask(std::initializer_list<int> ds) {
    std::uint32_t m = 0;
    for (int d : ds) m |= 1u << (24 - d);
    return m;
}

struct ParityRow {
    std::uint32_t mask;
    bool uses_d29;  // otherwise D30*
};

constexpr std::array<ParityRow, 6> kParityRows{{
    {data_mask({1, 2, 3, 5, 6, 10, 11, 12, 13, 14, 17, 18, 20, 23}), true},
    {data_mask({2, 3, 4, 6, 7, 11, 12, 13, 14, 15, 18, 19, 21, 24}), false},
    {data_mask({1, 3, 4, 5, 7, 8, 12, 13, 14, 15, 16, 19, 20, 22}), true},
    {data_mask({2, 4, 5, 6, 8, 9, 13, 14, 15, 16, 17, 20, 21, 23}), false},
    {data_mask({1, 3, 5, 6, 7, 9, 10, 14, 15, 16, 17, 18, 21, 22, 24}), false},
    {data_mask({3, 5, 6, 8, 9, 10, 11, 13, 15, 19, 22, 23, 24}), true},
}};

constexpr std::uint32_t kData24 = 0xFFFFFFu;
constexpr std::uint32_t kWord30 = 0x3FFFFFFFu;

std::uint32_t field(std::uint32_t data24, int first_d, int width) {
    return (data24 >> (24 - first_d - width + 1)) & ((1u << width) - 1u);
}

std::uint32_t put(std::uint32_t value, int first_d, int width) {
    return (value & ((1u << width) - 1u)) << (24 - first_d - width + 1);
}

std::uint32_t tlm_data(int sat_id, int week_number) {
    return put(kPreamble, 1, 8) | put(static_cast<std::uint32_t>(sat_id - 1), 9, 5) |
           put(static_cast<std::uint32_t>(week_number), 14, 10);
}

std::uint32_t how_data(int tow, int subframe_id) {
    return put(static_cast<std::uint32_t>(tow), 1, 17) |
           put(static_cast<std::uint32_t>(subframe_id), 20, 3);
}

NavWord word_at(std::span<const Bit> bits, std::size_t offset) {
    std::uint32_t w = 0;
    for (int i = 0; i < kBitsPerWord; ++i) w = (w << 1) | (bits[offset + i] & 1u);
    return NavWord{w};
}

struct TlmHow {
    int sat_id;
    int week_number;
    int tow;
    int subframe_id;
};

// Returns the decoded TLM/HOW fields, or nothing if any check fails.
std::optional<TlmHow> validate_tlm_how(NavWord tlm, NavWord how) {
    const ParityTail zero{};
    if (!parity_check(tlm, zero)) return std::nullopt;
    const std::uint32_t t = source_data(tlm, zero);
    if (field(t, 1, 8) != kPreamble || field(t, 24, 1) != 0) return std::nullopt;

    if (!parity_check(how, tlm.tail())) return std::nullopt;
    if (how.bit(29) != 0 || how.bit(30) != 0) return std::nullopt;
    const std::uint32_t h = source_data(how, tlm.tail());
    const int tow = static_cast<int>(field(h, 1, 17));
    const int sfid = static_cast<int>(field(h, 20, 3));
    if (tow > kMaxTow || sfid < 1 || sfid > kSubframesPerFrame) return std::nullopt;
    if (field(h, 18, 2) != 0) return std::nullopt;
    return TlmHow{static_cast<int>(field(t, 9, 5)) + 1, static_cast<int>(field(t, 14, 10)), tow,
                  sfid};
}

}  // namespace

std::uint32_t parity_bits(std::uint32_t source_data24, ParityTail prev) {
    std::uint32_t p = 0;
    for (const auto& row : kParityRows) {
        const unsigned seed = row.uses_d29 ? prev.d29 : prev.d30;
        const unsigned v = seed ^ (std::popcount(source_data24 & row.mask) & 1u);
        p = (p << 1) | v;
    }
    return p;
}

NavWord parity_encode(std::uint32_t source_data24, ParityTail prev) {
    source_data24 &= kData24;
    const std::uint32_t transmitted = prev.d30 ? (~source_data24 & kData24) : source_data24;
    return NavWord{(transmitted << 6) | parity_bits(source_data24, prev)};
}

std::uint32_t source_data(NavWord word, ParityTail prev) {
    const std::uint32_t transmitted = (word.bits >> 6) & kData24;
    return prev.d30 ? (~transmitted & kData24) : transmitted;
}

bool parity_check(NavWord word, ParityTail prev) {
    if ((word.bits & ~kWord30) != 0) return false;
    return (word.bits & 0x3Fu) == parity_bits(source_data(word, prev), prev);
}

NavWord parity_encode_zero_tail(std::uint32_t source_data22, ParityTail prev) {
    const std::uint32_t base = source_data22 & (kData24 & ~3u);
    for (std::uint32_t free_bits = 0; free_bits < 4; ++free_bits) {
        const NavWord w = parity_encode(base | free_bits, prev);
        if ((w.bits & 3u) == 0) return w;
    }
    // d23/d24 enter D29/D30 through independent rows, one combination always works.
    throw Error("parity_encode_zero_tail: no solution");
}

Bitstream Subframe::bits() const {
    Bitstream out;
    out.reserve(kBitsPerSubframe);
    for (const auto& w : words)
        for (int n = 1; n <= kBitsPerWord; ++n) out.push_back(static_cast<Bit>(w.bit(n)));
    return out;
}

Subframe build_subframe(int sat_id, int subframe_id, int tow, int week_number,
                        const Payload& payload) {
    if (sat_id < 1 || sat_id > 32) throw ValidationError("sat_id must be in 1..32");
    if (subframe_id < 1 || subframe_id > kSubframesPerFrame)
        throw ValidationError("subframe_id must be in 1..5");
    if (tow < 0 || tow > kMaxTow) throw ValidationError("tow must be in 0..100799");
    if (week_number < 0 || week_number > kMaxWeek)
        throw ValidationError("week_number must be in 0..1023");
    for (std::size_t i = 0; i < payload.size(); ++i)
        if ((payload[i] & ~kData24) != 0) throw ValidationError("payload words are 24 bits");
    if ((payload[7] & 3u) != 0) throw ValidationError("payload word 10 bits 23-24 are reserved");

    Subframe sf{sat_id, subframe_id, tow, week_number, payload, {}};
    ParityTail tail{};
    sf.words[0] = parity_encode(tlm_data(sat_id, week_number), tail);
    tail = sf.words[0].tail();
    sf.words[1] = parity_encode_zero_tail(how_data(tow, subframe_id), tail);
    tail = sf.words[1].tail();
    for (int i = 0; i < 8; ++i) {
        sf.words[2 + i] = (i == 7) ? parity_encode_zero_tail(payload[i], tail)
                                   : parity_encode(payload[i], tail);
        tail = sf.words[2 + i].tail();
    }
    return sf;
}

Subframe decode_subframe(std::span<const Bit> bits300) {
    if (bits300.size() < static_cast<std::size_t>(kBitsPerSubframe))
        throw DecodeError("subframe needs 300 bits");
    Subframe sf;
    for (int i = 0; i < kWordsPerSubframe; ++i) sf.words[i] = word_at(bits300, i * kBitsPerWord);

    const auto head = validate_tlm_how(sf.words[0], sf.words[1]);
    if (!head) throw DecodeError("TLM/HOW validation failed");
    sf.sat_id = head->sat_id;
    sf.week_number = head->week_number;
    sf.tow = head->tow;
    sf.subframe_id = head->subframe_id;

    ParityTail tail = sf.words[1].tail();
    for (int i = 0; i < 8; ++i) {
        const NavWord w = sf.words[2 + i];
        if (!parity_check(w, tail))
            throw DecodeError("parity failure in word " + std::to_string(3 + i));
        sf.payload[i] = source_data(w, tail);
        tail = w.tail();
    }
    if (sf.words[9].bit(29) != 0 || sf.words[9].bit(30) != 0)
        throw DecodeError("word 10 tail bits not zero");
    sf.payload[7] &= ~3u;
    return sf;
}

Handover extract_handover(const Subframe& subframe) {
    const auto head = validate_tlm_how(subframe.words[0], subframe.words[1]);
    if (!head) throw DecodeError("handover word failed validation");
    return {head->tow, head->week_number};
}

std::optional<PreambleMatch> scan_for_preamble(std::span<const Bit> stream, std::size_t start) {
    constexpr std::size_t kNeeded = 2 * kBitsPerWord;
    if (stream.size() < kNeeded) return std::nullopt;
    for (std::size_t off = start; off + kNeeded <= stream.size(); ++off) {
        std::uint32_t head = 0;
        for (int i = 0; i < 8; ++i) head = (head << 1) | (stream[off + i] & 1u);
        Polarity pol;
        if (head == kPreamble)
            pol = Polarity::normal;
        else if (head == (~kPreamble & 0xFFu))
            pol = Polarity::inverted;
        else
            continue;

        NavWord tlm = word_at(stream, off);
        NavWord how = word_at(stream, off + kBitsPerWord);
        if (pol == Polarity::inverted) {
            tlm.bits = ~tlm.bits & kWord30;
            how.bits = ~how.bits & kWord30;
        }
        if (const auto v = validate_tlm_how(tlm, how))
            return PreambleMatch{off, pol, v->tow, v->subframe_id};
    }
    return std::nullopt;
}

std::vector<PreambleMatch> scan_all_preambles(std::span<const Bit> stream) {
    std::vector<PreambleMatch> found;
    std::size_t pos = 0;
    while (auto m = scan_for_preamble(stream, pos)) {
        found.push_back(*m);
        pos = m->offset + 1;
    }
    return found;
}

Bitstream inverted(std::span<const Bit> stream) {
    Bitstream out(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) out[i] = static_cast<Bit>(stream[i] ^ 1u);
    return out;
}

std::int64_t BitstreamCursor::bit_count() const {
    return (static_cast<std::int64_t>(tow_current) - 1) * kBitsPerSubframe +
           (word_index - 1) * kBitsPerWord + bit_index;
}

BitstreamCursor BitstreamCursor::from_bit_count(std::int64_t n) {
    if (n < 0) throw ValidationError("negative bit count");
    BitstreamCursor c;
    c.tow_current = static_cast<int>(n / kBitsPerSubframe) + 1;
    const int pos = static_cast<int>(n % kBitsPerSubframe);
    c.word_index = pos / kBitsPerWord + 1;
    c.bit_index = pos % kBitsPerWord;
    return c;
}

void BitstreamCursor::advance_bits(std::int64_t n) {
    const Polarity p = polarity;
    *this = from_bit_count(bit_count() + n);
    polarity = p;
}

}  // namespace instanton::nav
