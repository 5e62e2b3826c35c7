#pragma once

// LNAV-style navigation bitstream: 30-bit words, 10-word subframes, 5-subframe
// frames at 50 bps.
//
// Word layout (D1 is transmitted first and is held in bit 29 of NavWord::bits):
//
//   word 1 (TLM)  D1-D8 preamble 10001011, D9-D13 sat_id - 1,
//                 D14-D23 week number mod 1024, D24 reserved (0)
//   word 2 (HOW)  D1-D17 TOW count, D18 alert (0), D19 anti-spoof (0),
//                 D20-D22 subframe id, D23-D24 force D29 = D30 = 0
//   words 3..10   24-bit payload words; D23-D24 of word 10 force
//                 D29 = D30 = 0 and payload[7] keeps its two low bits clear
//
// Parity is the (32,26) extended Hamming code of the L1 C/A interface,
// with d_i the source data bits and D29*, D30* the last two transmitted bits
// of the previous word:
//
//   D_i = d_i ^ D30*                        for i = 1..24
//   D25 = D29* ^ d1 d2 d3 d5 d6 d10 d11 d12 d13 d14 d17 d18 d20 d23
//   D26 = D30* ^ d2 d3 d4 d6 d7 d11 d12 d13 d14 d15 d18 d19 d21 d24
//   D27 = D29* ^ d1 d3 d4 d5 d7 d8 d12 d13 d14 d15 d16 d19 d20 d22
//   D28 = D30* ^ d2 d4 d5 d6 d8 d9 d13 d14 d15 d16 d17 d20 d21 d23
//   D29 = D30* ^ d1 d3 d5 d6 d7 d9 d10 d14 d15 d16 d17 d18 d21 d22 d24
//   D30 = D29* ^ d3 d5 d6 d8 d9 d10 d11 d13 d15 d19 d22 d23 d24
//
// (each row is the XOR of the listed bits). With a correct D29*/D30* the
// code has minimum distance 4 over a word, so every 1-, 2- and 3-bit error
// inside one word is detected.
//
// Every subframe ends with D29 = D30 = 0 and decodes standalone with a zero
// parity tail.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace instanton::nav {

inline constexpr int kBitsPerWord = 30;
inline constexpr int kWordsPerSubframe = 10;
inline constexpr int kBitsPerSubframe = kBitsPerWord * kWordsPerSubframe;  // 300
inline constexpr int kSubframesPerFrame = 5;
inline constexpr int kBitsPerFrame = kBitsPerSubframe * kSubframesPerFrame;  // 1500
inline constexpr double kBitPeriodS = 0.020;
inline constexpr double kWordPeriodS = 0.600;
inline constexpr double kSubframePeriodS = 6.0;
inline constexpr int kBitsPerSecond = 50;

inline constexpr std::uint32_t kPreamble = 0x8B;  // 10001011
inline constexpr int kMaxTow = 100799;            // last 6 s count of a week
inline constexpr int kMaxWeek = 1023;             // 10-bit transmitted week

using Bit = std::uint8_t;
using Bitstream = std::vector<Bit>;

struct ParityTail {
    bool d29 = false;
    bool d30 = false;
    friend bool operator==(const ParityTail&, const ParityTail&) = default;
};

struct NavWord {
    std::uint32_t bits = 0;  // 30 significant bits, D1 in bit 29

    // n is 1-based, D1..D30.
    int bit(int n) const { return static_cast<int>((bits >> (kBitsPerWord - n)) & 1u); }
    ParityTail tail() const { return {bit(29) != 0, bit(30) != 0}; }
    friend bool operator==(const NavWord&, const NavWord&) = default;
};

// Six parity bits D25..D30 (D25 in bit 5) for 24 source data bits.
std::uint32_t parity_bits(std::uint32_t source_data24, ParityTail prev);

NavWord parity_encode(std::uint32_t source_data24, ParityTail prev);
bool parity_check(NavWord word, ParityTail prev);

// Strips the D30* complement, returning d1..d24 (d1 in bit 23).
std::uint32_t source_data(NavWord word, ParityTail prev);

// Encodes 22 data bits and picks d23, d24 to end the word with D29 = D30 = 0.
NavWord parity_encode_zero_tail(std::uint32_t source_data22, ParityTail prev);

// Payload words 3..10 as 24-bit source data.
using Payload = std::array<std::uint32_t, 8>;

struct Subframe {
    int sat_id = 1;
    int subframe_id = 1;
    int tow = 0;  // HOW count: 6 s units, refers to the end of this subframe
    int week_number = 0;
    Payload payload{};
    std::array<NavWord, kWordsPerSubframe> words{};

    Bitstream bits() const;
};

Subframe build_subframe(int sat_id, int subframe_id, int tow, int week_number,
                        const Payload& payload);

// Decodes 300 normal-polarity bits. Throws DecodeError on any parity
// failure or malformed TLM/HOW content.
Subframe decode_subframe(std::span<const Bit> bits300);

struct Handover {
    int tow = 0;
    int week_number = 0;
};

// Re-verifies parity of the TLM and HOW words. Throws DecodeError.
Handover extract_handover(const Subframe& subframe);

enum class Polarity { normal, inverted };

struct PreambleMatch {
    std::size_t offset = 0;
    Polarity polarity = Polarity::normal;
    int tow = 0;
    int subframe_id = 0;
    friend bool operator==(const PreambleMatch&, const PreambleMatch&) = default;
};

// First offset >= start where a preamble begins and the TLM and HOW words
// validate (parity, reserved bits, TOW range, subframe id).
std::optional<PreambleMatch> scan_for_preamble(std::span<const Bit> stream,
                                               std::size_t start = 0);

// Every validated preamble offset in the stream.
std::vector<PreambleMatch> scan_all_preambles(std::span<const Bit> stream);

Bitstream inverted(std::span<const Bit> stream);

// Position inside the navigation bitstream of one channel.
struct BitstreamCursor {
    int word_index = 1;   // 1..10
    int bit_index = 0;    // 0..29
    int tow_current = 1;  // HOW count of the subframe being received
    Polarity polarity = Polarity::normal;

    // Absolute bit count since the start of the week.
    std::int64_t bit_count() const;
    static BitstreamCursor from_bit_count(std::int64_t bit_count);
    void advance_bits(std::int64_t n);
};

// Packed file format: "NAVB", u32 big-endian bit count, bits packed
// MSB-first into bytes, last byte zero padded.
std::vector<std::uint8_t> pack_bitstream(std::span<const Bit> bits);
Bitstream unpack_bitstream(std::span<const std::uint8_t> bytes);
void write_bitstream_file(const std::string& path, std::span<const Bit> bits);
Bitstream read_bitstream_file(const std::string& path);

// Hex dump: a "navbits <count>" line followed by lines of up to 32 hex
// digits of the packed payload (without the binary header).
std::string to_hex_dump(std::span<const Bit> bits);
Bitstream from_hex_dump(const std::string& text);

}  // namespace instanton::nav
