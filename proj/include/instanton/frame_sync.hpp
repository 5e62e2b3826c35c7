#pragma once

// Frame-sync estimator. At power-off the receiver stores its frame position
// (word, bit, TOW), the RTC count, the carrier Doppler and the RCO. At
// power-on, once bit lock is declared, the RTC difference predicts which bit
// of which word of which subframe is arriving, so frame lock can be declared
// without waiting for a preamble.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "instanton/nav_message.hpp"
#include "instanton/rx_clock.hpp"

namespace instanton::frame_sync {

struct EphemerisTag {
    int sat_id = 0;
    double epoch_s = 0.0;
    friend bool operator==(const EphemerisTag&, const EphemerisTag&) = default;
};

struct PersistedSnapshot {
    int word_index = 1;  // 1..10
    int bit_index = 0;   // 0..29
    int tow = 0;
    std::int64_t rtc_count = 0;
    double carrier_doppler_hz = 0.0;
    double code_phase_chips = 0.0;
    Rco rco;
    std::vector<EphemerisTag> ephemeris_ids;

    void validate() const;
    friend bool operator==(const PersistedSnapshot&, const PersistedSnapshot&) = default;
};

struct EstimatedFrameState {
    int bit_index = 0;
    int word_index = 1;
    int tow = 0;
    std::int64_t sync_tic = 0;
    double residual_ms = 0.0;  // [0, 20)
};

// exact:  absolute bit count + elapsed bits, converted back; carries are
//         always consistent.
// literal: the plain decomposition into 600 ms words, 20 ms bits and a
//         remainder, with TOW advanced by INT(elapsed / 6000) on its own.
enum class EstimationMode { exact, literal };

// What the tracking loops know at the moment of power-off.
struct TrackingStatus {
    bool bit_locked = false;
    bool frame_locked_once = false;  // a fix and RCO exist from this or a prior session
    double carrier_doppler_hz = 0.0;
    double code_phase_chips = 0.0;
    Rco rco;
    std::vector<EphemerisTag> ephemerides;
};

// Throws SnapshotUnavailableError unless bit-locked with a prior frame lock.
PersistedSnapshot take_snapshot(const nav::BitstreamCursor& cursor, const ReceiverClockState& clock,
                                const TrackingStatus& tracking);

struct EstimateOptions {
    EstimationMode mode = EstimationMode::exact;
    std::int64_t current_tic = 0;
    double max_elapsed_ms = std::numeric_limits<double>::infinity();
    // Added to the RTC-measured interval before decomposition, e.g. the
    // code-Doppler correction from elapsed_correction_ms().
    double elapsed_correction_ms = 0.0;
};

// Throws ClockWentBackwardsError if rtc_now < snapshot.rtc_count and
// StaleSnapshotError if the interval exceeds options.max_elapsed_ms.
EstimatedFrameState estimate_frame_state(const PersistedSnapshot& snapshot, std::int64_t rtc_now, double rtc_hz,
                                         const EstimateOptions& options = {});

// Same estimate from an already measured interval in milliseconds.
EstimatedFrameState estimate_from_elapsed(const PersistedSnapshot& snapshot, double elapsed_ms,
                                          const EstimateOptions& options = {});

// Longest power-off interval (ms) before an RTC with the given tolerance
// drifts by more than bit_margin_ms. Infinity for a perfect RTC.
double drift_budget(double rtc_ppm, double bit_margin_ms);

double code_doppler_from_carrier(double carrier_doppler_hz);

// Code phase drift over the off interval, using the mean of the stored and
// current carrier Doppler.
double code_phase_advance_chips(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s);

// code_phase_advance_chips wrapped into [0, 1023).
double compensate_code_phase(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s);

// Stored code phase moved forward by the predicted advance, in [0, 1023).
double predicted_code_phase(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s);

// The same advance expressed as transmit-time milliseconds; adding it to the
// RTC interval gives the interval elapsed at the satellite.
double elapsed_correction_ms(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s);

// Versioned binary record, big-endian, fields in declaration order, CRC-32
// trailer:
//   "IOSN" u16 version | u8 word | u8 bit | i32 tow | i64 rtc_count
//   | f64 carrier_doppler_hz | f64 code_phase_chips | i32 rco.week
//   | f64 rco.second | u16 n | n x (u8 sat_id, f64 epoch_s) | u32 crc32
inline constexpr std::uint16_t kSnapshotVersion = 1;

std::vector<std::uint8_t> serialize_snapshot(const PersistedSnapshot& snapshot);
// Throws SnapshotFormatError on bad magic, version, length or checksum.
PersistedSnapshot parse_snapshot(std::span<const std::uint8_t> bytes);

// Human-readable key = value rendering (also used for the sidecar file).
std::string describe_snapshot(const PersistedSnapshot& snapshot);

// Writes `path` and the sidecar `path + ".txt"`.
void write_snapshot_file(const std::string& path, const PersistedSnapshot& snapshot);
PersistedSnapshot read_snapshot_file(const std::string& path);

}  // namespace instanton::frame_sync
