#include "instanton/frame_sync.hpp"

#include <cmath>

#include "instanton/constellation.hpp"
#include "instanton/errors.hpp"

namespace instanton::frame_sync {
namespace {

constexpr double kBitMs = 20.0;
constexpr double kWordMs = 600.0;
constexpr double kSubframeMs = 6000.0;

std::int64_t sync_tic_for(std::int64_t current_tic, int word_index) {
    // (10 - word) words of 600 ms, six TICs each.
    return current_tic + static_cast<std::int64_t>(nav::kWordsPerSubframe - word_index) * 6;
}

// floor(x / step) and the remainder in [0, step).
std::pair<std::int64_t, double> split(double x, double step) {
    auto n = static_cast<std::int64_t>(std::floor(x / step));
    double rem = x - static_cast<double>(n) * step;
    if (rem < 0.0) {
        --n;
        rem += step;
    } else if (rem >= step) {
        ++n;
        rem -= step;
    }
    return {n, rem};
}

}  // namespace

void PersistedSnapshot::validate() const {
    if (word_index < 1 || word_index > nav::kWordsPerSubframe) throw ValidationError("snapshot word_index out of range");
    if (bit_index < 0 || bit_index >= nav::kBitsPerWord) throw ValidationError("snapshot bit_index out of range");
    if (rtc_count < 0) throw ValidationError("snapshot rtc_count negative");
}

PersistedSnapshot take_snapshot(const nav::BitstreamCursor& cursor, const ReceiverClockState& clock,
                                const TrackingStatus& tracking) {
    if (!tracking.frame_locked_once)
        throw SnapshotUnavailableError("no navigation solution yet; a fix is required before power-off");
    if (!tracking.bit_locked) throw SnapshotUnavailableError("receiver is not bit-locked");
    PersistedSnapshot s;
    s.word_index = cursor.word_index;
    s.bit_index = cursor.bit_index;
    s.tow = cursor.tow_current;
    s.rtc_count = clock.rtc_count;
    s.carrier_doppler_hz = tracking.carrier_doppler_hz;
    s.code_phase_chips = tracking.code_phase_chips;
    s.rco = tracking.rco;
    s.ephemeris_ids = tracking.ephemerides;
    s.validate();
    return s;
}

EstimatedFrameState estimate_frame_state(const PersistedSnapshot& snapshot, std::int64_t rtc_now, double rtc_hz,
                                         const EstimateOptions& options) {
    if (rtc_now < snapshot.rtc_count) throw ClockWentBackwardsError("RTC count decreased across power-off");
    if (!(rtc_hz > 0.0)) throw ValidationError("RTC frequency must be positive");
    const double elapsed_ms = static_cast<double>(rtc_now - snapshot.rtc_count) * 1000.0 / rtc_hz;
    return estimate_from_elapsed(snapshot, elapsed_ms, options);
}

EstimatedFrameState estimate_from_elapsed(const PersistedSnapshot& snapshot, double elapsed_ms,
                                          const EstimateOptions& options) {
    snapshot.validate();
    if (elapsed_ms < 0.0) throw ClockWentBackwardsError("negative off interval");
    if (elapsed_ms > options.max_elapsed_ms)
        throw StaleSnapshotError("off interval " + std::to_string(elapsed_ms) + " ms exceeds drift budget " +
                                 std::to_string(options.max_elapsed_ms) + " ms");
    const double interval = std::max(0.0, elapsed_ms + options.elapsed_correction_ms);

    EstimatedFrameState e;
    if (options.mode == EstimationMode::exact) {
        const auto [bits, residual] = split(interval, kBitMs);
        nav::BitstreamCursor c{snapshot.word_index, snapshot.bit_index, snapshot.tow};
        c.advance_bits(bits);
        e.bit_index = c.bit_index;
        e.word_index = c.word_index;
        e.tow = c.tow_current;
        e.residual_ms = residual;
    } else {
        // e.g. 209806.6875 ms = 349 x 600 ms + 20 x 20 ms + 6.6875 ms
        const auto [words, word_rem] = split(interval, kWordMs);
        const auto [bits, residual] = split(word_rem, kBitMs);
        const std::int64_t bit_sum = snapshot.bit_index + bits;
        const std::int64_t carry = bit_sum / nav::kBitsPerWord;
        e.bit_index = static_cast<int>(bit_sum % nav::kBitsPerWord);
        e.word_index = static_cast<int>((snapshot.word_index - 1 + words + carry) % nav::kWordsPerSubframe) + 1;
        e.tow = snapshot.tow + static_cast<int>(std::floor(interval / kSubframeMs));
        e.residual_ms = residual;
    }
    e.sync_tic = sync_tic_for(options.current_tic, e.word_index);
    return e;
}

double drift_budget(double rtc_ppm, double bit_margin_ms) {
    if (bit_margin_ms < 0.0) throw ValidationError("bit margin must be non-negative");
    rtc_ppm = std::abs(rtc_ppm);
    if (rtc_ppm == 0.0) return std::numeric_limits<double>::infinity();
    return bit_margin_ms * 1e6 / rtc_ppm;
}

double code_doppler_from_carrier(double carrier_doppler_hz) {
    return carrier_doppler_hz * (kCodeRateHz / kL1CarrierHz);
}

double code_phase_advance_chips(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s) {
    if (elapsed_s < 0.0) throw ValidationError("elapsed time must be non-negative");
    const double mean_doppler = 0.5 * (snapshot.carrier_doppler_hz + current_doppler_hz);
    return code_doppler_from_carrier(mean_doppler) * elapsed_s;
}

namespace {
double wrap_chips(double chips) {
    double w = std::fmod(chips, kCodeLengthChips);
    if (w < 0.0) w += kCodeLengthChips;
    if (w >= kCodeLengthChips) w -= kCodeLengthChips;
    return w;
}
}  // namespace

double compensate_code_phase(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s) {
    return wrap_chips(code_phase_advance_chips(snapshot, current_doppler_hz, elapsed_s));
}

double predicted_code_phase(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s) {
    return wrap_chips(snapshot.code_phase_chips + code_phase_advance_chips(snapshot, current_doppler_hz, elapsed_s));
}

double elapsed_correction_ms(const PersistedSnapshot& snapshot, double current_doppler_hz, double elapsed_s) {
    return code_phase_advance_chips(snapshot, current_doppler_hz, elapsed_s) / kCodeRateHz * 1000.0;
}

}  // namespace instanton::frame_sync
