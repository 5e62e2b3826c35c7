#pragma once

// Channel lock progression: code -> carrier -> bit -> frame. Frame lock is
// reached either by decoding a preamble + TOW or by accepting a frame-sync
// estimate.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace instanton::receiver {

enum class LockStage { idle = 0, code_locked, carrier_locked, bit_locked, frame_locked };
enum class EventKind { code_lock, carrier_lock, bit_lock, preamble_decoded, estimate_available };
enum class FrameLockSource { none, preamble, estimate };

const char* to_string(LockStage stage);
const char* to_string(EventKind kind);
const char* to_string(FrameLockSource source);

struct LockEvent {
    EventKind kind = EventKind::code_lock;
    double time_s = 0.0;  // receiver seconds
};

struct LockState {
    LockStage stage = LockStage::idle;
    std::array<std::optional<double>, 5> entered_at{};  // indexed by LockStage
    FrameLockSource source = FrameLockSource::none;

    std::optional<double> time_of(LockStage s) const { return entered_at[static_cast<std::size_t>(s)]; }
    friend bool operator==(const LockState&, const LockState&) = default;
};

struct LockLatencyConfig {
    double code_s = 0.5;
    double carrier_s = 0.3;
    double bit_s = 0.4;

    double total() const { return code_s + carrier_s + bit_s; }
    void validate() const;
};

struct Transition {
    double time_s = 0.0;
    LockStage from = LockStage::idle;
    LockStage to = LockStage::idle;
    EventKind cause = EventKind::code_lock;
    friend bool operator==(const Transition&, const Transition&) = default;
};

// Throws ProtocolError for an event that does not follow the stage order or
// that goes back in time.
LockState step(const LockState& state, const LockEvent& event);

// Time from bit lock until the preamble word and the TOW word have both been
// received, for a receiver whose first bit after bit lock is
// (start_word_index, start_bit_index).
//
// Starting exactly on word 1 bit 0 costs the two words, 1.2 s. Otherwise the
// receiver waits for the next subframe and the delay falls linearly with the
// start position, 6.0 s at word 2 bit 0 down to 1.2 s at word 10 bit 0. The
// rest of word 1 is clamped to 6.0 s and the rest of word 10 to 1.2 s, which
// keeps every start inside [1.2, 6.0] s.
double hotstart_frame_lock_delay(int start_word_index, int start_bit_index);

// One tracking channel: its lock state and the transitions it went through.
class Channel {
public:
    explicit Channel(int sat_id) : sat_id_(sat_id) {}

    void apply(const LockEvent& event);

    int sat_id() const { return sat_id_; }
    const LockState& state() const { return state_; }
    const std::vector<Transition>& transitions() const { return log_; }

private:
    int sat_id_;
    LockState state_;
    std::vector<Transition> log_;
};

// Replays code/carrier/bit lock at the configured latencies from `wake_s`.
// Returns the bit-lock time.
double run_lock_sequence(Channel& channel, const LockLatencyConfig& latencies, double wake_s);

}  // namespace instanton::receiver
