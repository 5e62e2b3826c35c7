#include "instanton/receiver.hpp"

#include <algorithm>

#include "instanton/errors.hpp"
#include "instanton/nav_message.hpp"

namespace instanton::receiver {

const char* to_string(LockStage stage) {
    switch (stage) {
        case LockStage::idle: return "idle";
        case LockStage::code_locked: return "code_locked";
        case LockStage::carrier_locked: return "carrier_locked";
        case LockStage::bit_locked: return "bit_locked";
        case LockStage::frame_locked: return "frame_locked";
    }
    return "?";
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::code_lock: return "code_lock";
        case EventKind::carrier_lock: return "carrier_lock";
        case EventKind::bit_lock: return "bit_lock";
        case EventKind::preamble_decoded: return "preamble_decoded";
        case EventKind::estimate_available: return "estimate_available";
    }
    return "?";
}

const char* to_string(FrameLockSource source) {
    switch (source) {
        case FrameLockSource::none: return "none";
        case FrameLockSource::preamble: return "preamble";
        case FrameLockSource::estimate: return "estimate";
    }
    return "?";
}

void LockLatencyConfig::validate() const {
    if (code_s < 0.0 || carrier_s < 0.0 || bit_s < 0.0) throw ValidationError("lock latencies must be >= 0");
}

LockState step(const LockState& state, const LockEvent& event) {
    LockStage required;
    LockStage next;
    switch (event.kind) {
        case EventKind::code_lock: required = LockStage::idle; next = LockStage::code_locked; break;
        case EventKind::carrier_lock: required = LockStage::code_locked; next = LockStage::carrier_locked; break;
        case EventKind::bit_lock: required = LockStage::carrier_locked; next = LockStage::bit_locked; break;
        case EventKind::preamble_decoded:
        case EventKind::estimate_available: required = LockStage::bit_locked; next = LockStage::frame_locked; break;
        default: throw ProtocolError("unknown event");
    }
    if (state.stage != required)
        throw ProtocolError(std::string(to_string(event.kind)) + " while " + to_string(state.stage));
    if (const auto last = state.time_of(state.stage); last && event.time_s < *last)
        throw ProtocolError(std::string(to_string(event.kind)) + " is earlier than the previous transition");

    LockState out = state;
    out.stage = next;
    out.entered_at[static_cast<std::size_t>(next)] = event.time_s;
    if (next == LockStage::frame_locked)
        out.source = event.kind == EventKind::preamble_decoded ? FrameLockSource::preamble : FrameLockSource::estimate;
    return out;
}

double hotstart_frame_lock_delay(int start_word_index, int start_bit_index) {
    if (start_word_index < 1 || start_word_index > nav::kWordsPerSubframe || start_bit_index < 0 ||
        start_bit_index >= nav::kBitsPerWord)
        throw ValidationError("start position out of range");
    constexpr double kTwoWords = 2 * nav::kWordPeriodS;  // preamble word + TOW word
    const int pos = (start_word_index - 1) * nav::kBitsPerWord + start_bit_index;
    if (pos == 0) return kTwoWords;
    const double linear = (9 * nav::kBitsPerWord - pos) * nav::kBitPeriodS + kTwoWords;
    return std::clamp(linear, kTwoWords, 6.0);
}

void Channel::apply(const LockEvent& event) {
    const LockStage from = state_.stage;
    state_ = step(state_, event);
    log_.push_back({event.time_s, from, state_.stage, event.kind});
}

double run_lock_sequence(Channel& channel, const LockLatencyConfig& latencies, double wake_s) {
    latencies.validate();
    const double code = wake_s + latencies.code_s;
    const double carrier = code + latencies.carrier_s;
    const double bit = carrier + latencies.bit_s;
    channel.apply({EventKind::code_lock, code});
    channel.apply({EventKind::carrier_lock, carrier});
    channel.apply({EventKind::bit_lock, bit});
    return bit;
}

}  // namespace instanton::receiver
