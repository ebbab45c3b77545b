#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace delayrec::sim {

enum class SignalKind { Sine, Sawtooth, Step, Constant, Prbs, Gaussian };

std::string_view to_string(SignalKind kind);

/// One scalar channel. `period` is the waveform period in samples (sine, sawtooth), the switch-on
/// time (step) or the hold length (prbs); `phase` is in cycles for periodic kinds.
struct SignalSpec {
    SignalKind kind = SignalKind::Constant;
    double amplitude = 0.0;
    double period = 1.0;
    double phase = 0.0;

    /// Deterministic in (spec, k, seed, channel).
    double value(long k, std::uint64_t seed = 0, std::uint64_t channel = 0) const;
};

/// Parses `kind:amplitude:period[:phase]`, e.g. "sawtooth:1:50".
SignalSpec parse_signal(std::string_view text);

std::string format_signal(const SignalSpec& spec);

} // namespace delayrec::sim
