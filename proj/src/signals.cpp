#include "delayrec/signals.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "delayrec/error.hpp"

namespace delayrec::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t hash3(std::uint64_t seed, std::uint64_t channel, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ channel) ^ index);
}

double parse_number(std::string_view text, std::string_view field) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError, "bad signal " + std::string(field) + " '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

std::string_view to_string(SignalKind kind) {
    switch (kind) {
    case SignalKind::Sine: return "sine";
    case SignalKind::Sawtooth: return "sawtooth";
    case SignalKind::Step: return "step";
    case SignalKind::Constant: return "constant";
    case SignalKind::Prbs: return "prbs";
    case SignalKind::Gaussian: return "gaussian";
    }
    return "unknown";
}

double SignalSpec::value(long k, std::uint64_t seed, std::uint64_t channel) const {
    const double t = static_cast<double>(k);
    switch (kind) {
    case SignalKind::Sine:
        return amplitude * std::sin(2.0 * std::numbers::pi * (t / period + phase));
    case SignalKind::Sawtooth: {
        const double x = t / period + phase;
        return amplitude * (2.0 * (x - std::floor(x)) - 1.0);
    }
    case SignalKind::Step:
        return t >= period ? amplitude : 0.0;
    case SignalKind::Constant:
        return amplitude;
    case SignalKind::Prbs: {
        const auto hold = static_cast<std::uint64_t>(std::max(1.0, std::floor(period)));
        const auto block = static_cast<std::uint64_t>(k) / hold;
        return (hash3(seed, channel, block) & 1ULL) ? amplitude : -amplitude;
    }
    case SignalKind::Gaussian: {
        // Box-Muller on two hashed uniforms
        const std::uint64_t base = hash3(seed, channel ^ 0x6a09e667f3bcc908ULL, static_cast<std::uint64_t>(k));
        const double u1 = unit_uniform(base);
        const double u2 = unit_uniform(splitmix64(base));
        return amplitude * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    }
    return 0.0;
}

SignalSpec parse_signal(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(':', start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    if (parts.size() < 2 || parts.size() > 4) {
        throw Error(ErrorCode::ParseError, "signal must be kind:amplitude[:period[:phase]], got '" +
                                               std::string(text) + "'");
    }
    SignalSpec spec;
    const std::string_view kind = parts[0];
    if (kind == "sine" || kind == "sin") {
        spec.kind = SignalKind::Sine;
    } else if (kind == "sawtooth" || kind == "saw") {
        spec.kind = SignalKind::Sawtooth;
    } else if (kind == "step") {
        spec.kind = SignalKind::Step;
    } else if (kind == "constant" || kind == "const") {
        spec.kind = SignalKind::Constant;
    } else if (kind == "prbs") {
        spec.kind = SignalKind::Prbs;
    } else if (kind == "gaussian" || kind == "gauss") {
        spec.kind = SignalKind::Gaussian;
    } else {
        throw Error(ErrorCode::ParseError, "unknown signal kind '" + std::string(kind) + "'");
    }
    spec.amplitude = parse_number(parts[1], "amplitude");
    const bool periodic = spec.kind == SignalKind::Sine || spec.kind == SignalKind::Sawtooth;
    if (parts.size() >= 3) {
        spec.period = parse_number(parts[2], "period");
    } else if (periodic || spec.kind == SignalKind::Prbs) {
        throw Error(ErrorCode::ParseError, "signal '" + std::string(text) + "' needs a period");
    } else {
        spec.period = spec.kind == SignalKind::Step ? 0.0 : 1.0;
    }
    if (periodic && !(spec.period > 0.0)) {
        throw Error(ErrorCode::ParseError, "period must be positive");
    }
    if (parts.size() == 4) {
        spec.phase = parse_number(parts[3], "phase");
    }
    return spec;
}

std::string format_signal(const SignalSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(spec.kind) << ':' << spec.amplitude << ':' << spec.period;
    if (spec.phase != 0.0) {
        os << ':' << spec.phase;
    }
    return os.str();
}

} // namespace delayrec::sim
