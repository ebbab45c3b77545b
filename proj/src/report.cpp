#include "delayrec/report.hpp"

#include <cmath>

#include "delayrec/error.hpp"
#include "delayrec/linalg.hpp"

namespace delayrec::report {

namespace {

json pairs(const std::vector<std::pair<int, int>>& values, const char* a, const char* b) {
    json out = json::array();
    for (const auto& [x, y] : values) {
        out.push_back({{a, x}, {b, y}});
    }
    return out;
}

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

json complex_to_json(const Complex& z) {
    return json::array({z.real(), z.imag()});
}

json to_json(const markov::DelayAnalysis& a) {
    json out;
    out["markov_ranks"] = pairs(a.markov_ranks, "d", "rank");
    out["s_ranks"] = pairs(a.s_ranks, "r", "rank");
    out["feasible_delays"] = a.feasible_delays;
    out["minimal_delay"] = a.minimal_delay ? json(*a.minimal_delay) : json(nullptr);
    out["invertible_delays"] = a.invertible_delays;
    out["conjecture_violated"] = a.conjecture_violated;
    return out;
}

json to_json(const zeros::ZeroReport& z) {
    json list = json::array();
    for (const auto& zero : z.zeros) {
        list.push_back({{"value", complex_to_json(zero.value)}, {"multiplicity", zero.multiplicity}});
    }
    return {{"zeros", list},
            {"normal_rank", z.normal_rank},
            {"classification", std::string(zeros::to_string(z.classification))}};
}

json to_json(const sim::ErrorStats& s) {
    return {{"steps", s.k.size()},
            {"state_rms", finite_or_null(s.state_rms)},
            {"input_rms", finite_or_null(s.input_rms)},
            {"state_max_abs", finite_or_null(s.state_max_abs)},
            {"input_max_abs", finite_or_null(s.input_max_abs)}};
}

json to_json(const sim::BiasReport& b) {
    json samples = json::array();
    for (const auto& s : b.samples) {
        samples.push_back({{"k", s.k},
                           {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                           {"standard_error", std::vector<double>(s.standard_error.data(),
                                                                  s.standard_error.data() + s.standard_error.size())},
                           {"flagged", s.flagged}});
    }
    return {{"trials", b.trials}, {"T", b.T}, {"seed", b.seed}, {"samples", samples}, {"any_flagged", b.any_flagged()}};
}

json to_json(const std::vector<sim::FactOutcome>& facts) {
    json out = json::array();
    for (const auto& f : facts) {
        out.push_back({{"fact", f.fact}, {"passed", f.passed}, {"detail", f.detail}});
    }
    return out;
}

json gain_summary(const SystemModel& model, int r, const gain::GainResult& g) {
    const Matrix phi = filter::error_dynamics_matrix(model, r, g.L);
    json eig = json::array();
    for (const Complex& z : linalg::structured_eigenvalues(phi)) {
        eig.push_back(complex_to_json(z));
    }
    return {{"method", std::string(gain::to_string(g.method))},
            {"delay", r},
            {"residual", g.residual},
            {"residual_tolerance", gain::residual_tolerance(model)},
            {"spectral_radius", linalg::spectral_radius(phi)},
            {"error_eigenvalues", eig},
            {"L", io::matrix_to_json(g.L)}};
}

json analysis_report(const SystemModel& model, const NoiseSpec& noise) {
    const markov::DelayAnalysis delays = markov::analyze_delays(model);
    json out;
    out["dimensions"] = {{"n", model.n()}, {"m", model.m()}, {"l", model.l()}, {"p", model.p()}};
    out["delay_analysis"] = to_json(delays);
    try {
        out["invariant_zeros"] = to_json(zeros::invariant_zeros(model));
    } catch (const Error& ex) {
        out["invariant_zeros"] = {{"error", ex.what()}};
    }
    if (delays.minimal_delay) {
        const int r = *delays.minimal_delay;
        const gain::GainResult g = sim::analysis_gain(model, noise, r);
        out["gain"] = gain_summary(model, r, g);
        out["verdict"] = std::string(filter::to_string(filter::classify_convergence(model, r, g.L)));
    } else {
        out["gain"] = nullptr;
        out["verdict"] = nullptr;
    }
    return out;
}

json envelope(const std::string& command, json body) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["command"] = command;
    for (auto& item : body.items()) {
        out[item.key()] = item.value();
    }
    return out;
}

} // namespace delayrec::report
