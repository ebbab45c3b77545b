#include "delayrec/examples.hpp"

#include <cmath>
#include <sstream>

#include "delayrec/error.hpp"
#include "delayrec/gain.hpp"
#include "delayrec/markov.hpp"
#include "delayrec/zeros.hpp"

namespace delayrec::sim {

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
    const auto r = static_cast<Eigen::Index>(values.size());
    const auto c = static_cast<Eigen::Index>(values.begin()->size());
    Matrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : values) {
        Eigen::Index j = 0;
        for (double v : row) {
            m(i, j++) = v;
        }
        ++i;
    }
    return m;
}

SignalSpec sig(SignalKind kind, double amplitude, double period) {
    return SignalSpec{kind, amplitude, period, 0.0};
}

ReferenceExample make(std::string id, std::string description, const SystemModel& model, InputSignals signals,
                      int horizon, ExpectedFacts facts) {
    return ReferenceExample{std::move(id), std::move(description), model, default_noise(model), std::move(signals),
                            horizon, std::move(facts)};
}

SystemModel raw(const Matrix& a, const Matrix& h, const Matrix& c) {
    return validate_model(RawModel{a, h, c, std::nullopt, std::nullopt});
}

ReferenceExample compartmental25() {
    ExpectedFacts f;
    f.markov_ranks = {{0, 0}, {1, 2}};
    f.minimal_delay = 1;
    f.zeros = std::vector<Complex>{};
    f.verdict = filter::ConvergenceVerdict::DeadbeatUnbiased;
    f.noiseless_reconstruction = true;
    return make("compartmental-25", "6-compartment chain, inputs 1 and 6, outputs 2 and 5",
                compartmental_model(6, 0.1, 0.1, {1, 6}, {2, 5}),
                {{sig(SignalKind::Sawtooth, 1, 50), sig(SignalKind::Sine, 1, 40)}, {}}, 500, f);
}

ReferenceExample compartmental34() {
    ExpectedFacts f;
    f.markov_ranks = {{0, 0}, {1, 0}, {2, 2}};
    f.minimal_delay = 2;
    f.noiseless_reconstruction = true;
    return make("compartmental-34", "6-compartment chain, inputs 1 and 6, outputs 3 and 4",
                compartmental_model(6, 0.1, 0.1, {1, 6}, {3, 4}),
                {{sig(SignalKind::Sawtooth, 1, 50), sig(SignalKind::Sine, 1, 40)}, {}}, 500, f);
}

ReferenceExample minphase3() {
    ExpectedFacts f;
    f.markov_ranks = {{0, 0}, {1, 1}};
    f.minimal_delay = 1;
    f.zeros = std::vector<Complex>{{-0.2, 0.0}};
    f.error_eigenvalues = std::vector<Complex>{{0.0, 0.0}, {0.0, 0.0}, {-0.2, 0.0}};
    f.verdict = filter::ConvergenceVerdict::AsymptoticallyUnbiased;
    f.noiseless_reconstruction = true;
    f.error_overlap_x0 = Vector::Ones(3);
    return make("minphase3", "3-state single-input single-output system with a zero at -0.2",
                raw(rows({{1.1, -0.6, 1}, {0.5, 0, 1}, {0, 0.2, 0.3}}), rows({{2}, {0}, {0}}), rows({{0, 0.4, 1}})),
                {{sig(SignalKind::Sine, 1, 20)}, {}}, 100, f);
}

Matrix nonmin_a() {
    return rows({{0.0725, 1, 0.2072}, {-0.6158, 0.0725, 0.2339}, {0, 0, -0.1449}});
}

ReferenceExample nonminphase3() {
    ExpectedFacts f;
    f.markov_ranks = {{0, 0}, {1, 1}};
    f.minimal_delay = 1;
    f.zeros = std::vector<Complex>{{-1.0564, 0.0}};
    f.zero_tolerance = 1e-3;
    f.verdict = filter::ConvergenceVerdict::Divergent;
    f.error_growth_rate = 1.0564;
    return make("nonminphase3", "3-state single-input single-output system with a zero at -1.0564",
                raw(nonmin_a(), rows({{0}, {0}, {4}}), rows({{5.005, 0, 0}})), {{sig(SignalKind::Sine, 1, 20)}, {}},
                100, f);
}

ReferenceExample nonsquare3() {
    ExpectedFacts f;
    f.minimal_delay = 1;
    f.zeros = std::vector<Complex>{};
    f.verdict = filter::ConvergenceVerdict::AsymptoticallyUnbiased;
    return make("nonsquare3", "3-state system with one unknown input and two outputs",
                raw(nonmin_a(), rows({{0}, {0}, {4}}), rows({{5.005, 0, 0}, {0, 0.1, 0}})),
                {{sig(SignalKind::Sine, 1, 20)}, {}}, 200, f);
}

ReferenceExample nonsquare12() {
    const double diag[6] = {-0.95, 0.97, 0.95, 0.98, 0.95, 0.95};
    const double upper[6] = {-0.04, -0.06, -0.05, -0.04, -0.08, -0.06};
    const double lower[6] = {0.025, 0.05, 0.1, 0.05, 0.05, 0.1};
    Matrix a = Matrix::Zero(12, 12);
    for (int b = 0; b < 6; ++b) {
        a(2 * b, 2 * b) = diag[b];
        a(2 * b, 2 * b + 1) = upper[b];
        a(2 * b + 1, 2 * b) = lower[b];
        a(2 * b + 1, 2 * b + 1) = 1.0;
    }
    Matrix h = Matrix::Zero(12, 2);
    h(0, 0) = 0.4;
    h(2, 0) = 0.2;
    h(4, 0) = 0.2;
    h(6, 1) = 0.2;
    h(8, 1) = 0.2;
    h(10, 1) = 0.2;
    Matrix c = Matrix::Zero(3, 12);
    c.row(0) << 0.25, 2, 0, 0, 0, 0, 0.5, 2, 0, 0, 0, 0;
    c.row(1) << 0, 0, 0.5, 2, 0, 0, 0, 0, 0.5, 2, 0, 0;
    c.row(2) << 0, 0, 0, 0, 0.5, 1, 0, 0, 0, 0, 0.5, 1;

    ExpectedFacts f;
    f.minimal_delay = 1;
    f.zeros = std::vector<Complex>{{0.8, 0.0}, {0.8, 0.0}};
    f.zeros_in_error_eigenvalues = true;
    return make("nonsquare12", "12-state system with two unknown inputs, three outputs and a double zero at 0.8",
                raw(a, h, c), {{sig(SignalKind::Sine, 1, 30), sig(SignalKind::Sawtooth, 1, 40)}, {}}, 200, f);
}

ReferenceExample invertibility4() {
    ExpectedFacts f;
    f.no_feasible_delay = true;
    f.invertible_without_gain = true;
    return make("invertibility4", "4-state system that is delay-invertible but admits no unbiased gain",
                raw(rows({{0.5, -0.6, 0, 0}, {0.5, 0, 0, 0}, {0, 0, -0.5, -0.6}, {0, 0, 0.5, 0}}),
                    rows({{4, 0}, {0, 0}, {0, 4}, {0, 0}}),
                    rows({{0.25, 1.05, 0.25, 1.1}, {0.25, 1.15, 0.25, 1}, {0.25, 1.05, 0.25, 1.1}})),
                {{sig(SignalKind::Sine, 1, 20), sig(SignalKind::Sawtooth, 1, 30)}, {}}, 100, f);
}

std::string format(const std::vector<Complex>& values) {
    std::ostringstream os;
    os.precision(6);
    os << '{';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            os << ',';
        }
        os << values[i].real();
        if (values[i].imag() != 0.0) {
            os << (values[i].imag() > 0 ? "+" : "") << values[i].imag() << 'i';
        }
    }
    os << '}';
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

} // namespace

const std::vector<std::string>& reference_example_ids() {
    static const std::vector<std::string> ids{"compartmental-25", "compartmental-34", "minphase3", "nonminphase3",
                                              "nonsquare3", "nonsquare12", "invertibility4"};
    return ids;
}

ReferenceExample reference_example(std::string_view id) {
    if (id == "compartmental-25") return compartmental25();
    if (id == "compartmental-34") return compartmental34();
    if (id == "minphase3") return minphase3();
    if (id == "nonminphase3") return nonminphase3();
    if (id == "nonsquare3") return nonsquare3();
    if (id == "nonsquare12") return nonsquare12();
    if (id == "invertibility4") return invertibility4();
    throw Error(ErrorCode::UnknownExample, "unknown example '" + std::string(id) + "'");
}

gain::GainResult analysis_gain(const SystemModel& model, const NoiseSpec& noise, int r) {
    if (model.is_square()) {
        return gain::square_gain(model, r);
    }
    gain::SteadyState ss = gain::steady_state_gain(model, noise, r);
    if (ss.converged) {
        return ss.gain;
    }
    return gain::minvar_gain(model, noise, r, gain::CovarianceState::from(Matrix::Identity(model.n(), model.n())));
}

std::vector<FactOutcome> check_facts(const ReferenceExample& ex) {
    const ExpectedFacts& f = ex.facts;
    const SystemModel& model = ex.model;
    std::vector<FactOutcome> out;
    const markov::DelayAnalysis delays = markov::analyze_delays(model);

    for (const auto& [d, expected] : f.markov_ranks) {
        const int got = markov::markov_rank(markov::markov_parameter(model, d), markov::markov_scale(model, d));
        out.push_back({"rank(CA^" + std::to_string(d) + "H)=" + std::to_string(expected), got == expected,
                       "computed " + std::to_string(got)});
    }
    if (f.minimal_delay) {
        const bool ok = delays.minimal_delay == f.minimal_delay;
        out.push_back({"minimal_delay=" + std::to_string(*f.minimal_delay), ok,
                       delays.minimal_delay ? "computed " + std::to_string(*delays.minimal_delay) : "no feasible delay"});
    }
    if (f.no_feasible_delay) {
        out.push_back({"no feasible delay", delays.feasible_delays.empty(),
                       std::to_string(delays.feasible_delays.size()) + " feasible delays"});
    }
    if (f.invertible_without_gain) {
        const bool ok = delays.feasible_delays.empty() && !delays.invertible_delays.empty();
        out.push_back({"delay-invertible without an unbiased gain", ok,
                       std::to_string(delays.invertible_delays.size()) + " invertible delays"});
    }

    std::optional<zeros::ZeroReport> zero_report;
    if (f.zeros || f.zeros_in_error_eigenvalues) {
        zero_report = zeros::invariant_zeros(model);
    }
    if (f.zeros) {
        const std::vector<Complex> got = zero_report->expanded();
        const double dist = linalg::multiset_distance(got, *f.zeros);
        out.push_back({"zeros=" + format(*f.zeros), dist <= f.zero_tolerance, "computed " + format(got)});
    }

    const bool need_gain = f.error_eigenvalues || f.zeros_in_error_eigenvalues || f.verdict ||
                           f.noiseless_reconstruction || f.error_overlap_x0 || f.error_growth_rate;
    if (!need_gain) {
        return out;
    }
    if (!delays.minimal_delay) {
        out.push_back({"gain at minimal delay", false, "no feasible delay"});
        return out;
    }
    const int r = *delays.minimal_delay;
    const gain::GainResult g = analysis_gain(model, ex.noise, r);
    const Matrix phi = filter::error_dynamics_matrix(model, r, g.L);
    const std::vector<Complex> eig = linalg::structured_eigenvalues(phi);
    const std::string phi_name = "eig(A-LCA^" + std::to_string(r + 1) + ")";

    if (f.error_eigenvalues) {
        const double dist = linalg::multiset_distance(eig, *f.error_eigenvalues);
        out.push_back({phi_name + "=" + format(*f.error_eigenvalues), dist <= f.eigen_tolerance,
                       "computed " + format(eig)});
    }
    if (f.zeros_in_error_eigenvalues) {
        std::vector<Complex> rest;
        const std::vector<Complex> z = zero_report->expanded();
        const double dist = linalg::match_into(z, eig, &rest);
        bool extra = false;
        for (const Complex& c : rest) {
            bool is_zero = false;
            for (const Complex& zz : z) {
                is_zero = is_zero || std::abs(c - zz) <= f.eigen_tolerance;
            }
            extra = extra || !is_zero;
        }
        out.push_back({"zeros subset of " + phi_name, z.size() > 0 && dist <= f.eigen_tolerance && extra,
                       "match distance " + sci(dist) + ", remaining " + format(rest)});
    }
    if (f.verdict) {
        const auto got = filter::classify_convergence(model, r, g.L);
        out.push_back({"verdict=" + std::string(filter::to_string(*f.verdict)), got == *f.verdict,
                       "computed " + std::string(filter::to_string(got)) + ", spectral radius " +
                           sci(linalg::spectral_radius(phi))});
    }

    filter::FilterConfig config;
    config.delay = r;
    config.gain_mode = filter::GainMode::FixedUserSupplied;
    config.user_gain = g.L;
    const filter::DelayedFilter flt(model, ex.noise, config);

    if (f.noiseless_reconstruction) {
        const Trajectory traj = simulate(model, std::nullopt, ex.signals, ex.horizon, 1, Vector::Zero(model.n()));
        const ExperimentResult res = run_experiment(flt, traj);
        out.push_back({"noiseless input RMS<=1e-8", res.stats.input_rms <= 1e-8,
                       "input RMS " + sci(res.stats.input_rms)});
    }
    if (f.error_overlap_x0) {
        const Trajectory traj = simulate(model, std::nullopt, ex.signals, ex.horizon, 1, *f.error_overlap_x0);
        const ExperimentResult res = run_experiment(flt, traj);
        // First emitted estimate is x^_{1|r+1}; its error follows from eps_0 = x_0 - x^_0.
        const std::vector<Vector> pred =
            filter::predicted_error_sequence(model, r, g.L, *f.error_overlap_x0, static_cast<int>(res.stats.k.size()));
        double worst = 0.0;
        for (std::size_t i = 0; i < res.stats.k.size(); ++i) {
            const Vector actual = res.stats.state_error.row(static_cast<Eigen::Index>(i)).transpose();
            worst = std::max(worst, (actual - pred[i + 1]).lpNorm<Eigen::Infinity>());
        }
        out.push_back({"noiseless error equals predicted sequence", worst <= 1e-8, "max deviation " + sci(worst)});
    }
    if (f.error_growth_rate) {
        const Trajectory traj = simulate(model, std::nullopt, ex.signals, 70, 1, Vector::Ones(model.n()));
        const ExperimentResult res = run_experiment(flt, traj);
        const double slope = log_error_slope(res.stats, 20, 60);
        const double target = std::log(*f.error_growth_rate);
        const bool ok = std::abs(slope - target) <= 0.05 * std::abs(target);
        out.push_back({"log-slope of |eps| = ln(" + std::to_string(*f.error_growth_rate) + ")", ok,
                       "slope " + sci(slope) + " vs " + sci(target)});
    }
    return out;
}

} // namespace delayrec::sim
