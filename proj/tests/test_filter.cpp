#include <gtest/gtest.h>

#include <cmath>

#include "delayrec/error.hpp"
#include "delayrec/examples.hpp"
#include "delayrec/filter.hpp"
#include "delayrec/gain.hpp"
#include "delayrec/markov.hpp"
#include "delayrec/sim.hpp"
#include "support/random_systems.hpp"
#include "test_helpers.hpp"

using namespace delayrec;
using delayrec::testkit::mat;

namespace {

SystemModel comp25() { return sim::compartmental_model(6, 0.1, 0.1, {1, 6}, {2, 5}); }

filter::FilterConfig fixed(int r, const Matrix& L) {
    filter::FilterConfig c;
    c.delay = r;
    c.gain_mode = filter::GainMode::FixedUserSupplied;
    c.user_gain = L;
    return c;
}

/// Brute-force E1 simulation written out by hand.
struct E1Run {
    std::vector<Vector> x;
    std::vector<double> y, e;
};

E1Run e1_truth(int T, const Vector& x0) {
    const Matrix a = mat({{0.5, 0}, {1, 0.5}});
    E1Run run;
    Vector x = x0;
    for (int k = 0; k <= T; ++k) {
        run.x.push_back(x);
        run.e.push_back(std::sin(0.1 * k));
        run.y.push_back(x(1));
        x = a * x + Vector::Unit(2, 0) * run.e.back();
    }
    return run;
}

} // namespace

TEST(FilterConstruction, InfeasibleDelay) {
    const SystemModel m = comp25();
    filter::FilterConfig c;
    c.delay = 0;
    try {
        filter::DelayedFilter f(m, default_noise(m), c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InfeasibleDelay);
    }
    c.delay = 6;
    EXPECT_THROW(filter::DelayedFilter(m, default_noise(m), c), Error);
}

TEST(FilterConstruction, ValidatesConfiguration) {
    const SystemModel m = comp25();
    filter::FilterConfig c;
    c.delay = 1;
    c.initial_estimate = Vector::Zero(3);
    EXPECT_THROW(filter::DelayedFilter(m, default_noise(m), c), Error);
    c.initial_estimate.reset();
    c.initial_covariance = -Matrix::Identity(6, 6);
    EXPECT_THROW(filter::DelayedFilter(m, default_noise(m), c), Error);
    c.initial_covariance.reset();
    c.gain_mode = filter::GainMode::FixedUserSupplied;
    EXPECT_THROW(filter::DelayedFilter(m, default_noise(m), c), Error);
}

TEST(FilterTimeline, FirstEmissionAtRPlusOne) {
    for (int r : {1}) {
        const SystemModel m = comp25();
        filter::FilterConfig c;
        c.delay = r;
        const filter::DelayedFilter f(m, default_noise(m), c);
        const filter::FilterState s0 = filter::init_filter(f);
        EXPECT_EQ(s0.k, 0);
        auto st = s0;
        long first = -1;
        for (int k = 0; k < 5 && first < 0; ++k) {
            auto res = f.step(st, Vector::Zero(2));
            if (res.output) {
                first = res.output->k;
            }
            st = res.state;
        }
        EXPECT_EQ(first, r + 1);
    }
    // r = 0: first output at k = 1.
    testkit::Rng rng(1);
    auto m0 = testkit::relative_degree_system(rng, 3, 1, 1, 0);
    ASSERT_TRUE(m0);
    filter::FilterConfig c;
    c.delay = 0;
    const filter::DelayedFilter f(*m0, default_noise(*m0), c);
    auto s = f.initial_state();
    EXPECT_FALSE(f.step(s, Vector::Zero(1)).output);
    s = f.step(s, Vector::Zero(1)).state;
    EXPECT_EQ(f.step(s, Vector::Zero(1)).output->k, 1);
}

TEST(FilterStep, DimensionMismatch) {
    const SystemModel m = comp25();
    filter::FilterConfig c;
    c.delay = 1;
    const filter::DelayedFilter f(m, default_noise(m), c);
    EXPECT_THROW(f.step(f.initial_state(), Vector::Zero(3)), Error);
    EXPECT_THROW(f.step(f.initial_state(), Vector::Zero(2), Vector::Zero(1)), Error);
}

TEST(FilterStep, E1DeadbeatWithExactSeed) {
    const SystemModel m = testkit::e1_model();
    const Vector x0 = mat({{0.3}, {-0.7}});
    const E1Run truth = e1_truth(60, x0);
    filter::FilterConfig c;
    c.delay = 1;
    c.initial_estimate = x0;
    const filter::DelayedFilter f(m, default_noise(m), c);
    auto st = f.initial_state();
    int emitted = 0;
    for (int k = 0; k <= 60; ++k) {
        auto res = f.step(st, Vector::Constant(1, truth.y[k]));
        st = res.state;
        if (!res.output) {
            continue;
        }
        ++emitted;
        EXPECT_NEAR((*res.output->input_estimate)(0), truth.e[k - 2], 1e-10) << k;
        EXPECT_LT((res.output->state_estimate - truth.x[k - 1]).norm(), 1e-10) << k;
    }
    EXPECT_EQ(emitted, 59);
}

TEST(FilterStep, E1WrongSeedSettlesInTwoSteps) {
    const SystemModel m = testkit::e1_model();
    const E1Run truth = e1_truth(30, Vector::Ones(2));
    filter::FilterConfig c;
    c.delay = 1;
    const filter::DelayedFilter f(m, default_noise(m), c);
    auto st = f.initial_state();
    for (int k = 0; k <= 30; ++k) {
        auto res = f.step(st, Vector::Constant(1, truth.y[k]));
        st = res.state;
        if (res.output && k >= 4) {
            EXPECT_LT((res.output->state_estimate - truth.x[k - 1]).norm(), 1e-12);
        }
    }
}

TEST(FilterStep, CompartmentalWrongSeedConverges) {
    const SystemModel m = comp25();
    sim::InputSignals sig{{{sim::SignalKind::Sawtooth, 1, 50, 0}, {sim::SignalKind::Sine, 1, 40, 0}}, {}};
    const auto traj = sim::simulate(m, std::nullopt, sig, 400, 1, Vector::Ones(6));
    filter::FilterConfig c;
    c.delay = 1;
    const auto res = sim::run_experiment(m, default_noise(m), c, traj);
    const auto& err = res.stats.input_error;
    EXPECT_GT(err.row(0).norm(), 1e-3);
    EXPECT_LT(err.bottomRows(50).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FilterStep, NonMinPhaseWrongSeedGrows) {
    const auto ex = sim::reference_example("nonminphase3");
    const auto traj = sim::simulate(ex.model, std::nullopt, ex.signals, 200, 1, Vector::Ones(3));
    filter::FilterConfig c;
    c.delay = 1;
    const auto res = sim::run_experiment(ex.model, ex.noise, c, traj);
    const double early = res.stats.state_error.row(10).norm();
    const double late = res.stats.state_error.row(190).norm();
    EXPECT_GT(late, 1e3 * early);
}

TEST(ErrorDynamics, Examples) {
    const auto mp = sim::reference_example("minphase3");
    const auto eig1 = linalg::structured_eigenvalues(
        filter::error_dynamics_matrix(mp.model, 1, gain::square_gain(mp.model, 1).L));
    EXPECT_LT(linalg::multiset_distance(eig1, testkit::reals({0, 0, -0.2})), 1e-6);
    const auto nm = sim::reference_example("nonminphase3");
    const auto eig2 = linalg::structured_eigenvalues(
        filter::error_dynamics_matrix(nm.model, 1, gain::square_gain(nm.model, 1).L));
    EXPECT_LT(linalg::multiset_distance(eig2, testkit::reals({-1.0564, 0, 0})), 1e-3);
}

TEST(ClassifyConvergence, Examples) {
    const SystemModel e1 = testkit::e1_model();
    EXPECT_EQ(filter::classify_convergence(e1, 1, gain::square_gain(e1, 1).L),
              filter::ConvergenceVerdict::DeadbeatUnbiased);
    const auto mp = sim::reference_example("minphase3");
    EXPECT_EQ(filter::classify_convergence(mp.model, 1, gain::square_gain(mp.model, 1).L),
              filter::ConvergenceVerdict::AsymptoticallyUnbiased);
    const auto nm = sim::reference_example("nonminphase3");
    EXPECT_EQ(filter::classify_convergence(nm.model, 1, gain::square_gain(nm.model, 1).L),
              filter::ConvergenceVerdict::Divergent);
    EXPECT_THROW(filter::classify_convergence(e1, 1, Matrix::Zero(2, 1)), Error);
}

TEST(ClassifyConvergence, ZeroOnUnitCircleIsPersistent) {
    // SISO with relative degree 1 and a zero at 1: A companion-like, numerator s - 1.
    const SystemModel m = testkit::make_model(mat({{0, 1}, {-0.1, 0.2}}), mat({{0}, {1}}), mat({{-1, 1}}));
    const int r = *markov::minimal_delay(m);
    EXPECT_EQ(filter::classify_convergence(m, r, gain::square_gain(m, r).L),
              filter::ConvergenceVerdict::PersistentError);
}

TEST(PredictedErrorSequence, Basics) {
    const SystemModel e1 = testkit::e1_model();
    const Matrix L = gain::square_gain(e1, 1).L;
    for (const auto& v : filter::predicted_error_sequence(e1, 1, L, Vector::Zero(2), 5)) {
        EXPECT_EQ(v.norm(), 0.0);
    }
    const auto seq = filter::predicted_error_sequence(e1, 1, L, Vector::Ones(2), 5);
    ASSERT_EQ(seq.size(), 6u);
    EXPECT_EQ(seq[0], Vector::Ones(2));
    for (int j = 2; j <= 5; ++j) {
        EXPECT_LT(seq[static_cast<std::size_t>(j)].norm(), 1e-15);
    }
}

TEST(PredictedErrorSequence, MinPhaseOverlap) {
    const auto ex = sim::reference_example("minphase3");
    const Matrix L = gain::square_gain(ex.model, 1).L;
    const Vector eps0 = mat({{1}, {-2}, {0.5}});
    const auto traj = sim::simulate(ex.model, std::nullopt, ex.signals, 80, 1, eps0);
    const auto res = sim::run_experiment(ex.model, ex.noise, fixed(1, L), traj);
    const auto pred = filter::predicted_error_sequence(ex.model, 1, L, eps0, 80);
    for (std::size_t i = 0; i < res.stats.k.size(); ++i) {
        const Vector actual = res.stats.state_error.row(static_cast<Eigen::Index>(i)).transpose();
        EXPECT_LT((actual - pred[i + 1]).norm(), 1e-8);
    }
}

TEST(FilterProperties, InnovationIdentityInSquareMode) {
    const SystemModel m = comp25();
    sim::InputSignals sig{{{sim::SignalKind::Prbs, 1, 5, 0}, {sim::SignalKind::Gaussian, 1, 1, 0}}, {}};
    const auto traj = sim::simulate(m, default_noise(m), sig, 100, 3, Vector::Ones(6));
    filter::FilterConfig c;
    c.delay = 1;
    const filter::DelayedFilter f(m, default_noise(m), c);
    const auto rows = sim::run_filter(f, traj.y, traj.u);
    const Matrix L = gain::square_gain(m, 1).L;
    for (const auto& row : rows) {
        if (row.output) {
            EXPECT_LT((m.H() * *row.output->input_estimate - L * row.output->innovation).norm(), 1e-10);
        }
    }
}

TEST(FilterProperties, KnownInputInvariance) {
    const auto base = sim::reference_example("minphase3").model;
    testkit::Rng rng(2);
    const Matrix b = testkit::gaussian(rng, 3, 2);
    const Matrix d = testkit::gaussian(rng, 1, 2);
    const SystemModel with_u = validate_model(RawModel{base.A(), base.H(), base.C(), b, d});
    const NoiseSpec noise = default_noise(base);
    sim::InputSignals sig{{{sim::SignalKind::Sine, 1, 17, 0}},
                          {{sim::SignalKind::Sawtooth, 2, 13, 0}, {sim::SignalKind::Step, 1, 10, 0}}};
    const Vector x0 = mat({{0.2}, {0.1}, {-0.3}});
    const auto traj = sim::simulate(with_u, std::nullopt, sig, 60, 1, x0);

    // Response to u alone from the zero state.
    Matrix xu = Matrix::Zero(61, 3);
    Matrix y_free = traj.y;
    Vector x = Vector::Zero(3);
    for (int k = 0; k <= 60; ++k) {
        xu.row(k) = x.transpose();
        const Vector uk = traj.u.row(k).transpose();
        y_free.row(k) -= (base.C() * x + d * uk).transpose();
        x = base.A() * x + b * uk;
    }
    filter::FilterConfig c;
    c.delay = 1;
    const auto rows_u = sim::run_filter(filter::DelayedFilter(with_u, noise, c), traj.y, traj.u);
    const auto rows_0 = sim::run_filter(filter::DelayedFilter(base, noise, c), y_free, Matrix(61, 0));
    for (std::size_t k = 2; k < rows_u.size(); ++k) {
        const auto& a = *rows_u[k].output;
        const auto& z = *rows_0[k].output;
        EXPECT_LT((a.state_estimate - xu.row(static_cast<Eigen::Index>(k) - 1).transpose() - z.state_estimate).norm(),
                  1e-10);
        EXPECT_LT((*a.input_estimate - *z.input_estimate).norm(), 1e-10);
    }
}

TEST(FilterProperties, FrozenGainMatchesUnfrozen) {
    const auto ex = sim::reference_example("nonsquare3");
    const auto traj = sim::simulate(ex.model, ex.noise, ex.signals, 300, 5, Vector::Zero(3));
    filter::FilterConfig c;
    c.delay = 1;
    c.gain_mode = filter::GainMode::TimeVaryingMinVar;
    const auto frozen = sim::run_experiment(ex.model, ex.noise, c, traj);
    c.freeze_converged_gain = false;
    const auto live = sim::run_experiment(ex.model, ex.noise, c, traj);
    EXPECT_TRUE(frozen.final_state.gain_frozen);
    EXPECT_FALSE(live.final_state.gain_frozen);
    EXPECT_LT((frozen.stats.state_error - live.stats.state_error).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FilterProperties, NoiselessExactnessForDeadbeatSystems) {
    testkit::Rng rng(3);
    int checked = 0;
    const std::vector<sim::SignalKind> kinds{sim::SignalKind::Sine,     sim::SignalKind::Sawtooth,
                                             sim::SignalKind::Step,     sim::SignalKind::Constant,
                                             sim::SignalKind::Prbs,     sim::SignalKind::Gaussian};
    // Full relative-degree SISO systems have no zeros, so the square gain is deadbeat.
    for (int i = 0; checked < 24 && i < 400; ++i) {
        const int n = testkit::uniform_int(rng, 2, 6);
        auto m = testkit::relative_degree_system(rng, n, 1, 1, n - 1);
        if (!m) {
            continue;
        }
        const int r = n - 1;
        const Matrix L = gain::square_gain(*m, r).L;
        if (filter::classify_convergence(*m, r, L) != filter::ConvergenceVerdict::DeadbeatUnbiased) {
            continue;
        }
        const sim::SignalSpec spec{kinds[static_cast<std::size_t>(checked) % kinds.size()], 1.0, 7.0, 0.0};
        const Vector x0 = testkit::gaussian(rng, n, 1);
        const auto traj = sim::simulate(*m, std::nullopt, {{spec}, {}}, 60, 4, x0);
        filter::FilterConfig c = fixed(r, L);
        c.initial_estimate = x0;
        const auto res = sim::run_experiment(*m, default_noise(*m), c, traj);
        EXPECT_LE(res.stats.input_max_abs, 1e-8) << sim::format_signal(spec);
        EXPECT_LE(res.stats.state_max_abs, 1e-8) << sim::format_signal(spec);
        ++checked;
    }
    EXPECT_GE(checked, 24);
}

TEST(FilterProperties, NonSquareInputReconstructionAboveMinimalDelay) {
    // nonsquare3 is also feasible at r = 2, where C A H != 0 enters the innovation.
    const auto ex = sim::reference_example("nonsquare3");
    const auto traj = sim::simulate(ex.model, std::nullopt, ex.signals, 100, 1, Vector::Zero(3));
    for (int r : {1, 2}) {
        filter::FilterConfig c;
        c.delay = r;
        c.gain_mode = filter::GainMode::TimeVaryingMinVar;
        const auto res = sim::run_experiment(ex.model, ex.noise, c, traj);
        EXPECT_LE(res.stats.input_max_abs, 1e-8) << r;
    }
}
