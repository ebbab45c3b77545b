#include <gtest/gtest.h>

#include "delayrec/error.hpp"
#include "delayrec/examples.hpp"
#include "delayrec/gain.hpp"
#include "delayrec/montecarlo.hpp"

using namespace delayrec;

namespace {

filter::DelayedFilter compartmental_filter() {
    const auto ex = sim::reference_example("compartmental-25");
    filter::FilterConfig c;
    c.delay = 1;
    return filter::DelayedFilter(ex.model, ex.noise, c);
}

sim::MonteCarloSetup compartmental_setup() {
    sim::MonteCarloSetup s;
    s.signals = sim::reference_example("compartmental-25").signals;
    s.trials = 1000;
    s.T = 200;
    s.seed = 1;
    s.sample_times = {50, 100, 200};
    return s;
}

} // namespace

TEST(MonteCarlo, UnbiasedGainIsNotFlagged) {
    const auto report = sim::monte_carlo_bias(compartmental_filter(), compartmental_setup());
    ASSERT_EQ(report.samples.size(), 3u);
    EXPECT_FALSE(report.any_flagged());
    for (const auto& s : report.samples) {
        EXPECT_EQ(s.mean.size(), 6);
        EXPECT_TRUE((s.standard_error.array() > 0.0).all());
    }
}

TEST(MonteCarlo, ConstraintViolatingGainIsFlagged) {
    // Halving the unbiased gain leaves H e_k in the error; with a persistent input the mean error
    // is far outside the sampling band.
    const auto ex = sim::reference_example("compartmental-25");
    filter::FilterConfig c;
    c.delay = 1;
    c.gain_mode = filter::GainMode::FixedUserSupplied;
    c.user_gain = 0.5 * gain::square_gain(ex.model, 1).L;
    const filter::DelayedFilter biased(ex.model, ex.noise, c);
    auto setup = compartmental_setup();
    setup.trials = 200;
    setup.signals.unknown = {{sim::SignalKind::Constant, 1.0, 1.0, 0.0}, {sim::SignalKind::Constant, 1.0, 1.0, 0.0}};
    EXPECT_TRUE(sim::monte_carlo_bias(biased, setup).any_flagged());
}

TEST(MonteCarlo, NoiseOffGivesExactZero) {
    auto setup = compartmental_setup();
    setup.trials = 100;
    setup.noise_on = false;
    setup.signals.unknown = {{sim::SignalKind::Constant, 0.0, 1.0, 0.0}, {sim::SignalKind::Constant, 0.0, 1.0, 0.0}};
    const auto report = sim::monte_carlo_bias(compartmental_filter(), setup);
    for (const auto& s : report.samples) {
        EXPECT_EQ(s.mean.cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(s.standard_error.cwiseAbs().maxCoeff(), 0.0);
    }
    EXPECT_FALSE(report.any_flagged());
}

TEST(MonteCarlo, NoiseOffWithInputsIsRoundoffOnly) {
    // Identical trials give a zero standard error, so only the size of the mean is meaningful here.
    auto setup = compartmental_setup();
    setup.trials = 100;
    setup.noise_on = false;
    const auto report = sim::monte_carlo_bias(compartmental_filter(), setup);
    for (const auto& s : report.samples) {
        EXPECT_LE(s.mean.cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(MonteCarlo, SerialAndParallelAgree) {
    auto setup = compartmental_setup();
    setup.trials = 300;
    const auto f = compartmental_filter();
    const auto par = sim::monte_carlo_bias(f, setup);
    const auto ser = sim::monte_carlo_bias_serial(f, setup);
    ASSERT_EQ(par.samples.size(), ser.samples.size());
    for (std::size_t i = 0; i < par.samples.size(); ++i) {
        EXPECT_LT((par.samples[i].mean - ser.samples[i].mean).norm(), 1e-14);
        EXPECT_LT((par.samples[i].standard_error - ser.samples[i].standard_error).norm(),
                  1e-10 * ser.samples[i].standard_error.norm());
    }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResult) {
    auto setup = compartmental_setup();
    setup.trials = 150;
    const auto f = compartmental_filter();
    const auto one = sim::monte_carlo_bias(f, setup, 1);
    const auto four = sim::monte_carlo_bias(f, setup, 4);
    for (std::size_t i = 0; i < one.samples.size(); ++i) {
        EXPECT_EQ(one.samples[i].mean, four.samples[i].mean);
        EXPECT_EQ(one.samples[i].standard_error, four.samples[i].standard_error);
    }
}

TEST(MonteCarlo, TrialsAreIndependentOfEachOther) {
    auto setup = compartmental_setup();
    const auto f = compartmental_filter();
    EXPECT_EQ(sim::trial_errors(f, setup, 7), sim::trial_errors(f, setup, 7));
    EXPECT_NE(sim::trial_errors(f, setup, 7), sim::trial_errors(f, setup, 8));
    EXPECT_NE(sim::trial_seed(1, 0), sim::trial_seed(2, 0));
}

TEST(MonteCarlo, SetupValidation) {
    const auto f = compartmental_filter();
    auto setup = compartmental_setup();
    setup.trials = 99;
    try {
        sim::monte_carlo_bias(f, setup);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PreconditionViolated);
    }
    setup = compartmental_setup();
    setup.sample_times = {1};
    EXPECT_THROW(sim::monte_carlo_bias(f, setup), Error);
    setup.sample_times = {201};
    EXPECT_THROW(sim::monte_carlo_bias(f, setup), Error);
    setup.sample_times = {};
    EXPECT_THROW(sim::monte_carlo_bias(f, setup), Error);
}
