#pragma once

#include <cstdint>
#include <vector>

#include "delayrec/filter.hpp"
#include "delayrec/sim.hpp"

namespace delayrec::sim {

struct BiasAtTime {
    long k = 0;            ///< measurement index; the error refers to x_{k-r}
    Vector mean;           ///< sample mean of eps_{k-r}
    Vector standard_error; ///< sample std / sqrt(trials)
    std::vector<int> flagged; ///< components with |mean| > 4 * standard_error
};

struct BiasReport {
    int trials = 0;
    int T = 0;
    std::uint64_t seed = 0;
    std::vector<BiasAtTime> samples;

    bool any_flagged() const;
};

struct MonteCarloSetup {
    InputSignals signals;
    int trials = 1000;
    int T = 200;
    std::uint64_t seed = 1;
    std::vector<long> sample_times; ///< each in [r+1, T]
    bool noise_on = true;
};

/// Noise seed of one trial: an independent substream of (seed, trial).
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Trials run in parallel (OpenMP); threads <= 0 uses the runtime default. The true initial state
/// equals the filter's initial estimate, so with noise switched off the bias is exactly zero.
BiasReport monte_carlo_bias(const filter::DelayedFilter& filter, const MonteCarloSetup& setup, int threads = 0);

/// Single-threaded reference with a one-pass accumulator.
BiasReport monte_carlo_bias_serial(const filter::DelayedFilter& filter, const MonteCarloSetup& setup);

/// Row i: eps_{k-r} of one trial at sample_times[i].
Matrix trial_errors(const filter::DelayedFilter& filter, const MonteCarloSetup& setup, int trial);

} // namespace delayrec::sim
