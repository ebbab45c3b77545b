#include "delayrec/montecarlo.hpp"

#include <cmath>
#include <exception>

#include <omp.h>

#include "delayrec/error.hpp"

namespace delayrec::sim {

namespace {

void check_setup(const filter::DelayedFilter& filter, const MonteCarloSetup& setup) {
    if (setup.trials < 100) {
        throw Error(ErrorCode::PreconditionViolated, "monte carlo needs at least 100 trials");
    }
    if (setup.sample_times.empty()) {
        throw Error(ErrorCode::PreconditionViolated, "no sample times given");
    }
    for (long k : setup.sample_times) {
        if (k <= filter.delay() || k > setup.T) {
            throw Error(ErrorCode::PreconditionViolated,
                        "sample time " + std::to_string(k) + " outside [r+1, T]");
        }
    }
}

Vector initial_state(const filter::DelayedFilter& filter) {
    return filter.config().initial_estimate.value_or(Vector::Zero(filter.model().n()));
}

void flag(BiasAtTime& s) {
    for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
        if (std::abs(s.mean(i)) > 4.0 * s.standard_error(i)) {
            s.flagged.push_back(static_cast<int>(i));
        }
    }
}

} // namespace

bool BiasReport::any_flagged() const {
    for (const auto& s : samples) {
        if (!s.flagged.empty()) {
            return true;
        }
    }
    return false;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix trial_errors(const filter::DelayedFilter& filter, const MonteCarloSetup& setup, int trial) {
    const std::optional<NoiseSpec> noise = setup.noise_on ? std::optional<NoiseSpec>(filter.noise()) : std::nullopt;
    const Trajectory traj = simulate_stream(filter.model(), noise, setup.signals, setup.T, setup.seed,
                                            trial_seed(setup.seed, trial), initial_state(filter));
    const std::vector<EstimateRow> rows = run_filter(filter, traj.y, traj.u);
    const int r = filter.delay();
    Matrix out(static_cast<Eigen::Index>(setup.sample_times.size()), filter.model().n());
    for (std::size_t i = 0; i < setup.sample_times.size(); ++i) {
        const long k = setup.sample_times[i];
        out.row(static_cast<Eigen::Index>(i)) =
            traj.x.row(k - r) - rows[static_cast<std::size_t>(k)].output->state_estimate.transpose();
    }
    return out;
}

BiasReport monte_carlo_bias(const filter::DelayedFilter& filter, const MonteCarloSetup& setup, int threads) {
    check_setup(filter, setup);
    const int trials = setup.trials;
    std::vector<Matrix> errors(static_cast<std::size_t>(trials));
    std::exception_ptr failure;

    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(nthreads)
    for (int t = 0; t < trials; ++t) {
        try {
            errors[static_cast<std::size_t>(t)] = trial_errors(filter, setup, t);
        } catch (...) {
#pragma omp critical(delayrec_mc_failure)
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    // Fixed-order two-pass reduction keeps the result independent of the thread count.
    BiasReport report{trials, setup.T, setup.seed, {}};
    const Eigen::Index n = filter.model().n();
    for (std::size_t i = 0; i < setup.sample_times.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        BiasAtTime s;
        s.k = setup.sample_times[i];
        s.mean = Vector::Zero(n);
        for (const Matrix& e : errors) {
            s.mean += e.row(row).transpose();
        }
        s.mean /= trials;
        Vector var = Vector::Zero(n);
        for (const Matrix& e : errors) {
            var += (e.row(row).transpose() - s.mean).cwiseAbs2();
        }
        var /= (trials - 1);
        s.standard_error = (var / trials).cwiseSqrt();
        flag(s);
        report.samples.push_back(std::move(s));
    }
    return report;
}

BiasReport monte_carlo_bias_serial(const filter::DelayedFilter& filter, const MonteCarloSetup& setup) {
    check_setup(filter, setup);
    const Eigen::Index n = filter.model().n();
    const auto count = setup.sample_times.size();
    // Welford accumulators, one per sample time.
    std::vector<Vector> mean(count, Vector::Zero(n));
    std::vector<Vector> m2(count, Vector::Zero(n));
    for (int t = 0; t < setup.trials; ++t) {
        const Matrix e = trial_errors(filter, setup, t);
        for (std::size_t i = 0; i < count; ++i) {
            const Vector x = e.row(static_cast<Eigen::Index>(i)).transpose();
            const Vector delta = x - mean[i];
            mean[i] += delta / static_cast<double>(t + 1);
            m2[i] += delta.cwiseProduct(x - mean[i]);
        }
    }
    BiasReport report{setup.trials, setup.T, setup.seed, {}};
    for (std::size_t i = 0; i < count; ++i) {
        BiasAtTime s;
        s.k = setup.sample_times[i];
        s.mean = mean[i];
        s.standard_error = (m2[i] / static_cast<double>(setup.trials - 1) / setup.trials).cwiseSqrt();
        flag(s);
        report.samples.push_back(std::move(s));
    }
    return report;
}

} // namespace delayrec::sim
