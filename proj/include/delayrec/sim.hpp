#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "delayrec/filter.hpp"
#include "delayrec/model.hpp"
#include "delayrec/signals.hpp"

namespace delayrec::sim {

struct InputSignals {
    std::vector<SignalSpec> unknown; ///< one per unknown-input channel (p)
    std::vector<SignalSpec> known;   ///< one per known-input channel (m)
};

/// Ground truth over k = 0..T. Row k of each matrix is the sample at time k.
struct Trajectory {
    int T = 0;
    std::uint64_t seed = 0;
    Matrix x; ///< (T+1) x n
    Matrix y; ///< (T+1) x l
    Matrix e; ///< (T+1) x p
    Matrix u; ///< (T+1) x m
    Matrix w; ///< (T+1) x n process noise draws
    Matrix v; ///< (T+1) x l measurement noise draws
};

/// x_{k+1} = A x_k + B u_k + H e_k + w_k, y_k = C x_k + D u_k + v_k. Noise is off when `noise` is
/// empty; otherwise w, v are standard normals shaped by LDL^T factors of Q and R.
Trajectory simulate(const SystemModel& model, const std::optional<NoiseSpec>& noise, const InputSignals& signals,
                    int T, std::uint64_t seed, const Vector& x0);

/// Same as simulate() with a noise substream separate from the signal seed.
Trajectory simulate_stream(const SystemModel& model, const std::optional<NoiseSpec>& noise,
                           const InputSignals& signals, int T, std::uint64_t signal_seed, std::uint64_t noise_seed,
                           const Vector& x0);

/// Matrix F with F F^T = S for a symmetric PSD S (pivoted LDL^T).
Matrix psd_factor(const Matrix& s);

/// Linear chain of n compartments with loss coefficient beta and flow coefficient alpha.
/// Compartment indices are 1-based.
SystemModel compartmental_model(int n, double alpha, double beta, const std::vector<int>& input_compartments,
                                const std::vector<int>& output_compartments);

struct EstimateRow {
    long k = 0;
    std::optional<filter::StepOutput> output;
};

/// Drives the filter over every row of y (and u).
std::vector<EstimateRow> run_filter(const filter::DelayedFilter& filter, const Matrix& y, const Matrix& u,
                                    filter::FilterState* final_state = nullptr);

struct ErrorStats {
    std::vector<long> k;  ///< measurement index of each emitted step
    Matrix state_error;   ///< row i: x_{k-r} - x^_{k-r|k}
    Matrix input_error;   ///< row i: e_{k-r-1} - e^_{k-r-1}
    double state_rms = 0.0;
    double input_rms = 0.0;
    double state_max_abs = 0.0;
    double input_max_abs = 0.0;
};

/// Root mean square over all entries of rows first_row.. of `m`.
double rms(const Matrix& m, Eigen::Index first_row = 0);

/// Least-squares slope of ln|eps| against k over emitted steps with k_first <= k <= k_last.
double log_error_slope(const ErrorStats& stats, long k_first, long k_last);

struct ExperimentResult {
    ErrorStats stats;
    std::vector<EstimateRow> rows;
    filter::FilterState final_state;
};

ExperimentResult run_experiment(const filter::DelayedFilter& filter, const Trajectory& trajectory);

ExperimentResult run_experiment(const SystemModel& model, const NoiseSpec& noise, const filter::FilterConfig& config,
                                const Trajectory& trajectory);

} // namespace delayrec::sim
