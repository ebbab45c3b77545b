#pragma once

#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "delayrec/gain.hpp"
#include "delayrec/model.hpp"

namespace delayrec::filter {

enum class GainMode { FixedSquare, TimeVaryingMinVar, FixedUserSupplied };

std::string_view to_string(GainMode mode);

struct FilterConfig {
    int delay = 0;
    GainMode gain_mode = GainMode::FixedSquare;
    std::optional<Vector> initial_estimate;   ///< x^_{0|r}; zeros when absent
    std::optional<Matrix> initial_covariance; ///< P_{0|r}; identity when absent
    std::optional<Matrix> user_gain;          ///< required for FixedUserSupplied
    bool freeze_converged_gain = true;        ///< TimeVaryingMinVar: stop updating once P is stationary
};

struct FilterState {
    long k = 0;                ///< index of the next measurement to consume
    Vector xhat_delayed;       ///< x^_{k-r-1|k-1}
    gain::CovarianceState covariance;
    Matrix L;
    std::deque<Vector> u_buffer; ///< u_{k-r-1} .. u_{k-1} once warmed up
    bool gain_frozen = false;
};

struct StepOutput {
    long k = 0;                          ///< measurement index consumed
    Vector state_estimate;               ///< x^_{k-r|k}
    std::optional<Vector> input_estimate; ///< e^_{k-r-1}; absent if C A^r H lacks full column rank
    Vector innovation;                   ///< y_k - C x^_{k|k-1} - D u_k
};

struct StepResult {
    FilterState state;
    std::optional<StepOutput> output; ///< empty during warm-up (k <= r)
};

/**
 * Delayed state/unknown-input filter
 *
 *   x^_{k-r|k}   = x^_{k-r|k-1} + L_k (y_k - C x^_{k|k-1} - D u_k)
 *   x^_{k-r|k-1} = A x^_{k-r-1|k-1} + B u_{k-r-1}
 *   x^_{k|k-1}   = A^{r+1} x^_{k-r-1|k-1} + sum_{j=0..r} A^j B u_{k-1-j}
 *   e^_{k-r-1}   = K (y_k - C x^_{k|k-1} - D u_k),  K S_r = [I_p 0 ... 0]
 *
 * Immutable once built; the evolving quantities live in FilterState values.
 * Measurements y_0..y_r are consumed only to fill the known-input buffer.
 */
class DelayedFilter {
public:
    DelayedFilter(SystemModel model, NoiseSpec noise, FilterConfig config);

    const SystemModel& model() const { return model_; }
    const NoiseSpec& noise() const { return noise_; }
    const FilterConfig& config() const { return config_; }
    int delay() const { return config_.delay; }

    FilterState initial_state() const;

    StepResult step(const FilterState& state, const Vector& y, const Vector& u = Vector()) const;

private:
    SystemModel model_;
    NoiseSpec noise_;
    FilterConfig config_;
    Matrix lifted_a_;           ///< A^{r+1}
    std::vector<Matrix> a_j_b_; ///< A^j B, j = 0..r
    Matrix input_extractor_;    ///< (C A^r H)^{-1} when square, else the first p rows of S_r^+
    bool input_recoverable_ = true;
    Matrix initial_gain_;
};

/// Validates the configuration and returns the seeded state of a new filter.
FilterState init_filter(const DelayedFilter& filter);

/// A - L C A^{r+1}
Matrix error_dynamics_matrix(const SystemModel& model, int r, const Matrix& L);

enum class ConvergenceVerdict { DeadbeatUnbiased, AsymptoticallyUnbiased, PersistentError, Divergent };

std::string_view to_string(ConvergenceVerdict verdict);

/// Verdict from the spectral radius of the error dynamics matrix. Throws ConstraintViolated when L
/// is not unbiased.
ConvergenceVerdict classify_convergence(const SystemModel& model, int r, const Matrix& L);

/// eps_j = (A - L C A^{r+1})^j eps_0, j = 0..T
std::vector<Vector> predicted_error_sequence(const SystemModel& model, int r, const Matrix& L, const Vector& eps0,
                                             int T);

} // namespace delayrec::filter
