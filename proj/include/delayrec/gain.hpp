#pragma once

#include <optional>
#include <string_view>

#include "delayrec/model.hpp"

namespace delayrec::gain {

enum class GainMethod { SquareInverse, MinVarLagrangian, SimplifiedMinVar, NoDelayClassical };

std::string_view to_string(GainMethod method);

struct GainResult {
    Matrix L;              ///< n x l
    double residual = 0.0; ///< || L S_r - [H 0 ... 0] ||_F
    GainMethod method = GainMethod::MinVarLagrangian;
};

/// Error covariance P_{k-r|k} and its trace (the minimised cost).
struct CovarianceState {
    Matrix P;
    double trace = 0.0;

    static CovarianceState from(const Matrix& p);
};

/// 1e-9 (1 + ||H||_F): the acceptance bound for the unbiasedness residual.
double residual_tolerance(const SystemModel& model);

/// || L S_r - [H 0 ... 0] ||_F
double unbiasedness_residual(const SystemModel& model, int r, const Matrix& L);

/// L = H (C A^r H)^{-1} for l = p. Requires C A^d H = 0 for d < r.
GainResult square_gain(const SystemModel& model, int r);

struct MinVarOptions {
    /// Relative singular-value cutoff of the Moore-Penrose inverse of Z_k.
    double pinv_rcond = 1e-12;
};

/**
 * Unbiased minimum-variance gain for delay r given the previous covariance P_{k-r-1|k-1}.
 *
 * T = Q + A P A^T, V = C A^r T A^{rT} C^T + sum_{j=1..r} C A^{r-j} Q A^{(r-j)T} C^T + R,
 * Z = S_r^T V^{-1} S_r, N = [H 0 ... 0] - T A^{rT} C^T V^{-1} S_r and
 * L = (T A^{rT} C^T + N Z^+ S_r^T) V^{-1}.
 */
GainResult minvar_gain(const SystemModel& model, const NoiseSpec& noise, int r, const CovarianceState& prev,
                       const MinVarOptions& options = {});

/// Closed form used when C A^d H = 0 for d = 0..r-1 and C A^r H has full column rank.
GainResult simplified_minvar_gain(const SystemModel& model, const NoiseSpec& noise, int r,
                                  const CovarianceState& prev);

/**
 * P = (A - L C A^{r+1}) P_prev (.)^T + (I - L C A^r) Q (.)^T + sum_{j=1..r} (L C A^{r-j}) Q (.)^T + L R L^T.
 *
 * The recursion treats the delayed error and the in-window process noise as uncorrelated, which
 * is exact for r = 0 or Q = 0.
 */
CovarianceState covariance_update(const SystemModel& model, const NoiseSpec& noise, int r, const Matrix& L,
                                  const CovarianceState& prev);

struct SteadyState {
    GainResult gain;
    CovarianceState covariance;
    bool converged = false;
    int iterations = 0;
};

/// Fixed point of minvar_gain + covariance_update from P0 (default I_n).
SteadyState steady_state_gain(const SystemModel& model, const NoiseSpec& noise, int r,
                              std::optional<Matrix> p0 = std::nullopt, int max_iterations = 10000);

} // namespace delayrec::gain
