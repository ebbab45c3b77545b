#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "delayrec/model.hpp"

namespace delayrec::markov {

using linalg::numerical_rank;

/// Whether delay arguments are checked against 0 <= r <= n-1. `Diagnostic` lifts the upper bound
/// so the r >= n impossibility can be probed numerically.
enum class RangeGuard { Enforce, Diagnostic };

/// C A^d H, built by pushing A onto H d times. Requires 0 <= d <= 2n.
Matrix markov_parameter(const SystemModel& model, int d);

/// C A^d H for d = 0..count-1.
std::vector<Matrix> markov_sequence(const SystemModel& model, int count);

/// Roundoff scale of C A^d H: ||C||_2 max_{j<=d} ||A^j H||_2.
double markov_scale(const SystemModel& model, int d);

/// Rank of a Markov block or stack with the default cutoff, floored at max(dim) 1e-12 scale so
/// that structurally zero blocks carrying only roundoff count as zero.
int markov_rank(const Matrix& block, double scale);

/// S_r = [C A^r H, C A^{r-1} H, ..., C H]  (l x (r+1)p).
Matrix row_stack_S(const SystemModel& model, int r, RangeGuard guard = RangeGuard::Enforce);

/// Block lower-triangular Toeplitz M_r with block (i, j) = C A^{i-j} H for i >= j.
Matrix toeplitz_M(const SystemModel& model, int r, RangeGuard guard = RangeGuard::Enforce);

/// rank(S_r) - rank(S_{r-1}) == p, with rank(S_{-1}) = 0.
bool exists_unbiased_gain(const SystemModel& model, int r, RangeGuard guard = RangeGuard::Enforce,
                          std::optional<double> tol = std::nullopt);

/// rank(M_r) - rank(M_{r-1}) == p, with M_{-1} empty.
bool is_delay_invertible(const SystemModel& model, int r, RangeGuard guard = RangeGuard::Enforce);

/// Smallest r in 0..n-1 admitting an unbiased gain.
std::optional<int> minimal_delay(const SystemModel& model);

struct DelayAnalysis {
    std::vector<std::pair<int, int>> markov_ranks; ///< (d, rank C A^d H), d = 0..n
    std::vector<std::pair<int, int>> s_ranks;      ///< (r, rank S_r), r = 0..n-1
    std::vector<int> feasible_delays;
    std::optional<int> minimal_delay;
    std::vector<int> invertible_delays;
    bool conjecture_violated = false; ///< more than one feasible delay
};

DelayAnalysis analyze_delays(const SystemModel& model);

} // namespace delayrec::markov
