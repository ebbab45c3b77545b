#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "delayrec/filter.hpp"
#include "delayrec/linalg.hpp"
#include "delayrec/model.hpp"
#include "delayrec/sim.hpp"

namespace delayrec::sim {

/// Expected facts about one reference system. Unset members are not checked.
struct ExpectedFacts {
    std::optional<int> minimal_delay;
    bool no_feasible_delay = false;
    bool invertible_without_gain = false; ///< some r is delay-invertible although no delay is feasible
    std::vector<std::pair<int, int>> markov_ranks; ///< (d, rank(C A^d H))

    std::optional<std::vector<Complex>> zeros;
    double zero_tolerance = 1e-6;

    std::optional<std::vector<Complex>> error_eigenvalues; ///< of A - L C A^{r+1} at the minimal delay
    double eigen_tolerance = 1e-6;
    bool zeros_in_error_eigenvalues = false; ///< subset property plus at least one extra eigenvalue

    std::optional<filter::ConvergenceVerdict> verdict;
    bool noiseless_reconstruction = false; ///< input RMS <= 1e-8 after warm-up

    /// Noiseless run with x0 = this, x^ = 0: the error follows predicted_error_sequence.
    std::optional<Vector> error_overlap_x0;

    /// |eps| grows or decays like rate^k over k in [20, 60]; log-slope within 5 %.
    std::optional<double> error_growth_rate;
};

struct ReferenceExample {
    std::string id;
    std::string description;
    SystemModel model;
    NoiseSpec noise;
    InputSignals signals; ///< used by reproduction runs
    int horizon = 500;
    ExpectedFacts facts;
};

const std::vector<std::string>& reference_example_ids();

/// Throws UnknownExample.
ReferenceExample reference_example(std::string_view id);

/// Gain used for analysis at delay r: H (C A^r H)^{-1} when square, steady-state (or, if the
/// iteration does not settle, one-step from P = I) minimum variance otherwise.
gain::GainResult analysis_gain(const SystemModel& model, const NoiseSpec& noise, int r);

struct FactOutcome {
    std::string fact;
    bool passed = false;
    std::string detail;
};

/// Recomputes every expected fact from the model.
std::vector<FactOutcome> check_facts(const ReferenceExample& example);

} // namespace delayrec::sim
