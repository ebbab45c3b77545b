#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delayrec/examples.hpp"
#include "delayrec/filter.hpp"
#include "delayrec/gain.hpp"
#include "delayrec/io.hpp"
#include "delayrec/markov.hpp"
#include "delayrec/montecarlo.hpp"
#include "delayrec/sim.hpp"
#include "delayrec/zeros.hpp"

namespace delayrec::report {

using io::json;

inline constexpr int kSchemaVersion = 1;

json to_json(const markov::DelayAnalysis& analysis);
json to_json(const zeros::ZeroReport& zeros);
json to_json(const sim::ErrorStats& stats);
json to_json(const sim::BiasReport& bias);
json to_json(const std::vector<sim::FactOutcome>& facts);
json complex_to_json(const Complex& z);

/// method, delay, residual, residual tolerance, spectral radius of A - L C A^{r+1} and eigenvalues.
json gain_summary(const SystemModel& model, int r, const gain::GainResult& g);

/// Everything `analyze` prints: delay analysis, zeros and, when a delay is feasible, the gain and
/// convergence verdict at the minimal delay.
json analysis_report(const SystemModel& model, const NoiseSpec& noise);

/// Wraps a body with schema_version.
json envelope(const std::string& command, json body);

} // namespace delayrec::report
