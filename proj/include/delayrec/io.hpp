#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "delayrec/model.hpp"
#include "delayrec/sim.hpp"

namespace delayrec::io {

using json = nlohmann::json;

/// Contents of a model file. `delay` is empty for "auto" or when the key is absent.
struct ModelFile {
    SystemModel model;
    NoiseSpec noise;
    std::optional<int> delay;
};

/**
 * Strict model JSON: required A, H, C (row-major nested arrays); optional B, D, Q, R and
 * delay ("auto" or a non-negative integer). Unknown keys are rejected. Q and R default to
 * 1e-4 I when absent.
 */
ModelFile parse_model(const json& doc);
ModelFile parse_model_text(const std::string& text);
ModelFile read_model_file(const std::string& path);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& key);

json model_to_json(const SystemModel& model, const std::optional<NoiseSpec>& noise = std::nullopt,
                   std::optional<int> delay = std::nullopt);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

struct MeasurementTable {
    std::vector<long> k;
    Matrix y;
    Matrix u;
    std::optional<Matrix> x; ///< truth columns, when present
    std::optional<Matrix> e;
};

/// Header `k,y1..yl[,u1..um][,x1..xn,e1..ep]`, columns matched by name.
MeasurementTable read_measurements(std::istream& in, const SystemModel& model);
MeasurementTable read_measurements_file(const std::string& path, const SystemModel& model);

/// `k,y1..yl[,u1..um],x1..xn,e1..ep`
void write_trajectory(std::ostream& out, const sim::Trajectory& trajectory, bool with_truth = true);

/// `k,xhat1..xhatn,ehat1..ehatp,innov1..innovl`; estimate fields are empty during warm-up.
void write_estimates(std::ostream& out, const SystemModel& model, const std::vector<sim::EstimateRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

} // namespace delayrec::io
