#include "delayrec/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "delayrec/error.hpp"

namespace delayrec::io {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& s, long line) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const char* begin = s.data();
    if (!s.empty() && s.front() == '+') {
        ++begin;
    }
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

void append_names(std::vector<std::string>& names, const char* prefix, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i) {
        names.push_back(prefix + std::to_string(i));
    }
}

void write_row(std::ostream& out, long k, const std::vector<const Matrix*>& blocks, Eigen::Index row) {
    out << k;
    for (const Matrix* m : blocks) {
        for (Eigen::Index j = 0; j < m->cols(); ++j) {
            out << ',' << format_double((*m)(row, j));
        }
    }
    out << '\n';
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

Matrix matrix_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) {
        throw Error(ErrorCode::ParseError, "'" + key + "' must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Matrix m;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) {
            throw Error(ErrorCode::ParseError, "'" + key + "' row " + std::to_string(i) + " is not an array");
        }
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorCode::ParseError, "'" + key + "' has ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw Error(ErrorCode::ParseError, "'" + key + "' entry is not a number");
            }
            m(i, c) = v.get<double>();
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(i, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

ModelFile parse_model(const json& doc) {
    if (!doc.is_object()) {
        throw Error(ErrorCode::ParseError, "model file must hold a JSON object");
    }
    static const char* allowed[] = {"A", "B", "H", "C", "D", "Q", "R", "delay"};
    for (const auto& item : doc.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || item.key() == a;
        }
        if (!known) {
            throw Error(ErrorCode::ParseError, "unknown key '" + item.key() + "'");
        }
    }
    for (const char* req : {"A", "H", "C"}) {
        if (!doc.contains(req)) {
            throw Error(ErrorCode::ParseError, std::string("missing key '") + req + "'");
        }
    }
    RawModel raw{matrix_from_json(doc["A"], "A"), matrix_from_json(doc["H"], "H"), matrix_from_json(doc["C"], "C"),
                 std::nullopt, std::nullopt};
    if (doc.contains("B")) {
        raw.B = matrix_from_json(doc["B"], "B");
    }
    if (doc.contains("D")) {
        raw.D = matrix_from_json(doc["D"], "D");
    }
    SystemModel model = validate_model(raw);

    const NoiseSpec fallback = default_noise(model);
    const Matrix q = doc.contains("Q") ? matrix_from_json(doc["Q"], "Q") : fallback.Q();
    const Matrix r = doc.contains("R") ? matrix_from_json(doc["R"], "R") : fallback.R();
    NoiseSpec noise = validate_noise(q, r, model);

    std::optional<int> delay;
    if (doc.contains("delay")) {
        const json& d = doc["delay"];
        if (d.is_string() && d.get<std::string>() == "auto") {
            delay = std::nullopt;
        } else if (d.is_number_integer() && d.get<long>() >= 0) {
            delay = d.get<int>();
        } else {
            throw Error(ErrorCode::ParseError, "'delay' must be \"auto\" or a non-negative integer");
        }
    }
    return ModelFile{std::move(model), std::move(noise), delay};
}

ModelFile parse_model_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + ex.what());
    }
    return parse_model(doc);
}

ModelFile read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_text(ss.str());
}

json model_to_json(const SystemModel& model, const std::optional<NoiseSpec>& noise, std::optional<int> delay) {
    json doc;
    doc["A"] = matrix_to_json(model.A());
    doc["H"] = matrix_to_json(model.H());
    doc["C"] = matrix_to_json(model.C());
    if (model.m() > 0) {
        doc["B"] = matrix_to_json(model.B());
        doc["D"] = matrix_to_json(model.D());
    }
    if (noise) {
        doc["Q"] = matrix_to_json(noise->Q());
        doc["R"] = matrix_to_json(noise->R());
    }
    if (delay) {
        doc["delay"] = *delay;
    } else {
        doc["delay"] = "auto";
    }
    return doc;
}

MeasurementTable read_measurements(std::istream& in, const SystemModel& model) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::ParseError, "empty measurement file");
    }
    const std::vector<std::string> header = split(line);
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!column.emplace(header[i], i).second) {
            throw Error(ErrorCode::ParseError, "duplicate column '" + header[i] + "'");
        }
    }
    auto indices = [&](const char* prefix, Eigen::Index count, bool required, bool& present) {
        std::vector<std::size_t> idx;
        std::size_t found = 0;
        for (Eigen::Index i = 1; i <= count; ++i) {
            auto it = column.find(prefix + std::to_string(i));
            if (it != column.end()) {
                idx.push_back(it->second);
                ++found;
            }
        }
        if (column.count(prefix + std::to_string(count + 1))) {
            throw Error(ErrorCode::DimensionMismatch,
                        std::string("too many '") + prefix + "' columns for the model");
        }
        present = found > 0;
        if ((required || present) && found != static_cast<std::size_t>(count)) {
            throw Error(ErrorCode::DimensionMismatch, std::string("expected ") + std::to_string(count) + " '" +
                                                          prefix + "' columns, found " + std::to_string(found));
        }
        return idx;
    };
    if (!column.count("k")) {
        throw Error(ErrorCode::ParseError, "missing column 'k'");
    }
    bool has_y = false, has_u = false, has_x = false, has_e = false;
    const auto iy = indices("y", model.l(), true, has_y);
    const auto iu = indices("u", model.m(), model.m() > 0, has_u);
    const auto ix = indices("x", model.n(), false, has_x);
    const auto ie = indices("e", model.p(), false, has_e);
    if (has_x != has_e) {
        throw Error(ErrorCode::ParseError, "truth columns need both x and e");
    }

    std::vector<std::vector<double>> data;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": wrong number of fields");
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            row[i] = parse_number(cells[i], line_no);
        }
        data.push_back(std::move(row));
    }
    if (data.empty()) {
        throw Error(ErrorCode::ParseError, "no measurement rows");
    }
    const auto rows = static_cast<Eigen::Index>(data.size());
    auto fill = [&](const std::vector<std::size_t>& idx) {
        Matrix m(rows, static_cast<Eigen::Index>(idx.size()));
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < idx.size(); ++c) {
                m(r, static_cast<Eigen::Index>(c)) = data[static_cast<std::size_t>(r)][idx[c]];
            }
        }
        return m;
    };
    MeasurementTable t;
    const std::size_t ik = column["k"];
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double kv = data[static_cast<std::size_t>(r)][ik];
        if (kv != static_cast<double>(r)) {
            throw Error(ErrorCode::ParseError, "column k must run 0, 1, 2, ...");
        }
        t.k.push_back(static_cast<long>(r));
    }
    t.y = fill(iy);
    t.u = fill(iu);
    if (has_x) {
        t.x = fill(ix);
        t.e = fill(ie);
    }
    return t;
}

MeasurementTable read_measurements_file(const std::string& path, const SystemModel& model) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    }
    return read_measurements(in, model);
}

void write_trajectory(std::ostream& out, const sim::Trajectory& t, bool with_truth) {
    std::vector<std::string> names{"k"};
    append_names(names, "y", t.y.cols());
    append_names(names, "u", t.u.cols());
    std::vector<const Matrix*> blocks{&t.y, &t.u};
    if (with_truth) {
        append_names(names, "x", t.x.cols());
        append_names(names, "e", t.e.cols());
        blocks.push_back(&t.x);
        blocks.push_back(&t.e);
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << (i ? "," : "") << names[i];
    }
    out << '\n';
    for (Eigen::Index k = 0; k < t.y.rows(); ++k) {
        write_row(out, static_cast<long>(k), blocks, k);
    }
}

void write_estimates(std::ostream& out, const SystemModel& model, const std::vector<sim::EstimateRow>& rows) {
    std::vector<std::string> names{"k"};
    append_names(names, "xhat", model.n());
    append_names(names, "ehat", model.p());
    append_names(names, "innov", model.l());
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << (i ? "," : "") << names[i];
    }
    out << '\n';
    const Eigen::Index width = model.n() + model.p() + model.l();
    for (const auto& row : rows) {
        out << row.k;
        if (!row.output) {
            for (Eigen::Index i = 0; i < width; ++i) {
                out << ',';
            }
            out << '\n';
            continue;
        }
        const filter::StepOutput& o = *row.output;
        for (Eigen::Index i = 0; i < o.state_estimate.size(); ++i) {
            out << ',' << format_double(o.state_estimate(i));
        }
        for (Eigen::Index i = 0; i < model.p(); ++i) {
            out << ',';
            if (o.input_estimate) {
                out << format_double((*o.input_estimate)(i));
            }
        }
        for (Eigen::Index i = 0; i < o.innovation.size(); ++i) {
            out << ',' << format_double(o.innovation(i));
        }
        out << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
    }
    out << content;
    if (!out) {
        throw Error(ErrorCode::ParseError, "failed writing '" + path + "'");
    }
}

} // namespace delayrec::io
