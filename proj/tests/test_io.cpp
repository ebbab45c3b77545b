#include <gtest/gtest.h>

#include <sstream>

#include "delayrec/error.hpp"
#include "delayrec/examples.hpp"
#include "delayrec/io.hpp"

using namespace delayrec;

namespace {

ErrorCode parse_code(const std::string& text) {
    try {
        io::parse_model_text(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for " << text;
    return ErrorCode::ParseError;
}

} // namespace

TEST(ModelJson, MinimalFileUsesDefaults) {
    const auto f = io::parse_model_text(R"({"A": [[0.5, 0], [1, 0.5]], "H": [[1], [0]], "C": [[0, 1]]})");
    EXPECT_EQ(f.model.n(), 2);
    EXPECT_EQ(f.model.m(), 0);
    EXPECT_FALSE(f.delay.has_value());
    EXPECT_EQ(f.noise.Q(), 1e-4 * Matrix::Identity(2, 2));
    EXPECT_EQ(f.noise.R(), 1e-4 * Matrix::Identity(1, 1));
}

TEST(ModelJson, DelayField) {
    const std::string base = R"({"A": [[0.5, 0], [1, 0.5]], "H": [[1], [0]], "C": [[0, 1]], "delay": )";
    EXPECT_EQ(io::parse_model_text(base + "1}").delay, 1);
    EXPECT_FALSE(io::parse_model_text(base + "\"auto\"}").delay.has_value());
    EXPECT_EQ(parse_code(base + "-1}"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code(base + "1.5}"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code(base + "\"soon\"}"), ErrorCode::ParseError);
}

TEST(ModelJson, StrictSchema) {
    EXPECT_EQ(parse_code(R"({"A": [[0.5]], "H": [[1]], "C": [[1]], "extra": 1})"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code(R"({"A": [[0.5, 0], [1, 0.5]], "H": [[1], [0]]})"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code(R"({"A": [[0.5, 0], [1]], "H": [[1], [0]], "C": [[0, 1]]})"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code(R"({"A": [[0.5, "x"], [1, 0.5]], "H": [[1], [0]], "C": [[0, 1]]})"),
              ErrorCode::ParseError);
    EXPECT_EQ(parse_code(R"({"A": [], "H": [[1], [0]], "C": [[0, 1]]})"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code("[1, 2]"), ErrorCode::ParseError);
    EXPECT_EQ(parse_code("{not json"), ErrorCode::ParseError);
    // Validation errors pass through with their own codes.
    EXPECT_EQ(parse_code(R"({"A": [[0.5, 0], [1, 0.5]], "H": [[1], [0], [0]], "C": [[0, 1]]})"),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(parse_code(R"({"A": [[0.5, 0], [1, 0.5]], "H": [[1], [0]], "C": [[0, 1]], "R": [[0]]})"),
              ErrorCode::RNotPositiveDefinite);
}

TEST(ModelJson, RoundTripIsExact) {
    for (const auto& id : sim::reference_example_ids()) {
        const auto ex = sim::reference_example(id);
        const auto back = io::parse_model(io::json::parse(io::model_to_json(ex.model, ex.noise, 2).dump()));
        EXPECT_TRUE(back.model == ex.model) << id;
        EXPECT_EQ(back.noise.Q(), ex.noise.Q()) << id;
        EXPECT_EQ(back.noise.R(), ex.noise.R()) << id;
        EXPECT_EQ(back.delay, 2);
    }
    const auto ex = sim::reference_example("minphase3");
    EXPECT_EQ(io::model_to_json(ex.model)["delay"], "auto");
    EXPECT_FALSE(io::model_to_json(ex.model).contains("B"));
}

TEST(ModelJson, KnownInputRoundTrip) {
    const auto f = io::parse_model_text(
        R"({"A": [[0.5, 0], [1, 0.5]], "B": [[1, 0], [0, 2]], "H": [[1], [0]], "C": [[0, 1]], "D": [[0.5, 0.25]]})");
    EXPECT_EQ(f.model.m(), 2);
    const auto back = io::parse_model(io::model_to_json(f.model));
    EXPECT_TRUE(back.model == f.model);
}

TEST(FormatDouble, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 123456789.0}) {
        EXPECT_EQ(std::stod(io::format_double(v)), v);
    }
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_EQ(io::format_double(2.0), "2");
}

TEST(Csv, TrajectoryRoundTripIsExact) {
    const auto ex = sim::reference_example("nonsquare3");
    const auto traj = sim::simulate(ex.model, ex.noise, ex.signals, 30, 4, Vector::Zero(3));
    std::stringstream ss;
    io::write_trajectory(ss, traj);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "k,y1,y2,x1,x2,x3,e1");
    const auto table = io::read_measurements(ss, ex.model);
    EXPECT_EQ(table.k.size(), 31u);
    EXPECT_EQ(table.y, traj.y);
    ASSERT_TRUE(table.x && table.e);
    EXPECT_EQ(*table.x, traj.x);
    EXPECT_EQ(*table.e, traj.e);
    EXPECT_EQ(table.u.cols(), 0);
}

TEST(Csv, MeasurementErrors) {
    const auto ex = sim::reference_example("nonsquare3");
    auto code = [&](const std::string& text) {
        std::istringstream in(text);
        try {
            io::read_measurements(in, ex.model);
        } catch (const Error& e) {
            return e.code();
        }
        ADD_FAILURE() << text;
        return ErrorCode::ParseError;
    };
    EXPECT_EQ(code(""), ErrorCode::ParseError);
    EXPECT_EQ(code("k,y1\n0,1\n"), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code("k,y1,y2,y3\n0,1,2,3\n"), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code("y1,y2\n1,2\n"), ErrorCode::ParseError);
    EXPECT_EQ(code("k,y1,y2\n0,1,2\n2,1,2\n"), ErrorCode::ParseError);
    EXPECT_EQ(code("k,y1,y2\n0,1,abc\n"), ErrorCode::ParseError);
    EXPECT_EQ(code("k,y1,y2\n0,1\n"), ErrorCode::ParseError);
    EXPECT_EQ(code("k,y1,y2,x1,x2,x3\n0,1,2,0,0,0\n"), ErrorCode::ParseError);
    EXPECT_EQ(code("k,y1,y2\n"), ErrorCode::ParseError);
}

TEST(Csv, ColumnsMatchedByName) {
    const auto ex = sim::reference_example("nonsquare3");
    std::istringstream in("y2,k,y1\n5,0,4\n7,1,6\n");
    const auto t = io::read_measurements(in, ex.model);
    EXPECT_EQ(t.y(0, 0), 4.0);
    EXPECT_EQ(t.y(0, 1), 5.0);
    EXPECT_EQ(t.y(1, 1), 7.0);
    EXPECT_FALSE(t.x.has_value());
}

TEST(Csv, EstimatesLeaveWarmupEmpty) {
    const auto ex = sim::reference_example("compartmental-34");
    const auto traj = sim::simulate(ex.model, std::nullopt, ex.signals, 5, 1, Vector::Zero(6));
    filter::FilterConfig c;
    c.delay = 2;
    const filter::DelayedFilter f(ex.model, ex.noise, c);
    std::stringstream ss;
    io::write_estimates(ss, ex.model, sim::run_filter(f, traj.y, traj.u));
    std::vector<std::string> lines;
    for (std::string line; std::getline(ss, line);) {
        lines.push_back(line);
    }
    ASSERT_EQ(lines.size(), 7u);
    EXPECT_EQ(lines[0].rfind("k,xhat1,", 0), 0u);
    const std::string empty_tail(6 + 2 + 2, ',');
    EXPECT_EQ(lines[1], "0" + empty_tail);
    EXPECT_EQ(lines[3], "2" + empty_tail);
    EXPECT_NE(lines[4], "3" + empty_tail);
    EXPECT_EQ(std::count(lines[4].begin(), lines[4].end(), ','), 10);
}
