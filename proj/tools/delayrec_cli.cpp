// delayrec command-line front end.
//
// Exit codes: 0 ok, 1 usage/parse/dimension error, 2 infeasible delay, 3 failed expectation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "delayrec/error.hpp"
#include "delayrec/examples.hpp"
#include "delayrec/io.hpp"
#include "delayrec/markov.hpp"
#include "delayrec/montecarlo.hpp"
#include "delayrec/report.hpp"

namespace {

using namespace delayrec;
using report::json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;
constexpr int kExpectation = 3;

void print(const json& j) {
    std::cout << j.dump(2) << '\n';
}

Vector parse_vector(const std::string& text, Eigen::Index n, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(cell, &used));
            if (used != cell.size()) {
                throw std::invalid_argument(cell);
            }
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, std::string("bad number in ") + what + ": '" + cell + "'");
        }
    }
    if (static_cast<Eigen::Index>(values.size()) != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + " needs " + std::to_string(n) + " comma-separated values");
    }
    return Eigen::Map<Vector>(values.data(), n);
}

/// Collects --eN / --uN flags left over by the parser.
sim::InputSignals parse_signal_flags(const std::vector<std::string>& extras, const SystemModel& model) {
    std::map<std::string, std::string> flags;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        std::string value;
        if (key.rfind("--", 0) != 0) {
            throw Error(ErrorCode::ParseError, "unexpected argument '" + key + "'");
        }
        key = key.substr(2);
        if (auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else if (i + 1 < extras.size()) {
            value = extras[++i];
        } else {
            throw Error(ErrorCode::ParseError, "flag --" + key + " needs a value");
        }
        if (key.size() < 2 || (key[0] != 'e' && key[0] != 'u') ||
            key.find_first_not_of("0123456789", 1) != std::string::npos) {
            throw Error(ErrorCode::ParseError, "unknown flag --" + key);
        }
        if (!flags.emplace(key, value).second) {
            throw Error(ErrorCode::ParseError, "flag --" + key + " given twice");
        }
    }
    sim::InputSignals signals;
    auto take = [&](char prefix, Eigen::Index count, std::vector<sim::SignalSpec>& out) {
        for (Eigen::Index i = 1; i <= count; ++i) {
            const std::string key = prefix + std::to_string(i);
            auto it = flags.find(key);
            if (it == flags.end()) {
                throw Error(ErrorCode::ParseError, "missing signal --" + key);
            }
            out.push_back(sim::parse_signal(it->second));
            flags.erase(it);
        }
    };
    take('e', model.p(), signals.unknown);
    take('u', model.m(), signals.known);
    if (!flags.empty()) {
        throw Error(ErrorCode::ParseError, "signal --" + flags.begin()->first + " has no matching channel");
    }
    return signals;
}

int resolve_delay(const std::string& flag, const io::ModelFile& file) {
    if (flag != "auto") {
        try {
            std::size_t used = 0;
            const int r = std::stoi(flag, &used);
            if (used != flag.size() || r < 0) {
                throw std::invalid_argument(flag);
            }
            return r;
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "--delay must be 'auto' or a non-negative integer");
        }
    }
    if (file.delay) {
        return *file.delay;
    }
    const auto r = markov::minimal_delay(file.model);
    if (!r) {
        throw Error(ErrorCode::InfeasibleDelay, "no delay admits an unbiased gain");
    }
    return *r;
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        io::write_text_file(path, content);
    }
}

int cmd_analyze(const std::string& model_path) {
    const io::ModelFile file = io::read_model_file(model_path);
    json body = report::analysis_report(file.model, file.noise);
    body["model_file"] = model_path;
    const bool feasible = !body["gain"].is_null();
    print(report::envelope("analyze", std::move(body)));
    return feasible ? kOk : kInfeasible;
}

struct SimulateArgs {
    std::string model;
    int T = 500;
    std::uint64_t seed = 1;
    std::string noise = "off";
    std::string out;
    std::string x0;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& extras) {
    const io::ModelFile file = io::read_model_file(a.model);
    const sim::InputSignals signals = parse_signal_flags(extras, file.model);
    const Vector x0 = a.x0.empty() ? Vector::Zero(file.model.n()) : parse_vector(a.x0, file.model.n(), "--x0");
    const bool noise = a.noise == "on";
    const sim::Trajectory traj =
        sim::simulate(file.model, noise ? std::optional<NoiseSpec>(file.noise) : std::nullopt, signals, a.T, a.seed, x0);
    std::ostringstream csv;
    io::write_trajectory(csv, traj);
    write_or_print(a.out, csv.str());
    if (!a.out.empty() && a.out != "-") {
        json body{{"rows", traj.T + 1}, {"seed", a.seed}, {"noise", noise}, {"files_written", {a.out}}};
        print(report::envelope("simulate", std::move(body)));
    }
    return kOk;
}

struct FilterArgs {
    std::string model;
    std::string csv;
    std::string delay = "auto";
    std::string gain;
    std::string out;
};

int cmd_filter(const FilterArgs& a) {
    const io::ModelFile file = io::read_model_file(a.model);
    const SystemModel& model = file.model;
    const int r = resolve_delay(a.delay, file);
    const io::MeasurementTable table = io::read_measurements_file(a.csv, model);

    const std::string gain = a.gain.empty() ? (model.is_square() ? "square" : "minvar") : a.gain;
    filter::FilterConfig config;
    config.delay = r;
    config.gain_mode = gain == "square" ? filter::GainMode::FixedSquare : filter::GainMode::TimeVaryingMinVar;
    const filter::DelayedFilter flt(model, file.noise, config);

    json body;
    body["delay"] = r;
    body["gain_mode"] = std::string(filter::to_string(config.gain_mode));
    std::vector<sim::EstimateRow> rows;
    filter::FilterState final_state;
    if (table.x) {
        sim::Trajectory traj;
        traj.T = static_cast<int>(table.y.rows()) - 1;
        traj.x = *table.x;
        traj.e = *table.e;
        traj.y = table.y;
        traj.u = table.u;
        sim::ExperimentResult res = sim::run_experiment(flt, traj);
        body["error_statistics"] = report::to_json(res.stats);
        rows = std::move(res.rows);
        final_state = std::move(res.final_state);
    } else {
        rows = sim::run_filter(flt, table.y, table.u, &final_state);
        body["error_statistics"] = nullptr;
    }
    const Matrix& L = final_state.L;
    gain::GainResult g{L, gain::unbiasedness_residual(model, r, L),
                       gain == "square" ? (r == 0 ? gain::GainMethod::NoDelayClassical : gain::GainMethod::SquareInverse)
                                        : gain::GainMethod::MinVarLagrangian};
    body["gain"] = report::gain_summary(model, r, g);
    body["gain"]["frozen"] = final_state.gain_frozen;
    body["verdict"] = std::string(filter::to_string(filter::classify_convergence(model, r, L)));

    std::ostringstream csv;
    io::write_estimates(csv, model, rows);
    if (a.out.empty() || a.out == "-") {
        std::cout << csv.str();
        return kOk;
    }
    io::write_text_file(a.out, csv.str());
    body["files_written"] = {a.out};
    print(report::envelope("filter", std::move(body)));
    return kOk;
}

int cmd_reproduce(const std::string& id, const std::string& outdir) {
    const sim::ReferenceExample ex = sim::reference_example(id);
    const std::vector<sim::FactOutcome> facts = sim::check_facts(ex);
    json body;
    body["example"] = ex.id;
    body["description"] = ex.description;
    body["analysis"] = report::analysis_report(ex.model, ex.noise);
    body["facts"] = report::to_json(facts);
    json written = json::array();

    if (!outdir.empty()) {
        std::filesystem::create_directories(outdir);
        const std::string base = (std::filesystem::path(outdir) / ex.id).string();
        io::write_text_file(base + ".model.json", io::model_to_json(ex.model, ex.noise).dump(2) + "\n");
        written.push_back(base + ".model.json");
        const auto r = markov::minimal_delay(ex.model);
        if (r) {
            const sim::Trajectory traj =
                sim::simulate(ex.model, std::nullopt, ex.signals, ex.horizon, 1, Vector::Zero(ex.model.n()));
            std::ostringstream tcsv;
            io::write_trajectory(tcsv, traj);
            io::write_text_file(base + ".trajectory.csv", tcsv.str());
            written.push_back(base + ".trajectory.csv");

            filter::FilterConfig config;
            config.delay = *r;
            config.gain_mode = filter::GainMode::FixedUserSupplied;
            config.user_gain = sim::analysis_gain(ex.model, ex.noise, *r).L;
            const sim::ExperimentResult res = sim::run_experiment(filter::DelayedFilter(ex.model, ex.noise, config), traj);
            std::ostringstream ecsv;
            io::write_estimates(ecsv, ex.model, res.rows);
            io::write_text_file(base + ".estimates.csv", ecsv.str());
            written.push_back(base + ".estimates.csv");
            body["error_statistics"] = report::to_json(res.stats);
        }
    }
    body["files_written"] = written;

    bool all = true;
    for (const auto& f : facts) {
        if (!f.passed) {
            all = false;
            std::cerr << "failed: " << f.fact << " (" << f.detail << ")\n";
        }
    }
    body["all_passed"] = all;
    print(report::envelope("reproduce", std::move(body)));
    return all ? kOk : kExpectation;
}

int cmd_example(const std::string& id, const std::string& out) {
    const sim::ReferenceExample ex = sim::reference_example(id);
    write_or_print(out, io::model_to_json(ex.model, ex.noise).dump(2) + "\n");
    return kOk;
}

struct BiasArgs {
    std::string model;
    std::string delay = "auto";
    std::string gain;
    int trials = 1000;
    int T = 200;
    std::uint64_t seed = 1;
    std::vector<long> k{50, 100, 200};
    int threads = 0;
    std::string noise = "on";
};

int cmd_bias(const BiasArgs& a, const std::vector<std::string>& extras) {
    const io::ModelFile file = io::read_model_file(a.model);
    const int r = resolve_delay(a.delay, file);
    const std::string gain = a.gain.empty() ? (file.model.is_square() ? "square" : "minvar") : a.gain;
    filter::FilterConfig config;
    config.delay = r;
    config.gain_mode = gain == "square" ? filter::GainMode::FixedSquare : filter::GainMode::TimeVaryingMinVar;
    const filter::DelayedFilter flt(file.model, file.noise, config);
    sim::MonteCarloSetup setup;
    setup.signals = parse_signal_flags(extras, file.model);
    setup.trials = a.trials;
    setup.T = a.T;
    setup.seed = a.seed;
    setup.sample_times = a.k;
    setup.noise_on = a.noise == "on";
    const sim::BiasReport bias = sim::monte_carlo_bias(flt, setup, a.threads);
    json body{{"delay", r}, {"bias", report::to_json(bias)}};
    print(report::envelope("bias", std::move(body)));
    return kOk;
}

int exit_code_for(const Error& ex) {
    switch (ex.code()) {
    case ErrorCode::InfeasibleDelay:
    case ErrorCode::NoUnbiasedGainExists:
        return kInfeasible;
    default:
        return kUsage;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed state and unknown-input reconstruction for discrete LTI systems"};
    app.require_subcommand(1);

    std::string analyze_model;
    auto* analyze = app.add_subcommand("analyze", "Delay feasibility, invariant zeros and convergence verdict");
    analyze->add_option("model", analyze_model, "Model JSON file")->required();

    SimulateArgs sa;
    auto* simulate = app.add_subcommand(
        "simulate", "Simulate a trajectory.\nSignals: --e1 kind:amplitude[:period[:phase]] ... (and --u1 ... for known "
                    "inputs)\nkinds: sine, sawtooth, step, constant, prbs, gaussian");
    simulate->add_option("model", sa.model, "Model JSON file")->required();
    simulate->add_option("--T", sa.T, "Horizon (rows = T + 1)")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sa.seed, "Seed");
    simulate->add_option("--noise", sa.noise, "on|off")->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--out", sa.out, "CSV output path (stdout when absent)");
    simulate->add_option("--x0", sa.x0, "Initial state, comma separated");
    simulate->allow_extras();

    FilterArgs fa;
    auto* filt = app.add_subcommand("filter", "Run the delayed filter over a measurement CSV");
    filt->add_option("model", fa.model, "Model JSON file")->required();
    filt->add_option("measurements", fa.csv, "Measurement CSV")->required();
    filt->add_option("--delay", fa.delay, "auto or a non-negative integer");
    filt->add_option("--gain", fa.gain, "square|minvar")->check(CLI::IsMember({"square", "minvar"}));
    filt->add_option("--out", fa.out, "Estimates CSV path (stdout when absent)");

    std::string reproduce_id;
    std::string outdir;
    auto* reproduce = app.add_subcommand("reproduce", "Run a built-in example and check its expected facts");
    reproduce->add_option("id", reproduce_id, "Example id")->required();
    reproduce->add_option("--outdir", outdir, "Directory for model, trajectory and estimate files");

    std::string example_id;
    std::string example_out;
    auto* example = app.add_subcommand("example", "Print the model JSON of a built-in example");
    example->add_option("id", example_id, "Example id")->required();
    example->add_option("--out", example_out, "Output path (stdout when absent)");

    BiasArgs ba;
    auto* bias = app.add_subcommand("bias", "Monte Carlo bias of the state estimate");
    bias->add_option("model", ba.model, "Model JSON file")->required();
    bias->add_option("--delay", ba.delay, "auto or a non-negative integer");
    bias->add_option("--gain", ba.gain, "square|minvar")->check(CLI::IsMember({"square", "minvar"}));
    bias->add_option("--trials", ba.trials, "Number of trials (>= 100)");
    bias->add_option("--T", ba.T, "Horizon")->check(CLI::PositiveNumber);
    bias->add_option("--seed", ba.seed, "Seed");
    bias->add_option("--k", ba.k, "Sample times")->delimiter(',');
    bias->add_option("--threads", ba.threads, "OpenMP threads (0 = runtime default)");
    bias->add_option("--noise", ba.noise, "on|off")->check(CLI::IsMember({"on", "off"}));
    bias->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_model);
        if (*simulate) return cmd_simulate(sa, simulate->remaining());
        if (*filt) return cmd_filter(fa);
        if (*reproduce) return cmd_reproduce(reproduce_id, outdir);
        if (*example) return cmd_example(example_id, example_out);
        if (*bias) return cmd_bias(ba, bias->remaining());
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return exit_code_for(ex);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
