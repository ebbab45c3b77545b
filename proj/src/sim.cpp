#include "delayrec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "delayrec/error.hpp"

namespace delayrec::sim {

Matrix psd_factor(const Matrix& s) {
    const Eigen::Index n = s.rows();
    if (n == 0) {
        return Matrix(0, 0);
    }
    Eigen::LDLT<Matrix> ldlt(s);
    const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    const Matrix lower = ldlt.matrixL();
    Matrix factor = lower * d.asDiagonal();
    return ldlt.transpositionsP().transpose() * factor;
}

Trajectory simulate_stream(const SystemModel& model, const std::optional<NoiseSpec>& noise,
                           const InputSignals& signals, int T, std::uint64_t signal_seed, std::uint64_t noise_seed,
                           const Vector& x0) {
    const Eigen::Index n = model.n();
    const Eigen::Index l = model.l();
    const Eigen::Index p = model.p();
    const Eigen::Index m = model.m();
    if (T < 1) {
        throw Error(ErrorCode::DimensionMismatch, "horizon T must be >= 1");
    }
    if (static_cast<Eigen::Index>(signals.unknown.size()) != p) {
        throw Error(ErrorCode::DimensionMismatch, "need " + std::to_string(p) + " unknown-input signals, got " +
                                                      std::to_string(signals.unknown.size()));
    }
    if (static_cast<Eigen::Index>(signals.known.size()) != m) {
        throw Error(ErrorCode::DimensionMismatch, "need " + std::to_string(m) + " known-input signals, got " +
                                                      std::to_string(signals.known.size()));
    }
    if (x0.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "x0 must have n entries");
    }

    Trajectory out;
    out.T = T;
    out.seed = signal_seed;
    const Eigen::Index rows = T + 1;
    out.x = Matrix::Zero(rows, n);
    out.y = Matrix::Zero(rows, l);
    out.e = Matrix::Zero(rows, p);
    out.u = Matrix::Zero(rows, m);
    out.w = Matrix::Zero(rows, n);
    out.v = Matrix::Zero(rows, l);

    for (Eigen::Index k = 0; k < rows; ++k) {
        for (Eigen::Index j = 0; j < p; ++j) {
            out.e(k, j) = signals.unknown[static_cast<std::size_t>(j)].value(k, signal_seed, static_cast<std::uint64_t>(j));
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            out.u(k, j) =
                signals.known[static_cast<std::size_t>(j)].value(k, signal_seed, static_cast<std::uint64_t>(p + j));
        }
    }

    if (noise) {
        const Matrix fq = psd_factor(noise->Q());
        const Matrix fr = psd_factor(noise->R());
        std::seed_seq seq{static_cast<std::uint32_t>(noise_seed), static_cast<std::uint32_t>(noise_seed >> 32),
                          0x243f6a88U};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss;
        Vector zn(n);
        Vector zl(l);
        for (Eigen::Index k = 0; k < rows; ++k) {
            for (Eigen::Index i = 0; i < n; ++i) {
                zn(i) = gauss(rng);
            }
            for (Eigen::Index i = 0; i < l; ++i) {
                zl(i) = gauss(rng);
            }
            out.w.row(k) = (fq * zn).transpose();
            out.v.row(k) = (fr * zl).transpose();
        }
    }

    Vector x = x0;
    for (Eigen::Index k = 0; k < rows; ++k) {
        out.x.row(k) = x.transpose();
        const Vector uk = out.u.row(k).transpose();
        out.y.row(k) = (model.C() * x + model.D() * uk + out.v.row(k).transpose()).transpose();
        x = model.A() * x + model.B() * uk + model.H() * out.e.row(k).transpose() + out.w.row(k).transpose();
    }
    return out;
}

Trajectory simulate(const SystemModel& model, const std::optional<NoiseSpec>& noise, const InputSignals& signals,
                    int T, std::uint64_t seed, const Vector& x0) {
    return simulate_stream(model, noise, signals, T, seed, seed, x0);
}

SystemModel compartmental_model(int n, double alpha, double beta, const std::vector<int>& input_compartments,
                                const std::vector<int>& output_compartments) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
        throw Error(ErrorCode::BadCoefficient, "need 0 < alpha < 1 and 0 < beta < 1");
    }
    if (n < 2) {
        throw Error(ErrorCode::BadIndices, "need at least two compartments");
    }
    auto check = [n](const std::vector<int>& idx, const char* what) {
        if (idx.empty()) {
            throw Error(ErrorCode::BadIndices, std::string(what) + " compartment list is empty");
        }
        std::set<int> seen;
        for (int i : idx) {
            if (i < 1 || i > n || !seen.insert(i).second) {
                throw Error(ErrorCode::BadIndices, std::string(what) + " compartment " + std::to_string(i) +
                                                       " is out of range or repeated");
            }
        }
    };
    check(input_compartments, "input");
    check(output_compartments, "output");

    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = 1.0 - beta - alpha;
        if (i + 1 < n) {
            a(i, i + 1) = alpha;
            a(i + 1, i) = alpha;
        }
    }
    Matrix h = Matrix::Zero(n, static_cast<Eigen::Index>(input_compartments.size()));
    for (std::size_t j = 0; j < input_compartments.size(); ++j) {
        h(input_compartments[j] - 1, static_cast<Eigen::Index>(j)) = 1.0;
    }
    Matrix c = Matrix::Zero(static_cast<Eigen::Index>(output_compartments.size()), n);
    for (std::size_t i = 0; i < output_compartments.size(); ++i) {
        c(static_cast<Eigen::Index>(i), output_compartments[i] - 1) = 1.0;
    }
    return validate_model(RawModel{a, h, c, std::nullopt, std::nullopt});
}

std::vector<EstimateRow> run_filter(const filter::DelayedFilter& filter, const Matrix& y, const Matrix& u,
                                    filter::FilterState* final_state) {
    const Eigen::Index m = filter.model().m();
    if (y.cols() != filter.model().l() || u.cols() != m || (m > 0 && u.rows() != y.rows())) {
        throw Error(ErrorCode::DimensionMismatch, "measurement table does not match the model");
    }
    std::vector<EstimateRow> rows;
    rows.reserve(static_cast<std::size_t>(y.rows()));
    filter::FilterState state = filter.initial_state();
    const Vector no_input(0);
    for (Eigen::Index k = 0; k < y.rows(); ++k) {
        auto result = m > 0 ? filter.step(state, y.row(k).transpose(), u.row(k).transpose())
                            : filter.step(state, y.row(k).transpose(), no_input);
        rows.push_back({static_cast<long>(k), std::move(result.output)});
        state = std::move(result.state);
    }
    if (final_state) {
        *final_state = std::move(state);
    }
    return rows;
}

double rms(const Matrix& m, Eigen::Index first_row) {
    if (first_row >= m.rows() || m.cols() == 0) {
        return 0.0;
    }
    const auto block = m.bottomRows(m.rows() - first_row);
    return std::sqrt(block.squaredNorm() / static_cast<double>(block.size()));
}

double log_error_slope(const ErrorStats& stats, long k_first, long k_last) {
    double sk = 0.0, sl = 0.0, skk = 0.0, skl = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < stats.k.size(); ++i) {
        const long k = stats.k[i];
        if (k < k_first || k > k_last) {
            continue;
        }
        const double norm = stats.state_error.row(static_cast<Eigen::Index>(i)).norm();
        if (!(norm > 0.0)) {
            continue;
        }
        const double kd = static_cast<double>(k);
        const double lg = std::log(norm);
        sk += kd;
        sl += lg;
        skk += kd * kd;
        skl += kd * lg;
        ++count;
    }
    if (count < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return (count * skl - sk * sl) / (count * skk - sk * sk);
}

ExperimentResult run_experiment(const filter::DelayedFilter& filter, const Trajectory& trajectory) {
    const SystemModel& model = filter.model();
    if (trajectory.x.cols() != model.n() || trajectory.e.cols() != model.p()) {
        throw Error(ErrorCode::DimensionMismatch, "trajectory does not match the model");
    }
    ExperimentResult out;
    out.rows = run_filter(filter, trajectory.y, trajectory.u, &out.final_state);
    const int r = filter.delay();

    std::vector<const EstimateRow*> emitted;
    for (const auto& row : out.rows) {
        if (row.output) {
            emitted.push_back(&row);
        }
    }
    const auto count = static_cast<Eigen::Index>(emitted.size());
    ErrorStats& stats = out.stats;
    stats.state_error = Matrix::Zero(count, model.n());
    stats.input_error = Matrix::Zero(count, model.p());
    for (Eigen::Index i = 0; i < count; ++i) {
        const EstimateRow& row = *emitted[static_cast<std::size_t>(i)];
        stats.k.push_back(row.k);
        stats.state_error.row(i) = trajectory.x.row(row.k - r) - row.output->state_estimate.transpose();
        if (row.output->input_estimate) {
            stats.input_error.row(i) = trajectory.e.row(row.k - r - 1) - row.output->input_estimate->transpose();
        } else {
            stats.input_error.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
        }
    }
    stats.state_rms = rms(stats.state_error);
    stats.input_rms = rms(stats.input_error);
    stats.state_max_abs = count > 0 ? stats.state_error.cwiseAbs().maxCoeff() : 0.0;
    stats.input_max_abs = count > 0 ? stats.input_error.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

ExperimentResult run_experiment(const SystemModel& model, const NoiseSpec& noise, const filter::FilterConfig& config,
                                const Trajectory& trajectory) {
    return run_experiment(filter::DelayedFilter(model, noise, config), trajectory);
}

} // namespace delayrec::sim
