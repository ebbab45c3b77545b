#include "delayrec/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <optional>
#include <tuple>

#include "delayrec/error.hpp"

namespace delayrec::zeros {

namespace {

constexpr double kUnitCircleBand = 1e-9;
constexpr double kClusterRadius = 1e-6;
constexpr std::uint64_t kSampleSeed = 0x5eed'2013ULL;

/// (A, B, C, D) of the zero problem: lambda x = A x + B u, 0 = C x + D u.
struct ZeroSystem {
    Matrix A, B, C, D;
};

/// Right singular vectors of `m` reordered as [null space, row space], plus the rank.
std::pair<Matrix, Eigen::Index> split_right(const Matrix& m, double tol) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const auto rank = static_cast<Eigen::Index>((sv.array() > tol).count());
    const Eigen::Index cols = m.cols();
    Matrix v(cols, cols);
    v.leftCols(cols - rank) = svd.matrixV().rightCols(cols - rank);
    v.rightCols(rank) = svd.matrixV().leftCols(rank);
    return {v, rank};
}

/**
 * Repeatedly removes output constraints that do not involve u. With rows of [C D] rotated so
 * that [C1 0; C2 D2] has D2 of full row rank, C1 x = 0 pins the states in the row space of C1
 * to zero; their update equation becomes a new constraint on the remaining states. Each pass
 * is an equivalence for every finite lambda and strips one layer of infinite zero structure
 * exactly, which QZ on a pencil with higher-index infinite blocks cannot do.
 */
void deflate_constraints(ZeroSystem& s, double tol) {
    for (;;) {
        const Eigen::Index n = s.A.rows();
        const Eigen::Index l = s.C.rows();
        if (l == 0) {
            return;
        }
        // rotate rows: u-free rows first
        auto [u_rot, rho] = split_right(s.D.transpose(), tol);
        const Matrix ct = u_rot.transpose() * s.C;
        const Matrix dt = u_rot.transpose() * s.D;
        const Eigen::Index k = l - rho;
        if (k == 0) {
            return;
        }
        const Matrix c1 = ct.topRows(k);
        Matrix v;
        Eigen::Index mu = 0;
        if (n > 0) {
            std::tie(v, mu) = split_right(c1, tol);
        }
        if (mu == 0) {
            s.C = ct.bottomRows(rho);
            s.D = dt.bottomRows(rho);
            return;
        }
        const Eigen::Index n1 = n - mu;
        const Matrix a = v.transpose() * s.A * v;
        const Matrix b = v.transpose() * s.B;
        const Matrix c2 = ct.bottomRows(rho) * v;
        ZeroSystem next;
        next.A = a.topLeftCorner(n1, n1);
        next.B = b.topRows(n1);
        next.C.resize(mu + rho, n1);
        next.C << a.bottomLeftCorner(mu, n1), c2.leftCols(n1);
        next.D.resize(mu + rho, s.D.cols());
        next.D << b.bottomRows(mu), dt.bottomRows(rho);
        s = std::move(next);
    }
}

/// Finite zeros as eigenvalues of the reduced zero dynamics; nullopt if the reduction does not
/// end in an invertible feedthrough.
std::optional<std::vector<Complex>> reduced_zeros(const SystemModel& model) {
    ZeroSystem s{model.A(), model.H(), model.C(), Matrix::Zero(model.l(), model.p())};
    Matrix whole(model.n() + model.l(), model.n() + model.p());
    whole << model.A(), model.H(), model.C(), Matrix::Zero(model.l(), model.p());
    const double tol = static_cast<double>(whole.rows() + whole.cols()) * 1e-12 * whole.norm();

    deflate_constraints(s, tol);
    // dual system: the rank-drop points of the transposed system matrix are the same
    ZeroSystem dual{s.A.transpose(), s.C.transpose(), s.B.transpose(), s.D.transpose()};
    deflate_constraints(dual, tol);
    if (dual.A.rows() == 0) {
        return std::vector<Complex>{};
    }
    if (dual.D.rows() != dual.D.cols() || dual.D.rows() == 0) {
        return std::nullopt;
    }
    Eigen::FullPivLU<Matrix> lu(dual.D);
    if (!lu.isInvertible()) {
        return std::nullopt;
    }
    const Matrix dynamics = dual.A - dual.B * lu.solve(dual.C);
    return linalg::structured_eigenvalues(dynamics);
}

} // namespace

std::string_view to_string(ZeroClass c) {
    switch (c) {
    case ZeroClass::NoZeros: return "NoZeros";
    case ZeroClass::AllInsideUnitCircle: return "AllInsideUnitCircle";
    case ZeroClass::OnUnitCircle: return "OnUnitCircle";
    case ZeroClass::OutsideUnitCircle: return "OutsideUnitCircle";
    }
    return "Unknown";
}

std::vector<Complex> ZeroReport::expanded() const {
    std::vector<Complex> out;
    for (const auto& z : zeros) {
        out.insert(out.end(), static_cast<std::size_t>(z.multiplicity), z.value);
    }
    return out;
}

int ZeroReport::total_multiplicity() const {
    int total = 0;
    for (const auto& z : zeros) {
        total += z.multiplicity;
    }
    return total;
}

Pencil rosenbrock_pencil(const SystemModel& model) {
    const Eigen::Index n = model.n();
    const Eigen::Index l = model.l();
    const Eigen::Index p = model.p();
    Pencil out{Matrix::Zero(n + l, n + p), Matrix::Zero(n + l, n + p)};
    out.E.topLeftCorner(n, n).setIdentity();
    out.F.topLeftCorner(n, n) = model.A();
    out.F.topRightCorner(n, p) = -model.H();
    out.F.bottomLeftCorner(l, n) = -model.C();
    return out;
}

ComplexMatrix rosenbrock_matrix(const SystemModel& model, Complex s) {
    const Pencil pencil = rosenbrock_pencil(model);
    return s * pencil.E.cast<Complex>() - pencil.F.cast<Complex>();
}

int normal_rank(const SystemModel& model) {
    const auto poles = linalg::eigenvalues(model.A());
    std::mt19937_64 rng(kSampleSeed);
    std::uniform_real_distribution<double> modulus(1.5, 3.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    int best = 0;
    int accepted = 0;
    for (int attempt = 0; accepted < 5 && attempt < 200; ++attempt) {
        const Complex s = std::polar(modulus(rng), angle(rng));
        const bool near_pole =
            std::any_of(poles.begin(), poles.end(), [&](const Complex& pole) { return std::abs(s - pole) < 0.05; });
        if (near_pole) {
            continue;
        }
        ++accepted;
        best = std::max(best, linalg::numerical_rank(rosenbrock_matrix(model, s)));
    }
    return best;
}

ZeroReport invariant_zeros(const SystemModel& model) {
    const Eigen::Index n = model.n();
    const Eigen::Index p = model.p();

    ZeroReport report;
    report.normal_rank = normal_rank(model);
    if (report.normal_rank < n + p) {
        throw Error(ErrorCode::PencilDegenerate, "normal rank of Z(s) is " + std::to_string(report.normal_rank) +
                                                     " < n+p=" + std::to_string(n + p));
    }

    const auto reduced = reduced_zeros(model);
    if (!reduced) {
        throw Error(ErrorCode::PencilDegenerate, "zero reduction did not reach an invertible feedthrough");
    }
    const std::vector<Complex>& candidates = *reduced;

    // cluster into distinct zeros with multiplicity
    std::vector<bool> used(candidates.size(), false);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (used[i]) {
            continue;
        }
        Complex sum = candidates[i];
        int count = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            if (!used[j] && std::abs(candidates[j] - candidates[i]) <= kClusterRadius) {
                used[j] = true;
                sum += candidates[j];
                ++count;
            }
        }
        Complex value = sum / static_cast<double>(count);
        if (std::abs(value.imag()) <= 1e-9 * (1.0 + std::abs(value.real()))) {
            value.imag(0.0);
        }
        report.zeros.push_back({value, count});
    }
    std::sort(report.zeros.begin(), report.zeros.end(), [](const InvariantZero& a, const InvariantZero& b) {
        if (a.value.real() != b.value.real()) {
            return a.value.real() < b.value.real();
        }
        return a.value.imag() < b.value.imag();
    });
    report.classification = classify_zeros(report);
    return report;
}

ZeroClass classify_zeros(const ZeroReport& report) {
    if (report.zeros.empty()) {
        return ZeroClass::NoZeros;
    }
    bool on_circle = false;
    for (const auto& z : report.zeros) {
        const double mag = std::abs(z.value);
        if (mag > 1.0 + kUnitCircleBand) {
            return ZeroClass::OutsideUnitCircle;
        }
        if (mag >= 1.0 - kUnitCircleBand) {
            on_circle = true;
        }
    }
    return on_circle ? ZeroClass::OnUnitCircle : ZeroClass::AllInsideUnitCircle;
}

} // namespace delayrec::zeros
