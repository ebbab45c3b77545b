#include "delayrec/markov.hpp"

#include "delayrec/error.hpp"

namespace delayrec::markov {

namespace {

void check_delay(const SystemModel& model, int r, RangeGuard guard) {
    if (r < 0 || (guard == RangeGuard::Enforce && r > model.n() - 1)) {
        throw Error(ErrorCode::DelayOutOfRange,
                    "delay r=" + std::to_string(r) + " outside 0.." + std::to_string(model.n() - 1));
    }
}

Matrix stack_from(const std::vector<Matrix>& blocks, int r, Eigen::Index l, Eigen::Index p) {
    Matrix s(l, (r + 1) * p);
    for (int j = 0; j <= r; ++j) {
        s.middleCols(j * p, p) = blocks[static_cast<std::size_t>(r - j)];
    }
    return s;
}

/// Roundoff scale of C A^d H: ||C||_2 max_{j<=d} ||A^j H||_2. A block that is structurally zero
/// comes out at about eps times this, and the self-relative default cutoff would count that
/// noise as full rank.
std::vector<double> markov_scales(const SystemModel& model, int count) {
    std::vector<double> out;
    const double c_norm = model.C().operatorNorm();
    Matrix propagated = model.H();
    double worst = 0.0;
    for (int d = 0; d < count; ++d) {
        worst = std::max(worst, c_norm * propagated.operatorNorm());
        out.push_back(worst);
        propagated = (model.A() * propagated).eval();
    }
    return out;
}

int scaled_rank(const Matrix& m, double scale, std::optional<double> tol) {
    if (tol) {
        return numerical_rank(m, tol);
    }
    if (m.size() == 0) {
        return 0;
    }
    const double dim = static_cast<double>(std::max(m.rows(), m.cols()));
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    const double cutoff = std::max(linalg::default_rank_tolerance(sv, m.rows(), m.cols()), dim * kRankRcond * scale);
    return static_cast<int>((sv.array() > cutoff).count());
}

int stack_rank(const std::vector<Matrix>& blocks, const std::vector<double>& scales, int r, Eigen::Index l,
               Eigen::Index p, std::optional<double> tol) {
    if (r < 0) {
        return 0;
    }
    return scaled_rank(stack_from(blocks, r, l, p), scales[static_cast<std::size_t>(r)], tol);
}

Matrix toeplitz_from(const std::vector<Matrix>& blocks, int r, Eigen::Index l, Eigen::Index p) {
    Matrix m = Matrix::Zero((r + 1) * l, (r + 1) * p);
    for (int i = 0; i <= r; ++i) {
        for (int j = 0; j <= i; ++j) {
            m.block(i * l, j * p, l, p) = blocks[static_cast<std::size_t>(i - j)];
        }
    }
    return m;
}

} // namespace

int markov_rank(const Matrix& block, double scale) { return scaled_rank(block, scale, std::nullopt); }

double markov_scale(const SystemModel& model, int d) {
    return markov_scales(model, d + 1).back();
}

std::vector<Matrix> markov_sequence(const SystemModel& model, int count) {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    Matrix propagated = model.H();
    for (int d = 0; d < count; ++d) {
        out.push_back(model.C() * propagated);
        propagated = (model.A() * propagated).eval();
    }
    return out;
}

Matrix markov_parameter(const SystemModel& model, int d) {
    if (d < 0 || d > 2 * model.n()) {
        throw Error(ErrorCode::DelayOutOfRange, "Markov index d=" + std::to_string(d) + " outside 0..2n");
    }
    return markov_sequence(model, d + 1).back();
}

Matrix row_stack_S(const SystemModel& model, int r, RangeGuard guard) {
    check_delay(model, r, guard);
    return stack_from(markov_sequence(model, r + 1), r, model.l(), model.p());
}

Matrix toeplitz_M(const SystemModel& model, int r, RangeGuard guard) {
    check_delay(model, r, guard);
    return toeplitz_from(markov_sequence(model, r + 1), r, model.l(), model.p());
}

bool exists_unbiased_gain(const SystemModel& model, int r, RangeGuard guard, std::optional<double> tol) {
    check_delay(model, r, guard);
    const auto blocks = markov_sequence(model, r + 1);
    const auto scales = markov_scales(model, r + 1);
    const int diff = stack_rank(blocks, scales, r, model.l(), model.p(), tol) -
                     stack_rank(blocks, scales, r - 1, model.l(), model.p(), tol);
    return diff == model.p();
}

bool is_delay_invertible(const SystemModel& model, int r, RangeGuard guard) {
    check_delay(model, r, guard);
    const auto blocks = markov_sequence(model, r + 1);
    const auto scales = markov_scales(model, r + 1);
    const auto rs = static_cast<std::size_t>(r);
    const int current = scaled_rank(toeplitz_from(blocks, r, model.l(), model.p()), scales[rs], std::nullopt);
    const int previous =
        r == 0 ? 0 : scaled_rank(toeplitz_from(blocks, r - 1, model.l(), model.p()), scales[rs - 1], std::nullopt);
    return current - previous == model.p();
}

std::optional<int> minimal_delay(const SystemModel& model) {
    for (int r = 0; r < model.n(); ++r) {
        if (exists_unbiased_gain(model, r)) {
            return r;
        }
    }
    return std::nullopt;
}

DelayAnalysis analyze_delays(const SystemModel& model) {
    const int n = static_cast<int>(model.n());
    const Eigen::Index l = model.l();
    const Eigen::Index p = model.p();
    const auto blocks = markov_sequence(model, n + 1);
    const auto scales = markov_scales(model, n + 1);

    DelayAnalysis out;
    for (int d = 0; d <= n; ++d) {
        const auto i = static_cast<std::size_t>(d);
        out.markov_ranks.emplace_back(d, markov_rank(blocks[i], scales[i]));
    }
    int previous_s = 0;
    int previous_m = 0;
    for (int r = 0; r < n; ++r) {
        const int s_rank = stack_rank(blocks, scales, r, l, p, std::nullopt);
        const int m_rank = scaled_rank(toeplitz_from(blocks, r, l, p), scales[static_cast<std::size_t>(r)], std::nullopt);
        out.s_ranks.emplace_back(r, s_rank);
        if (s_rank - previous_s == p) {
            out.feasible_delays.push_back(r);
        }
        if (m_rank - previous_m == p) {
            out.invertible_delays.push_back(r);
        }
        previous_s = s_rank;
        previous_m = m_rank;
    }
    if (!out.feasible_delays.empty()) {
        out.minimal_delay = out.feasible_delays.front();
    }
    out.conjecture_violated = out.feasible_delays.size() > 1;
    return out;
}

} // namespace delayrec::markov
