#include "delayrec/gain.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "delayrec/error.hpp"
#include "delayrec/markov.hpp"

namespace delayrec::gain {

namespace {

constexpr double kMaxCondition = 1e12;

Matrix target_stack(const SystemModel& model, int r) {
    Matrix target = Matrix::Zero(model.n(), (r + 1) * model.p());
    target.leftCols(model.p()) = model.H();
    return target;
}

double condition_number(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

/// Blocks C A^d H for d < r must vanish relative to the scale of S_r.
bool lower_markov_vanish(const std::vector<Matrix>& blocks, int r) {
    double scale = 0.0;
    for (const auto& b : blocks) {
        scale += b.squaredNorm();
    }
    const double tol = 1e-10 * (1.0 + std::sqrt(scale));
    for (int d = 0; d < r; ++d) {
        if (blocks[static_cast<std::size_t>(d)].norm() > tol) {
            return false;
        }
    }
    return true;
}

struct Innovation {
    Matrix T;     ///< Q + A P A^T
    Matrix gain;  ///< T A^{rT} C^T
    Matrix V;     ///< innovation covariance
    Eigen::LLT<Matrix> chol;
};

Innovation innovation_terms(const SystemModel& model, const NoiseSpec& noise, int r, const CovarianceState& prev) {
    if (prev.P.rows() != model.n() || prev.P.cols() != model.n()) {
        throw Error(ErrorCode::DimensionMismatch, "previous covariance must be n x n");
    }
    Innovation out;
    out.T = noise.Q() + model.A() * prev.P * model.A().transpose();
    const Matrix c_ar = model.C() * linalg::matrix_power(model.A(), r);
    out.gain = out.T * c_ar.transpose();
    out.V = c_ar * out.T * c_ar.transpose() + noise.R();
    Matrix c_aj = model.C();
    for (int j = r - 1; j >= 0; --j) {
        // C A^j for j = 0..r-1, i.e. C A^{r-i} for i = 1..r
        out.V += c_aj * noise.Q() * c_aj.transpose();
        c_aj = (c_aj * model.A()).eval();
    }
    out.V = 0.5 * (out.V + out.V.transpose());
    const Vector eig = linalg::symmetric_eigenvalues(out.V);
    if (!(eig(0) > 0.0) || eig(eig.size() - 1) / eig(0) > kMaxCondition) {
        throw Error(ErrorCode::InnovationCovarianceSingular, "innovation covariance is singular or ill-conditioned");
    }
    out.chol.compute(out.V);
    if (out.chol.info() != Eigen::Success) {
        throw Error(ErrorCode::InnovationCovarianceSingular, "Cholesky factorisation of V failed");
    }
    return out;
}

std::string sci_string(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

GainResult finish(const SystemModel& model, int r, Matrix L, GainMethod method) {
    GainResult out{std::move(L), 0.0, method};
    out.residual = unbiasedness_residual(model, r, out.L);
    if (!(out.residual <= residual_tolerance(model))) {
        throw Error(ErrorCode::ConstraintViolated,
                    "gain residual " + sci_string(out.residual) + " exceeds tolerance " +
                        sci_string(residual_tolerance(model)));
    }
    return out;
}

} // namespace

std::string_view to_string(GainMethod method) {
    switch (method) {
    case GainMethod::SquareInverse: return "SquareInverse";
    case GainMethod::MinVarLagrangian: return "MinVarLagrangian";
    case GainMethod::SimplifiedMinVar: return "SimplifiedMinVar";
    case GainMethod::NoDelayClassical: return "NoDelayClassical";
    }
    return "Unknown";
}

CovarianceState CovarianceState::from(const Matrix& p) {
    CovarianceState out;
    out.P = 0.5 * (p + p.transpose());
    out.trace = out.P.trace();
    return out;
}

double residual_tolerance(const SystemModel& model) {
    return 1e-9 * (1.0 + model.H().norm());
}

double unbiasedness_residual(const SystemModel& model, int r, const Matrix& L) {
    const Matrix s = markov::row_stack_S(model, r, markov::RangeGuard::Diagnostic);
    return (L * s - target_stack(model, r)).norm();
}

GainResult square_gain(const SystemModel& model, int r) {
    if (!model.is_square()) {
        throw Error(ErrorCode::NotSquare, "square gain needs l = p, got l=" + std::to_string(model.l()) +
                                              ", p=" + std::to_string(model.p()));
    }
    (void)markov::row_stack_S(model, r); // range check
    const auto blocks = markov::markov_sequence(model, r + 1);
    const Matrix& leading = blocks[static_cast<std::size_t>(r)];
    if (condition_number(leading) >= kMaxCondition) {
        throw Error(ErrorCode::SingularMarkovParameter, "C A^r H is singular for r=" + std::to_string(r));
    }
    if (!lower_markov_vanish(blocks, r)) {
        throw Error(ErrorCode::LowerMarkovNonzero,
                    "square system with C A^d H != 0 for some d < " + std::to_string(r) + ": no unbiased gain");
    }
    Matrix L = leading.transpose().partialPivLu().solve(model.H().transpose()).transpose();
    return finish(model, r, std::move(L), r == 0 ? GainMethod::NoDelayClassical : GainMethod::SquareInverse);
}

GainResult minvar_gain(const SystemModel& model, const NoiseSpec& noise, int r, const CovarianceState& prev,
                       const MinVarOptions& options) {
    if (!markov::exists_unbiased_gain(model, r)) {
        throw Error(ErrorCode::NoUnbiasedGainExists, "rank(S_r) - rank(S_{r-1}) != p for r=" + std::to_string(r));
    }
    const Innovation inn = innovation_terms(model, noise, r, prev);
    const Matrix s = markov::row_stack_S(model, r);

    // Z = W^T W with W = chol(V)^{-1} S, so N Z^+ S^T V^{-1} = N W^+ chol(V)^{-1}. Working with W^+
    // avoids squaring the conditioning of S_r, and cutting W's singular values keeps the rank
    // decision on the scale of S_r.
    const Matrix w = inn.chol.matrixL().solve(s);
    Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = sv(0) * static_cast<double>(std::max(w.rows(), w.cols())) * options.pinv_rcond;
    Vector inv = Vector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            inv(i) = 1.0 / sv(i);
        }
    }
    const Matrix w_pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();

    const Matrix gain_vinv = inn.chol.solve(inn.gain.transpose()).transpose(); // T A^{rT} C^T V^{-1}
    const Matrix n_k = target_stack(model, r) - gain_vinv * s;
    const Matrix correction = inn.chol.matrixU().solve((n_k * w_pinv).transpose()).transpose();
    Matrix L = gain_vinv + correction;
    return finish(model, r, std::move(L), GainMethod::MinVarLagrangian);
}

GainResult simplified_minvar_gain(const SystemModel& model, const NoiseSpec& noise, int r,
                                  const CovarianceState& prev) {
    (void)markov::row_stack_S(model, r);
    const auto blocks = markov::markov_sequence(model, r + 1);
    const Matrix& leading = blocks[static_cast<std::size_t>(r)];
    if (!lower_markov_vanish(blocks, r)) {
        throw Error(ErrorCode::PreconditionViolated, "C A^d H must vanish for d = 0..r-1");
    }
    if (markov::markov_rank(leading, markov::markov_scale(model, r)) != model.p()) {
        throw Error(ErrorCode::PreconditionViolated, "C A^r H must have full column rank p");
    }
    const Innovation inn = innovation_terms(model, noise, r, prev);
    const Matrix vinv_leading = inn.chol.solve(leading);
    const Matrix gram = leading.transpose() * vinv_leading;
    const Matrix gain_vinv = inn.chol.solve(inn.gain.transpose()).transpose();
    const Matrix phi = (model.H() - gain_vinv * leading) * gram.inverse();
    const Matrix numerator = inn.gain + phi * leading.transpose();
    Matrix L = inn.chol.solve(numerator.transpose()).transpose();
    return finish(model, r, std::move(L), GainMethod::SimplifiedMinVar);
}

CovarianceState covariance_update(const SystemModel& model, const NoiseSpec& noise, int r, const Matrix& L,
                                  const CovarianceState& prev) {
    if (L.rows() != model.n() || L.cols() != model.l()) {
        throw Error(ErrorCode::DimensionMismatch, "gain must be n x l");
    }
    const double residual = unbiasedness_residual(model, r, L);
    if (!(residual <= residual_tolerance(model))) {
        throw Error(ErrorCode::ConstraintViolated,
                    "covariance recursion needs an unbiased gain, residual " + std::to_string(residual));
    }
    const Eigen::Index n = model.n();
    const Matrix ar = linalg::matrix_power(model.A(), r);
    const Matrix error_dynamics = model.A() - L * model.C() * ar * model.A();
    const Matrix process_map = Matrix::Identity(n, n) - L * model.C() * ar;

    Matrix p = error_dynamics * prev.P * error_dynamics.transpose() +
               process_map * noise.Q() * process_map.transpose() + L * noise.R() * L.transpose();
    Matrix lc_aj = L * model.C();
    for (int j = r - 1; j >= 0; --j) {
        p += lc_aj * noise.Q() * lc_aj.transpose();
        lc_aj = (lc_aj * model.A()).eval();
    }
    return CovarianceState::from(p);
}

SteadyState steady_state_gain(const SystemModel& model, const NoiseSpec& noise, int r, std::optional<Matrix> p0,
                              int max_iterations) {
    if (!markov::exists_unbiased_gain(model, r)) {
        throw Error(ErrorCode::NoUnbiasedGainExists, "no unbiased gain for r=" + std::to_string(r));
    }
    CovarianceState current = CovarianceState::from(p0.value_or(Matrix::Identity(model.n(), model.n())));
    SteadyState out;
    out.gain = minvar_gain(model, noise, r, current);
    out.covariance = current;
    const double divergence_bound = 1e12 * (1.0 + current.P.norm());
    for (int it = 1; it <= max_iterations; ++it) {
        // A diverging covariance eventually costs the gain its constraint accuracy; stop there.
        std::optional<GainResult> g;
        try {
            g = minvar_gain(model, noise, r, current);
        } catch (const Error&) {
            break;
        }
        const CovarianceState next = covariance_update(model, noise, r, g->L, current);
        if (!next.P.allFinite() || next.P.norm() > divergence_bound) {
            break;
        }
        out.gain = *g;
        out.covariance = next;
        out.iterations = it;
        if ((next.P - current.P).norm() <= 1e-10 * (1.0 + next.P.norm())) {
            out.converged = true;
            break;
        }
        current = next;
    }
    return out;
}

} // namespace delayrec::gain
