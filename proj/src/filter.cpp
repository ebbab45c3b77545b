#include "delayrec/filter.hpp"

#include "delayrec/error.hpp"
#include "delayrec/markov.hpp"

namespace delayrec::filter {

namespace {

constexpr double kFreezeTolerance = 1e-12;

} // namespace

std::string_view to_string(GainMode mode) {
    switch (mode) {
    case GainMode::FixedSquare: return "FixedSquare";
    case GainMode::TimeVaryingMinVar: return "TimeVaryingMinVar";
    case GainMode::FixedUserSupplied: return "FixedUserSupplied";
    }
    return "Unknown";
}

std::string_view to_string(ConvergenceVerdict verdict) {
    switch (verdict) {
    case ConvergenceVerdict::DeadbeatUnbiased: return "DeadbeatUnbiased";
    case ConvergenceVerdict::AsymptoticallyUnbiased: return "AsymptoticallyUnbiased";
    case ConvergenceVerdict::PersistentError: return "PersistentError";
    case ConvergenceVerdict::Divergent: return "Divergent";
    }
    return "Unknown";
}

DelayedFilter::DelayedFilter(SystemModel model, NoiseSpec noise, FilterConfig config)
    : model_(std::move(model)), noise_(std::move(noise)), config_(std::move(config)) {
    const int r = config_.delay;
    const Eigen::Index n = model_.n();
    if (r < 0 || r > n - 1 || !markov::exists_unbiased_gain(model_, r)) {
        throw Error(ErrorCode::InfeasibleDelay, "no unbiased gain exists for delay r=" + std::to_string(r));
    }
    if (config_.initial_estimate && config_.initial_estimate->size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "initial estimate must have n entries");
    }
    if (config_.initial_covariance) {
        const Matrix& p0 = *config_.initial_covariance;
        if (p0.rows() != n || p0.cols() != n) {
            throw Error(ErrorCode::DimensionMismatch, "initial covariance must be n x n");
        }
        if (!linalg::is_symmetric(p0)) {
            throw Error(ErrorCode::NotSymmetric, "initial covariance is not symmetric");
        }
        const Vector eig = linalg::symmetric_eigenvalues(p0);
        if (eig(0) < -1e-10 * (1.0 + std::max(0.0, eig(eig.size() - 1)))) {
            throw Error(ErrorCode::QIndefinite, "initial covariance is indefinite");
        }
    }

    lifted_a_ = linalg::matrix_power(model_.A(), r + 1);
    Matrix ajb = model_.B();
    for (int j = 0; j <= r; ++j) {
        a_j_b_.push_back(ajb);
        ajb = (model_.A() * ajb).eval();
    }
    const Matrix leading = markov::markov_parameter(model_, r);
    input_recoverable_ = markov::markov_rank(leading, markov::markov_scale(model_, r)) == model_.p();
    if (model_.is_square() && input_recoverable_) {
        input_extractor_ = leading.partialPivLu().inverse();
    } else {
        // K S_r = [I_p 0 ... 0]: the innovation also carries C A^d H e for d < r when those blocks
        // are nonzero, and K removes them. Reduces to (C A^r H)^+ when they vanish.
        input_extractor_ = linalg::pseudo_inverse(markov::row_stack_S(model_, r)).topRows(model_.p());
    }

    switch (config_.gain_mode) {
    case GainMode::FixedSquare:
        initial_gain_ = gain::square_gain(model_, r).L;
        break;
    case GainMode::TimeVaryingMinVar: {
        const Matrix p0 = config_.initial_covariance.value_or(Matrix::Identity(n, n));
        initial_gain_ = gain::minvar_gain(model_, noise_, r, gain::CovarianceState::from(p0)).L;
        break;
    }
    case GainMode::FixedUserSupplied:
        if (!config_.user_gain) {
            throw Error(ErrorCode::PreconditionViolated, "FixedUserSupplied mode needs a gain");
        }
        if (config_.user_gain->rows() != n || config_.user_gain->cols() != model_.l()) {
            throw Error(ErrorCode::DimensionMismatch, "user gain must be n x l");
        }
        if (!config_.user_gain->allFinite()) {
            throw Error(ErrorCode::GainSingular, "user gain has non-finite entries");
        }
        initial_gain_ = *config_.user_gain;
        break;
    }
}

FilterState DelayedFilter::initial_state() const {
    const Eigen::Index n = model_.n();
    FilterState state;
    state.k = 0;
    state.xhat_delayed = config_.initial_estimate.value_or(Vector::Zero(n));
    state.covariance = gain::CovarianceState::from(config_.initial_covariance.value_or(Matrix::Identity(n, n)));
    state.L = initial_gain_;
    return state;
}

FilterState init_filter(const DelayedFilter& filter) {
    return filter.initial_state();
}

StepResult DelayedFilter::step(const FilterState& state, const Vector& y, const Vector& u) const {
    const int r = config_.delay;
    const Eigen::Index m = model_.m();
    if (y.size() != model_.l()) {
        throw Error(ErrorCode::DimensionMismatch, "measurement must have l=" + std::to_string(model_.l()) + " entries");
    }
    if (u.size() != m) {
        throw Error(ErrorCode::DimensionMismatch, "known input must have m=" + std::to_string(m) + " entries");
    }

    StepResult result{state, std::nullopt};
    FilterState& next = result.state;
    next.k = state.k + 1;

    if (state.k <= r) {
        if (m > 0) {
            next.u_buffer.push_back(u);
        }
        return result;
    }

    Vector predicted_delayed = model_.A() * state.xhat_delayed;
    Vector predicted_now = lifted_a_ * state.xhat_delayed;
    Vector innovation = y;
    if (m > 0) {
        // buffer front is u_{k-r-1}, back is u_{k-1}
        predicted_delayed += model_.B() * state.u_buffer.front();
        for (int j = 0; j <= r; ++j) {
            predicted_now += a_j_b_[static_cast<std::size_t>(j)] * state.u_buffer[static_cast<std::size_t>(r - j)];
        }
        innovation -= model_.D() * u;
    }
    innovation -= model_.C() * predicted_now;

    if (config_.gain_mode == GainMode::TimeVaryingMinVar && !state.gain_frozen) {
        next.L = gain::minvar_gain(model_, noise_, r, state.covariance).L;
        if (!next.L.allFinite()) {
            throw Error(ErrorCode::GainSingular, "minimum-variance gain is not finite");
        }
        next.covariance = gain::covariance_update(model_, noise_, r, next.L, state.covariance);
        if (config_.freeze_converged_gain &&
            (next.covariance.P - state.covariance.P).norm() <= kFreezeTolerance * (1.0 + next.covariance.P.norm())) {
            next.gain_frozen = true;
        }
    }

    StepOutput out;
    out.k = state.k;
    out.state_estimate = predicted_delayed + next.L * innovation;
    if (input_recoverable_) {
        out.input_estimate = input_extractor_ * innovation;
    }
    out.innovation = innovation;

    next.xhat_delayed = out.state_estimate;
    if (m > 0) {
        next.u_buffer.push_back(u);
        next.u_buffer.pop_front();
    }
    result.output = std::move(out);
    return result;
}

Matrix error_dynamics_matrix(const SystemModel& model, int r, const Matrix& L) {
    return model.A() - L * model.C() * linalg::matrix_power(model.A(), r + 1);
}

ConvergenceVerdict classify_convergence(const SystemModel& model, int r, const Matrix& L) {
    const double residual = gain::unbiasedness_residual(model, r, L);
    if (!(residual <= gain::residual_tolerance(model))) {
        throw Error(ErrorCode::ConstraintViolated, "gain does not satisfy the unbiasedness constraint");
    }
    const double rho = linalg::spectral_radius(error_dynamics_matrix(model, r, L));
    if (rho <= 1e-8) {
        return ConvergenceVerdict::DeadbeatUnbiased;
    }
    if (rho < 1.0 - 1e-9) {
        return ConvergenceVerdict::AsymptoticallyUnbiased;
    }
    if (rho <= 1.0 + 1e-9) {
        return ConvergenceVerdict::PersistentError;
    }
    return ConvergenceVerdict::Divergent;
}

std::vector<Vector> predicted_error_sequence(const SystemModel& model, int r, const Matrix& L, const Vector& eps0,
                                             int T) {
    const Matrix phi = error_dynamics_matrix(model, r, L);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(std::max(T, 0) + 1));
    Vector eps = eps0;
    for (int j = 0; j <= T; ++j) {
        out.push_back(eps);
        eps = phi * eps;
    }
    return out;
}

} // namespace delayrec::filter
