#pragma once

#include <optional>

#include "delayrec/linalg.hpp"

namespace delayrec {

/// Unvalidated matrices as read from a file or assembled by hand. Absent B/D mean "no known input".
struct RawModel {
    Matrix A;
    Matrix H;
    Matrix C;
    std::optional<Matrix> B;
    std::optional<Matrix> D;
};

/**
 * Validated discrete-time system
 *
 *   x_{k+1} = A x_k + B u_k + H e_k + w_k
 *   y_k     = C x_k + D u_k + v_k
 *
 * with state dimension n, known-input dimension m, output dimension l and
 * unknown-input dimension p. Immutable; B and D are always stored explicitly
 * (n x 0 and l x 0 when there is no known input).
 */
class SystemModel {
public:
    const Matrix& A() const { return a_; }
    const Matrix& B() const { return b_; }
    const Matrix& H() const { return h_; }
    const Matrix& C() const { return c_; }
    const Matrix& D() const { return d_; }

    Eigen::Index n() const { return a_.rows(); }
    Eigen::Index m() const { return b_.cols(); }
    Eigen::Index l() const { return c_.rows(); }
    Eigen::Index p() const { return h_.cols(); }

    bool is_square() const { return l() == p(); }

    RawModel to_raw() const;

    friend bool operator==(const SystemModel& lhs, const SystemModel& rhs);

private:
    friend SystemModel validate_model(const RawModel& raw);
    SystemModel(Matrix a, Matrix b, Matrix h, Matrix c, Matrix d);

    Matrix a_, b_, h_, c_, d_;
};

/// Checks dimensions, rank(H) = p, 1 <= p < n and 1 <= l <= n.
SystemModel validate_model(const RawModel& raw);

/// Time-invariant noise covariances: Q (n x n, PSD) and R (l x l, PD).
class NoiseSpec {
public:
    const Matrix& Q() const { return q_; }
    const Matrix& R() const { return r_; }

private:
    friend NoiseSpec validate_noise(const Matrix& q, const Matrix& r, const SystemModel& model);
    NoiseSpec(Matrix q, Matrix r) : q_(std::move(q)), r_(std::move(r)) {}

    Matrix q_, r_;
};

NoiseSpec validate_noise(const Matrix& q, const Matrix& r, const SystemModel& model);

/// Q = 1e-4 I_n, R = 1e-4 I_l.
NoiseSpec default_noise(const SystemModel& model);

} // namespace delayrec
