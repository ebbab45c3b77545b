#include "delayrec/model.hpp"

#include <sstream>

#include "delayrec/error.hpp"

namespace delayrec {

namespace {

std::string shape(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void require_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has non-finite entries");
    }
}

} // namespace

SystemModel::SystemModel(Matrix a, Matrix b, Matrix h, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), h_(std::move(h)), c_(std::move(c)), d_(std::move(d)) {}

RawModel SystemModel::to_raw() const {
    RawModel raw{a_, h_, c_, std::nullopt, std::nullopt};
    if (m() > 0) {
        raw.B = b_;
        raw.D = d_;
    }
    return raw;
}

bool operator==(const SystemModel& lhs, const SystemModel& rhs) {
    auto same = [](const Matrix& x, const Matrix& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
    };
    return same(lhs.a_, rhs.a_) && same(lhs.b_, rhs.b_) && same(lhs.h_, rhs.h_) && same(lhs.c_, rhs.c_) &&
           same(lhs.d_, rhs.d_);
}

SystemModel validate_model(const RawModel& raw) {
    const Eigen::Index n = raw.A.rows();
    if (n == 0 || raw.A.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "A must be square and non-empty, got " + shape(raw.A));
    }
    if (raw.H.rows() != n) {
        throw Error(ErrorCode::DimensionMismatch, "H must have n=" + std::to_string(n) + " rows, got " + shape(raw.H));
    }
    if (raw.C.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "C must have n=" + std::to_string(n) + " columns, got " + shape(raw.C));
    }
    const Eigen::Index p = raw.H.cols();
    const Eigen::Index l = raw.C.rows();
    if (p < 1) {
        throw Error(ErrorCode::DimensionMismatch, "H must have at least one column");
    }
    if (l < 1) {
        throw Error(ErrorCode::DimensionMismatch, "C must have at least one row");
    }

    Eigen::Index m = 0;
    if (raw.B) {
        m = raw.B->cols();
    } else if (raw.D) {
        m = raw.D->cols();
    }
    Matrix b = raw.B.value_or(Matrix::Zero(n, m));
    Matrix d = raw.D.value_or(Matrix::Zero(l, m));
    if (b.rows() != n || b.cols() != m) {
        throw Error(ErrorCode::DimensionMismatch, "B must be " + std::to_string(n) + "x" + std::to_string(m) +
                                                      ", got " + shape(b));
    }
    if (d.rows() != l || d.cols() != m) {
        throw Error(ErrorCode::DimensionMismatch, "D must be " + std::to_string(l) + "x" + std::to_string(m) +
                                                      ", got " + shape(d));
    }
    require_finite(raw.A, "A");
    require_finite(raw.H, "H");
    require_finite(raw.C, "C");
    require_finite(b, "B");
    require_finite(d, "D");

    if (p >= n) {
        throw Error(ErrorCode::TooManyInputs, "need p < n, got p=" + std::to_string(p) + ", n=" + std::to_string(n));
    }
    if (l > n) {
        throw Error(ErrorCode::TooManyOutputs, "need l <= n, got l=" + std::to_string(l) + ", n=" + std::to_string(n));
    }
    const int rank_h = linalg::numerical_rank(raw.H);
    if (rank_h < p) {
        throw Error(ErrorCode::RankDeficientH,
                    "rank(H)=" + std::to_string(rank_h) + " < p=" + std::to_string(p));
    }
    return SystemModel(raw.A, std::move(b), raw.H, raw.C, std::move(d));
}

NoiseSpec validate_noise(const Matrix& q, const Matrix& r, const SystemModel& model) {
    if (q.rows() != model.n() || q.cols() != model.n()) {
        throw Error(ErrorCode::DimensionMismatch, "Q must be " + std::to_string(model.n()) + "x" +
                                                      std::to_string(model.n()) + ", got " + shape(q));
    }
    if (r.rows() != model.l() || r.cols() != model.l()) {
        throw Error(ErrorCode::DimensionMismatch, "R must be " + std::to_string(model.l()) + "x" +
                                                      std::to_string(model.l()) + ", got " + shape(r));
    }
    if (!q.allFinite() || !r.allFinite()) {
        throw Error(ErrorCode::DimensionMismatch, "noise covariances must be finite");
    }
    if (!linalg::is_symmetric(q)) {
        throw Error(ErrorCode::NotSymmetric, "Q is not symmetric");
    }
    if (!linalg::is_symmetric(r)) {
        throw Error(ErrorCode::NotSymmetric, "R is not symmetric");
    }
    const Vector q_eig = linalg::symmetric_eigenvalues(q);
    if (q_eig(0) < -1e-10 * (1.0 + std::max(0.0, q_eig(q_eig.size() - 1)))) {
        throw Error(ErrorCode::QIndefinite, "Q has eigenvalue " + std::to_string(q_eig(0)));
    }
    const Vector r_eig = linalg::symmetric_eigenvalues(r);
    if (!(r_eig(0) > 0.0)) {
        throw Error(ErrorCode::RNotPositiveDefinite, "R has eigenvalue " + std::to_string(r_eig(0)));
    }
    return NoiseSpec(0.5 * (q + q.transpose()), 0.5 * (r + r.transpose()));
}

NoiseSpec default_noise(const SystemModel& model) {
    return validate_noise(1e-4 * Matrix::Identity(model.n(), model.n()),
                          1e-4 * Matrix::Identity(model.l(), model.l()), model);
}

} // namespace delayrec
