#include "delayrec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace delayrec::linalg {

double default_rank_tolerance(const Eigen::Ref<const Eigen::VectorXd>& singular_values, Eigen::Index rows,
                              Eigen::Index cols) {
    if (singular_values.size() == 0) {
        return 0.0;
    }
    return singular_values.maxCoeff() * static_cast<double>(std::max(rows, cols)) * kRankRcond;
}

namespace {

template <typename MatrixType>
int rank_impl(const MatrixType& m, std::optional<double> tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<MatrixType> svd(m);
    const Eigen::VectorXd s = svd.singularValues();
    const double cutoff = tol.value_or(default_rank_tolerance(s, m.rows(), m.cols()));
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

} // namespace

int numerical_rank(const Eigen::Ref<const Matrix>& m, std::optional<double> tol) {
    return rank_impl(Matrix(m), tol);
}

int numerical_rank(const Eigen::Ref<const ComplexMatrix>& m, std::optional<double> tol) {
    return rank_impl(ComplexMatrix(m), tol);
}

Matrix pseudo_inverse(const Eigen::Ref<const Matrix>& m, double rcond) {
    if (m.size() == 0) {
        return Matrix::Zero(m.cols(), m.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = s.maxCoeff() * static_cast<double>(std::max(m.rows(), m.cols())) * rcond;
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix null_space(const Eigen::Ref<const Matrix>& m, double rcond) {
    if (m.cols() == 0) {
        return Matrix(0, 0);
    }
    if (m.rows() == 0) {
        return Matrix::Identity(m.cols(), m.cols());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    const double cutoff = s.maxCoeff() * static_cast<double>(std::max(m.rows(), m.cols())) * rcond;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            ++rank;
        }
    }
    return svd.matrixV().rightCols(m.cols() - rank);
}

bool is_symmetric(const Eigen::Ref<const Matrix>& m) {
    if (m.rows() != m.cols()) {
        return false;
    }
    if (m.size() == 0) {
        return true;
    }
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& m) {
    if (m.size() == 0) {
        return Vector(0);
    }
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

std::vector<Complex> eigenvalues(const Eigen::Ref<const Matrix>& m) {
    std::vector<Complex> out;
    if (m.size() == 0) {
        return out;
    }
    Eigen::EigenSolver<Matrix> es(m, false);
    const auto& ev = es.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    return out;
}

ZeroDeflation deflate_zero_eigenvalues(const Eigen::Ref<const Matrix>& m, std::optional<double> abs_tol) {
    ZeroDeflation result;
    Matrix current = m;
    if (current.size() == 0) {
        result.remainder = current;
        return result;
    }
    double tol = 0.0;
    if (abs_tol) {
        tol = *abs_tol;
    } else {
        Eigen::JacobiSVD<Matrix> norm_svd(current);
        tol = 1e-10 * std::max(1.0, norm_svd.singularValues()(0));
    }
    while (current.rows() > 0) {
        Eigen::JacobiSVD<Matrix> svd(current, Eigen::ComputeFullV);
        const Vector& s = svd.singularValues();
        Eigen::Index kernel = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s(i) <= tol) {
                ++kernel;
            }
        }
        if (kernel == 0) {
            break;
        }
        const Eigen::Index keep = current.cols() - kernel;
        const Matrix complement = svd.matrixV().leftCols(keep);
        current = (complement.transpose() * current * complement).eval();
        result.zero_multiplicity += static_cast<int>(kernel);
    }
    result.remainder = current;
    return result;
}

std::vector<Complex> structured_eigenvalues(const Eigen::Ref<const Matrix>& m) {
    const ZeroDeflation d = deflate_zero_eigenvalues(m);
    std::vector<Complex> out(static_cast<std::size_t>(d.zero_multiplicity), Complex(0.0, 0.0));
    const auto rest = eigenvalues(d.remainder);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

double spectral_radius(const Eigen::Ref<const Matrix>& m) {
    double rho = 0.0;
    for (const auto& lambda : structured_eigenvalues(m)) {
        rho = std::max(rho, std::abs(lambda));
    }
    return rho;
}

double match_into(const std::vector<Complex>& needles, const std::vector<Complex>& haystack,
                  std::vector<Complex>* unmatched) {
    if (needles.size() > haystack.size()) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<bool> needle_used(needles.size(), false);
    std::vector<bool> hay_used(haystack.size(), false);
    double worst = 0.0;
    for (std::size_t round = 0; round < needles.size(); ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        std::size_t bj = 0;
        for (std::size_t i = 0; i < needles.size(); ++i) {
            if (needle_used[i]) {
                continue;
            }
            for (std::size_t j = 0; j < haystack.size(); ++j) {
                if (hay_used[j]) {
                    continue;
                }
                const double d = std::abs(needles[i] - haystack[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        needle_used[bi] = true;
        hay_used[bj] = true;
        worst = std::max(worst, best);
    }
    if (unmatched) {
        unmatched->clear();
        for (std::size_t j = 0; j < haystack.size(); ++j) {
            if (!hay_used[j]) {
                unmatched->push_back(haystack[j]);
            }
        }
    }
    return worst;
}

double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    if (a.empty()) {
        return 0.0;
    }
    if (a.size() > 8) {
        return match_into(a, b);
    }
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size() && worst < best; ++i) {
            worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
        }
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Matrix matrix_power(const Eigen::Ref<const Matrix>& a, int d) {
    Matrix out = Matrix::Identity(a.rows(), a.cols());
    for (int i = 0; i < d; ++i) {
        out = (a * out).eval();
    }
    return out;
}

} // namespace delayrec::linalg
