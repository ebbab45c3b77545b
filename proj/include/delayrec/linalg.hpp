#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace delayrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Relative factor of the default rank cutoff: sigma_max * max(rows, cols) * kRankRcond.
inline constexpr double kRankRcond = 1e-12;

namespace linalg {

/// Default singular-value cutoff used by every rank decision in the library.
double default_rank_tolerance(const Eigen::Ref<const Eigen::VectorXd>& singular_values, Eigen::Index rows,
                              Eigen::Index cols);

/// Count of singular values above `tol` (default: sigma_max * max(rows, cols) * 1e-12).
int numerical_rank(const Eigen::Ref<const Matrix>& m, std::optional<double> tol = std::nullopt);
int numerical_rank(const Eigen::Ref<const ComplexMatrix>& m, std::optional<double> tol = std::nullopt);

/// Moore-Penrose pseudoinverse by SVD; singular values below sigma_max * max(dim) * rcond are dropped.
Matrix pseudo_inverse(const Eigen::Ref<const Matrix>& m, double rcond = kRankRcond);

/// Orthonormal basis (columns) of the null space of `m`.
Matrix null_space(const Eigen::Ref<const Matrix>& m, double rcond = kRankRcond);

/// max |M - M^T| <= 1e-10 (1 + max |M|).
bool is_symmetric(const Eigen::Ref<const Matrix>& m);

/// Eigenvalues of the symmetric part, ascending.
Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& m);

std::vector<Complex> eigenvalues(const Eigen::Ref<const Matrix>& m);

/// Result of peeling exact zero eigenvalues off a square matrix by orthogonal kernel deflation.
struct ZeroDeflation {
    int zero_multiplicity = 0;
    Matrix remainder; ///< compressed matrix carrying the nonzero eigenvalues
};

/// Staircase deflation: repeatedly split off an orthonormal kernel basis N (M N = 0), so that
/// Q^T M Q = [[0, X], [0, M22]], and recurse on M22. Unlike a plain eigen solver this resolves
/// nilpotent blocks exactly instead of smearing them over a disc of radius eps^(1/k).
ZeroDeflation deflate_zero_eigenvalues(const Eigen::Ref<const Matrix>& m, std::optional<double> abs_tol = std::nullopt);

/// Eigenvalues with exact zeros resolved through deflate_zero_eigenvalues.
std::vector<Complex> structured_eigenvalues(const Eigen::Ref<const Matrix>& m);

/// Largest |lambda| among structured eigenvalues.
double spectral_radius(const Eigen::Ref<const Matrix>& m);

/// Greedy nearest matching of `needles` into `haystack` (each haystack entry used once).
/// Returns the worst matched distance, or +inf if `needles` is larger than `haystack`.
double match_into(const std::vector<Complex>& needles, const std::vector<Complex>& haystack,
                  std::vector<Complex>* unmatched = nullptr);

/// Optimal one-to-one distance between two multisets of equal size (+inf when sizes differ).
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b);

/// A-power helper: A^d by repeated multiplication.
Matrix matrix_power(const Eigen::Ref<const Matrix>& a, int d);

} // namespace linalg
} // namespace delayrec
