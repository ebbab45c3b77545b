#include <gtest/gtest.h>

#include "delayrec/linalg.hpp"
#include "support/random_systems.hpp"
#include "test_helpers.hpp"

using namespace delayrec;
using delayrec::testkit::mat;

TEST(NumericalRank, Identity) {
    EXPECT_EQ(linalg::numerical_rank(Matrix::Identity(3, 3)), 3);
}

TEST(NumericalRank, RankOneByConstruction) {
    EXPECT_EQ(linalg::numerical_rank(mat({{1, 1}, {1, 1}})), 1);
}

TEST(NumericalRank, ZeroAndEmpty) {
    EXPECT_EQ(linalg::numerical_rank(Matrix::Zero(2, 3)), 0);
    EXPECT_EQ(linalg::numerical_rank(Matrix(0, 3)), 0);
}

TEST(NumericalRank, ExplicitTolerance) {
    const Matrix m = mat({{1, 0}, {0, 1e-6}});
    EXPECT_EQ(linalg::numerical_rank(m), 2);
    EXPECT_EQ(linalg::numerical_rank(m, 1e-3), 1);
}

TEST(PseudoInverse, PenroseConditions) {
    testkit::Rng rng(3);
    const Matrix a = testkit::gaussian(rng, 5, 2) * testkit::gaussian(rng, 2, 4); // rank 2
    const Matrix x = linalg::pseudo_inverse(a);
    EXPECT_LT((a * x * a - a).norm(), 1e-10);
    EXPECT_LT((x * a * x - x).norm(), 1e-10);
    EXPECT_LT((a * x - (a * x).transpose()).norm(), 1e-10);
    EXPECT_LT((x * a - (x * a).transpose()).norm(), 1e-10);
}

TEST(NullSpace, OrthonormalAndAnnihilating) {
    testkit::Rng rng(4);
    const Matrix a = testkit::gaussian(rng, 2, 5);
    const Matrix n = linalg::null_space(a);
    ASSERT_EQ(n.cols(), 3);
    EXPECT_LT((a * n).norm(), 1e-12);
    EXPECT_LT((n.transpose() * n - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Eigen, StructuredEigenvaluesOfNilpotentJordanBlock) {
    // J^T with a 4x4 Jordan block: plain QR returns a ring of radius ~1e-4.
    Matrix j = Matrix::Zero(4, 4);
    for (int i = 0; i < 3; ++i) {
        j(i, i + 1) = 50.0;
    }
    testkit::Rng rng(5);
    const Matrix t = testkit::well_conditioned(rng, 4);
    const Matrix m = t * j * t.inverse();
    EXPECT_LE(linalg::spectral_radius(m), 1e-8);
    const auto d = linalg::deflate_zero_eigenvalues(m);
    EXPECT_EQ(d.zero_multiplicity, 4);
}

TEST(Eigen, DeflationKeepsNonzeroEigenvalues) {
    const Matrix m = mat({{0.5, 1, 0}, {0, 0, 1}, {0, 0, 0}});
    const auto eig = linalg::structured_eigenvalues(m);
    EXPECT_LT(linalg::multiset_distance(eig, testkit::reals({0.5, 0, 0})), 1e-12);
}

TEST(Matching, MultisetDistance) {
    const auto a = testkit::reals({1, 2, 3});
    const auto b = testkit::reals({3.1, 1, 2});
    EXPECT_NEAR(linalg::multiset_distance(a, b), 0.1, 1e-12);
    EXPECT_TRUE(std::isinf(linalg::multiset_distance(a, testkit::reals({1, 2}))));
}

TEST(Matching, MatchIntoReportsUnmatched) {
    std::vector<Complex> rest;
    const double d = linalg::match_into(testkit::reals({0.8, 0.8}), testkit::reals({0, 0.8, 0.5, 0.8}), &rest);
    EXPECT_LT(d, 1e-15);
    EXPECT_LT(linalg::multiset_distance(rest, testkit::reals({0, 0.5})), 1e-15);
    EXPECT_TRUE(std::isinf(linalg::match_into(testkit::reals({1, 2}), testkit::reals({1}))));
}

TEST(MatrixPower, AgreesWithRepeatedProduct) {
    const Matrix a = mat({{0.5, 0}, {1, 0.5}});
    EXPECT_LT((linalg::matrix_power(a, 3) - a * a * a).norm(), 1e-15);
    EXPECT_EQ(linalg::matrix_power(a, 0), Matrix::Identity(2, 2));
}
