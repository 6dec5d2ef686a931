#include "support.hpp"

#include "sylkrylov/problems.hpp"
#include "sylkrylov/sparse_operator.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace sylkrylov;
using sylkrylov::testing::random_matrix;
using sylkrylov::testing::rel_diff;

TEST(SparseApply, Identity) {
    const Matrix X = random_matrix(6, 3, 1);
    EXPECT_EQ(SparseOperator::identity(6).apply(X), X);
    EXPECT_EQ(SparseOperator::identity(6).solve(X), X);
}

TEST(SparseApply, DiagonalScalesRows) {
    Vector d(4);
    d << 2.0, -1.0, 0.5, 4.0;
    const auto D = SparseOperator::diagonal(d);
    const Matrix X = random_matrix(4, 2, 2);
    EXPECT_LE((D.apply(X) - d.asDiagonal() * X).norm(), 1e-15);
    EXPECT_LE((D.solve(X) - d.cwiseInverse().asDiagonal() * X).norm(), 1e-15);
}

TEST(SparseApply, LaplacianCenterNode) {
    // hand-assembled: 3x3 grid, h = 1/4, the center is node 4 (0-based)
    const auto L = fd_operator(FDOperatorSpec::laplacian(3));
    const double h2 = 1.0 / 16.0;
    Matrix e = Matrix::Zero(9, 1);
    e(4, 0) = 1.0;
    const Matrix col = L.apply(e);
    Matrix want = Matrix::Zero(9, 1);
    want(4, 0) = -4.0 / h2;
    for (int k : {1, 3, 5, 7})
        want(k, 0) = 1.0 / h2;
    EXPECT_LE((col - want).norm(), 1e-12);
    // the operator itself is negative definite; its negative has 4/h^2 at the center
    EXPECT_NEAR(-col(4, 0), 4.0 / h2, 1e-12);
}

TEST(SparseSolve, DiagonallyDominantAgainstDenseLu) {
    std::mt19937_64 gen(13);
    std::vector<Triplet> trips;
    const Index n = 50;
    Vector rowsum = Vector::Zero(n);
    for (int k = 0; k < 200; ++k) {
        const Index i = static_cast<Index>(gen() % n), j = static_cast<Index>(gen() % n);
        if (i == j)
            continue;
        const double v = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
        trips.push_back({i, j, v});
        rowsum(i) += std::abs(v);
    }
    for (Index i = 0; i < n; ++i)
        trips.push_back({i, i, rowsum(i) + 1.0});
    const SparseOperator A(n, trips);
    const Matrix X = random_matrix(n, 3, 14);
    const Matrix want = A.to_dense().partialPivLu().solve(X);
    EXPECT_LE(rel_diff(A.solve(X), want), 1e-10);
    EXPECT_LE(rel_diff(A.apply(A.solve(X)), X), 1e-12);
}

TEST(SparseSolve, SingularIsReported) {
    Vector d(3);
    d << 1.0, 0.0, 2.0;
    EXPECT_THROW(SparseOperator::diagonal(d).solve(Matrix::Ones(3, 1)), SingularError);
}

TEST(SparseOperatorTest, DuplicatesAreSummed) {
    const SparseOperator A(2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 0, 5.0}, {1, 1, 1.0}});
    EXPECT_EQ(A.to_dense()(0, 0), 3.0);
    EXPECT_EQ(A.to_dense()(1, 0), 5.0);
}

TEST(SparseOperatorTest, Guards) {
    EXPECT_THROW(SparseOperator(2, {{2, 0, 1.0}}), DimensionError);
    EXPECT_THROW(SparseOperator(2, {{0, 0, std::nan("")}}), Error);
    EXPECT_THROW(SparseOperator::identity(3).apply(Matrix::Ones(2, 1)), DimensionError);
}

TEST(SparseOperatorTest, TransposeAndSymmetricPart) {
    const Matrix M = random_matrix(5, 5, 3);
    const auto A = SparseOperator::from_dense(M);
    EXPECT_EQ(A.transposed().to_dense(), M.transpose());
    EXPECT_LE((Matrix(A.symmetric_part()) - (M + M.transpose()) / 2).norm(), 1e-15);
    EXPECT_NEAR(A.frobenius_norm(), M.norm(), 1e-14);
}

TEST(SparseOperatorTest, CopiesShareFactorization) {
    const auto A = fd_operator(FDOperatorSpec::LA(4));
    const SparseOperator B = A;
    const Matrix X = random_matrix(16, 2, 4);
    EXPECT_EQ(A.solve(X), B.solve(X));
}

TEST(MatrixMarket, RoundTrip) {
    const auto A = fd_operator(FDOperatorSpec::LB(4));
    std::stringstream buf;
    write_matrix_market(A, buf);
    const auto B = read_matrix_market(buf);
    const Matrix X = random_matrix(16, 3, 5);
    EXPECT_EQ(B.dimension(), 16);
    EXPECT_LE((B.apply(X) - A.to_dense() * X).norm(), 1e-12 * A.frobenius_norm());
    EXPECT_EQ(B.to_dense(), A.to_dense());
}

TEST(MatrixMarket, SymmetricExpanded) {
    std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n"
                          "% comment\n"
                          "3 3 4\n"
                          "1 1 -2\n2 1 1\n2 2 -2\n3 3 -1\n");
    const Matrix D = read_matrix_market(in).to_dense();
    EXPECT_EQ(D(0, 1), 1.0);
    EXPECT_EQ(D(1, 0), 1.0);
    EXPECT_EQ(D(2, 2), -1.0);
    EXPECT_EQ(D(0, 2), 0.0);
}

TEST(MatrixMarket, MalformedInput) {
    std::istringstream bad_header("%%MatrixMarket matrix array real general\n2 2\n");
    EXPECT_THROW(read_matrix_market(bad_header), Error);
    std::istringstream complex_field("%%MatrixMarket matrix coordinate complex general\n1 1 0\n");
    EXPECT_THROW(read_matrix_market(complex_field), Error);
    std::istringstream rect("%%MatrixMarket matrix coordinate real general\n2 3 0\n");
    EXPECT_THROW(read_matrix_market(rect), DimensionError);
    std::istringstream short_body("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n");
    EXPECT_THROW(read_matrix_market(short_body), Error);
    EXPECT_THROW(read_matrix_market(std::filesystem::path("/nonexistent/file.mtx")), Error);
}
