#pragma once

#include "sylkrylov/dense.hpp"

#include <Eigen/SparseCore>

#include <filesystem>
#include <memory>
#include <mutex>
#include <vector>

namespace sylkrylov {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Square sparse matrix with block apply and a lazily built, cached sparse LU for block
/// solves. Immutable after construction; apply/solve may be called concurrently.
class SparseOperator {
public:
    SparseOperator() = default;
    explicit SparseOperator(SparseMatrix matrix);
    SparseOperator(Index n, const std::vector<Triplet>& triplets);

    static SparseOperator identity(Index n);
    static SparseOperator diagonal(const Vector& d);
    static SparseOperator from_dense(const Matrix& M);

    Index dimension() const { return matrix_.rows(); }
    const SparseMatrix& matrix() const { return matrix_; }

    Matrix apply(const Matrix& X) const;
    /// Returns W with apply(W) = X. The factorization is computed on first use.
    Matrix solve(const Matrix& X) const;

    SparseOperator transposed() const;
    /// (A + A^T) / 2 as a sparse matrix.
    SparseMatrix symmetric_part() const;
    Matrix to_dense() const;
    double frobenius_norm() const { return matrix_.norm(); }

private:
    struct Factorization;
    void factorize() const;

    SparseMatrix matrix_;
    // Shared so that copies of an operator reuse one factorization.
    std::shared_ptr<Factorization> lu_;
    std::shared_ptr<std::once_flag> lu_once_;
};

/// Reads `%%MatrixMarket matrix coordinate real general|symmetric` (1-based indices).
/// Symmetric files are expanded to full storage.
SparseOperator read_matrix_market(const std::filesystem::path& path);
SparseOperator read_matrix_market(std::istream& in);

void write_matrix_market(const SparseOperator& op, std::ostream& out);
void write_matrix_market(const SparseOperator& op, const std::filesystem::path& path);

}  // namespace sylkrylov
