#pragma once

#include "sylkrylov/dense.hpp"
#include "sylkrylov/sparse_operator.hpp"

namespace sylkrylov {

enum class BasisFlavor {
    BA,   ///< block Krylov span(E, AE, ..., A^{m-1}E), block width s
    EBA,  ///< extended block Krylov, adds A^{-1}E, ..., A^{-m}E, block width 2s
};

const char* to_string(BasisFlavor flavor);

/// Snapshot of a block Arnoldi process after m steps:
///   A * basis = basis * T + next_block * T_next * [0 ... 0 I_d].
struct BlockKrylovDecomposition {
    BasisFlavor flavor = BasisFlavor::BA;
    Index block_width = 0;  // d
    Index steps = 0;        // m
    Matrix basis;           // n x (m d), blocks V_1 .. V_m
    Matrix next_block;      // n x d, V_{m+1}
    Matrix T;               // m d x m d, block upper Hessenberg
    Matrix T_next;          // d x d coupling block T_{m+1,m}
    /// Basis growth stopped at `steps` because the next block was rank deficient. The
    /// columns of next_block belonging to vanishing pivots carry no information then.
    bool breakdown = false;

    Index dimension() const { return basis.rows(); }
    Index size() const { return basis.cols(); }
    /// [basis, next_block]
    Matrix extended_basis() const;
    /// Last d rows of the identity of order m d, as a (m d) x d matrix.
    Matrix last_block_selector() const;
};

/// Incremental block (or extended block) Arnoldi process with one full reorthogonalization
/// pass per candidate block. The operator must outlive the process.
class ArnoldiProcess {
public:
    ArnoldiProcess(const SparseOperator& op, const Matrix& E, BasisFlavor flavor,
                   const Tolerances& tol = default_tolerances());
    ArnoldiProcess(SparseOperator&&, const Matrix&, BasisFlavor,
                   const Tolerances& = default_tolerances()) = delete;

    /// Adds one block. Returns false (and does nothing) once a breakdown has occurred.
    bool step();

    Index steps() const { return steps_; }
    bool broken_down() const { return breakdown_; }
    /// Another step() fits into the operator dimension and no breakdown has occurred.
    bool can_step() const;
    /// The starting block was numerically rank deficient (E itself, or [E, A^{-1}E]).
    bool start_rank_deficient() const { return start_deficient_; }
    Index block_width() const { return d_; }
    BasisFlavor flavor() const { return flavor_; }

    /// Requires steps() >= 1.
    BlockKrylovDecomposition decomposition() const;

private:
    // Orthogonalizes `candidate` against the current basis, appends the new block.
    void append_block(Matrix candidate);

    const SparseOperator* op_;
    BasisFlavor flavor_;
    Tolerances tol_;
    Index n_;
    Index s_;
    Index d_;
    Index steps_ = 0;
    bool breakdown_ = false;
    bool start_deficient_ = false;
    Matrix V_;   // n x (steps + 1) d
    Matrix AV_;  // n x steps d, A times the basis blocks (EBA only)
    Matrix H_;   // Gram-Schmidt coefficients, (steps + 1) d x steps d
};

BlockKrylovDecomposition block_arnoldi(const SparseOperator& op, const Matrix& E, Index m,
                                       const Tolerances& tol = default_tolerances());

BlockKrylovDecomposition extended_block_arnoldi(const SparseOperator& op, const Matrix& E,
                                                Index m,
                                                const Tolerances& tol = default_tolerances());

}  // namespace sylkrylov
