#include "sylkrylov/krylov.hpp"

#include <string>

namespace sylkrylov {

const char* to_string(BasisFlavor flavor) {
    return flavor == BasisFlavor::BA ? "BA" : "EBA";
}

Matrix BlockKrylovDecomposition::extended_basis() const {
    Matrix out(basis.rows(), basis.cols() + next_block.cols());
    out << basis, next_block;
    return out;
}

Matrix BlockKrylovDecomposition::last_block_selector() const {
    Matrix sel = Matrix::Zero(size(), block_width);
    sel.bottomRows(block_width).setIdentity();
    return sel;
}

namespace {

Vector column_norms(const Matrix& M) { return M.colwise().norm().transpose(); }

bool deficient(const Matrix& R, const Vector& scales, double rank_tol) {
    for (Index i = 0; i < R.cols(); ++i)
        if (std::abs(R(i, i)) <= rank_tol * scales(i))
            return true;
    return false;
}

}  // namespace

ArnoldiProcess::ArnoldiProcess(const SparseOperator& op, const Matrix& E, BasisFlavor flavor,
                               const Tolerances& tol)
    : op_(&op), flavor_(flavor), tol_(tol), n_(op.dimension()), s_(E.cols()) {
    if (E.rows() != n_)
        throw DimensionError("ArnoldiProcess: E has " + std::to_string(E.rows()) +
                             " rows, operator dimension is " + std::to_string(n_));
    if (s_ < 1)
        throw DimensionError("ArnoldiProcess: E must have at least one column");
    require_finite(E, "ArnoldiProcess E");
    d_ = flavor == BasisFlavor::BA ? s_ : 2 * s_;
    if (d_ > n_)
        throw DimensionError("ArnoldiProcess: block width exceeds operator dimension");

    Matrix start(n_, d_);
    if (flavor == BasisFlavor::BA)
        start = E;
    else
        start << E, op.solve(E);
    const Vector scales = column_norms(start);
    QrResult qr = qr_reduced(start, tol_.rank_tol, 0.0);
    start_deficient_ = deficient(qr.R, scales, tol_.rank_tol);
    V_ = std::move(qr.Q);
}

bool ArnoldiProcess::step() {
    if (breakdown_)
        return false;
    const Index j = steps_;  // current last block is V_{j+1} (1-based)
    const Index have = (j + 1) * d_;
    if (have + d_ > n_) {
        if (have == n_) {
            // The basis spans the whole space; the coupling block vanishes.
            if (flavor_ == BasisFlavor::EBA) {
                AV_.conservativeResize(n_, have);
                AV_.rightCols(d_) = op_->apply(V_.rightCols(d_));
            } else {
                H_.conservativeResize(have + d_, have);
                H_.bottomRows(d_).setZero();
                H_.rightCols(d_).setZero();
                H_.block(0, j * d_, have, d_) = V_.transpose() * op_->apply(V_.rightCols(d_));
            }
            V_.conservativeResize(n_, have + d_);
            V_.rightCols(d_).setZero();
            ++steps_;
            breakdown_ = true;
            return false;
        }
        throw DimensionError("ArnoldiProcess: another block would exceed dimension " +
                             std::to_string(n_));
    }

    const Matrix Vj = V_.middleCols(j * d_, d_);
    Matrix candidate(n_, d_);
    if (flavor_ == BasisFlavor::BA) {
        candidate = op_->apply(Vj);
    } else {
        const Matrix AVj = op_->apply(Vj);
        AV_.conservativeResize(n_, have);
        AV_.rightCols(d_) = AVj;
        candidate << AVj.leftCols(s_), op_->solve(Vj.rightCols(s_));
    }
    append_block(std::move(candidate));
    return !breakdown_;
}

bool ArnoldiProcess::can_step() const {
    if (breakdown_)
        return false;
    const Index have = (steps_ + 1) * d_;
    return have + d_ <= n_ || have == n_;
}

void ArnoldiProcess::append_block(Matrix candidate) {
    const Index j = steps_;
    const Index have = (j + 1) * d_;
    const Vector scales = column_norms(candidate);
    const auto basis = V_.leftCols(have);

    // Classical block Gram-Schmidt, applied twice.
    Matrix h = basis.transpose() * candidate;
    candidate.noalias() -= basis * h;
    const Matrix h2 = basis.transpose() * candidate;
    candidate.noalias() -= basis * h2;
    h += h2;

    QrResult qr = qr_reduced(candidate, tol_.rank_tol, 0.0);
    if (deficient(qr.R, scales, tol_.rank_tol))
        breakdown_ = true;

    if (flavor_ == BasisFlavor::BA) {
        H_.conservativeResize(have + d_, have);
        H_.bottomRows(d_).setZero();
        H_.rightCols(d_).setZero();
        H_.block(0, j * d_, have, d_) = h;
        H_.block(have, j * d_, d_, d_) = qr.R;
    }
    V_.conservativeResize(n_, have + d_);
    V_.rightCols(d_) = qr.Q;
    ++steps_;
}

BlockKrylovDecomposition ArnoldiProcess::decomposition() const {
    if (steps_ < 1)
        throw Error("ArnoldiProcess::decomposition: no steps taken");
    BlockKrylovDecomposition out;
    const Index md = steps_ * d_;
    out.flavor = flavor_;
    out.block_width = d_;
    out.steps = steps_;
    out.breakdown = breakdown_;
    out.basis = V_.leftCols(md);
    out.next_block = V_.middleCols(md, d_);
    if (flavor_ == BasisFlavor::BA) {
        out.T = H_.topLeftCorner(md, md);
        out.T_next = H_.block(md, md - d_, d_, d_);
    } else {
        const auto AVm = AV_.leftCols(md);
        out.T = out.basis.transpose() * AVm;
        out.T_next = out.next_block.transpose() * AVm.rightCols(d_);
    }
    return out;
}

namespace {

BlockKrylovDecomposition run_arnoldi(const SparseOperator& op, const Matrix& E, Index m,
                                     BasisFlavor flavor, const Tolerances& tol) {
    if (m < 1)
        throw Error("arnoldi: m must be >= 1");
    ArnoldiProcess process(op, E, flavor, tol);
    while (process.steps() < m && process.step()) {
    }
    return process.decomposition();
}

}  // namespace

BlockKrylovDecomposition block_arnoldi(const SparseOperator& op, const Matrix& E, Index m,
                                       const Tolerances& tol) {
    return run_arnoldi(op, E, m, BasisFlavor::BA, tol);
}

BlockKrylovDecomposition extended_block_arnoldi(const SparseOperator& op, const Matrix& E,
                                                Index m, const Tolerances& tol) {
    return run_arnoldi(op, E, m, BasisFlavor::EBA, tol);
}

}  // namespace sylkrylov
