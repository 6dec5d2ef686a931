#include "sylkrylov/sparse_operator.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace sylkrylov {

namespace {

using LuBase = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Exposes the U diagonal, which SparseLU keeps inside its supernodal L storage.
class PivotCheckedLU : public LuBase {
public:
    double min_abs_pivot() const {
        double out = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < this->cols(); ++j) {
            double pivot = 0.0;
            for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
                if (it.index() == j) {
                    pivot = std::abs(it.value());
                    break;
                }
            }
            out = std::min(out, pivot);
        }
        return out;
    }
};

}  // namespace

struct SparseOperator::Factorization {
    PivotCheckedLU lu;
    std::string error;
};

SparseOperator::SparseOperator(SparseMatrix matrix)
    : matrix_(std::move(matrix)),
      lu_(std::make_shared<Factorization>()),
      lu_once_(std::make_shared<std::once_flag>()) {
    if (matrix_.rows() != matrix_.cols())
        throw DimensionError("SparseOperator: matrix must be square");
    matrix_.makeCompressed();
    for (int k = 0; k < matrix_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it)
            if (!std::isfinite(it.value()))
                throw Error("SparseOperator: non-finite value");
}

SparseOperator::SparseOperator(Index n, const std::vector<Triplet>& triplets) {
    std::vector<Eigen::Triplet<double, int>> entries;
    entries.reserve(triplets.size());
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw DimensionError("SparseOperator: triplet index (" + std::to_string(t.row) +
                                 ", " + std::to_string(t.col) + ") out of range for n = " +
                                 std::to_string(n));
        entries.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col), t.value);
    }
    SparseMatrix M(n, n);
    M.setFromTriplets(entries.begin(), entries.end());
    *this = SparseOperator(std::move(M));
}

SparseOperator SparseOperator::identity(Index n) {
    SparseMatrix M(n, n);
    M.setIdentity();
    return SparseOperator(std::move(M));
}

SparseOperator SparseOperator::diagonal(const Vector& d) {
    std::vector<Triplet> t;
    for (Index i = 0; i < d.size(); ++i)
        t.push_back({i, i, d(i)});
    return SparseOperator(d.size(), t);
}

SparseOperator SparseOperator::from_dense(const Matrix& M) {
    require_square(M, "SparseOperator::from_dense");
    return SparseOperator(SparseMatrix(M.sparseView()));
}

Matrix SparseOperator::apply(const Matrix& X) const {
    if (X.rows() != dimension())
        throw DimensionError("SparseOperator::apply: block has " + std::to_string(X.rows()) +
                             " rows, operator dimension is " + std::to_string(dimension()));
    return matrix_ * X;
}

void SparseOperator::factorize() const {
    std::call_once(*lu_once_, [this] {
        auto& f = *lu_;
        f.lu.analyzePattern(matrix_);
        f.lu.factorize(matrix_);
        if (f.lu.info() != Eigen::Success) {
            f.error = "SparseOperator::solve: factorization failed (" + f.lu.lastErrorMessage() +
                      ")";
            return;
        }
        double scale = 0.0;
        for (int k = 0; k < matrix_.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it)
                scale = std::max(scale, std::abs(it.value()));
        if (f.lu.min_abs_pivot() <= default_tolerances().sparse_pivot * scale)
            f.error = "SparseOperator::solve: singular factor (pivot below threshold)";
    });
}

Matrix SparseOperator::solve(const Matrix& X) const {
    if (X.rows() != dimension())
        throw DimensionError("SparseOperator::solve: dimension mismatch");
    factorize();
    if (!lu_->error.empty())
        throw SingularError(lu_->error);
    Matrix W = lu_->lu.solve(X);
    return W;
}

SparseOperator SparseOperator::transposed() const {
    return SparseOperator(SparseMatrix(matrix_.transpose()));
}

SparseMatrix SparseOperator::symmetric_part() const {
    SparseMatrix S = 0.5 * (matrix_ + SparseMatrix(matrix_.transpose()));
    S.makeCompressed();
    return S;
}

Matrix SparseOperator::to_dense() const { return Matrix(matrix_); }

SparseOperator read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw Error("matrix market: empty input");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    for (auto* s : {&object, &format, &field, &symmetry})
        for (auto& c : *s)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate")
        throw Error("matrix market: expected '%%MatrixMarket matrix coordinate' header");
    if (field != "real" && field != "integer")
        throw Error("matrix market: only real fields are supported, got '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw Error("matrix market: unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
    }
    std::istringstream sizes(line);
    long rows = 0, cols = 0, nnz = 0;
    if (!(sizes >> rows >> cols >> nnz))
        throw Error("matrix market: malformed size line");
    if (rows != cols)
        throw DimensionError("matrix market: operator must be square");

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v))
            throw Error("matrix market: expected " + std::to_string(nnz) + " entries, read " +
                        std::to_string(k));
        triplets.push_back({i - 1, j - 1, v});
        if (symmetric && i != j)
            triplets.push_back({j - 1, i - 1, v});
    }
    return SparseOperator(rows, triplets);
}

SparseOperator read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("matrix market: cannot open " + path.string());
    return read_matrix_market(in);
}

void write_matrix_market(const SparseOperator& op, std::ostream& out) {
    const SparseMatrix& M = op.matrix();
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
    out.precision(17);
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(M, k); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(const SparseOperator& op, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("matrix market: cannot write " + path.string());
    write_matrix_market(op, out);
}

}  // namespace sylkrylov
