#pragma once

#include <string>
#include <vector>

namespace blocksplit {

/// Dense vector of real values. Plain std::vector so callers can use the
/// full standard-library toolbox on it.
using DenseVector = std::vector<double>;

/// One (row, col, value) contribution collected during assembly.
/// Duplicate coordinates are summed when the matrix is built.
struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed sparse row matrix in canonical form: row_offsets is
/// non-decreasing with row_offsets[0] == 0 and row_offsets[n_rows] == nnz,
/// and column indices are strictly increasing within each row.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets{0};
    std::vector<int> col_indices;
    std::vector<double> values;

    /// Build from a triplet list, sorting entries and summing duplicates.
    static CsrMatrix from_triplets(int n_rows, int n_cols, std::vector<Triplet> entries);

    /// n x n identity.
    static CsrMatrix identity(int n);

    /// Matrix with no stored entries.
    static CsrMatrix zero(int n_rows, int n_cols);

    /// diag(d).
    static CsrMatrix diagonal(const DenseVector& d);

    int nnz() const { return row_offsets.empty() ? 0 : row_offsets.back(); }

    /// Stored value at (i, j), or 0 when the entry is absent. Intended for
    /// tests and small structural checks, not inner loops.
    double at(int i, int j) const;

    /// True when the structural invariants listed above all hold.
    bool is_canonical() const;
};

/// y = M x.
DenseVector spmv(const CsrMatrix& M, const DenseVector& x);

/// d_i = M_ii, zero when the diagonal entry is not stored. M must be square.
DenseVector extract_diagonal(const CsrMatrix& M);

/// a*M1 + b*M2 in canonical form. Dimensions must match.
CsrMatrix add_scaled(const CsrMatrix& M1, double a, const CsrMatrix& M2, double b);

/// B * diag(dinv) * C in canonical form. Every dinv entry must be nonzero
/// and finite (it is typically an inverted diagonal).
CsrMatrix triple_product_diag(const CsrMatrix& B, const DenseVector& dinv, const CsrMatrix& C);

/// M^T in canonical form.
CsrMatrix transpose(const CsrMatrix& M);

/// diag(d) * M, i.e. row i scaled by d_i.
CsrMatrix row_scale(const DenseVector& d, const CsrMatrix& M);

/// Largest |M1 - M2| entry over the union of both sparsity patterns.
double max_abs_difference(const CsrMatrix& M1, const CsrMatrix& M2);

}  // namespace blocksplit
