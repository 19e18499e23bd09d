#include "blocksplit/csr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blocksplit {

namespace {

[[noreturn]] void throw_dim(const std::string& op, const std::string& detail) {
    throw std::invalid_argument(op + ": dimension mismatch (" + detail + ")");
}

std::string shape(const CsrMatrix& m) {
    return std::to_string(m.n_rows) + "x" + std::to_string(m.n_cols);
}

}  // namespace

CsrMatrix CsrMatrix::from_triplets(int n_rows, int n_cols, std::vector<Triplet> entries) {
    if (n_rows < 0 || n_cols < 0)
        throw std::invalid_argument("CsrMatrix::from_triplets: negative dimension");
    for (const auto& e : entries)
        if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols)
            throw std::invalid_argument("CsrMatrix::from_triplets: entry (" + std::to_string(e.row) +
                                        ", " + std::to_string(e.col) + ") outside " +
                                        std::to_string(n_rows) + "x" + std::to_string(n_cols));
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_offsets.assign(n_rows + 1, 0);
    m.col_indices.reserve(entries.size());
    m.values.reserve(entries.size());

    std::size_t i = 0;
    while (i < entries.size()) {
        const int row = entries[i].row;
        const int col = entries[i].col;
        double sum = 0.0;
        while (i < entries.size() && entries[i].row == row && entries[i].col == col) {
            sum += entries[i].value;  // duplicates are summed
            ++i;
        }
        m.col_indices.push_back(col);
        m.values.push_back(sum);
        m.row_offsets[row + 1] += 1;
    }
    for (int r = 0; r < n_rows; ++r) m.row_offsets[r + 1] += m.row_offsets[r];
    return m;
}

CsrMatrix CsrMatrix::identity(int n) {
    CsrMatrix m;
    m.n_rows = m.n_cols = n;
    m.row_offsets.resize(n + 1);
    m.col_indices.resize(n);
    m.values.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) m.row_offsets[i] = i;
    for (int i = 0; i < n; ++i) m.col_indices[i] = i;
    return m;
}

CsrMatrix CsrMatrix::zero(int n_rows, int n_cols) {
    CsrMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_offsets.assign(n_rows + 1, 0);
    return m;
}

CsrMatrix CsrMatrix::diagonal(const DenseVector& d) {
    CsrMatrix m = identity(static_cast<int>(d.size()));
    m.values = d;
    return m;
}

double CsrMatrix::at(int i, int j) const {
    if (i < 0 || i >= n_rows || j < 0 || j >= n_cols)
        throw std::out_of_range("CsrMatrix::at: index (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") outside " + shape(*this));
    const auto first = col_indices.begin() + row_offsets[i];
    const auto last = col_indices.begin() + row_offsets[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it != last && *it == j) return values[it - col_indices.begin()];
    return 0.0;
}

bool CsrMatrix::is_canonical() const {
    if (n_rows < 0 || n_cols < 0) return false;
    if (row_offsets.size() != static_cast<std::size_t>(n_rows) + 1) return false;
    if (row_offsets.front() != 0) return false;
    if (row_offsets.back() != static_cast<int>(col_indices.size())) return false;
    if (col_indices.size() != values.size()) return false;
    for (int r = 0; r < n_rows; ++r) {
        if (row_offsets[r] > row_offsets[r + 1]) return false;
        for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            if (col_indices[k] < 0 || col_indices[k] >= n_cols) return false;
            if (k > row_offsets[r] && col_indices[k] <= col_indices[k - 1]) return false;
        }
    }
    return true;
}

DenseVector extract_diagonal(const CsrMatrix& M) {
    if (M.n_rows != M.n_cols)
        throw std::invalid_argument("extract_diagonal: matrix is not square (" + shape(M) + ")");
    DenseVector d(M.n_rows, 0.0);
    for (int i = 0; i < M.n_rows; ++i) {
        for (int k = M.row_offsets[i]; k < M.row_offsets[i + 1]; ++k) {
            if (M.col_indices[k] == i) {
                d[i] = M.values[k];
                break;
            }
        }
    }
    return d;
}

CsrMatrix add_scaled(const CsrMatrix& M1, double a, const CsrMatrix& M2, double b) {
    if (M1.n_rows != M2.n_rows || M1.n_cols != M2.n_cols)
        throw_dim("add_scaled", shape(M1) + " vs " + shape(M2));

    CsrMatrix r;
    r.n_rows = M1.n_rows;
    r.n_cols = M1.n_cols;
    r.row_offsets.assign(M1.n_rows + 1, 0);
    r.col_indices.reserve(M1.col_indices.size() + M2.col_indices.size());
    r.values.reserve(M1.col_indices.size() + M2.col_indices.size());

    // Per-row merge of two sorted column lists.
    for (int i = 0; i < M1.n_rows; ++i) {
        int k1 = M1.row_offsets[i];
        const int e1 = M1.row_offsets[i + 1];
        int k2 = M2.row_offsets[i];
        const int e2 = M2.row_offsets[i + 1];
        while (k1 < e1 || k2 < e2) {
            const int c1 = k1 < e1 ? M1.col_indices[k1] : M1.n_cols;
            const int c2 = k2 < e2 ? M2.col_indices[k2] : M1.n_cols;
            if (c1 < c2) {
                r.col_indices.push_back(c1);
                r.values.push_back(a * M1.values[k1]);
                ++k1;
            } else if (c2 < c1) {
                r.col_indices.push_back(c2);
                r.values.push_back(b * M2.values[k2]);
                ++k2;
            } else {
                r.col_indices.push_back(c1);
                r.values.push_back(a * M1.values[k1] + b * M2.values[k2]);
                ++k1;
                ++k2;
            }
        }
        r.row_offsets[i + 1] = static_cast<int>(r.col_indices.size());
    }
    return r;
}

CsrMatrix triple_product_diag(const CsrMatrix& B, const DenseVector& dinv, const CsrMatrix& C) {
    if (B.n_cols != static_cast<int>(dinv.size()) || B.n_cols != C.n_rows)
        throw_dim("triple_product_diag",
                  shape(B) + " * diag(" + std::to_string(dinv.size()) + ") * " + shape(C));
    for (std::size_t i = 0; i < dinv.size(); ++i)
        if (dinv[i] == 0.0 || !std::isfinite(dinv[i]))
            throw std::domain_error("triple_product_diag: singular diagonal approximation at index " +
                                    std::to_string(i));

    // Gustavson's row-by-row product with a dense accumulator.
    CsrMatrix r;
    r.n_rows = B.n_rows;
    r.n_cols = C.n_cols;
    r.row_offsets.assign(B.n_rows + 1, 0);

    std::vector<double> acc(C.n_cols, 0.0);
    std::vector<int> mark(C.n_cols, -1);
    std::vector<int> touched;
    touched.reserve(C.n_cols);

    for (int i = 0; i < B.n_rows; ++i) {
        touched.clear();
        for (int kb = B.row_offsets[i]; kb < B.row_offsets[i + 1]; ++kb) {
            const int k = B.col_indices[kb];
            const double scale = B.values[kb] * dinv[k];
            for (int kc = C.row_offsets[k]; kc < C.row_offsets[k + 1]; ++kc) {
                const int j = C.col_indices[kc];
                if (mark[j] != i) {
                    mark[j] = i;
                    touched.push_back(j);
                }
                acc[j] += scale * C.values[kc];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (const int j : touched) {
            r.col_indices.push_back(j);
            r.values.push_back(acc[j]);
            acc[j] = 0.0;
        }
        r.row_offsets[i + 1] = static_cast<int>(r.col_indices.size());
    }
    return r;
}

CsrMatrix transpose(const CsrMatrix& M) {
    CsrMatrix t;
    t.n_rows = M.n_cols;
    t.n_cols = M.n_rows;
    t.row_offsets.assign(M.n_cols + 1, 0);
    t.col_indices.resize(M.col_indices.size());
    t.values.resize(M.values.size());

    for (const int c : M.col_indices) t.row_offsets[c + 1] += 1;
    for (int r = 0; r < t.n_rows; ++r) t.row_offsets[r + 1] += t.row_offsets[r];

    std::vector<int> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
    for (int i = 0; i < M.n_rows; ++i) {
        for (int k = M.row_offsets[i]; k < M.row_offsets[i + 1]; ++k) {
            const int c = M.col_indices[k];
            const int dst = cursor[c]++;
            t.col_indices[dst] = i;
            t.values[dst] = M.values[k];
        }
    }
    return t;  // scanning rows in order keeps each output row sorted
}

CsrMatrix row_scale(const DenseVector& d, const CsrMatrix& M) {
    if (static_cast<int>(d.size()) != M.n_rows)
        throw_dim("row_scale", std::to_string(d.size()) + " scales vs " + shape(M));
    CsrMatrix r = M;
    for (int i = 0; i < M.n_rows; ++i)
        for (int k = r.row_offsets[i]; k < r.row_offsets[i + 1]; ++k) r.values[k] *= d[i];
    return r;
}

double max_abs_difference(const CsrMatrix& M1, const CsrMatrix& M2) {
    const CsrMatrix diff = add_scaled(M1, 1.0, M2, -1.0);
    double m = 0.0;
    for (const double v : diff.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace blocksplit
