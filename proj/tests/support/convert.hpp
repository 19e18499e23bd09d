#pragma once

// Bridges between the library CSR type and the dense oracle type, shared by
// the scheme/analysis test suites.

#include <vector>

#include "blocksplit/csr.hpp"
#include "support/dense.hpp"

namespace testsupport {

inline DenseMatrix dense_from_csr(const blocksplit::CsrMatrix& m) {
    DenseMatrix d(m.n_rows, m.n_cols);
    for (int i = 0; i < m.n_rows; ++i) {
        for (int k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k) {
            d.at(i, m.col_indices[k]) += m.values[k];
        }
    }
    return d;
}

/// Keeps every nonzero entry; exact zeros are dropped from the pattern.
inline blocksplit::CsrMatrix csr_from_dense(const DenseMatrix& m) {
    std::vector<blocksplit::Triplet> t;
    for (int i = 0; i < m.n_rows; ++i) {
        for (int j = 0; j < m.n_cols; ++j) {
            if (m.at(i, j) != 0.0) t.push_back({i, j, m.at(i, j)});
        }
    }
    return blocksplit::CsrMatrix::from_triplets(m.n_rows, m.n_cols, std::move(t));
}

}  // namespace testsupport
