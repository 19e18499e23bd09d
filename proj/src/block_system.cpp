#include "blocksplit/block_system.hpp"

#include <cmath>
#include <stdexcept>

#include "blocksplit/inner_solve.hpp"
#include "blocksplit/kernels.hpp"
#include "blocksplit/mm_io.hpp"

namespace blocksplit {

void check_dimensions(const BlockSystem& sys) {
    const int nu = sys.A.n_rows;
    const int nv = sys.D.n_rows;
    const bool ok = sys.A.n_cols == nu && sys.B.n_rows == nu && sys.B.n_cols == nv &&
                    sys.C.n_rows == nv && sys.C.n_cols == nu && sys.D.n_cols == nv &&
                    static_cast<int>(sys.f1.size()) == nu && static_cast<int>(sys.f2.size()) == nv;
    if (!ok)
        throw std::invalid_argument(
            "BlockSystem: inconsistent block dimensions (A " + std::to_string(sys.A.n_rows) + "x" +
            std::to_string(sys.A.n_cols) + ", B " + std::to_string(sys.B.n_rows) + "x" +
            std::to_string(sys.B.n_cols) + ", C " + std::to_string(sys.C.n_rows) + "x" +
            std::to_string(sys.C.n_cols) + ", D " + std::to_string(sys.D.n_rows) + "x" +
            std::to_string(sys.D.n_cols) + ", f1 " + std::to_string(sys.f1.size()) + ", f2 " +
            std::to_string(sys.f2.size()) + ")");
}

BlockSystem make_block_system(CsrMatrix A, CsrMatrix B, CsrMatrix C, CsrMatrix D, DenseVector f1,
                              DenseVector f2) {
    BlockSystem sys{std::move(A), std::move(B), std::move(C), std::move(D), std::move(f1),
                    std::move(f2)};
    check_dimensions(sys);
    for (const auto* m : {&sys.A, &sys.D}) {
        const DenseVector d = extract_diagonal(*m);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d[i] == 0.0)
                throw std::invalid_argument(std::string("BlockSystem: zero diagonal entry in ") +
                                            (m == &sys.A ? "A" : "D") + " at index " +
                                            std::to_string(i));
    }
    return sys;
}

BlockVector zero_like(const BlockSystem& sys) {
    return BlockVector{DenseVector(sys.n_u(), 0.0), DenseVector(sys.n_v(), 0.0)};
}

DenseVector stack(const BlockVector& w) {
    DenseVector s;
    s.reserve(w.u.size() + w.v.size());
    s.insert(s.end(), w.u.begin(), w.u.end());
    s.insert(s.end(), w.v.begin(), w.v.end());
    return s;
}

BlockVector unstack(const DenseVector& w, int n_u) {
    if (n_u < 0 || n_u > static_cast<int>(w.size()))
        throw std::invalid_argument("unstack: split point " + std::to_string(n_u) +
                                    " outside vector of length " + std::to_string(w.size()));
    return BlockVector{DenseVector(w.begin(), w.begin() + n_u),
                       DenseVector(w.begin() + n_u, w.end())};
}

std::pair<DenseVector, DenseVector> residuals(const BlockSystem& sys, const BlockVector& w) {
    check_dimensions(sys);
    if (static_cast<int>(w.u.size()) != sys.n_u() || static_cast<int>(w.v.size()) != sys.n_v())
        throw std::invalid_argument("residuals: iterate has lengths (" + std::to_string(w.u.size()) +
                                    ", " + std::to_string(w.v.size()) + "), system needs (" +
                                    std::to_string(sys.n_u()) + ", " + std::to_string(sys.n_v()) +
                                    ")");
    DenseVector r1 = sys.f1;
    DenseVector r2 = sys.f2;
    DenseVector tmp(sys.n_u());
    kernels::spmv(sys.A, w.u.data(), tmp.data());
    for (int i = 0; i < sys.n_u(); ++i) r1[i] -= tmp[i];
    kernels::spmv(sys.B, w.v.data(), tmp.data());
    for (int i = 0; i < sys.n_u(); ++i) r1[i] -= tmp[i];
    tmp.resize(sys.n_v());
    kernels::spmv(sys.C, w.u.data(), tmp.data());
    for (int i = 0; i < sys.n_v(); ++i) r2[i] -= tmp[i];
    kernels::spmv(sys.D, w.v.data(), tmp.data());
    for (int i = 0; i < sys.n_v(); ++i) r2[i] -= tmp[i];
    return {std::move(r1), std::move(r2)};
}

std::pair<double, double> residual_norms(const BlockSystem& sys, const BlockVector& w) {
    const auto [r1, r2] = residuals(sys, w);
    return {kernels::norm2(r1), kernels::norm2(r2)};
}

namespace {

void append_block(std::vector<Triplet>& t, const CsrMatrix& m, int row_shift, int col_shift) {
    for (int i = 0; i < m.n_rows; ++i)
        for (int k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
            t.push_back({i + row_shift, m.col_indices[k] + col_shift, m.values[k]});
}

// Interleaved ordering u_i -> 2i, v_i -> 2i+1, usable when n_u == n_v. For
// the discretized problems here both fields live on the same grid, and the
// interleaving shrinks the monolithic bandwidth from ~n_u to ~2*(grid row),
// which keeps the banded factorization cheap.
CsrMatrix assemble_interleaved(const BlockSystem& sys) {
    std::vector<Triplet> t;
    t.reserve(sys.A.nnz() + sys.B.nnz() + sys.C.nnz() + sys.D.nnz());
    auto add = [&t](const CsrMatrix& m, int row_off, int col_off) {
        for (int i = 0; i < m.n_rows; ++i)
            for (int k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
                t.push_back({2 * i + row_off, 2 * m.col_indices[k] + col_off, m.values[k]});
    };
    add(sys.A, 0, 0);
    add(sys.B, 0, 1);
    add(sys.C, 1, 0);
    add(sys.D, 1, 1);
    return CsrMatrix::from_triplets(2 * sys.n_u(), 2 * sys.n_u(), std::move(t));
}

}  // namespace

CsrMatrix monolithic_assemble(const BlockSystem& sys) {
    check_dimensions(sys);
    const int nu = sys.n_u();
    const int n = nu + sys.n_v();
    std::vector<Triplet> t;
    t.reserve(sys.A.nnz() + sys.B.nnz() + sys.C.nnz() + sys.D.nnz());
    append_block(t, sys.A, 0, 0);
    append_block(t, sys.B, 0, nu);
    append_block(t, sys.C, nu, 0);
    append_block(t, sys.D, nu, nu);
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

BlockVector monolithic_solve(const BlockSystem& sys, double tol) {
    check_dimensions(sys);
    const int nu = sys.n_u();
    const int nv = sys.n_v();
    if (nu == nv) {
        DenseVector rhs(2 * nu);
        for (int i = 0; i < nu; ++i) {
            rhs[2 * i] = sys.f1[i];
            rhs[2 * i + 1] = sys.f2[i];
        }
        const DenseVector x = inner_solve(assemble_interleaved(sys), rhs, tol);
        BlockVector w{DenseVector(nu), DenseVector(nv)};
        for (int i = 0; i < nu; ++i) {
            w.u[i] = x[2 * i];
            w.v[i] = x[2 * i + 1];
        }
        return w;
    }
    DenseVector rhs = sys.f1;
    rhs.insert(rhs.end(), sys.f2.begin(), sys.f2.end());
    return unstack(inner_solve(monolithic_assemble(sys), rhs, tol), nu);
}

BlockSystem mm_read_block_system(const std::string& prefix) {
    CsrMatrix A = mm_read_matrix(prefix + "_A.mtx");
    CsrMatrix B = mm_read_matrix(prefix + "_B.mtx");
    CsrMatrix C = mm_read_matrix(prefix + "_C.mtx");
    CsrMatrix D = mm_read_matrix(prefix + "_D.mtx");
    DenseVector f1 = read_vector(prefix + "_f1.vec");
    DenseVector f2 = read_vector(prefix + "_f2.vec");
    BlockSystem sys{std::move(A), std::move(B), std::move(C), std::move(D), std::move(f1),
                    std::move(f2)};
    try {
        check_dimensions(sys);
    } catch (const std::invalid_argument& e) {
        throw IoError(prefix + "_*: " + e.what());
    }
    return sys;
}

void mm_write_block_system(const BlockSystem& sys, const std::string& prefix) {
    check_dimensions(sys);
    mm_write_matrix(sys.A, prefix + "_A.mtx");
    mm_write_matrix(sys.B, prefix + "_B.mtx");
    mm_write_matrix(sys.C, prefix + "_C.mtx");
    mm_write_matrix(sys.D, prefix + "_D.mtx");
    write_vector(sys.f1, prefix + "_f1.vec");
    write_vector(sys.f2, prefix + "_f2.vec");
}

}  // namespace blocksplit
