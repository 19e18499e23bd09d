#pragma once

// The coupled 2x2 block system
//
//     [ A  B ] [ u ]   [ f1 ]
//     [ C  D ] [ v ] = [ f2 ]
//
// Blocks are stored separately because every splitting scheme operates
// blockwise; the monolithic matrix is assembled only for the direct
// reference solve and the norm estimators.

#include <utility>

#include "blocksplit/csr.hpp"

namespace blocksplit {

struct BlockSystem {
    CsrMatrix A;    // n_u x n_u
    CsrMatrix B;    // n_u x n_v
    CsrMatrix C;    // n_v x n_u
    CsrMatrix D;    // n_v x n_v
    DenseVector f1; // length n_u
    DenseVector f2; // length n_v

    int n_u() const { return A.n_rows; }
    int n_v() const { return D.n_rows; }
};

struct BlockVector {
    DenseVector u;
    DenseVector v;
};

/// Validates dimensions and the nonzero-diagonal requirement on A and D
/// (needed by the Partial Jacobi relaxations), then returns the system.
BlockSystem make_block_system(CsrMatrix A, CsrMatrix B, CsrMatrix C, CsrMatrix D, DenseVector f1,
                              DenseVector f2);

/// Throws std::invalid_argument when block dimensions are inconsistent.
void check_dimensions(const BlockSystem& sys);

/// Zero BlockVector shaped like the system unknowns.
BlockVector zero_like(const BlockSystem& sys);

/// (u, v) -> single vector of length n_u + n_v, u first.
DenseVector stack(const BlockVector& w);
BlockVector unstack(const DenseVector& w, int n_u);

/// (f1 - A u - B v, f2 - C u - D v).
std::pair<DenseVector, DenseVector> residuals(const BlockSystem& sys, const BlockVector& w);

/// Euclidean norms of the two block residuals.
std::pair<double, double> residual_norms(const BlockSystem& sys, const BlockVector& w);

/// The (n_u + n_v)^2 monolithic matrix with blocks in natural order.
CsrMatrix monolithic_assemble(const BlockSystem& sys);

/// Direct reference solve of the monolithic system; the residuals of the
/// returned iterate are below tol * max(||f||_2, rhs_floor).
BlockVector monolithic_solve(const BlockSystem& sys, double tol = 1e-12);

/// Reads/writes <prefix>_A.mtx, _B.mtx, _C.mtx, _D.mtx, _f1.vec, _f2.vec.
BlockSystem mm_read_block_system(const std::string& prefix);
void mm_write_block_system(const BlockSystem& sys, const std::string& prefix);

}  // namespace blocksplit
