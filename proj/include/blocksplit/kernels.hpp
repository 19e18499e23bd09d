#pragma once

// Low-level vector and matrix-vector kernels. Each kernel exists in two
// forms: a plain serial reference (suffix _serial) and the default entry
// point, which parallelizes with OpenMP when the library is built with it.
//
// The default entry points are bitwise-deterministic regardless of thread
// count: spmv assigns whole rows to threads, and the reductions accumulate
// fixed-size blocks whose partial sums are combined in index order. The
// serial references use the same blocked summation order, so serial and
// parallel results are bitwise identical and the references stay usable as
// oracles in tests.

#include "blocksplit/csr.hpp"

namespace blocksplit::kernels {

/// Block length for the deterministic segmented reductions.
inline constexpr int reduction_block = 1024;

/// y = M x (y must already have length M.n_rows).
void spmv_serial(const CsrMatrix& M, const double* x, double* y);
void spmv(const CsrMatrix& M, const double* x, double* y);

/// Dot product with blocked accumulation.
double dot_serial(const double* x, const double* y, int n);
double dot(const double* x, const double* y, int n);
double dot(const DenseVector& x, const DenseVector& y);

/// Euclidean norm, sqrt(dot(x, x)).
double norm2(const DenseVector& x);

/// y += a * x.
void axpy_serial(double a, const double* x, double* y, int n);
void axpy(double a, const double* x, double* y, int n);
void axpy(double a, const DenseVector& x, DenseVector& y);

}  // namespace blocksplit::kernels
