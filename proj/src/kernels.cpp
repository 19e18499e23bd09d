#include "blocksplit/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace blocksplit::kernels {

void spmv_serial(const CsrMatrix& M, const double* x, double* y) {
    for (int i = 0; i < M.n_rows; ++i) {
        double s = 0.0;
        for (int k = M.row_offsets[i]; k < M.row_offsets[i + 1]; ++k)
            s += M.values[k] * x[M.col_indices[k]];
        y[i] = s;
    }
}

void spmv(const CsrMatrix& M, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M.n_rows; ++i) {
        double s = 0.0;
        for (int k = M.row_offsets[i]; k < M.row_offsets[i + 1]; ++k)
            s += M.values[k] * x[M.col_indices[k]];
        y[i] = s;
    }
}

namespace {

inline double dot_block(const double* x, const double* y, int begin, int end) {
    double s = 0.0;
    for (int i = begin; i < end; ++i) s += x[i] * y[i];
    return s;
}

inline int block_count(int n) { return (n + reduction_block - 1) / reduction_block; }

}  // namespace

double dot_serial(const double* x, const double* y, int n) {
    const int nb = block_count(n);
    double total = 0.0;
    for (int b = 0; b < nb; ++b) {
        const int begin = b * reduction_block;
        const int end = begin + reduction_block < n ? begin + reduction_block : n;
        total += dot_block(x, y, begin, end);
    }
    return total;
}

double dot(const double* x, const double* y, int n) {
    const int nb = block_count(n);
    if (nb <= 1) return dot_block(x, y, 0, n);
    std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b) {
        const int begin = b * reduction_block;
        const int end = begin + reduction_block < n ? begin + reduction_block : n;
        partial[b] = dot_block(x, y, begin, end);
    }
    double total = 0.0;
    for (int b = 0; b < nb; ++b) total += partial[b];  // fixed combine order
    return total;
}

double dot(const DenseVector& x, const DenseVector& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("dot: length mismatch (" + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    return dot(x.data(), y.data(), static_cast<int>(x.size()));
}

double norm2(const DenseVector& x) {
    return std::sqrt(dot(x.data(), x.data(), static_cast<int>(x.size())));
}

void axpy_serial(double a, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy(double a, const double* x, double* y, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy(double a, const DenseVector& x, DenseVector& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: length mismatch (" + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    axpy(a, x.data(), y.data(), static_cast<int>(x.size()));
}

}  // namespace blocksplit::kernels

namespace blocksplit {

DenseVector spmv(const CsrMatrix& M, const DenseVector& x) {
    if (static_cast<int>(x.size()) != M.n_cols)
        throw std::invalid_argument("spmv: dimension mismatch (matrix is " + std::to_string(M.n_rows) +
                                    "x" + std::to_string(M.n_cols) + ", vector has length " +
                                    std::to_string(x.size()) + ")");
    DenseVector y(M.n_rows);
    kernels::spmv(M, x.data(), y.data());
    return y;
}

}  // namespace blocksplit
