#pragma once

// Dense reference implementations used only by the test suite.
//
// Everything here is written in the most direct way possible (row-major
// arrays, textbook loops, partial-pivoting LU) so that it can serve as an
// independent oracle for the sparse kernels and solvers under test.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace testsupport {

struct DenseMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> a;  // row-major, size n_rows * n_cols

    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : n_rows(rows), n_cols(cols), a(static_cast<std::size_t>(rows) * cols, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n_cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n_cols + j]; }

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline std::vector<double> matvec(const DenseMatrix& m, const std::vector<double>& x) {
    assert(static_cast<int>(x.size()) == m.n_cols);
    std::vector<double> y(static_cast<std::size_t>(m.n_rows), 0.0);
    for (int i = 0; i < m.n_rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n_cols; ++j) s += m.at(i, j) * x[j];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

inline DenseMatrix matmul(const DenseMatrix& p, const DenseMatrix& q) {
    assert(p.n_cols == q.n_rows);
    DenseMatrix r(p.n_rows, q.n_cols);
    for (int i = 0; i < p.n_rows; ++i)
        for (int k = 0; k < p.n_cols; ++k) {
            const double pik = p.at(i, k);
            if (pik == 0.0) continue;
            for (int j = 0; j < q.n_cols; ++j) r.at(i, j) += pik * q.at(k, j);
        }
    return r;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.n_cols, m.n_rows);
    for (int i = 0; i < m.n_rows; ++i)
        for (int j = 0; j < m.n_cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

inline DenseMatrix add_scaled(const DenseMatrix& m1, double alpha, const DenseMatrix& m2, double beta) {
    assert(m1.n_rows == m2.n_rows && m1.n_cols == m2.n_cols);
    DenseMatrix r(m1.n_rows, m1.n_cols);
    for (std::size_t k = 0; k < r.a.size(); ++k) r.a[k] = alpha * m1.a[k] + beta * m2.a[k];
    return r;
}

// B * diag(d) * C computed entry by entry.
inline DenseMatrix triple_product_diag(const DenseMatrix& b, const std::vector<double>& d, const DenseMatrix& c) {
    assert(b.n_cols == static_cast<int>(d.size()) && b.n_cols == c.n_rows);
    DenseMatrix r(b.n_rows, c.n_cols);
    for (int i = 0; i < b.n_rows; ++i)
        for (int k = 0; k < b.n_cols; ++k) {
            const double s = b.at(i, k) * d[static_cast<std::size_t>(k)];
            if (s == 0.0) continue;
            for (int j = 0; j < c.n_cols; ++j) r.at(i, j) += s * c.at(k, j);
        }
    return r;
}

// LU factorization with partial pivoting. Returns false when a pivot
// underflows to (near) zero, i.e. the matrix is numerically singular.
struct DenseLu {
    DenseMatrix lu;        // combined L (unit diagonal, strictly lower) and U
    std::vector<int> perm; // row permutation applied to the right-hand side
    bool ok = false;
};

inline DenseLu lu_factor(DenseMatrix m) {
    assert(m.n_rows == m.n_cols);
    const int n = m.n_rows;
    DenseLu f;
    f.perm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = i;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(m.at(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m.at(i, k)) > best) { best = std::abs(m.at(i, k)); piv = i; }
        if (best == 0.0) { f.lu = std::move(m); return f; }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(piv, j));
            std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(piv)]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double l = m.at(i, k) / m.at(k, k);
            m.at(i, k) = l;
            if (l == 0.0) continue;
            for (int j = k + 1; j < n; ++j) m.at(i, j) -= l * m.at(k, j);
        }
    }
    f.lu = std::move(m);
    f.ok = true;
    return f;
}

inline std::vector<double> lu_solve(const DenseLu& f, const std::vector<double>& b) {
    if (!f.ok) throw std::runtime_error("dense oracle: singular matrix in lu_solve");
    const int n = f.lu.n_rows;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(f.perm[static_cast<std::size_t>(i)])];
    for (int i = 1; i < n; ++i) {
        double s = x[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) s -= f.lu.at(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= f.lu.at(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / f.lu.at(i, i);
    }
    return x;
}

inline std::vector<double> solve(const DenseMatrix& m, const std::vector<double>& b) {
    return lu_solve(lu_factor(m), b);
}

inline DenseMatrix inverse(const DenseMatrix& m) {
    const DenseLu f = lu_factor(m);
    if (!f.ok) throw std::runtime_error("dense oracle: singular matrix in inverse");
    const int n = m.n_rows;
    DenseMatrix inv(n, n);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        const std::vector<double> col = lu_solve(f, e);
        e[static_cast<std::size_t>(j)] = 0.0;
        for (int i = 0; i < n; ++i) inv.at(i, j) = col[static_cast<std::size_t>(i)];
    }
    return inv;
}

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    assert(x.size() == y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

// ---------------------------------------------------------------------------
// Random instance generators. All take an explicit engine so each property
// test controls its own seed and failures are reproducible.
// ---------------------------------------------------------------------------

struct TripletEntry { int row; int col; double value; };

inline std::vector<double> random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = dist(rng);
    return v;
}

// Random triplet list with `target` draws; duplicate (row, col) pairs are
// likely at high densities, which deliberately exercises duplicate summing.
inline std::vector<TripletEntry> random_triplets(std::mt19937_64& rng, int n_rows, int n_cols, int target) {
    std::uniform_int_distribution<int> ri(0, n_rows - 1);
    std::uniform_int_distribution<int> ci(0, n_cols - 1);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<TripletEntry> t;
    t.reserve(static_cast<std::size_t>(target));
    for (int k = 0; k < target; ++k) t.push_back({ri(rng), ci(rng), dist(rng)});
    return t;
}

inline DenseMatrix dense_from_triplets(int n_rows, int n_cols, const std::vector<TripletEntry>& t) {
    DenseMatrix m(n_rows, n_cols);
    for (const auto& e : t) m.at(e.row, e.col) += e.value;
    return m;
}

// Symmetric positive definite matrix: diag(shift) + G^T G with small G.
inline DenseMatrix random_spd(std::mt19937_64& rng, int n, double shift = 1.0, double scale = 0.3) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    DenseMatrix g(n, n);
    for (auto& x : g.a) x = dist(rng);
    DenseMatrix m = matmul(transpose(g), g);
    for (int i = 0; i < n; ++i) m.at(i, i) += shift;
    return m;
}

/// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
/// returned in ascending order.  Oracle quality: off-diagonal mass is
/// annihilated down to ~1e-14 of the matrix scale.
inline std::vector<double> symmetric_eigenvalues(DenseMatrix s) {
    assert(s.n_rows == s.n_cols);
    const int n = s.n_rows;
    double scale = 1.0;
    for (double v : s.a) scale = std::max(scale, std::abs(v));
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += s.at(p, q) * s.at(p, q);
        if (off <= 1e-30 * scale * scale * n * n) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = s.at(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (s.at(q, q) - s.at(p, p)) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = s.at(i, p);
                    const double aiq = s.at(i, q);
                    s.at(i, p) = c * aip - sn * aiq;
                    s.at(i, q) = sn * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = s.at(p, i);
                    const double aqi = s.at(q, i);
                    s.at(p, i) = c * api - sn * aqi;
                    s.at(q, i) = sn * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = s.at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

/// Spectral norm (largest singular value) by long power iteration on M^T M
/// with several random restarts; keeps the best Rayleigh quotient seen.
inline double spectral_norm_power(const DenseMatrix& m, std::mt19937_64& rng, int iters = 20000,
                                  int restarts = 5) {
    const DenseMatrix mt = transpose(m);
    double best = 0.0;
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> x = random_vector(rng, m.n_cols);
        double nx = norm2(x);
        if (nx == 0.0) continue;
        for (double& v : x) v /= nx;
        for (int it = 0; it < iters; ++it) {
            const std::vector<double> z = matvec(mt, matvec(m, x));
            const double rayleigh = dot(x, z);
            best = std::max(best, std::sqrt(std::max(rayleigh, 0.0)));
            const double nz = norm2(z);
            if (nz == 0.0) break;
            for (int i = 0; i < m.n_cols; ++i) x[i] = z[i] / nz;
        }
    }
    return best;
}

}  // namespace testsupport
