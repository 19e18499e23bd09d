#include "blocksplit/mms.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace blocksplit {

namespace {

const double pi = std::acos(-1.0);

std::string format_number(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.6g", x);
    return buffer;
}

void validate_grid(const char* who, const Grid1D& grid) {
    if (!(grid.x_max > grid.x_min)) {
        throw std::invalid_argument(std::string(who) + ": empty interval [" +
                                    format_number(grid.x_min) + ", " + format_number(grid.x_max) +
                                    "]");
    }
    if (grid.n_cells < 2) {
        throw std::invalid_argument(std::string(who) + ": needs at least 2 cells (got " +
                                    std::to_string(grid.n_cells) + ")");
    }
}

void validate_grid(const char* who, const Grid2D& grid) {
    if (grid.n_x < 2 || grid.n_y < 2) {
        throw std::invalid_argument(std::string(who) + ": needs at least 2x2 cells (got " +
                                    std::to_string(grid.n_x) + "x" + std::to_string(grid.n_y) +
                                    ")");
    }
}

void require_interval(const char* who, const Grid1D& grid, double lo, double hi) {
    if (std::abs(grid.x_min - lo) > 1e-12 || std::abs(grid.x_max - hi) > 1e-12) {
        throw std::invalid_argument(std::string(who) + ": grid must cover [" + format_number(lo) +
                                    ", " + format_number(hi) + "] exactly (got [" +
                                    format_number(grid.x_min) + ", " +
                                    format_number(grid.x_max) + "])");
    }
}

/// Samples f at every cell center.
DenseVector sample_1d(const Grid1D& grid, const std::function<double(double)>& f) {
    DenseVector out(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) out[i] = f(grid.center(i));
    return out;
}

DenseVector sample_2d(const Grid2D& grid, const std::function<double(double, double)>& f) {
    DenseVector out(grid.n_cells());
    for (int j = 0; j < grid.n_y; ++j)
        for (int i = 0; i < grid.n_x; ++i) out[grid.index(i, j)] = f(grid.center_x(i), grid.center_y(j));
    return out;
}

DenseVector add(DenseVector a, const DenseVector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

CsrMatrix plus_scaled_identity(const CsrMatrix& K, double s) {
    if (s == 0.0) return K;
    return add_scaled(K, 1.0, CsrMatrix::identity(K.n_rows), s);
}

CsrMatrix coupling_diagonal(int n, double beta) {
    if (beta == 0.0) return CsrMatrix::zero(n, n);
    return CsrMatrix::diagonal(DenseVector(static_cast<std::size_t>(n), -beta));
}

}  // namespace

std::pair<CsrMatrix, DenseVector> fv_diffusion_1d(const Grid1D& grid,
                                                  const std::function<double(double)>& m,
                                                  const std::function<double(double)>& s) {
    validate_grid("fv_diffusion_1d", grid);
    const int n = grid.n_cells;
    const double h = grid.h();
    const double inv_h2 = 1.0 / (h * h);
    std::vector<Triplet> t;
    DenseVector g(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double m_west = m(grid.x_min + i * h);
        const double m_east = m(grid.x_min + (i + 1) * h);
        if (i > 0) {
            t.push_back({i, i, m_west * inv_h2});
            t.push_back({i, i - 1, -m_west * inv_h2});
        } else {
            // Ghost value 2 s_b - s_0 keeps the boundary flux second order.
            t.push_back({i, i, 2.0 * m_west * inv_h2});
            g[i] += 2.0 * m_west * s(grid.x_min) * inv_h2;
        }
        if (i + 1 < n) {
            t.push_back({i, i, m_east * inv_h2});
            t.push_back({i, i + 1, -m_east * inv_h2});
        } else {
            t.push_back({i, i, 2.0 * m_east * inv_h2});
            g[i] += 2.0 * m_east * s(grid.x_max) * inv_h2;
        }
    }
    return {CsrMatrix::from_triplets(n, n, std::move(t)), std::move(g)};
}

std::pair<CsrMatrix, DenseVector> fv_diffusion_2d(
    const Grid2D& grid, const std::function<double(double, double)>& m,
    const std::function<double(double, double)>& s,
    const std::function<double(double, double)>& sy) {
    validate_grid("fv_diffusion_2d", grid);
    const double hx = grid.hx(), hy = grid.hy();
    const double inv_hx2 = 1.0 / (hx * hx), inv_hy2 = 1.0 / (hy * hy);
    std::vector<Triplet> t;
    DenseVector g(grid.n_cells(), 0.0);
    for (int j = 0; j < grid.n_y; ++j) {
        for (int i = 0; i < grid.n_x; ++i) {
            const int row = grid.index(i, j);
            const double xc = grid.center_x(i), yc = grid.center_y(j);
            const double m_west = m(i * hx, yc);
            const double m_east = m((i + 1) * hx, yc);
            const double m_south = m(xc, j * hy);
            const double m_north = m(xc, (j + 1) * hy);

            if (i > 0) {
                t.push_back({row, row, m_west * inv_hx2});
                t.push_back({row, grid.index(i - 1, j), -m_west * inv_hx2});
            } else {  // Dirichlet, left side
                t.push_back({row, row, 2.0 * m_west * inv_hx2});
                g[row] += 2.0 * m_west * s(0.0, yc) * inv_hx2;
            }
            if (i + 1 < grid.n_x) {
                t.push_back({row, row, m_east * inv_hx2});
                t.push_back({row, grid.index(i + 1, j), -m_east * inv_hx2});
            } else {  // Dirichlet, right side
                t.push_back({row, row, 2.0 * m_east * inv_hx2});
                g[row] += 2.0 * m_east * s(1.0, yc) * inv_hx2;
            }
            if (j > 0) {
                t.push_back({row, row, m_south * inv_hy2});
                t.push_back({row, grid.index(i, j - 1), -m_south * inv_hy2});
            } else {  // Neumann, bottom: prescribed outward flux m sy
                g[row] -= m_south * sy(xc, 0.0) / hy;
            }
            if (j + 1 < grid.n_y) {
                t.push_back({row, row, m_north * inv_hy2});
                t.push_back({row, grid.index(i, j + 1), -m_north * inv_hy2});
            } else {  // Neumann, top: prescribed outward flux -m sy
                g[row] += m_north * sy(xc, 1.0) / hy;
            }
        }
    }
    return {CsrMatrix::from_triplets(grid.n_cells(), grid.n_cells(), std::move(t)), std::move(g)};
}

ManufacturedProblem assemble_dual_porosity_1d(const Grid1D& grid, double beta) {
    validate_grid("assemble_dual_porosity_1d", grid);
    require_interval("assemble_dual_porosity_1d", grid, 0.0, pi);
    if (beta < 0.0) {
        throw std::invalid_argument("assemble_dual_porosity_1d: beta must be nonnegative (got " +
                                    format_number(beta) + ")");
    }
    auto u = [](double x) { return std::sin(2.0 * x); };
    auto v = [](double x) { return std::exp(-2.0 * x); };
    auto m_u = [](double x) { return 1e4 * (1.0 + 0.5 * std::sin(2.0 * x)); };
    auto m_v = [](double x) { return 1.0 + 0.5 * std::sin(4.0 * x); };
    // f1 = beta (u - v) - (m_u u')' with each factor expanded analytically.
    auto f1 = [&](double x) {
        const double du = 2.0 * std::cos(2.0 * x);
        const double ddu = -4.0 * std::sin(2.0 * x);
        const double dm = 1e4 * std::cos(2.0 * x);
        return beta * (u(x) - v(x)) - (dm * du + m_u(x) * ddu);
    };
    auto f2 = [&](double x) {
        const double dv = -2.0 * std::exp(-2.0 * x);
        const double ddv = 4.0 * std::exp(-2.0 * x);
        const double dm = 2.0 * std::cos(4.0 * x);
        return beta * (v(x) - u(x)) - (dm * dv + m_v(x) * ddv);
    };

    auto [K_u, g_u] = fv_diffusion_1d(grid, m_u, u);
    auto [K_v, g_v] = fv_diffusion_1d(grid, m_v, v);
    const int n = grid.n_cells;

    ManufacturedProblem prob;
    prob.model = Model::DUAL_POROSITY;
    prob.dim = Dim::D1;
    prob.beta = beta;
    prob.grid = grid;
    prob.exact_u = sample_1d(grid, u);
    prob.exact_v = sample_1d(grid, v);
    prob.system = make_block_system(plus_scaled_identity(K_u, beta), coupling_diagonal(n, beta),
                                    coupling_diagonal(n, beta), plus_scaled_identity(K_v, beta),
                                    add(sample_1d(grid, f1), g_u), add(sample_1d(grid, f2), g_v));
    return prob;
}

ManufacturedProblem assemble_quad_laplacian_1d(const Grid1D& grid, double beta) {
    validate_grid("assemble_quad_laplacian_1d", grid);
    require_interval("assemble_quad_laplacian_1d", grid, 0.0, 2.0 * pi);
    if (!(beta > 0.0)) {
        throw std::invalid_argument("assemble_quad_laplacian_1d: beta must be positive (got " +
                                    format_number(beta) + ")");
    }
    auto u = [](double x) { return std::exp(std::sin(x)); };
    auto du = [&](double x) { return std::cos(x) * u(x); };
    auto ddu = [&](double x) {
        return (std::cos(x) * std::cos(x) - std::sin(x)) * u(x);
    };
    auto v = [](double x) { return -x * x + x - 1.0; };
    auto dv = [](double x) { return -2.0 * x + 1.0; };
    const double ddv = -2.0;
    auto m_uu = [](double x) { return 1.0 + 0.5 * std::sin(4.0 * x); };
    auto m_vv = [beta](double x) { return (1e-2 / beta) * (1.0 + 0.5 * std::sin(2.0 * x)); };
    auto m_uv = [beta](double) { return beta; };
    auto m_vu = [beta](double) { return -beta; };
    // f1 = -(m_uu u')' - (m_uv v')'; m_uv is constant, so the second term is
    // -beta v''. Likewise f2 = -(m_vu u')' - (m_vv v')' with m_vu = -beta.
    auto f1 = [&](double x) {
        const double dm = 2.0 * std::cos(4.0 * x);
        return -(dm * du(x) + m_uu(x) * ddu(x)) - beta * ddv;
    };
    auto f2 = [&](double x) {
        const double dm = (1e-2 / beta) * std::cos(2.0 * x);
        return beta * ddu(x) - (dm * dv(x) + m_vv(x) * ddv);
    };

    auto [K_uu, g_uu] = fv_diffusion_1d(grid, m_uu, u);
    auto [K_uv, g_uv] = fv_diffusion_1d(grid, m_uv, v);
    auto [K_vu, g_vu] = fv_diffusion_1d(grid, m_vu, u);
    auto [K_vv, g_vv] = fv_diffusion_1d(grid, m_vv, v);

    ManufacturedProblem prob;
    prob.model = Model::QUAD_LAPLACIAN;
    prob.dim = Dim::D1;
    prob.beta = beta;
    prob.grid = grid;
    prob.exact_u = sample_1d(grid, u);
    prob.exact_v = sample_1d(grid, v);
    prob.system = make_block_system(std::move(K_uu), std::move(K_uv), std::move(K_vu),
                                    std::move(K_vv), add(add(sample_1d(grid, f1), g_uu), g_uv),
                                    add(add(sample_1d(grid, f2), g_vu), g_vv));
    return prob;
}

ManufacturedProblem assemble_dual_porosity_2d(const Grid2D& grid, double beta, double contrast) {
    validate_grid("assemble_dual_porosity_2d", grid);
    if (beta < 0.0) {
        throw std::invalid_argument("assemble_dual_porosity_2d: beta must be nonnegative (got " +
                                    format_number(beta) + ")");
    }
    if (!std::isfinite(contrast)) {
        throw std::invalid_argument("assemble_dual_porosity_2d: contrast must be finite");
    }
    const double two_pi = 2.0 * pi;
    auto u = [&](double x, double y) { return std::sin(two_pi * x) * std::sin(two_pi * y); };
    auto ux = [&](double x, double y) {
        return two_pi * std::cos(two_pi * x) * std::sin(two_pi * y);
    };
    auto uy = [&](double x, double y) {
        return two_pi * std::sin(two_pi * x) * std::cos(two_pi * y);
    };
    auto v = [&](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); };
    auto vx = [&](double x, double y) { return -pi * std::sin(pi * x) * std::cos(pi * y); };
    auto vy = [&](double x, double y) { return -pi * std::cos(pi * x) * std::sin(pi * y); };
    // Anti-correlated permeabilities: m_u m_v = 1 identically.
    auto m_u = [&](double x, double y) { return std::exp(contrast * u(x, y)); };
    auto m_v = [&](double x, double y) { return std::exp(-contrast * u(x, y)); };
    // div(m_u grad u) = m_u [contrast |grad u|^2 + lap u] since
    // grad m_u = contrast m_u grad u; lap u = -8 pi^2 u.
    auto f1 = [&](double x, double y) {
        const double gx = ux(x, y), gy = uy(x, y);
        const double lap = -2.0 * two_pi * two_pi * u(x, y);
        return beta * (u(x, y) - v(x, y)) -
               m_u(x, y) * (contrast * (gx * gx + gy * gy) + lap);
    };
    auto f2 = [&](double x, double y) {
        const double lap = -2.0 * pi * pi * v(x, y);
        const double cross = ux(x, y) * vx(x, y) + uy(x, y) * vy(x, y);
        return beta * (v(x, y) - u(x, y)) - m_v(x, y) * (-contrast * cross + lap);
    };

    auto [K_u, g_u] = fv_diffusion_2d(grid, m_u, u, uy);
    auto [K_v, g_v] = fv_diffusion_2d(grid, m_v, v, vy);
    const int n = grid.n_cells();

    ManufacturedProblem prob;
    prob.model = Model::DUAL_POROSITY;
    prob.dim = Dim::D2;
    prob.beta = beta;
    prob.grid = grid;
    prob.exact_u = sample_2d(grid, u);
    prob.exact_v = sample_2d(grid, v);
    prob.system = make_block_system(plus_scaled_identity(K_u, beta), coupling_diagonal(n, beta),
                                    coupling_diagonal(n, beta), plus_scaled_identity(K_v, beta),
                                    add(sample_2d(grid, f1), g_u), add(sample_2d(grid, f2), g_v));
    return prob;
}

ManufacturedProblem assemble_quad_laplacian_2d(const Grid2D& grid, double beta) {
    validate_grid("assemble_quad_laplacian_2d", grid);
    if (!(beta > 0.0)) {
        throw std::invalid_argument("assemble_quad_laplacian_2d: beta must be positive (got " +
                                    format_number(beta) + ")");
    }
    const double two_pi = 2.0 * pi;
    auto u = [&](double x, double y) { return std::sin(two_pi * x) * std::sin(two_pi * y); };
    auto ux = [&](double x, double y) {
        return two_pi * std::cos(two_pi * x) * std::sin(two_pi * y);
    };
    auto uy = [&](double x, double y) {
        return two_pi * std::sin(two_pi * x) * std::cos(two_pi * y);
    };
    auto v = [&](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); };
    auto vx = [&](double x, double y) { return -pi * std::sin(pi * x) * std::cos(pi * y); };
    auto vy = [&](double x, double y) { return -pi * std::cos(pi * x) * std::sin(pi * y); };
    auto m_uu = [&](double x, double y) {
        return 1.0 + 0.5 * std::sin(2.0 * two_pi * x) * std::sin(2.0 * two_pi * y);
    };
    auto m_vv = [&](double x, double y) {
        return (1e-2 / beta) * (1.0 + 0.5 * std::sin(two_pi * x) * std::sin(two_pi * y));
    };
    auto m_uv = [beta](double, double) { return beta; };
    auto m_vu = [beta](double, double) { return -beta; };

    auto f1 = [&](double x, double y) {
        const double mx = 2.0 * two_pi * 0.5 * std::cos(2.0 * two_pi * x) * std::sin(2.0 * two_pi * y);
        const double my = 2.0 * two_pi * 0.5 * std::sin(2.0 * two_pi * x) * std::cos(2.0 * two_pi * y);
        const double lap_u = -2.0 * two_pi * two_pi * u(x, y);
        const double lap_v = -2.0 * pi * pi * v(x, y);
        return -(mx * ux(x, y) + my * uy(x, y) + m_uu(x, y) * lap_u) - beta * lap_v;
    };
    auto f2 = [&](double x, double y) {
        const double mx = (1e-2 / beta) * pi * std::cos(two_pi * x) * std::sin(two_pi * y);
        const double my = (1e-2 / beta) * pi * std::sin(two_pi * x) * std::cos(two_pi * y);
        const double lap_u = -2.0 * two_pi * two_pi * u(x, y);
        const double lap_v = -2.0 * pi * pi * v(x, y);
        return beta * lap_u - (mx * vx(x, y) + my * vy(x, y) + m_vv(x, y) * lap_v);
    };

    auto [K_uu, g_uu] = fv_diffusion_2d(grid, m_uu, u, uy);
    auto [K_uv, g_uv] = fv_diffusion_2d(grid, m_uv, v, vy);
    auto [K_vu, g_vu] = fv_diffusion_2d(grid, m_vu, u, uy);
    auto [K_vv, g_vv] = fv_diffusion_2d(grid, m_vv, v, vy);

    ManufacturedProblem prob;
    prob.model = Model::QUAD_LAPLACIAN;
    prob.dim = Dim::D2;
    prob.beta = beta;
    prob.grid = grid;
    prob.exact_u = sample_2d(grid, u);
    prob.exact_v = sample_2d(grid, v);
    prob.system = make_block_system(std::move(K_uu), std::move(K_uv), std::move(K_vu),
                                    std::move(K_vv), add(add(sample_2d(grid, f1), g_uu), g_uv),
                                    add(add(sample_2d(grid, f2), g_vu), g_vv));
    return prob;
}

std::pair<double, double> discrete_l2_error(const BlockVector& w,
                                            const ManufacturedProblem& prob) {
    if (w.u.size() != prob.exact_u.size() || w.v.size() != prob.exact_v.size()) {
        throw std::invalid_argument(
            "discrete_l2_error: dimension mismatch (got " + std::to_string(w.u.size()) + "+" +
            std::to_string(w.v.size()) + ", expected " + std::to_string(prob.exact_u.size()) +
            "+" + std::to_string(prob.exact_v.size()) + ")");
    }
    double measure = 0.0;
    if (const Grid1D* g1 = std::get_if<Grid1D>(&prob.grid)) {
        measure = g1->h();
    } else {
        const Grid2D& g2 = std::get<Grid2D>(prob.grid);
        measure = g2.hx() * g2.hy();
    }
    auto field_error = [measure](const DenseVector& got, const DenseVector& exact) {
        double sum = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double d = got[i] - exact[i];
            sum += d * d;
        }
        return std::sqrt(measure * sum);
    };
    return {field_error(w.u, prob.exact_u), field_error(w.v, prob.exact_v)};
}

}  // namespace blocksplit
