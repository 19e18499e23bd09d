#pragma once

// Manufactured-solution test problems on uniform cell-centered
// finite-volume grids.
//
// Two coupled models are provided:
//  - dual porosity: two pressures exchange mass through a transfer term
//    beta (u - v); the coupling blocks are -beta I and the diagonal blocks
//    are diffusion operators plus beta I;
//  - quad Laplacian: all four blocks are diffusion operators, the coupling
//    coefficients being the constants m_uv = beta and m_vu = -beta.
//
// Exact solutions are fixed analytically per model and dimension; the
// forcing terms below are hand-derived closed forms, cross-checked in the
// test suite against a high-order finite-difference application of the
// continuous operators. Boundary conditions are Dirichlet via ghost values
// (u_ghost = 2 u_boundary - u_cell, second order). The 2D problems use
// Dirichlet data on the left/right sides and Neumann flux data on the
// top/bottom sides, both sampled from the manufactured solution.

#include <functional>
#include <utility>
#include <variant>

#include "blocksplit/block_system.hpp"

namespace blocksplit {

/// Uniform 1D grid of cell-centered control volumes over [x_min, x_max].
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_cells = 0;

    double h() const { return (x_max - x_min) / n_cells; }
    double center(int i) const { return x_min + (i + 0.5) * h(); }
};

/// Uniform Cartesian grid over the unit square; cell (i, j) has flat index
/// j * n_x + i.
struct Grid2D {
    int n_x = 0;
    int n_y = 0;

    double hx() const { return 1.0 / n_x; }
    double hy() const { return 1.0 / n_y; }
    double center_x(int i) const { return (i + 0.5) * hx(); }
    double center_y(int j) const { return (j + 0.5) * hy(); }
    int index(int i, int j) const { return j * n_x + i; }
    int n_cells() const { return n_x * n_y; }
};

enum class Model { DUAL_POROSITY, QUAD_LAPLACIAN };
enum class Dim { D1, D2 };

struct ManufacturedProblem {
    Model model = Model::DUAL_POROSITY;
    Dim dim = Dim::D1;
    double beta = 0.0;
    std::variant<Grid1D, Grid2D> grid;
    BlockSystem system;
    DenseVector exact_u;
    DenseVector exact_v;
};

/// Cell-centered finite-volume discretization of s -> -(m s')' with
/// Dirichlet values s(x_min), s(x_max) applied through ghost cells.
/// Returns the matrix K and boundary vector g such that K s_h = f + g
/// discretizes -(m s')' = f to second order. Face coefficients are m
/// evaluated at face coordinates.
std::pair<CsrMatrix, DenseVector> fv_diffusion_1d(const Grid1D& grid,
                                                  const std::function<double(double)>& m,
                                                  const std::function<double(double)>& s);

/// Same for s -> -div(m grad s) on the unit square with the 5-point
/// stencil: Dirichlet data s(0, y), s(1, y) on the left/right sides,
/// Neumann flux data -m sy on the top/bottom sides (sy is the exact
/// y-derivative of s).
std::pair<CsrMatrix, DenseVector> fv_diffusion_2d(
    const Grid2D& grid, const std::function<double(double, double)>& m,
    const std::function<double(double, double)>& s,
    const std::function<double(double, double)>& sy);

/// Dual porosity on [0, pi]: u = sin(2x), v = e^{-2x},
/// m_u = 1e4 (1 + sin(2x)/2), m_v = 1 + sin(4x)/2. Requires beta >= 0 and
/// a grid covering exactly [0, pi].
ManufacturedProblem assemble_dual_porosity_1d(const Grid1D& grid, double beta);

/// Quad Laplacian on (0, 2 pi): u = e^{sin x}, v = -x^2 + x - 1,
/// m_uu = 1 + sin(4x)/2, m_vv = (1e-2/beta)(1 + sin(2x)/2), m_uv = beta,
/// m_vu = -beta. Requires beta > 0 (m_vv carries 1/beta).
ManufacturedProblem assemble_quad_laplacian_1d(const Grid1D& grid, double beta);

/// Dual porosity on the unit square: u = sin(2 pi x) sin(2 pi y),
/// v = cos(pi x) cos(pi y), with strongly anti-correlated fields
/// m_u = exp(contrast * u), m_v = exp(-contrast * u) (their product is
/// exactly 1 everywhere). Requires beta >= 0.
ManufacturedProblem assemble_dual_porosity_2d(const Grid2D& grid, double beta,
                                              double contrast = 3.0);

/// Quad Laplacian on the unit square with the same manufactured solutions,
/// m_uu = 1 + sin(4 pi x) sin(4 pi y)/2,
/// m_vv = (1e-2/beta)(1 + sin(2 pi x) sin(2 pi y)/2), m_uv = beta,
/// m_vu = -beta. Requires beta > 0.
ManufacturedProblem assemble_quad_laplacian_2d(const Grid2D& grid, double beta);

/// Discrete L2 distance of w from the exact cell samples, per field:
/// sqrt(h sum (u_i - u*_i)^2) in 1D, area-weighted in 2D.
std::pair<double, double> discrete_l2_error(const BlockVector& w, const ManufacturedProblem& prob);

}  // namespace blocksplit
