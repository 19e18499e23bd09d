#include <cmath>
#include <random>
#include <string>

#include "blocksplit/block_system.hpp"
#include "blocksplit/inner_solve.hpp"
#include "blocksplit/schemes.hpp"
#include "doctest.h"
#include "support/convert.hpp"
#include "support/dense.hpp"

using namespace blocksplit;
namespace ts = testsupport;

namespace {

CsrMatrix csr_from(int rows, int cols, const std::vector<ts::TripletEntry>& t) {
    std::vector<Triplet> u;
    for (const auto& e : t) u.push_back({e.row, e.col, e.value});
    return CsrMatrix::from_triplets(rows, cols, std::move(u));
}

// Diagonally dominant random block system: each diagonal block is
// diag(dominance) plus a sparse perturbation, couplings are scaled down so
// that every splitting scheme converges.
BlockSystem random_system(std::mt19937_64& rng, int n_u, int n_v, double dominance = 5.0,
                          double coupling = 0.5) {
    auto diag_block = [&](int n) {
        auto t = ts::random_triplets(rng, n, n, 2 * n);
        for (int i = 0; i < n; ++i) t.push_back({i, i, dominance});
        return t;
    };
    auto coupling_block = [&](int rows, int cols) {
        auto t = ts::random_triplets(rng, rows, cols, rows + cols);
        for (auto& e : t) e.value *= coupling;
        return t;
    };
    return make_block_system(csr_from(n_u, n_u, diag_block(n_u)),
                             csr_from(n_u, n_v, coupling_block(n_u, n_v)),
                             csr_from(n_v, n_u, coupling_block(n_v, n_u)),
                             csr_from(n_v, n_v, diag_block(n_v)),
                             ts::random_vector(rng, n_u), ts::random_vector(rng, n_v));
}

// Dual-porosity-like coupling: B = C = -beta I added on top of SPD-ish
// diagonal blocks, so the SPJ and S2PJ relaxations must coincide.
BlockSystem transfer_system(std::mt19937_64& rng, int n, double beta) {
    auto t_a = ts::random_triplets(rng, n, n, 2 * n);
    auto t_d = ts::random_triplets(rng, n, n, 2 * n);
    for (int i = 0; i < n; ++i) {
        t_a.push_back({i, i, 4.0 + beta});
        t_d.push_back({i, i, 4.0 + beta});
    }
    std::vector<ts::TripletEntry> t_b;
    for (int i = 0; i < n; ++i) t_b.push_back({i, i, -beta});
    return make_block_system(csr_from(n, n, t_a), csr_from(n, n, t_b), csr_from(n, n, t_b),
                             csr_from(n, n, t_d), ts::random_vector(rng, n),
                             ts::random_vector(rng, n));
}

double max_entry_gap(const CsrMatrix& m1, const CsrMatrix& m2) { return max_abs_difference(m1, m2); }

double max_component_gap(const BlockVector& a, const BlockVector& b) {
    double gap = 0.0;
    for (int i = 0; i < (int)a.u.size(); ++i) gap = std::max(gap, std::abs(a.u[i] - b.u[i]));
    for (int i = 0; i < (int)a.v.size(); ++i) gap = std::max(gap, std::abs(a.v[i] - b.v[i]));
    return gap;
}

BlockVector random_iterate(std::mt19937_64& rng, const BlockSystem& sys) {
    return {ts::random_vector(rng, sys.n_u()), ts::random_vector(rng, sys.n_v())};
}

}  // namespace

TEST_CASE("spec validation enforces the parameter ranges") {
    SchemeSpec bad_omega{SchemeKind::BSOR, 2.5, 0.0, SchemeSide::V, {}};
    CHECK_THROWS_AS(validate_spec(bad_omega), std::invalid_argument);
    bad_omega.omega = 0.0;
    CHECK_THROWS_AS(validate_spec(bad_omega), std::invalid_argument);
    bad_omega.omega = 2.0;
    CHECK_NOTHROW(validate_spec(bad_omega));

    SchemeSpec bad_ell{SchemeKind::LSCHEME, 1.0, 0.0, SchemeSide::V, {}};
    CHECK_THROWS_AS(validate_spec(bad_ell), std::invalid_argument);
    bad_ell.ell = 1e-12;
    CHECK_NOTHROW(validate_spec(bad_ell));

    // omega/ell are only constrained for the scheme that reads them.
    SchemeSpec bgs{SchemeKind::BGS, -3.0, -1.0, SchemeSide::V, {}};
    CHECK_NOTHROW(validate_spec(bgs));
}

TEST_CASE("default ordering is V_FIRST exactly for Schur relaxation on the v equation") {
    auto ordering_of = [](SchemeKind kind, SchemeSide side) {
        SchemeSpec spec{kind, 1.0, 1.0, side, {}};
        return effective_ordering(spec);
    };
    CHECK(ordering_of(SchemeKind::SPJ, SchemeSide::V) == Ordering::V_FIRST);
    CHECK(ordering_of(SchemeKind::S2PJ, SchemeSide::V) == Ordering::V_FIRST);
    CHECK(ordering_of(SchemeKind::SPJ, SchemeSide::U) == Ordering::U_FIRST);
    CHECK(ordering_of(SchemeKind::SPJ, SchemeSide::ALTERNATE) == Ordering::U_FIRST);
    CHECK(ordering_of(SchemeKind::BJ, SchemeSide::V) == Ordering::U_FIRST);
    CHECK(ordering_of(SchemeKind::BGS, SchemeSide::V) == Ordering::U_FIRST);

    SchemeSpec forced{SchemeKind::SPJ, 1.0, 1.0, SchemeSide::V, Ordering::U_FIRST};
    CHECK(effective_ordering(forced) == Ordering::U_FIRST);
}

TEST_CASE("build_relaxation: classic schemes get zero blocks, LSCHEME gets ell*I") {
    std::mt19937_64 rng(71);
    BlockSystem sys = random_system(rng, 6, 4);

    for (SchemeKind kind : {SchemeKind::BJ, SchemeKind::BGS, SchemeKind::BSOR}) {
        auto relax = build_relaxation(sys, {kind, 1.0, 0.0, SchemeSide::V, {}});
        CHECK(relax.L_u.n_rows == 6);
        CHECK(relax.L_u.nnz() == 0);
        CHECK(relax.L_v.n_rows == 4);
        CHECK(relax.L_v.nnz() == 0);
    }

    auto relax = build_relaxation(sys, {SchemeKind::LSCHEME, 1.0, 0.7, SchemeSide::V, {}});
    CHECK(relax.L_u.nnz() == 6);
    for (int i = 0; i < 6; ++i) CHECK(relax.L_u.at(i, i) == 0.7);
    CHECK(relax.L_v.nnz() == 0);
}

TEST_CASE("build_relaxation: scalar-block SPJ reproduces -C diag(A)^-1 B by hand") {
    BlockSystem sys = make_block_system(csr_from(1, 1, {{0, 0, 2.0}}), csr_from(1, 1, {{0, 0, 1.0}}),
                                        csr_from(1, 1, {{0, 0, 1.0}}), csr_from(1, 1, {{0, 0, 3.0}}),
                                        {1.0}, {1.0});
    auto side_v = build_relaxation(sys, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::V, {}});
    CHECK(side_v.L_v.at(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(side_v.L_u.nnz() == 0);

    auto side_u = build_relaxation(sys, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::U, {}});
    CHECK(side_u.L_u.at(0, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(side_u.L_v.nnz() == 0);

    auto both = build_relaxation(sys, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}});
    CHECK(both.L_u.at(0, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(both.L_v.at(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("build_relaxation: SPJ and S2PJ match dense oracles on random blocks") {
    std::mt19937_64 rng(72);
    for (int trial = 0; trial < 50; ++trial) {
        BlockSystem sys = random_system(rng, 5, 5, 4.0, 1.0);
        ts::DenseMatrix a = ts::dense_from_csr(sys.A);
        ts::DenseMatrix b = ts::dense_from_csr(sys.B);
        ts::DenseMatrix c = ts::dense_from_csr(sys.C);
        ts::DenseMatrix d = ts::dense_from_csr(sys.D);

        std::vector<double> inv_diag_a(5), inv_diag_d(5);
        for (int i = 0; i < 5; ++i) {
            inv_diag_a[i] = -1.0 / a.at(i, i);
            inv_diag_d[i] = -1.0 / d.at(i, i);
        }

        auto spj = build_relaxation(sys, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}});
        ts::DenseMatrix want_l_v = ts::triple_product_diag(c, inv_diag_a, b);
        ts::DenseMatrix want_l_u = ts::triple_product_diag(b, inv_diag_d, c);
        CHECK(max_entry_gap(spj.L_v, csr_from_dense(want_l_v)) < 1e-13);
        CHECK(max_entry_gap(spj.L_u, csr_from_dense(want_l_u)) < 1e-13);

        // S2PJ diagonalizes the leading coupling factor too.
        auto s2pj = build_relaxation(sys, {SchemeKind::S2PJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}});
        ts::DenseMatrix want2_l_v(5, 5), want2_l_u(5, 5);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                want2_l_v.at(i, j) = -c.at(i, i) / a.at(i, i) * b.at(i, j);
                want2_l_u.at(i, j) = -b.at(i, i) / d.at(i, i) * c.at(i, j);
            }
        }
        CHECK(max_entry_gap(s2pj.L_v, csr_from_dense(want2_l_v)) < 1e-13);
        CHECK(max_entry_gap(s2pj.L_u, csr_from_dense(want2_l_u)) < 1e-13);
    }
}

TEST_CASE("build_relaxation: SPJ and S2PJ coincide when the couplings are diagonal") {
    std::mt19937_64 rng(73);
    for (double beta : {0.1, 1.0, 100.0}) {
        BlockSystem sys = transfer_system(rng, 12, beta);
        auto spj = build_relaxation(sys, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}});
        auto s2pj = build_relaxation(sys, {SchemeKind::S2PJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}});
        CHECK(max_entry_gap(spj.L_u, s2pj.L_u) < 1e-14 * beta * beta);
        CHECK(max_entry_gap(spj.L_v, s2pj.L_v) < 1e-14 * beta * beta);
    }
}

TEST_CASE("build_relaxation: S2PJ refuses non-square couplings, zero diagonals are caught") {
    std::mt19937_64 rng(74);
    BlockSystem rect = random_system(rng, 6, 4);
    CHECK_THROWS_WITH_AS(build_relaxation(rect, {SchemeKind::S2PJ, 1.0, 0.0, SchemeSide::V, {}}),
                         "build_relaxation: S2PJ needs square coupling blocks (B is 6x4, C is 4x6)",
                         std::invalid_argument);

    // Assembled directly (bypassing make_block_system) to hit the builder's
    // own diagonal guard.
    BlockSystem hole{csr_from(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}}), CsrMatrix::identity(2),
                     CsrMatrix::identity(2), CsrMatrix::identity(2), {1.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_WITH_AS(build_relaxation(hole, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::V, {}}),
                         "build_relaxation: zero diagonal entry in A at index 1", std::domain_error);
}

TEST_CASE("one step solves a decoupled system exactly for the parameter-free data flows") {
    std::mt19937_64 rng(75);
    BlockSystem sys = random_system(rng, 8, 8, 5.0, 0.0);
    // Wipe the couplings entirely (coupling = 0 above still stores zeros).
    sys.B = CsrMatrix::zero(8, 8);
    sys.C = CsrMatrix::zero(8, 8);

    BlockVector exact{inner_solve(sys.A, sys.f1), inner_solve(sys.D, sys.f2)};
    BlockVector w0 = random_iterate(rng, sys);

    std::vector<SchemeSpec> specs = {
        {SchemeKind::BJ, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::BSOR, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::U, {}},
        {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}},
        {SchemeKind::S2PJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}},
    };
    for (const auto& spec : specs) {
        CAPTURE(to_string(spec.kind));
        BlockVector w1 = SchemeEngine(sys, spec).step(w0);
        CHECK(max_component_gap(w1, exact) < 1e-10);
    }
}

TEST_CASE("BSOR with omega = 1 walks the exact BGS trajectory") {
    std::mt19937_64 rng(76);
    for (Ordering ord : {Ordering::U_FIRST, Ordering::V_FIRST}) {
        BlockSystem sys = random_system(rng, 9, 7);
        SchemeEngine bgs(sys, {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, ord});
        SchemeEngine bsor(sys, {SchemeKind::BSOR, 1.0, 0.0, SchemeSide::V, ord});
        BlockVector wa = random_iterate(rng, sys);
        BlockVector wb = wa;
        for (int k = 0; k < 5; ++k) {
            wa = bgs.step(wa);
            wb = bsor.step(wb);
            CHECK(max_component_gap(wa, wb) < 1e-12);
        }
    }
}

TEST_CASE("LSCHEME with vanishing ell walks the exact BGS trajectory") {
    std::mt19937_64 rng(77);
    BlockSystem sys = random_system(rng, 10, 10);
    SchemeEngine bgs(sys, {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}});
    SchemeEngine lscheme(sys, {SchemeKind::LSCHEME, 1.0, 1e-300, SchemeSide::V, {}});
    BlockVector wa = random_iterate(rng, sys);
    BlockVector wb = wa;
    for (int k = 0; k < 5; ++k) {
        wa = bgs.step(wa);
        wb = lscheme.step(wb);
        CHECK(max_component_gap(wa, wb) < 1e-12);
    }
}

TEST_CASE("BSOR sweeps match the displayed update formulas against a dense oracle") {
    std::mt19937_64 rng(78);
    const double omega = 1.6;
    BlockSystem sys = random_system(rng, 6, 5);
    ts::DenseMatrix a = ts::dense_from_csr(sys.A);
    ts::DenseMatrix b = ts::dense_from_csr(sys.B);
    ts::DenseMatrix c = ts::dense_from_csr(sys.C);
    ts::DenseMatrix d = ts::dense_from_csr(sys.D);

    BlockVector w = random_iterate(rng, sys);
    SchemeEngine bsor(sys, {SchemeKind::BSOR, omega, 0.0, SchemeSide::V, {}});
    for (int k = 0; k < 3; ++k) {
        // A u' = (1-w) A u + w (f1 - B v), then D v' = (1-w) D v + w (f2 - C u').
        std::vector<double> rhs_u = ts::matvec(a, w.u);
        std::vector<double> bv = ts::matvec(b, w.v);
        for (int i = 0; i < 6; ++i) rhs_u[i] = (1.0 - omega) * rhs_u[i] + omega * (sys.f1[i] - bv[i]);
        std::vector<double> u_next = ts::solve(a, rhs_u);

        std::vector<double> rhs_v = ts::matvec(d, w.v);
        std::vector<double> cu = ts::matvec(c, u_next);
        for (int i = 0; i < 5; ++i) rhs_v[i] = (1.0 - omega) * rhs_v[i] + omega * (sys.f2[i] - cu[i]);
        std::vector<double> v_next = ts::solve(d, rhs_v);

        w = bsor.step(w);
        CHECK(max_component_gap(w, {u_next, v_next}) < 1e-11);
    }
}

TEST_CASE("V-first SPJ equals the factorized approximate-Schur iteration") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 20; ++trial) {
        BlockSystem sys = random_system(rng, 8, 8, 6.0, 0.8);
        ts::DenseMatrix a = ts::dense_from_csr(sys.A);
        ts::DenseMatrix b = ts::dense_from_csr(sys.B);
        ts::DenseMatrix c = ts::dense_from_csr(sys.C);
        ts::DenseMatrix d = ts::dense_from_csr(sys.D);

        // Consistent start: A u0 + B v0 = f1.
        BlockVector w{{}, ts::random_vector(rng, 8)};
        std::vector<double> rhs0 = sys.f1;
        std::vector<double> bv0 = ts::matvec(b, w.v);
        for (int i = 0; i < 8; ++i) rhs0[i] -= bv0[i];
        w.u = ts::solve(a, rhs0);

        // Dense factorized stepper: the Schur system in v, then back-substitute u.
        std::vector<double> inv_diag_a(8);
        for (int i = 0; i < 8; ++i) inv_diag_a[i] = 1.0 / a.at(i, i);
        ts::DenseMatrix schur = ts::add_scaled(d, 1.0, ts::triple_product_diag(c, inv_diag_a, b), -1.0);
        ts::DenseMatrix a_offdiag = a;
        for (int i = 0; i < 8; ++i) a_offdiag.at(i, i) = 0.0;

        SchemeEngine spj(sys, {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::V, {}});
        REQUIRE(effective_ordering(spj.spec()) == Ordering::V_FIRST);
        BlockVector wf = w;
        for (int k = 0; k < 5; ++k) {
            // (D - C diag(A)^-1 B) v' = f2 - C diag(A)^-1 (f1 - (A - diag(A)) u).
            std::vector<double> inner = ts::matvec(a_offdiag, wf.u);
            for (int i = 0; i < 8; ++i) inner[i] = inv_diag_a[i] * (sys.f1[i] - inner[i]);
            std::vector<double> rhs_v = ts::matvec(c, inner);
            for (int i = 0; i < 8; ++i) rhs_v[i] = sys.f2[i] - rhs_v[i];
            std::vector<double> v_next = ts::solve(schur, rhs_v);

            std::vector<double> rhs_u = ts::matvec(b, v_next);
            for (int i = 0; i < 8; ++i) rhs_u[i] = sys.f1[i] - rhs_u[i];
            wf = {ts::solve(a, rhs_u), v_next};

            w = spj.step(w);
            CHECK(max_component_gap(w, wf) < 1e-10);
        }
    }
}

TEST_CASE("exact Schur relaxation solves the system in one V-first iteration") {
    std::mt19937_64 rng(80);
    for (int trial = 0; trial < 10; ++trial) {
        BlockSystem sys = random_system(rng, 8, 8, 6.0, 0.8);
        ts::DenseMatrix a = ts::dense_from_csr(sys.A);
        ts::DenseMatrix b = ts::dense_from_csr(sys.B);
        ts::DenseMatrix c = ts::dense_from_csr(sys.C);

        // Test-only dense path: L_v = -C A^-1 B with the exact inverse.
        ts::DenseMatrix l_v = ts::matmul(c, ts::matmul(ts::inverse(a), b));
        for (double& x : l_v.a) x = -x;
        RelaxationOperator relax{CsrMatrix::zero(8, 8), ts::csr_from_dense(l_v)};

        BlockVector w0{{}, ts::random_vector(rng, 8)};
        std::vector<double> rhs0 = sys.f1;
        std::vector<double> bv0 = ts::matvec(b, w0.v);
        for (int i = 0; i < 8; ++i) rhs0[i] -= bv0[i];
        w0.u = ts::solve(a, rhs0);

        SchemeSpec spec{SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, Ordering::V_FIRST};
        BlockVector w1 = step_relaxed(sys, relax, spec, w0);
        auto [res_u, res_v] = residual_norms(sys, w1);
        const double fnorm = std::hypot(ts::norm2(sys.f1), ts::norm2(sys.f2));
        CHECK(res_u <= 1e-10 * fnorm);
        CHECK(res_v <= 1e-10 * fnorm);
    }
}

TEST_CASE("run: starting at the solution reports CONVERGED with zero iterations") {
    std::mt19937_64 rng(81);
    BlockSystem sys = random_system(rng, 12, 10);
    BlockVector sol = monolithic_solve(sys);
    IterationReport rep = run(sys, {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}}, sol, 1e-8, 50);
    CHECK(rep.status == RunStatus::CONVERGED);
    CHECK(rep.iterations == 0);
    CHECK(rep.res_u_history.size() == 1);
    CHECK(rep.res_v_history.size() == 1);
    CHECK(rep.err_history.empty());
}

TEST_CASE("run: converged limits satisfy the stopping rule when recomputed from scratch") {
    std::mt19937_64 rng(82);
    std::vector<SchemeSpec> specs = {
        {SchemeKind::BJ, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::BSOR, 1.2, 0.0, SchemeSide::V, {}},
        {SchemeKind::LSCHEME, 1.0, 0.3, SchemeSide::V, {}},
        {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::U, {}},
        {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::SPJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}},
        {SchemeKind::S2PJ, 1.0, 0.0, SchemeSide::V, {}},
        {SchemeKind::S2PJ, 1.0, 0.0, SchemeSide::ALTERNATE, {}},
    };
    const double tol = 1e-9;
    BlockSystem sys = random_system(rng, 14, 14, 8.0, 0.5);
    BlockVector reference = monolithic_solve(sys);
    for (const auto& spec : specs) {
        CAPTURE(to_string(spec.kind));
        IterationReport rep = run(sys, spec, zero_like(sys), tol, 200, &reference);
        REQUIRE(rep.status == RunStatus::CONVERGED);
        CHECK((int)rep.res_u_history.size() == rep.iterations + 1);
        CHECK((int)rep.res_v_history.size() == rep.iterations + 1);
        CHECK((int)rep.err_history.size() == rep.iterations + 1);
        auto [res_u, res_v] = residual_norms(sys, rep.final_w);
        CHECK(res_u <= tol * ts::norm2(sys.f1));
        CHECK(res_v <= tol * ts::norm2(sys.f2));
        // The error history must actually have decayed toward the reference.
        CHECK(rep.err_history.back() < 1e-6 * rep.err_history.front());
    }
}

TEST_CASE("run: violent coupling is flagged as DIVERGED, not merely MAX_ITERS") {
    std::vector<ts::TripletEntry> eye, strong;
    for (int i = 0; i < 6; ++i) {
        eye.push_back({i, i, 1.0});
        strong.push_back({i, i, 100.0});
    }
    BlockSystem sys = make_block_system(csr_from(6, 6, eye), csr_from(6, 6, strong),
                                        csr_from(6, 6, strong), csr_from(6, 6, eye),
                                        std::vector<double>(6, 1.0), std::vector<double>(6, 1.0));
    IterationReport rep =
        run(sys, {SchemeKind::BJ, 1.0, 0.0, SchemeSide::V, {}}, zero_like(sys), 1e-8, 100);
    CHECK(rep.status == RunStatus::DIVERGED);
    CHECK(rep.iterations < 100);
    CHECK((int)rep.res_u_history.size() == rep.iterations + 1);
}

TEST_CASE("run: a singular implicit block surfaces as INNER_FAILURE") {
    BlockSystem sys{csr_from(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}),
                    CsrMatrix::zero(2, 2), CsrMatrix::zero(2, 2), CsrMatrix::identity(2),
                    {1.0, 2.0}, {1.0, 1.0}};
    IterationReport rep =
        run(sys, {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}}, zero_like(sys), 1e-8, 10);
    CHECK(rep.status == RunStatus::INNER_FAILURE);
    CHECK(rep.iterations == 0);
    CHECK(rep.res_u_history.size() == 1);

    // The step itself names the failing block.
    try {
        step_relaxed(sys, {CsrMatrix::zero(2, 2), CsrMatrix::zero(2, 2)},
                     {SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}}, zero_like(sys));
        FAIL("expected InnerSolveError");
    } catch (const InnerSolveError& e) {
        CHECK(std::string(e.what()).rfind("u block: ", 0) == 0);
    }
}

TEST_CASE("run: argument validation") {
    std::mt19937_64 rng(83);
    BlockSystem sys = random_system(rng, 4, 4);
    SchemeSpec bgs{SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, {}};
    CHECK_THROWS_AS(run(sys, bgs, zero_like(sys), 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(run(sys, bgs, zero_like(sys), 1e-8, 0), std::invalid_argument);
    CHECK_THROWS_AS(run(sys, bgs, {{1.0}, {1.0}}, 1e-8, 10), std::invalid_argument);
    CHECK_THROWS_AS(
        SchemeEngine(sys, bgs, {CsrMatrix::identity(3), CsrMatrix::identity(4)}),
        std::invalid_argument);
    CHECK_THROWS_AS(SchemeEngine(sys, {SchemeKind::BSOR, 1.0, 0.0, SchemeSide::V, {}},
                                 {CsrMatrix::identity(4), CsrMatrix::identity(4)}),
                    std::invalid_argument);
}

TEST_CASE("SPJ and S2PJ trajectories coincide on diagonal-coupling systems") {
    std::mt19937_64 rng(84);
    BlockSystem sys = transfer_system(rng, 16, 3.0);
    for (SchemeSide side : {SchemeSide::U, SchemeSide::V, SchemeSide::ALTERNATE}) {
        SchemeEngine spj(sys, {SchemeKind::SPJ, 1.0, 0.0, side, {}});
        SchemeEngine s2pj(sys, {SchemeKind::S2PJ, 1.0, 0.0, side, {}});
        BlockVector wa = random_iterate(rng, sys);
        BlockVector wb = wa;
        for (int k = 0; k < 5; ++k) {
            wa = spj.step(wa);
            wb = s2pj.step(wb);
            CHECK(max_component_gap(wa, wb) < 1e-12);
        }
    }
}

TEST_CASE("skew systems contract monotonically in the L-weighted norm") {
    // C = -B^T with SPD diagonal blocks built as shift + G^T G, so the shift
    // is a certified lower bound on each coercivity constant. The relaxation
    // L_v = ell*I is sized from certified bounds so the sufficient condition
    // alpha_L >= ||B||^4 / (alpha_D alpha_A^2) is guaranteed, and the
    // contraction factor uses the certified alpha_D (weaker but sound).
    std::mt19937_64 rng(85);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 5 + (int)(rng() % 46);
        const double shift_a = 2.0, shift_d = 1.5;
        ts::DenseMatrix a = ts::random_spd(rng, n, shift_a, 0.4);
        ts::DenseMatrix d = ts::random_spd(rng, n, shift_d, 0.4);
        ts::DenseMatrix b(n, n);
        for (double& x : b.a) x = std::uniform_real_distribution<double>(-0.4, 0.4)(rng);
        ts::DenseMatrix c = ts::transpose(b);
        for (double& x : c.a) x = -x;

        double b_frob = 0.0;
        for (double x : b.a) b_frob += x * x;
        b_frob = std::sqrt(b_frob);
        const double ell = 1.5 * std::max(b_frob * b_frob * b_frob * b_frob /
                                              (shift_d * shift_a * shift_a),
                                          1e-8);

        BlockSystem sys = make_block_system(ts::csr_from_dense(a), ts::csr_from_dense(b),
                                            ts::csr_from_dense(c), ts::csr_from_dense(d),
                                            ts::random_vector(rng, n), ts::random_vector(rng, n));
        RelaxationOperator relax{CsrMatrix::zero(n, n),
                                 CsrMatrix::diagonal(std::vector<double>(n, ell))};
        SchemeSpec spec{SchemeKind::BGS, 1.0, 0.0, SchemeSide::V, Ordering::V_FIRST};
        SchemeEngine engine(sys, spec, relax);

        BlockVector sol = monolithic_solve(sys, 1e-14);
        // One warmup step: the contraction argument reads A u^k = f1 - B v^k
        // off the previous iterate, which a random start does not satisfy.
        BlockVector w = engine.step(random_iterate(rng, sys));
        auto err_v_sq = [&] {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const double dv = w.v[i] - sol.v[i];
                s += dv * dv;  // ||e_v||^2_L / ell for L = ell*I
            }
            return s;
        };
        double err_prev = err_v_sq();
        const double factor = shift_d / ell + 1.0;
        for (int k = 0; k < 60 && err_prev > 1e-14; ++k) {
            w = engine.step(w);
            const double err = err_v_sq();
            CHECK(factor * err <= err_prev * (1.0 + 1e-4));
            err_prev = err;
        }
    }
}
