#include "blocksplit/schemes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "blocksplit/inner_solve.hpp"
#include "blocksplit/kernels.hpp"

namespace blocksplit {

namespace {

// d_i = -1 / M_ii, the negated inverse diagonal used by the SPJ products.
DenseVector negated_inverse_diagonal(const CsrMatrix& M, const char* name) {
    DenseVector d = extract_diagonal(M);
    for (int i = 0; i < (int)d.size(); ++i) {
        if (d[i] == 0.0 || !std::isfinite(d[i])) {
            throw std::domain_error("build_relaxation: zero diagonal entry in " +
                                    std::string(name) + " at index " + std::to_string(i));
        }
        d[i] = -1.0 / d[i];
    }
    return d;
}

// d_i = -N_ii / M_ii, the row scaling -diag(N) diag(M)^{-1} used by S2PJ.
DenseVector negated_diagonal_ratio(const CsrMatrix& N, const CsrMatrix& M, const char* name) {
    DenseVector num = extract_diagonal(N);
    DenseVector den = extract_diagonal(M);
    for (int i = 0; i < (int)den.size(); ++i) {
        if (den[i] == 0.0 || !std::isfinite(den[i])) {
            throw std::domain_error("build_relaxation: zero diagonal entry in " +
                                    std::string(name) + " at index " + std::to_string(i));
        }
        num[i] = -num[i] / den[i];
    }
    return num;
}

bool has_nonzero_entry(const CsrMatrix& M) {
    for (double v : M.values) {
        if (v != 0.0) return true;
    }
    return false;
}

void check_block_vector(const BlockSystem& sys, const BlockVector& w, const char* what) {
    if ((int)w.u.size() != sys.n_u() || (int)w.v.size() != sys.n_v()) {
        throw std::invalid_argument(std::string("SchemeEngine: ") + what + " has lengths (" +
                                    std::to_string(w.u.size()) + ", " + std::to_string(w.v.size()) +
                                    "), system needs (" + std::to_string(sys.n_u()) + ", " +
                                    std::to_string(sys.n_v()) + ")");
    }
}

// || w - ref ||_2 over the stacked unknowns.
double stacked_error_norm(const BlockVector& w, const BlockVector& ref) {
    double s = 0.0;
    for (int i = 0; i < (int)w.u.size(); ++i) {
        const double d = w.u[i] - ref.u[i];
        s += d * d;
    }
    for (int i = 0; i < (int)w.v.size(); ++i) {
        const double d = w.v[i] - ref.v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

const char* to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::BJ: return "BJ";
        case SchemeKind::BGS: return "BGS";
        case SchemeKind::BSOR: return "BSOR";
        case SchemeKind::LSCHEME: return "LSCHEME";
        case SchemeKind::SPJ: return "SPJ";
        case SchemeKind::S2PJ: return "S2PJ";
    }
    return "?";
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::CONVERGED: return "CONVERGED";
        case RunStatus::MAX_ITERS: return "MAX_ITERS";
        case RunStatus::DIVERGED: return "DIVERGED";
        case RunStatus::INNER_FAILURE: return "INNER_FAILURE";
    }
    return "?";
}

Ordering effective_ordering(const SchemeSpec& spec) {
    if (spec.ordering) return *spec.ordering;
    const bool schur = spec.kind == SchemeKind::SPJ || spec.kind == SchemeKind::S2PJ;
    return (schur && spec.side == SchemeSide::V) ? Ordering::V_FIRST : Ordering::U_FIRST;
}

void validate_spec(const SchemeSpec& spec) {
    if (spec.kind == SchemeKind::BSOR && !(spec.omega > 0.0 && spec.omega <= 2.0)) {
        throw std::invalid_argument("SchemeSpec: omega must lie in (0, 2], got " +
                                    std::to_string(spec.omega));
    }
    if (spec.kind == SchemeKind::LSCHEME && !(spec.ell > 0.0)) {
        throw std::invalid_argument("SchemeSpec: ell must be > 0, got " +
                                    std::to_string(spec.ell));
    }
}

RelaxationOperator build_relaxation(const BlockSystem& sys, const SchemeSpec& spec) {
    validate_spec(spec);
    check_dimensions(sys);
    RelaxationOperator relax{CsrMatrix::zero(sys.n_u(), sys.n_u()),
                             CsrMatrix::zero(sys.n_v(), sys.n_v())};
    switch (spec.kind) {
        case SchemeKind::BJ:
        case SchemeKind::BGS:
        case SchemeKind::BSOR:
            break;
        case SchemeKind::LSCHEME:
            relax.L_u = CsrMatrix::diagonal(DenseVector(sys.n_u(), spec.ell));
            break;
        case SchemeKind::SPJ:
            if (spec.side != SchemeSide::U) {
                relax.L_v = triple_product_diag(sys.C, negated_inverse_diagonal(sys.A, "A"), sys.B);
            }
            if (spec.side != SchemeSide::V) {
                relax.L_u = triple_product_diag(sys.B, negated_inverse_diagonal(sys.D, "D"), sys.C);
            }
            break;
        case SchemeKind::S2PJ:
            if (sys.B.n_rows != sys.B.n_cols || sys.C.n_rows != sys.C.n_cols) {
                throw std::invalid_argument(
                    "build_relaxation: S2PJ needs square coupling blocks (B is " +
                    std::to_string(sys.B.n_rows) + "x" + std::to_string(sys.B.n_cols) + ", C is " +
                    std::to_string(sys.C.n_rows) + "x" + std::to_string(sys.C.n_cols) + ")");
            }
            if (spec.side != SchemeSide::U) {
                relax.L_v = row_scale(negated_diagonal_ratio(sys.C, sys.A, "A"), sys.B);
            }
            if (spec.side != SchemeSide::V) {
                relax.L_u = row_scale(negated_diagonal_ratio(sys.B, sys.D, "D"), sys.C);
            }
            break;
    }
    return relax;
}

struct SchemeEngine::Impl {
    BlockSystem sys;
    SchemeSpec spec;
    RelaxationOperator relax;
    Ordering ordering;
    bool jacobi;  // both half-steps read level-k data only
    InnerSolver solver_u;
    InnerSolver solver_v;

    Impl(BlockSystem sys_, SchemeSpec spec_, RelaxationOperator relax_)
        : sys(std::move(sys_)),
          spec(spec_),
          relax(std::move(relax_)),
          ordering(effective_ordering(spec)),
          jacobi(spec.kind == SchemeKind::BJ),
          solver_u(add_scaled(sys.A, 1.0, relax.L_u, 1.0)),
          solver_v(add_scaled(sys.D, 1.0, relax.L_v, 1.0)) {}

    // Solves the u half-step: (A + L_u) u^{k+1} = f1 - B v_in + L_u u^k,
    // or the SOR form A u^{k+1} = (1-omega) A u^k + omega (f1 - B v_in).
    DenseVector half_u(const BlockVector& w_k, const DenseVector& v_in) const {
        DenseVector rhs = spmv(sys.B, v_in);
        if (spec.kind == SchemeKind::BSOR) {
            const DenseVector au = spmv(sys.A, w_k.u);
            for (int i = 0; i < sys.n_u(); ++i) {
                rhs[i] = (1.0 - spec.omega) * au[i] + spec.omega * (sys.f1[i] - rhs[i]);
            }
        } else {
            for (int i = 0; i < sys.n_u(); ++i) rhs[i] = sys.f1[i] - rhs[i];
            if (relax.L_u.nnz() > 0) {
                const DenseVector lu = spmv(relax.L_u, w_k.u);
                for (int i = 0; i < sys.n_u(); ++i) rhs[i] += lu[i];
            }
        }
        try {
            return solver_u.solve(rhs);
        } catch (const InnerSolveError& e) {
            throw InnerSolveError("u block: " + std::string(e.what()), e.achieved_residual());
        }
    }

    // Mirror image for v: (D + L_v) v^{k+1} = f2 - C u_in + L_v v^k.
    DenseVector half_v(const BlockVector& w_k, const DenseVector& u_in) const {
        DenseVector rhs = spmv(sys.C, u_in);
        if (spec.kind == SchemeKind::BSOR) {
            const DenseVector dv = spmv(sys.D, w_k.v);
            for (int i = 0; i < sys.n_v(); ++i) {
                rhs[i] = (1.0 - spec.omega) * dv[i] + spec.omega * (sys.f2[i] - rhs[i]);
            }
        } else {
            for (int i = 0; i < sys.n_v(); ++i) rhs[i] = sys.f2[i] - rhs[i];
            if (relax.L_v.nnz() > 0) {
                const DenseVector lv = spmv(relax.L_v, w_k.v);
                for (int i = 0; i < sys.n_v(); ++i) rhs[i] += lv[i];
            }
        }
        try {
            return solver_v.solve(rhs);
        } catch (const InnerSolveError& e) {
            throw InnerSolveError("v block: " + std::string(e.what()), e.achieved_residual());
        }
    }
};

SchemeEngine::SchemeEngine(BlockSystem sys, SchemeSpec spec) {
    RelaxationOperator relax = build_relaxation(sys, spec);
    impl_ = std::make_unique<Impl>(std::move(sys), spec, std::move(relax));
}

SchemeEngine::SchemeEngine(BlockSystem sys, SchemeSpec spec, RelaxationOperator relax) {
    validate_spec(spec);
    check_dimensions(sys);
    if (relax.L_u.n_rows == 0 && relax.L_u.n_cols == 0 && relax.L_v.n_rows == 0 &&
        relax.L_v.n_cols == 0) {
        relax.L_u = CsrMatrix::zero(sys.n_u(), sys.n_u());
        relax.L_v = CsrMatrix::zero(sys.n_v(), sys.n_v());
    }
    if (relax.L_u.n_rows != sys.n_u() || relax.L_u.n_cols != sys.n_u() ||
        relax.L_v.n_rows != sys.n_v() || relax.L_v.n_cols != sys.n_v()) {
        throw std::invalid_argument("SchemeEngine: relaxation blocks are " +
                                    std::to_string(relax.L_u.n_rows) + "x" +
                                    std::to_string(relax.L_u.n_cols) + " and " +
                                    std::to_string(relax.L_v.n_rows) + "x" +
                                    std::to_string(relax.L_v.n_cols) + ", system needs " +
                                    std::to_string(sys.n_u()) + " and " + std::to_string(sys.n_v()));
    }
    if (spec.kind == SchemeKind::BSOR &&
        (has_nonzero_entry(relax.L_u) || has_nonzero_entry(relax.L_v))) {
        throw std::invalid_argument(
            "SchemeEngine: BSOR has no relaxation term; pass zero blocks or another scheme");
    }
    impl_ = std::make_unique<Impl>(std::move(sys), spec, std::move(relax));
}

SchemeEngine::~SchemeEngine() = default;
SchemeEngine::SchemeEngine(SchemeEngine&&) noexcept = default;
SchemeEngine& SchemeEngine::operator=(SchemeEngine&&) noexcept = default;

const BlockSystem& SchemeEngine::system() const { return impl_->sys; }
const SchemeSpec& SchemeEngine::spec() const { return impl_->spec; }
const RelaxationOperator& SchemeEngine::relaxation() const { return impl_->relax; }

BlockVector SchemeEngine::step(const BlockVector& w_k) const {
    const Impl& im = *impl_;
    check_block_vector(im.sys, w_k, "iterate");
    BlockVector next;
    if (im.ordering == Ordering::U_FIRST) {
        next.u = im.half_u(w_k, w_k.v);
        next.v = im.half_v(w_k, im.jacobi ? w_k.u : next.u);
    } else {
        next.v = im.half_v(w_k, w_k.u);
        next.u = im.half_u(w_k, im.jacobi ? w_k.v : next.v);
    }
    return next;
}

IterationReport SchemeEngine::run(const BlockVector& w0, double tol, int max_iters,
                                  const BlockVector* reference) const {
    const Impl& im = *impl_;
    if (!(tol > 0.0)) throw std::invalid_argument("run: tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("run: max_iters must be >= 1");
    check_block_vector(im.sys, w0, "w0");
    if (reference) check_block_vector(im.sys, *reference, "reference");

    const double thresh_u = tol * std::max(kernels::norm2(im.sys.f1), rhs_floor);
    const double thresh_v = tol * std::max(kernels::norm2(im.sys.f2), rhs_floor);

    IterationReport rep;
    rep.final_w = w0;
    auto record = [&](const BlockVector& w) {
        const auto [ru, rv] = residual_norms(im.sys, w);
        rep.res_u_history.push_back(ru);
        rep.res_v_history.push_back(rv);
        if (reference) rep.err_history.push_back(stacked_error_norm(w, *reference));
        return std::pair<double, double>(ru, rv);
    };

    std::pair<double, double> res = record(w0);
    // Blow-up references: a residual a trillion times above its starting
    // point (or the stopping threshold, whichever is larger) is divergence.
    const double blow_u = 1e12 * std::max(res.first, thresh_u);
    const double blow_v = 1e12 * std::max(res.second, thresh_v);
    if (res.first <= thresh_u && res.second <= thresh_v) {
        rep.status = RunStatus::CONVERGED;
        return rep;
    }

    rep.status = RunStatus::MAX_ITERS;
    for (int k = 1; k <= max_iters; ++k) {
        try {
            rep.final_w = step(rep.final_w);
        } catch (const InnerSolveError&) {
            rep.status = RunStatus::INNER_FAILURE;
            break;
        }
        res = record(rep.final_w);
        rep.iterations = k;
        if (!std::isfinite(res.first) || !std::isfinite(res.second) || res.first > blow_u ||
            res.second > blow_v) {
            rep.status = RunStatus::DIVERGED;
            break;
        }
        if (res.first <= thresh_u && res.second <= thresh_v) {
            rep.status = RunStatus::CONVERGED;
            break;
        }
    }
    return rep;
}

BlockVector step_relaxed(const BlockSystem& sys, const RelaxationOperator& relax,
                         const SchemeSpec& spec, const BlockVector& w_k) {
    return SchemeEngine(sys, spec, relax).step(w_k);
}

IterationReport run(const BlockSystem& sys, const SchemeSpec& spec, const BlockVector& w0,
                    double tol, int max_iters, const BlockVector* reference) {
    return SchemeEngine(sys, spec).run(w0, tol, max_iters, reference);
}

IterationReport run_with_relaxation(const BlockSystem& sys, const SchemeSpec& spec,
                                    const RelaxationOperator& relax, const BlockVector& w0,
                                    double tol, int max_iters, const BlockVector* reference) {
    return SchemeEngine(sys, spec, relax).run(w0, tol, max_iters, reference);
}

}  // namespace blocksplit
