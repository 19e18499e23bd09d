#include "blocksplit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "blocksplit/kernels.hpp"

namespace blocksplit {

namespace {

// ---------------------------------------------------------------------------
// Extreme eigenvalues of symmetric operators via Lanczos with full
// reorthogonalization. Only matrix-vector products are needed, so the same
// routine serves ||M||_2 (through M^T M) and coercivity constants (through
// the symmetric part). The tridiagonal eigenvalue problem is solved by
// bisection on the Sturm sequence, which is robust for any spectrum.
// ---------------------------------------------------------------------------

// Number of eigenvalues of the tridiagonal (diag, off) strictly below x,
// read off the signs of the LDL^T pivots.
int eigenvalues_below(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    int count = 0;
    double d = 1.0;
    for (int i = 0; i < (int)diag.size(); ++i) {
        const double coupling = i == 0 ? 0.0 : off[i - 1] * off[i - 1] / d;
        d = diag[i] - x - coupling;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++count;
    }
    return count;
}

double tridiag_extreme(const std::vector<double>& diag, const std::vector<double>& off,
                       bool largest) {
    const int n = (int)diag.size();
    double lo = diag[0], hi = diag[0];
    for (int i = 0; i < n; ++i) {
        const double radius =
            (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    if (lo == hi) return lo;  // T is a multiple of the identity
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    lo -= pad;
    hi += pad;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval exhausted in doubles
        const int below = eigenvalues_below(diag, off, mid);
        if (largest) {
            (below == n ? hi : lo) = mid;
        } else {
            (below == 0 ? lo : hi) = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Extreme eigenvalue of the symmetric operator y = apply(x) on R^n. The
// Krylov basis is kept and fully reorthogonalized (twice), so an exact
// breakdown just restarts with a fresh direction and the estimate is exact
// once the basis spans R^n.
template <class Apply>
double lanczos_extreme(Apply&& apply, int n, bool largest, double tol, int max_it,
                       std::uint64_t seed, const char* who) {
    if (n <= 0) throw std::invalid_argument(std::string(who) + ": empty operator");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    std::vector<std::vector<double>> basis;
    std::vector<double> diag, off;
    std::vector<double> v(n), w(n);

    auto orthogonalize = [&](std::vector<double>& x) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                const double c = kernels::dot(x.data(), q.data(), n);
                for (int i = 0; i < n; ++i) x[i] -= c * q[i];
            }
        }
    };
    auto fresh_direction = [&](std::vector<double>& x) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (int i = 0; i < n; ++i) x[i] = uniform(rng);
            orthogonalize(x);
            const double norm = kernels::norm2(x);
            if (norm > 1e-8) {
                for (int i = 0; i < n; ++i) x[i] /= norm;
                return true;
            }
        }
        return false;
    };

    if (!fresh_direction(v)) throw EstimateError(std::string(who) + ": degenerate start", 0.0);

    const int cap = std::min(n, std::max(1, max_it));
    double best = 0.0, previous = 0.0;
    double scale = 0.0;
    int settled = 0;
    for (int m = 1; m <= cap; ++m) {
        basis.push_back(v);
        apply(v.data(), w.data());
        const double a = kernels::dot(v.data(), w.data(), n);
        diag.push_back(a);
        for (int i = 0; i < n; ++i) w[i] -= a * v[i];
        if (m > 1) {
            const double b_prev = off.back();
            const auto& v_prev = basis[m - 2];
            for (int i = 0; i < n; ++i) w[i] -= b_prev * v_prev[i];
        }
        orthogonalize(w);
        const double b = kernels::norm2(w);
        scale = std::max(scale, std::abs(a) + b);

        best = tridiag_extreme(diag, off, largest);
        if (m > 1 && std::abs(best - previous) <= tol * std::max(std::abs(best), 1e-30)) {
            if (++settled >= 2) return best;
        } else {
            settled = 0;
        }
        previous = best;

        if (m == cap) break;
        if (b <= 1e-13 * std::max(1.0, scale)) {
            // Invariant subspace exhausted; extend with a fresh direction.
            if (!fresh_direction(v)) return best;
            off.push_back(0.0);
        } else {
            off.push_back(b);
            for (int i = 0; i < n; ++i) v[i] = w[i] / b;
        }
    }
    if (cap == n) return best;  // full tridiagonalization is exact
    throw EstimateError(std::string(who) + ": value still moving after " + std::to_string(cap) +
                            " Lanczos steps",
                        best);
}

// ---------------------------------------------------------------------------
// Small matrix utilities local to the analysis.
// ---------------------------------------------------------------------------

double max_abs_entry(const CsrMatrix& M) {
    double m = 0.0;
    for (double v : M.values) m = std::max(m, std::abs(v));
    return m;
}

// Entrywise agreement within 1e-12, scaled by the larger entry magnitude.
bool structurally_equal(const CsrMatrix& M1, const CsrMatrix& M2) {
    const double scale = std::max(1.0, std::max(max_abs_entry(M1), max_abs_entry(M2)));
    return max_abs_difference(M1, M2) <= 1e-12 * scale;
}

CsrMatrix negated(const CsrMatrix& M) {
    CsrMatrix r = M;
    for (double& v : r.values) v = -v;
    return r;
}

bool is_symmetric_matrix(const CsrMatrix& M) {
    return M.n_rows == M.n_cols && structurally_equal(M, transpose(M));
}

// Assembles [UL UR; LL LR] in natural (u-then-v) ordering; any block may be
// scaled, and null pointers mean a zero block.
CsrMatrix assemble_quadrants(int n_u, int n_v, const CsrMatrix* ul, double s_ul,
                             const CsrMatrix* ur, const CsrMatrix* ll, const CsrMatrix* lr,
                             double s_lr) {
    std::vector<Triplet> t;
    auto append = [&](const CsrMatrix* M, double factor, int row0, int col0) {
        if (!M) return;
        for (int i = 0; i < M->n_rows; ++i) {
            for (int k = M->row_offsets[i]; k < M->row_offsets[i + 1]; ++k) {
                t.push_back({row0 + i, col0 + M->col_indices[k], factor * M->values[k]});
            }
        }
    };
    append(ul, s_ul, 0, 0);
    append(ur, 1.0, 0, n_u);
    append(ll, 1.0, n_u, 0);
    append(lr, s_lr, n_u, n_u);
    return CsrMatrix::from_triplets(n_u + n_v, n_u + n_v, std::move(t));
}

std::string format_constant(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.6g", x);
    return buffer;
}

// Coercivity gate for quantities that get divided by. The estimator lands
// within ~1e-14 of zero on exactly singular operators, and treating that
// noise as a positive constant would turn it into an enormous eps_L or rate.
// `scale` is the companion norm of the same operator.
bool meaningfully_positive(double alpha, double scale) {
    return alpha > 1e-12 * std::max(1.0, scale);
}

ConditionRecord make_record(bool holds, double lhs, double rhs, std::string detail) {
    ConditionRecord rec;
    rec.verdict = holds ? Verdict::HOLDS : Verdict::FAILS;
    rec.holds = holds;
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.detail = std::move(detail);
    return rec;
}

ConditionRecord not_applicable(std::string detail) {
    ConditionRecord rec;
    rec.verdict = Verdict::NOT_APPLICABLE;
    rec.detail = std::move(detail);
    return rec;
}

}  // namespace

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::HOLDS: return "HOLDS";
        case Verdict::FAILS: return "FAILS";
        case Verdict::NOT_APPLICABLE: return "NOT_APPLICABLE";
    }
    return "?";
}

double estimate_norm(const CsrMatrix& M, double tol, int max_it, std::uint64_t seed) {
    if (M.nnz() == 0) return 0.0;
    const CsrMatrix Mt = transpose(M);
    std::vector<double> mid(M.n_rows);
    auto apply = [&](const double* x, double* y) {
        kernels::spmv(M, x, mid.data());
        kernels::spmv(Mt, mid.data(), y);
    };
    double lambda = 0.0;
    try {
        lambda = lanczos_extreme(apply, M.n_cols, /*largest=*/true, tol, max_it, seed,
                                 "estimate_norm");
    } catch (const EstimateError& err) {
        // Re-throw with the best estimate mapped from lambda_max(M^T M) back
        // to the norm scale the caller asked about.
        throw EstimateError(err.what(), std::sqrt(std::max(err.best_estimate(), 0.0)));
    }
    return std::sqrt(std::max(lambda, 0.0));
}

double estimate_coercivity(const CsrMatrix& M, double tol, int max_it, std::uint64_t seed) {
    if (M.n_rows != M.n_cols) {
        throw std::invalid_argument("estimate_coercivity: matrix is " + std::to_string(M.n_rows) +
                                    "x" + std::to_string(M.n_cols) + ", needs square");
    }
    if (M.nnz() == 0) return 0.0;
    const CsrMatrix S = add_scaled(M, 0.5, transpose(M), 0.5);
    auto apply = [&](const double* x, double* y) { kernels::spmv(S, x, y); };
    return lanczos_extreme(apply, S.n_rows, /*largest=*/false, tol, max_it, seed,
                           "estimate_coercivity");
}

CsrMatrix splitting_explicit_part(const BlockSystem& sys, const SchemeSpec& spec) {
    validate_spec(spec);
    check_dimensions(sys);
    const int n_u = sys.n_u(), n_v = sys.n_v();
    if (spec.kind == SchemeKind::BJ) {
        return assemble_quadrants(n_u, n_v, nullptr, 0.0, &sys.B, &sys.C, nullptr, 0.0);
    }
    const bool u_first = effective_ordering(spec) == Ordering::U_FIRST;
    const CsrMatrix* upper = u_first ? &sys.B : nullptr;
    const CsrMatrix* lower = u_first ? nullptr : &sys.C;
    if (spec.kind == SchemeKind::BSOR) {
        const double s = (spec.omega - 1.0) / spec.omega;
        return assemble_quadrants(n_u, n_v, &sys.A, s, upper, lower, &sys.D, s);
    }
    return assemble_quadrants(n_u, n_v, nullptr, 0.0, upper, lower, nullptr, 0.0);
}

CsrMatrix monolithic_relaxation(const RelaxationOperator& relax) {
    return assemble_quadrants(relax.L_u.n_rows, relax.L_v.n_rows, &relax.L_u, 1.0, nullptr,
                              nullptr, &relax.L_v, 1.0);
}

ConditionRecord check_unrelaxed(const BlockSystem& sys, const SchemeSpec& spec,
                                std::uint64_t seed) {
    const double alpha = estimate_coercivity(monolithic_assemble(sys), 1e-9, 500, seed);
    const double norm_ae = estimate_norm(splitting_explicit_part(sys, spec), 1e-9, 500, seed);
    return make_record(alpha > 2.0 * norm_ae, alpha, 2.0 * norm_ae,
                       "alpha_mono > 2 ||A_e|| for splitting " + std::string(to_string(spec.kind)));
}

double optimal_ell(const BlockSystem& sys, const SchemeSpec& spec, std::uint64_t seed) {
    const double alpha = estimate_coercivity(monolithic_assemble(sys), 1e-9, 500, seed);
    if (!(alpha > 0.0)) {
        throw std::domain_error("optimal_ell: monolithic operator is not coercive (alpha = " +
                                format_constant(alpha) + ")");
    }
    const double norm_ae = estimate_norm(splitting_explicit_part(sys, spec), 1e-9, 500, seed);
    return norm_ae * norm_ae / (2.0 * alpha);
}

double predicted_rate(const BlockSystem& sys, const SchemeSpec& spec,
                      const RelaxationOperator& relax, std::uint64_t seed) {
    const CsrMatrix L = monolithic_relaxation(relax);
    if (!is_symmetric_matrix(L)) {
        throw std::domain_error("predicted_rate: relaxation operator is not symmetric");
    }
    const double norm_ae = estimate_norm(splitting_explicit_part(sys, spec), 1e-9, 500, seed);
    const double alpha = estimate_coercivity(monolithic_assemble(sys), 1e-9, 500, seed);
    if (!(alpha > 0.0)) {
        throw std::domain_error("predicted_rate: monolithic operator is not coercive (alpha = " +
                                format_constant(alpha) + ")");
    }
    double eps = 0.0;
    if (L.nnz() > 0 && norm_ae > 0.0) {
        const double alpha_l = estimate_coercivity(L, 1e-9, 500, seed);
        const double norm_l = estimate_norm(L, 1e-9, 500, seed);
        if (!meaningfully_positive(alpha_l, norm_l)) {
            throw std::domain_error(
                "predicted_rate: relaxation operator is not coercive (alpha_L = " +
                format_constant(alpha_l) + ")");
        }
        eps = std::max(norm_l / alpha_l - 1.0, 0.0);
    }
    return std::sqrt((1.0 + eps) * norm_ae * norm_ae /
                     (norm_ae * norm_ae + 2.0 * alpha * alpha));
}

ConditionRecord check_skew_condition(const BlockSystem& sys, const CsrMatrix& L_v,
                                     std::uint64_t seed) {
    if (!structurally_equal(sys.C, negated(transpose(sys.B)))) {
        return not_applicable("coupling is not skew (C != -B^T)");
    }
    if (!is_symmetric_matrix(L_v)) return not_applicable("L_v is not symmetric");
    const double alpha_a = estimate_coercivity(sys.A, 1e-9, 500, seed);
    const double alpha_d = estimate_coercivity(sys.D, 1e-9, 500, seed);
    if (!(alpha_a > 0.0) || !(alpha_d > 0.0)) {
        return not_applicable("A or D is not coercive (alpha_A = " + format_constant(alpha_a) +
                              ", alpha_D = " + format_constant(alpha_d) + ")");
    }
    const double alpha_l = estimate_coercivity(L_v, 1e-9, 500, seed);
    const double norm_b = estimate_norm(sys.B, 1e-9, 500, seed);
    const double threshold = std::pow(norm_b, 4) / (alpha_d * alpha_a * alpha_a);
    return make_record(alpha_l >= threshold, alpha_l, threshold,
                       "alpha_L >= ||B||^4 / (alpha_D alpha_A^2); ||B|| = " +
                           format_constant(norm_b) + ", alpha_A = " + format_constant(alpha_a) +
                           ", alpha_D = " + format_constant(alpha_d));
}

ConditionRecord check_symmetric_condition(const BlockSystem& sys, const CsrMatrix& L_v,
                                          std::uint64_t seed) {
    if (!structurally_equal(sys.C, transpose(sys.B))) {
        return not_applicable("coupling is not symmetric (C != B^T)");
    }
    if (!is_symmetric_matrix(L_v)) return not_applicable("L_v is not symmetric");
    const double alpha_a = estimate_coercivity(sys.A, 1e-9, 500, seed);
    const double alpha_d = estimate_coercivity(sys.D, 1e-9, 500, seed);
    if (!(alpha_a > 0.0) || !(alpha_d > 0.0)) {
        return not_applicable("A or D is not coercive (alpha_A = " + format_constant(alpha_a) +
                              ", alpha_D = " + format_constant(alpha_d) + ")");
    }
    const double alpha_l = estimate_coercivity(L_v, 1e-9, 500, seed);
    const double norm_b = estimate_norm(sys.B, 1e-9, 500, seed);
    const bool side = alpha_a * alpha_d > 0.5 * norm_b * norm_b;
    if (!side) {
        return make_record(false, alpha_a * alpha_d, 0.5 * norm_b * norm_b,
                           "side condition alpha_A alpha_D > ||B||^2 / 2 fails");
    }
    const double threshold =
        std::pow(norm_b, 4) /
        (2.0 * alpha_a * alpha_a * (2.0 * alpha_d - norm_b * norm_b / alpha_a));
    return make_record(alpha_l > threshold, alpha_l, threshold,
                       "alpha_L > ||B||^4 / (2 alpha_A^2 (2 alpha_D - ||B||^2/alpha_A)); "
                       "side condition holds");
}

ConditionRecord check_CB_condition(const BlockSystem& sys, std::uint64_t seed) {
    if (sys.B.n_rows != sys.B.n_cols || !structurally_equal(sys.C, sys.B)) {
        return not_applicable("coupling is not C = B with square blocks");
    }
    const double alpha_ab = estimate_coercivity(add_scaled(sys.A, 1.0, sys.B, 1.0), 1e-9, 500, seed);
    const double alpha_db = estimate_coercivity(add_scaled(sys.D, 1.0, sys.B, 1.0), 1e-9, 500, seed);
    const double alpha_mb = estimate_coercivity(negated(sys.B), 1e-9, 500, seed);
    const double alpha_a = estimate_coercivity(sys.A, 1e-9, 500, seed);
    const double norm_b = estimate_norm(sys.B, 1e-9, 500, seed);
    const double weakest = std::min({alpha_ab, alpha_db, alpha_mb});
    std::string detail = "needs A+B, D+B and -B coercive; alpha_{A+B} = " +
                         format_constant(alpha_ab) + ", alpha_{D+B} = " + format_constant(alpha_db) +
                         ", alpha_{-B} = " + format_constant(alpha_mb) +
                         ", ||B|| = " + format_constant(norm_b);
    if (alpha_db > 0.0 && alpha_a != 0.0) {
        detail += "; relaxation threshold alpha_L >= " +
                  format_constant(std::pow(norm_b, 4) / (alpha_db * alpha_a * alpha_a));
    }
    return make_record(weakest > 0.0, weakest, 0.0, std::move(detail));
}

ConditionRecord check_monolithic_coercivity(const BlockSystem& sys, std::uint64_t seed) {
    const double alpha_a = estimate_coercivity(sys.A, 1e-9, 500, seed);
    const double alpha_d = estimate_coercivity(sys.D, 1e-9, 500, seed);
    const double norm_b = estimate_norm(sys.B, 1e-9, 500, seed);
    const double norm_c = estimate_norm(sys.C, 1e-9, 500, seed);
    const double margin = std::min(alpha_a, alpha_d) - 0.5 * (norm_b + norm_c);
    return make_record(margin > 0.0, margin, 0.0,
                       "min(alpha_A, alpha_D) - (||B|| + ||C||)/2 > 0");
}

AnalysisReport analyze(const BlockSystem& sys, const SchemeSpec& spec, std::uint64_t seed) {
    AnalysisReport rep;
    const RelaxationOperator relax = build_relaxation(sys, spec);
    const CsrMatrix L = monolithic_relaxation(relax);

    rep.alpha_A = estimate_coercivity(sys.A, 1e-9, 500, seed);
    rep.alpha_D = estimate_coercivity(sys.D, 1e-9, 500, seed);
    rep.alpha_mono = estimate_coercivity(monolithic_assemble(sys), 1e-9, 500, seed);
    rep.norm_B = estimate_norm(sys.B, 1e-9, 500, seed);
    rep.norm_C = estimate_norm(sys.C, 1e-9, 500, seed);
    rep.norm_Ae = estimate_norm(splitting_explicit_part(sys, spec), 1e-9, 500, seed);
    rep.norm_L = estimate_norm(L, 1e-9, 500, seed);
    rep.alpha_L = L.nnz() > 0 ? estimate_coercivity(L, 1e-9, 500, seed) : 0.0;
    const bool coercive_L = meaningfully_positive(rep.alpha_L, rep.norm_L);
    rep.eps_L = coercive_L ? std::max(rep.norm_L / rep.alpha_L - 1.0, 0.0) : 0.0;

    rep.conditions["monolithic_coercivity"] = check_monolithic_coercivity(sys, seed);
    rep.conditions["theorem1_unrelaxed"] = check_unrelaxed(sys, spec, seed);
    rep.conditions["skew_assumption"] = check_skew_condition(sys, relax.L_v, seed);
    rep.conditions["symmetric_assumption"] = check_symmetric_condition(sys, relax.L_v, seed);
    rep.conditions["cb_assumptions"] = check_CB_condition(sys, seed);

    // Relaxed sufficient condition ||A_e||^2/(2 alpha_L) <= 2 alpha_mono -
    // eps_L alpha_L, evaluated at the scheme's own relaxation operator.
    if (!is_symmetric_matrix(L)) {
        rep.conditions["relaxed_requirement"] = not_applicable("L is not symmetric");
    } else if (!coercive_L) {
        rep.conditions["relaxed_requirement"] =
            not_applicable("L is not coercive (alpha_L = " + format_constant(rep.alpha_L) + ")");
    } else {
        const double lhs = rep.norm_Ae * rep.norm_Ae / (2.0 * rep.alpha_L);
        const double rhs = 2.0 * rep.alpha_mono - rep.eps_L * rep.alpha_L;
        rep.conditions["relaxed_requirement"] =
            make_record(lhs <= rhs, lhs, rhs,
                        "||A_e||^2/(2 alpha_L) <= 2 alpha_mono - eps_L alpha_L");
    }

    try {
        const double rate = predicted_rate(sys, spec, relax, seed);
        rep.predicted_rate = rate;
        rep.conditions["rate_bound_below_one"] =
            make_record(rate < 1.0, rate, 1.0, "contraction bound at the optimal relaxation");
    } catch (const std::domain_error& e) {
        rep.conditions["rate_bound_below_one"] = not_applicable(e.what());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// JSON emission. Hand-rolled so the number format (17 significant digits)
// and key order are bit-stable across runs and platforms.
// ---------------------------------------------------------------------------

namespace {

std::string json_number(double x) {
    if (!std::isfinite(x)) return "null";
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

}  // namespace

std::string to_json(const AnalysisReport& report) {
    std::string out = "{\n";
    auto field = [&](const char* name, double value, bool comma = true) {
        out += "  \"" + std::string(name) + "\": " + json_number(value) + (comma ? ",\n" : "\n");
    };
    field("alpha_A", report.alpha_A);
    field("alpha_D", report.alpha_D);
    field("alpha_mono", report.alpha_mono);
    field("norm_B", report.norm_B);
    field("norm_C", report.norm_C);
    field("norm_Ae", report.norm_Ae);
    field("norm_L", report.norm_L);
    field("alpha_L", report.alpha_L);
    field("eps_L", report.eps_L);
    out += "  \"conditions\": {\n";
    std::size_t remaining = report.conditions.size();
    for (const auto& [name, rec] : report.conditions) {
        out += "    " + json_string(name) + ": {\"verdict\": " +
               json_string(to_string(rec.verdict)) +
               ", \"holds\": " + (rec.holds ? "true" : "false") +
               ", \"lhs\": " + json_number(rec.lhs) + ", \"rhs\": " + json_number(rec.rhs) +
               ", \"detail\": " + json_string(rec.detail) + "}";
        out += --remaining ? ",\n" : "\n";
    }
    out += "  },\n";
    out += "  \"predicted_rate\": " +
           (report.predicted_rate ? json_number(*report.predicted_rate) : std::string("null")) +
           "\n";
    out += "}\n";
    return out;
}

}  // namespace blocksplit
