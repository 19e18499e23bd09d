#pragma once

// Splitting schemes for the coupled block system A w = f:
//
//   block-Jacobi (BJ), block-Gauss-Seidel (BGS), block-SOR (BSOR), and the
//   relaxed Gauss-Seidel family where a block-diagonal relaxation operator
//   L = diag(L_u, L_v) acts on the difference between successive iterates,
//
//       (A + L_u) u^{k+1} = f1 - B v_in + L_u u^k
//       (D + L_v) v^{k+1} = f2 - C u_in + L_v v^k
//
//   with u_in/v_in drawn from level k or k+1 depending on the scheme and
//   the ordering. The LSCHEME, SPJ and S2PJ variants differ only in how
//   L_u and L_v are built (scalar relaxation vs. approximate Schur
//   complements with one or two diagonal approximations).

#include <memory>
#include <optional>

#include "blocksplit/block_system.hpp"

namespace blocksplit {

enum class SchemeKind { BJ, BGS, BSOR, LSCHEME, SPJ, S2PJ };

/// Which equation receives the approximate-Schur relaxation.
enum class SchemeSide { U, V, ALTERNATE };

/// Which block is updated first within one outer iteration.
enum class Ordering { U_FIRST, V_FIRST };

enum class RunStatus { CONVERGED, MAX_ITERS, DIVERGED, INNER_FAILURE };

const char* to_string(SchemeKind kind);
const char* to_string(RunStatus status);

struct SchemeSpec {
    SchemeKind kind = SchemeKind::BGS;
    double omega = 1.0;               // BSOR only, must lie in (0, 2]
    double ell = 0.0;                 // LSCHEME only, must be > 0
    SchemeSide side = SchemeSide::V;  // SPJ / S2PJ only
    std::optional<Ordering> ordering; // defaulted per scheme when not set
};

/// Ordering actually used: the explicit request when present, otherwise
/// V_FIRST for SPJ/S2PJ with side V (matching their derivation) and
/// U_FIRST for everything else.
Ordering effective_ordering(const SchemeSpec& spec);

/// Throws std::invalid_argument when the parameters violate the rules
/// listed next to SchemeSpec.
void validate_spec(const SchemeSpec& spec);

/// Block-diagonal relaxation operator L = diag(L_u, L_v).
struct RelaxationOperator {
    CsrMatrix L_u; // n_u x n_u
    CsrMatrix L_v; // n_v x n_v
};

struct IterationReport {
    RunStatus status = RunStatus::MAX_ITERS;
    int iterations = 0;
    std::vector<double> res_u_history; // length iterations + 1, entry 0 initial
    std::vector<double> res_v_history;
    std::vector<double> err_history;   // empty unless a reference was supplied
    BlockVector final_w;
};

/// Builds the relaxation operator for the given scheme:
///   BJ/BGS/BSOR -> zero blocks (nothing to relax),
///   LSCHEME     -> L_u = ell*I, L_v = 0,
///   SPJ         -> side V: L_v = -C diag(A)^{-1} B, side U: L_u = -B diag(D)^{-1} C,
///   S2PJ        -> side V: L_v = -diag(C) diag(A)^{-1} B, side U: L_u = -diag(B) diag(D)^{-1} C,
/// where ALTERNATE fills both blocks. S2PJ needs square B and C.
RelaxationOperator build_relaxation(const BlockSystem& sys, const SchemeSpec& spec);

/// Runs the iteration defined by (spec, relax) with the implicit operators
/// A + L_u and D + L_v factorized once and reused across steps.
class SchemeEngine {
public:
    /// Builds the relaxation from the spec.
    SchemeEngine(BlockSystem sys, SchemeSpec spec);

    /// Uses the supplied relaxation operator instead (custom L experiments).
    SchemeEngine(BlockSystem sys, SchemeSpec spec, RelaxationOperator relax);

    ~SchemeEngine();
    SchemeEngine(SchemeEngine&&) noexcept;
    SchemeEngine& operator=(SchemeEngine&&) noexcept;

    const BlockSystem& system() const;
    const SchemeSpec& spec() const;
    const RelaxationOperator& relaxation() const;

    /// One outer iteration. Throws InnerSolveError (with the failing block
    /// named in the message) when an inner solve does not reach its tolerance.
    BlockVector step(const BlockVector& w_k) const;

    /// Iterates from w0 until both block residuals satisfy
    /// ||r_i||_2 <= tol * max(||f_i||_2, rhs_floor), max_iters is reached,
    /// or divergence is detected (residual above 1e12 times its initial
    /// value, or non-finite). When a reference iterate is supplied the
    /// report also records monolithic error norms ||w^k - reference||_2.
    IterationReport run(const BlockVector& w0, double tol, int max_iters,
                        const BlockVector* reference = nullptr) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One outer iteration with freshly factorized implicit operators. Prefer
/// SchemeEngine when stepping repeatedly.
BlockVector step_relaxed(const BlockSystem& sys, const RelaxationOperator& relax,
                         const SchemeSpec& spec, const BlockVector& w_k);

/// Convenience wrapper: build the relaxation from the spec and iterate.
IterationReport run(const BlockSystem& sys, const SchemeSpec& spec, const BlockVector& w0,
                    double tol, int max_iters, const BlockVector* reference = nullptr);

/// Same, with a caller-supplied relaxation operator.
IterationReport run_with_relaxation(const BlockSystem& sys, const SchemeSpec& spec,
                                    const RelaxationOperator& relax, const BlockVector& w0,
                                    double tol, int max_iters,
                                    const BlockVector* reference = nullptr);

}  // namespace blocksplit
