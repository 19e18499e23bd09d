#pragma once

// Numerical evaluation of the convergence theory: spectral-norm and
// coercivity estimators for the assembled operators, checkers for each
// sufficient condition (unrelaxed splitting, relaxed iteration, and the
// skew / symmetric / C=B coupling-structure theorems), and the predicted
// contraction rate at the optimal scalar relaxation.
//
// All constants are measured on the discrete matrices: coercivity is the
// smallest eigenvalue of the symmetric part, norms are spectral norms.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "blocksplit/block_system.hpp"
#include "blocksplit/schemes.hpp"

namespace blocksplit {

/// Raised when an estimator fails to settle within its iteration budget.
/// Carries the best estimate reached so far.
class EstimateError : public std::runtime_error {
public:
    EstimateError(const std::string& message, double best_estimate)
        : std::runtime_error(message), best_(best_estimate) {}

    double best_estimate() const { return best_; }

private:
    double best_;
};

enum class Verdict { HOLDS, FAILS, NOT_APPLICABLE };

const char* to_string(Verdict verdict);

/// One checked inequality with the two sides as actually evaluated.
/// NOT_APPLICABLE means a structural precondition failed (e.g. the coupling
/// is not skew), so the inequality was never formed.
struct ConditionRecord {
    Verdict verdict = Verdict::NOT_APPLICABLE;
    bool holds = false; // verdict == HOLDS
    double lhs = 0.0;
    double rhs = 0.0;
    std::string detail;
};

struct AnalysisReport {
    double alpha_A = 0.0;
    double alpha_D = 0.0;
    double alpha_mono = 0.0;
    double norm_B = 0.0;
    double norm_C = 0.0;
    double norm_Ae = 0.0;
    double norm_L = 0.0;
    double alpha_L = 0.0;
    double eps_L = 0.0; // ||L|| = (1 + eps_L) alpha_L, clamped at 0
    std::map<std::string, ConditionRecord> conditions;
    std::optional<double> predicted_rate;
};

/// Spectral norm ||M||_2, computed as the square root of the largest
/// eigenvalue of M^T M (Lanczos with full reorthogonalization, seeded
/// random start). Settles when the value moves by less than tol relative
/// on consecutive subspace extensions.
double estimate_norm(const CsrMatrix& M, double tol = 1e-9, int max_it = 500,
                     std::uint64_t seed = 20240801);

/// Coercivity constant: the smallest eigenvalue of (M + M^T)/2, which may
/// be non-positive and is reported as-is.
double estimate_coercivity(const CsrMatrix& M, double tol = 1e-9, int max_it = 500,
                           std::uint64_t seed = 20240801);

/// The explicit part of the chosen splitting as one monolithic matrix:
///   BJ            -> [0 B; C 0]
///   BGS (U_FIRST) -> [0 B; 0 0], BGS (V_FIRST) -> [0 0; C 0]
///   BSOR          -> the BGS part plus ((omega-1)/omega) diag(A, D)
/// LSCHEME/SPJ/S2PJ use Gauss-Seidel data flow, so their explicit part is
/// the BGS one for the effective ordering (the relaxation is not part of
/// the splitting).
CsrMatrix splitting_explicit_part(const BlockSystem& sys, const SchemeSpec& spec);

/// diag(L_u, L_v) as one monolithic matrix.
CsrMatrix monolithic_relaxation(const RelaxationOperator& relax);

/// Theorem condition for the unrelaxed splitting: alpha_mono > 2 ||A_e||.
ConditionRecord check_unrelaxed(const BlockSystem& sys, const SchemeSpec& spec,
                                std::uint64_t seed = 20240801);

/// Optimal scalar relaxation strength ||A_e||^2 / (2 alpha_mono). Throws
/// std::domain_error when the monolithic operator is not coercive.
double optimal_ell(const BlockSystem& sys, const SchemeSpec& spec,
                   std::uint64_t seed = 20240801);

/// Rate bound at the optimal relaxation strength,
///   r = sqrt((1 + eps_L) ||A_e||^2 / (||A_e||^2 + 2 alpha_mono^2)),
/// with eps_L measured from the supplied relaxation operator. Throws
/// std::domain_error when a hypothesis fails (L not symmetric, L or the
/// monolithic operator not coercive).
double predicted_rate(const BlockSystem& sys, const SchemeSpec& spec,
                      const RelaxationOperator& relax, std::uint64_t seed = 20240801);

/// Skew-coupling theorem (C = -B^T, L_v symmetric):
///   alpha_L >= ||B||^4 / (alpha_D alpha_A^2).
ConditionRecord check_skew_condition(const BlockSystem& sys, const CsrMatrix& L_v,
                                     std::uint64_t seed = 20240801);

/// Symmetric-coupling theorem (C = B^T): side condition
/// alpha_A alpha_D > ||B||^2 / 2 and threshold
///   alpha_L > ||B||^4 / (2 alpha_A^2 (2 alpha_D - ||B||^2 / alpha_A)).
ConditionRecord check_symmetric_condition(const BlockSystem& sys, const CsrMatrix& L_v,
                                          std::uint64_t seed = 20240801);

/// C = B theorem standing assumptions: A+B, D+B and -B all coercive. The
/// detail records the relaxation threshold ||B||^4 / (alpha_{D+B} alpha_A^2).
ConditionRecord check_CB_condition(const BlockSystem& sys, std::uint64_t seed = 20240801);

/// Monolithic coercivity margin min(alpha_A, alpha_D) - (||B|| + ||C||)/2,
/// which must be positive for the monolithic operator to be coercive.
ConditionRecord check_monolithic_coercivity(const BlockSystem& sys,
                                            std::uint64_t seed = 20240801);

/// Runs every estimator and every applicable condition for the scheme's
/// relaxation operator and collects the results.
AnalysisReport analyze(const BlockSystem& sys, const SchemeSpec& spec,
                       std::uint64_t seed = 20240801);

/// Deterministic JSON with 17-significant-digit numbers and fixed key order.
std::string to_json(const AnalysisReport& report);

}  // namespace blocksplit
