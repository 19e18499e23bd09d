#pragma once

// Inner linear solves backing every outer iteration step.
//
// The contract is the residual bound ||b - M x||_2 <= tol * max(||b||_2,
// rhs_floor), not any particular method. Internally a banded direct
// factorization is used whenever the matrix bandwidth is moderate (all the
// finite-volume operators here), with a Jacobi-preconditioned BiCGSTAB
// fallback for general sparsity. Direct solves are polished by iterative
// refinement until they meet the bound.

#include <memory>
#include <stdexcept>

#include "blocksplit/csr.hpp"

namespace blocksplit {

/// Guard for relative residuals on a near-zero right-hand side: b = 0 is
/// answered by x = 0 instead of a division by zero.
inline constexpr double rhs_floor = 1e-300;

/// Raised when a solve cannot reach the requested residual bound. Carries
/// the residual that was actually achieved.
class InnerSolveError : public std::runtime_error {
public:
    InnerSolveError(const std::string& message, double achieved_residual)
        : std::runtime_error(message), achieved_(achieved_residual) {}

    double achieved_residual() const { return achieved_; }

private:
    double achieved_;
};

/// Reusable solver for one matrix and many right-hand sides. The setup
/// (factorization or preconditioner) happens once in the constructor;
/// solve() is const and safe to call from several threads at once.
class InnerSolver {
public:
    explicit InnerSolver(CsrMatrix M, double tol = 1e-12, int max_it = 10000);
    ~InnerSolver();
    InnerSolver(InnerSolver&&) noexcept;
    InnerSolver& operator=(InnerSolver&&) noexcept;

    const CsrMatrix& matrix() const;
    double tolerance() const;

    /// Returns x with ||b - M x||_2 <= tol * max(||b||_2, rhs_floor).
    DenseVector solve(const DenseVector& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around InnerSolver.
DenseVector inner_solve(const CsrMatrix& M, const DenseVector& b, double tol = 1e-12,
                        int max_it = 10000);

}  // namespace blocksplit
