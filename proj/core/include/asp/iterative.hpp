#pragma once

// Residue/error correction, stationary splitting iterations, and Krylov
// basis iteration. Splittings act on square systems; feed AᵀA and Aᵀb for
// rectangular data.

#include <cstddef>
#include <vector>

#include "asp/error.hpp"
#include "asp/linalg.hpp"

namespace asp::iterative {

using linalg::LinearSystem;

inline constexpr double kDefaultSplitTol = 1e-10;
inline constexpr double kDefaultSorOmega = 1.5;

class SplittingKind {
 public:
  enum class Variant { Jacobi, GaussSeidel, Sor };

  static SplittingKind jacobi() { return SplittingKind(Variant::Jacobi, 1.0); }
  static SplittingKind gauss_seidel() { return SplittingKind(Variant::GaussSeidel, 1.0); }
  /// Throws InvalidArgument unless 0 < omega < 2.
  static SplittingKind sor(double omega = kDefaultSorOmega);

  Variant variant() const noexcept { return variant_; }
  double omega() const noexcept { return omega_; }

 private:
  SplittingKind(Variant v, double omega) : variant_(v), omega_(omega) {}

  Variant variant_;
  double omega_;
};

struct IterationTrace {
  std::vector<double> residual_norms;  // ‖b − A·x‖₂ after each iteration
  bool converged = false;
  std::size_t iterations = 0;
};

/// NotConverged raised by split_iterate; carries the full trace.
class SplittingNotConverged : public NotConverged {
 public:
  SplittingNotConverged(const std::string& what, IterationTrace trace);

  const IterationTrace& trace() const noexcept { return trace_; }

 private:
  IterationTrace trace_;
};

struct SplitResult {
  Vector solution;
  IterationTrace trace;
};

struct KrylovBasis {
  std::vector<Vector> vectors;  // b, A·b, A²·b, ...
  std::size_t depth = 0;
};

/// How error_correct solves A·e = r.
struct InnerSolver {
  enum class Kind { Direct, Lms };

  Kind kind = Kind::Direct;
  /// LMS step; zero selects 1/max‖aᵢ‖².
  double mu = 0.0;

  static InnerSolver direct() { return {Kind::Direct, 0.0}; }
  static InnerSolver lms(double mu = 0.0) { return {Kind::Lms, mu}; }
};

/// r = b − A·x.
Vector compute_residue(const LinearSystem& sys, const Vector& x);

/// Solves A·e = r for r = compute_residue(sys, x_guess) and returns
/// x_guess + e. The LMS inner solver cycles over the rows for `budget` steps
/// and throws NotConverged if it diverges.
Vector error_correct(const LinearSystem& sys, const Vector& x_guess, InnerSolver inner,
                     std::size_t budget);

/// P·x[k+1] = (P − A)·x[k] + b with P = D (Jacobi), D + L (Gauss-Seidel) or
/// D/ω + L (SOR). Stops once ‖b − A·x‖₂ < tol·‖b‖₂; max_iter = 0 means 10·n².
/// Throws ZeroDiagonal, or SplittingNotConverged with the trace attached.
SplitResult split_iterate(const Matrix& a, const Vector& b, SplittingKind kind, const Vector& x0,
                          double tol = kDefaultSplitTol, std::size_t max_iter = 0);

/// The iteration matrix P⁻¹(P − A) of a splitting, formed densely.
Matrix iteration_matrix(const Matrix& a, SplittingKind kind);

/// [b, A·b, ..., A^(depth−1)·b].
KrylovBasis krylov_basis(const Matrix& a, const Vector& b, std::size_t depth);

/// x ← (I − A)·x + b from x = b, `steps` times.
Vector krylov_iterate(const Matrix& a, const Vector& b, std::size_t steps);

}  // namespace asp::iterative
