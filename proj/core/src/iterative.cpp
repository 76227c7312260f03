#include "asp/iterative.hpp"

#include <cmath>
#include <string>

namespace asp::iterative {
namespace {

void require_square_system(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size() || b.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "splitting needs a square A matching b");
  }
}

// x' from one splitting iteration; x is read but not written.
Vector split_once(const Matrix& a, const Vector& b, const Vector& x, SplittingKind kind) {
  const Eigen::Index n = a.rows();
  Vector next = x;
  const bool in_place = kind.variant() != SplittingKind::Variant::Jacobi;
  const Vector& source = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = b(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double xj = (in_place && j < i) ? next(j) : source(j);
      acc -= a(i, j) * xj;
    }
    const double update = acc / a(i, i);
    next(i) = kind.variant() == SplittingKind::Variant::Sor
                  ? (1.0 - kind.omega()) * x(i) + kind.omega() * update
                  : update;
  }
  return next;
}

}  // namespace

SplittingKind SplittingKind::sor(double omega) {
  if (!(omega > 0.0 && omega < 2.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "SOR omega must lie strictly inside (0, 2), got " + std::to_string(omega));
  }
  return SplittingKind(Variant::Sor, omega);
}

SplittingNotConverged::SplittingNotConverged(const std::string& what, IterationTrace trace)
    : NotConverged(what, trace.residual_norms.empty() ? 0.0 : trace.residual_norms.back()),
      trace_(std::move(trace)) {}

Vector compute_residue(const LinearSystem& sys, const Vector& x) {
  if (x.size() != sys.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "estimate length " + std::to_string(x.size()) +
                                                  " does not match " +
                                                  std::to_string(sys.cols()) + " columns");
  }
  return sys.b() - sys.A() * x;
}

Vector error_correct(const LinearSystem& sys, const Vector& x_guess, InnerSolver inner,
                     std::size_t budget) {
  const Vector residue = compute_residue(sys, x_guess);
  if (inner.kind == InnerSolver::Kind::Direct) {
    return x_guess + linalg::solve_normal_equations(LinearSystem(sys.A(), residue));
  }

  double mu = inner.mu;
  if (mu == 0.0) mu = 1.0 / sys.A().rowwise().squaredNorm().maxCoeff();
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::InvalidArgument, "LMS inner step must be positive and finite");
  }
  // e[k+1] = e[k] + μ·(r_k − a_kᵀ·e[k])·a_k, rows taken cyclically.
  Vector error = Vector::Zero(sys.cols());
  const double start = (sys.A().transpose() * residue).norm();
  for (std::size_t k = 0; k < budget; ++k) {
    const auto i = static_cast<Eigen::Index>(k % static_cast<std::size_t>(sys.rows()));
    const double innovation = residue(i) - sys.A().row(i).dot(error);
    error += (mu * innovation) * sys.A().row(i).transpose();
  }
  const double finish = (sys.A().transpose() * (residue - sys.A() * error)).norm();
  if (!error.allFinite() || finish > start) {
    throw NotConverged("LMS error-correction iteration diverged", finish);
  }
  return x_guess + error;
}

SplitResult split_iterate(const Matrix& a, const Vector& b, SplittingKind kind, const Vector& x0,
                          double tol, std::size_t max_iter) {
  require_square_system(a, b);
  if (x0.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "initial guess length does not match b");
  }
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i, i) == 0.0) {
      throw Error(ErrorCode::ZeroDiagonal, "diagonal entry " + std::to_string(i) + " is zero");
    }
  }
  if (max_iter == 0) max_iter = 10 * static_cast<std::size_t>(n * n);

  const double threshold = tol * b.norm();
  SplitResult result{x0, IterationTrace{}};
  for (std::size_t it = 0; it < max_iter; ++it) {
    result.solution = split_once(a, b, result.solution, kind);
    const double residual = (b - a * result.solution).norm();
    result.trace.residual_norms.push_back(residual);
    result.trace.iterations = it + 1;
    if (!std::isfinite(residual)) break;
    if (residual < threshold || residual == 0.0) {
      result.trace.converged = true;
      return result;
    }
  }
  const std::size_t done = result.trace.iterations;
  throw SplittingNotConverged(
      "splitting iteration stopped after " + std::to_string(done) + " iterations",
      std::move(result.trace));
}

Matrix iteration_matrix(const Matrix& a, SplittingKind kind) {
  const Eigen::Index n = a.rows();
  Matrix p = Matrix::Zero(n, n);
  switch (kind.variant()) {
    case SplittingKind::Variant::Jacobi:
      p.diagonal() = a.diagonal();
      break;
    case SplittingKind::Variant::GaussSeidel:
      p = a.triangularView<Eigen::Lower>();
      break;
    case SplittingKind::Variant::Sor:
      p = a.triangularView<Eigen::StrictlyLower>();
      p.diagonal() = a.diagonal() / kind.omega();
      break;
  }
  return linalg::inverse_dense(p) * (p - a);
}

KrylovBasis krylov_basis(const Matrix& a, const Vector& b, std::size_t depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "Krylov depth must be >= 1");
  require_square_system(a, b);
  KrylovBasis basis;
  basis.vectors.reserve(depth);
  basis.vectors.push_back(b);
  for (std::size_t i = 1; i < depth; ++i) basis.vectors.push_back(a * basis.vectors.back());
  basis.depth = depth;
  return basis;
}

Vector krylov_iterate(const Matrix& a, const Vector& b, std::size_t steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "Krylov steps must be >= 1");
  require_square_system(a, b);
  Vector x = b;
  for (std::size_t s = 0; s < steps; ++s) x = x - a * x + b;
  return x;
}

}  // namespace asp::iterative
