#include "asp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "asp/error.hpp"

namespace asp::linalg {
namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kJacobiTol = 1e-12;
constexpr double kPivotTol = 1e-14;

void count(MacCounter* macs, std::uint64_t n) {
  if (macs != nullptr) macs->add(n);
}

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " must be square and non-empty, got " + dims(m));
  }
}

double off_diagonal_norm(const Matrix& s) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (i != j) sum += s(i, j) * s(i, j);
  return std::sqrt(sum);
}

// Gaussian elimination with partial pivoting on [a | rhs]; returns the
// solution block. Every scalar divide and multiply-add is tallied.
Matrix eliminate(Matrix a, Matrix rhs, MacCounter* macs) {
  const Eigen::Index n = a.rows();
  const Eigen::Index r = rhs.cols();
  const double scale = a.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::RankDeficient, "matrix is identically zero");
  }
  std::uint64_t tally = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    a.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot);
    pivot += k;
    if (std::abs(a(pivot, k)) <= kPivotTol * scale) {
      throw Error(ErrorCode::RankDeficient,
                  "pivot " + std::to_string(k) + " vanishes during elimination");
    }
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      rhs.row(k).swap(rhs.row(pivot));
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / a(k, k);
      a(i, k) = 0.0;
      for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
      for (Eigen::Index j = 0; j < r; ++j) rhs(i, j) -= factor * rhs(k, j);
      tally += 1 + static_cast<std::uint64_t>(n - k - 1 + r);
    }
  }
  Matrix x(n, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double acc = rhs(i, c);
      for (Eigen::Index j = i + 1; j < n; ++j) acc -= a(i, j) * x(j, c);
      x(i, c) = acc / a(i, i);
      tally += static_cast<std::uint64_t>(n - i);
    }
  }
  count(macs, tally);
  return x;
}

}  // namespace

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
  }
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
  }
}

bool is_symmetric(const Matrix& s, double tol) {
  if (s.rows() != s.cols()) return false;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) {
      const double bound = tol * std::max({1.0, std::abs(s(i, j)), std::abs(s(j, i))});
      if (std::abs(s(i, j) - s(j, i)) > bound) return false;
    }
  }
  return true;
}

Matrix symmetrized(const Matrix& s) { return 0.5 * (s + s.transpose()); }

LinearSystem::LinearSystem(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() == 0 || a_.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "system matrix must be non-empty");
  }
  if (a_.rows() != b_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "A is " + dims(a_) + " but b has length " + std::to_string(b_.size()));
  }
  require_finite(a_, "A");
  require_finite(b_, "b");
}

double dot(const Vector& a, const Vector& b, MacCounter* macs) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dot of lengths " + std::to_string(a.size()) +
                                                  " and " + std::to_string(b.size()));
  }
  count(macs, static_cast<std::uint64_t>(a.size()));
  return a.dot(b);
}

Vector matvec(const Matrix& m, const Vector& v, MacCounter* macs) {
  if (m.cols() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix " + dims(m) + " times vector of length " + std::to_string(v.size()));
  }
  count(macs, static_cast<std::uint64_t>(m.rows() * m.cols()));
  return m * v;
}

Matrix sherman_morrison_update(const Matrix& inverse, const Vector& u, double tol,
                               MacCounter* macs) {
  return sherman_morrison_fold(inverse, u, tol, macs).inverse;
}

RankOneFold sherman_morrison_fold(const Matrix& inverse, const Vector& u, double tol,
                                  MacCounter* macs) {
  require_square(inverse, "inverse");
  if (inverse.rows() != u.size()) {
    throw Error(ErrorCode::DimensionMismatch, "inverse is " + dims(inverse) +
                                                  " but update vector has length " +
                                                  std::to_string(u.size()));
  }
  if (!is_symmetric(inverse)) {
    throw Error(ErrorCode::NotSymmetric, "rank-1 update needs a symmetric inverse");
  }
  const auto n = static_cast<std::uint64_t>(u.size());
  const Vector pu = inverse * u;
  const double denom = 1.0 + u.dot(pu);
  if (!(denom > tol)) {
    throw Error(ErrorCode::DenominatorNearZero,
                "1 + uᵀ·P·u = " + std::to_string(denom) + " is not above tolerance");
  }
  Vector scaled = pu / denom;
  Matrix updated = inverse - scaled * pu.transpose();
  // P·u, uᵀ(P·u) plus the add, the n divides, the outer-product subtraction.
  count(macs, n * n + n + 1 + n + n * n);
  return RankOneFold{symmetrized(updated), std::move(scaled)};
}

EigenDecomposition symmetric_eigendecompose(const Matrix& s) {
  require_square(s, "eigendecomposition input");
  require_finite(s, "eigendecomposition input");
  if (!is_symmetric(s)) {
    throw Error(ErrorCode::NotSymmetric, "eigendecomposition input is not symmetric");
  }
  const Eigen::Index n = s.rows();
  Matrix a = symmetrized(s);
  Matrix v = Matrix::Identity(n, n);
  const double target = kJacobiTol * a.norm();

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(p, k) = a(k, p);
          a(k, q) = sn * akp + c * akq;
          a(q, k) = a(k, q);
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal_norm(a) > target) {
    throw NotConverged("Jacobi eigensolver exhausted its sweeps", off_diagonal_norm(a));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

Matrix pinv_psd(const Matrix& s, double rank_tol) {
  const EigenDecomposition eig = symmetric_eigendecompose(s);
  const Eigen::Index n = s.rows();
  const double lambda_max = std::max(eig.eigenvalues(0), 0.0);
  // Negativity is judged on the same relative scale as the rank cut.
  const double negative_floor = -rank_tol * std::max(1.0, lambda_max);
  Vector inverted = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = eig.eigenvalues(i);
    if (lambda < negative_floor) {
      throw Error(ErrorCode::NegativeEigenvalue,
                  "eigenvalue " + std::to_string(lambda) + " below -rank_tol");
    }
    if (lambda_max > 0.0 && lambda > rank_tol * lambda_max) inverted(i) = 1.0 / lambda;
  }
  const Matrix& q = eig.eigenvectors;
  return symmetrized(q * inverted.asDiagonal() * q.transpose());
}

void require_invertible_gram(const Matrix& gram, std::string_view what) {
  const EigenDecomposition eig = symmetric_eigendecompose(gram);
  const double lambda_max = eig.eigenvalues(0);
  const double lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (!(lambda_max > 0.0) || !(lambda_min > kInvertibleRatio * lambda_max)) {
    throw Error(ErrorCode::RankDeficient,
                std::string(what) + " is numerically singular (λ_min = " +
                    std::to_string(lambda_min) + ", λ_max = " + std::to_string(lambda_max) + ")");
  }
}

Vector solve_normal_equations(const LinearSystem& sys) {
  const Matrix& a = sys.A();
  const Matrix gram = a.transpose() * a;
  require_invertible_gram(gram, "AᵀA");
  return solve_dense(gram, a.transpose() * sys.b());
}

Vector underdetermined_apply(const Matrix& a, const Vector& v, MacCounter* macs) {
  if (a.rows() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "A is " + dims(a) + " but v has length " + std::to_string(v.size()));
  }
  if (a.rows() > a.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "under-determined pseudoinverse needs rows <= cols, got " + dims(a));
  }
  const Matrix gram = a * a.transpose();
  require_invertible_gram(gram, "AAᵀ");
  const auto k = static_cast<std::uint64_t>(a.rows());
  const auto n = static_cast<std::uint64_t>(a.cols());
  count(macs, k * (k + 1) / 2 * n);
  const Vector y = solve_dense(gram, v, macs);
  count(macs, k * n);
  return a.transpose() * y;
}

Vector solve_dense(const Matrix& a, const Vector& b, MacCounter* macs) {
  require_square(a, "coefficient matrix");
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient matrix is " + dims(a) +
                                                  " but rhs has length " +
                                                  std::to_string(b.size()));
  }
  return eliminate(a, b, macs).col(0);
}

Matrix inverse_dense(const Matrix& a) {
  require_square(a, "matrix to invert");
  return eliminate(a, Matrix::Identity(a.rows(), a.cols()), nullptr);
}

}  // namespace asp::linalg
