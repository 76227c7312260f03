#include "asp/adaptive.hpp"

#include <cmath>
#include <string>

#include "asp/error.hpp"

namespace asp::adaptive {
namespace {

void require_length(const Vector& v, Eigen::Index n, std::string_view what) {
  if (v.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " +
                                                  std::to_string(v.size()) + ", expected " +
                                                  std::to_string(n));
  }
}

void require_step(double mu, std::string_view what) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " must be finite and non-negative, got " + std::to_string(mu));
  }
}

// The shared correction: x[k+1] = x[k] + (step·e)·direction.
Step correct(const FilterState& state, const Vector& direction, double step, double error,
             std::uint64_t macs) {
  Step out{state, UpdateRecord{}};
  const double scale = step * error;
  out.state.estimate += scale * direction;
  out.state.step_index += 1;
  out.state.mac_count += macs;
  out.record.prior_error = error;
  out.record.gain_norm = std::abs(step) * direction.norm();
  out.record.macs = macs;
  return out;
}

}  // namespace

FilterState FilterState::zeros(Eigen::Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "filter length must be >= 1");
  return FilterState{Vector::Zero(n), std::nullopt, 0, 0};
}

FilterState FilterState::from_guess(Vector guess) {
  if (guess.size() < 1) throw Error(ErrorCode::InvalidArgument, "filter length must be >= 1");
  linalg::require_finite(guess, "initial guess");
  return FilterState{std::move(guess), std::nullopt, 0, 0};
}

FilterState FilterState::for_rls(Eigen::Index n, double delta, std::optional<Vector> guess) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "RLS regularization delta must be positive");
  }
  FilterState state = guess ? from_guess(std::move(*guess)) : zeros(n);
  require_length(state.estimate, n, "initial guess");
  state.inverse = Matrix::Identity(n, n) / delta;
  return state;
}

CorrelationPair::CorrelationPair(Matrix r, Vector p) : r_(std::move(r)), p_(std::move(p)) {
  if (r_.rows() != r_.cols() || r_.rows() != p_.size() || p_.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "R must be n×n and P of length n");
  }
  linalg::require_finite(r_, "R");
  linalg::require_finite(p_, "P");
  if (!linalg::is_symmetric(r_)) {
    throw Error(ErrorCode::NotSymmetric, "autocorrelation matrix is not symmetric");
  }
}

Step lms_step(const FilterState& state, const Vector& a, double b, double mu) {
  require_step(mu, "LMS step size");
  const auto n = state.estimate.size();
  require_length(a, n, "input row");
  const double error = b - a.dot(state.estimate);
  return correct(state, a, mu, error, 2 * static_cast<std::uint64_t>(n) + 1);
}

Step nlms_step(const FilterState& state, const Vector& a, double b, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "NLMS eps must be positive");
  const auto n = state.estimate.size();
  require_length(a, n, "input row");
  const auto un = static_cast<std::uint64_t>(n);
  const double energy = a.dot(a);
  if (energy < eps) {
    Step out{state, UpdateRecord{}};
    out.record.prior_error = b - a.dot(state.estimate);
    out.record.macs = 2 * un + 1;
    out.record.skipped = true;
    out.state.step_index += 1;
    out.state.mac_count += out.record.macs;
    return out;
  }
  const double mu = 1.0 / (energy + eps);
  const double error = b - a.dot(state.estimate);
  return correct(state, a, mu, error, 3 * un + 2);
}

Vector kaczmarz_solve(const LinearSystem& sys, const Vector& x0, int max_sweeps, double tol,
                      double eps) {
  if (max_sweeps < 1) throw Error(ErrorCode::InvalidArgument, "max_sweeps must be >= 1");
  require_length(x0, sys.cols(), "initial guess");
  FilterState state = FilterState::from_guess(x0);
  std::vector<Vector> rows;
  rows.reserve(static_cast<std::size_t>(sys.rows()));
  for (Eigen::Index i = 0; i < sys.rows(); ++i) rows.push_back(sys.row(i));

  double worst = 0.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < sys.rows(); ++i) {
      state = nlms_step(state, rows[static_cast<std::size_t>(i)], sys.b()(i), eps).state;
    }
    worst = (sys.b() - sys.A() * state.estimate).cwiseAbs().maxCoeff();
    if (worst < tol) return state.estimate;
  }
  throw NotConverged("Kaczmarz sweeps exhausted (max row residual " + std::to_string(worst) + ")",
                     worst);
}

FilterState ap_step(const FilterState& state, const Matrix& ak, const Vector& bk) {
  const auto n = state.estimate.size();
  if (ak.cols() != n || ak.rows() != bk.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Ak must be k×n with bk of length k");
  }
  MacCounter macs;
  const Vector residual = bk - linalg::matvec(ak, state.estimate, &macs);
  macs.add(static_cast<std::uint64_t>(bk.size()));
  FilterState out = state;
  out.estimate += linalg::underdetermined_apply(ak, residual, &macs);
  out.step_index += 1;
  out.mac_count += macs.count + static_cast<std::uint64_t>(n);
  return out;
}

Step rls_step(const FilterState& state, const Vector& a, double b) {
  if (!state.inverse) {
    throw Error(ErrorCode::InvalidArgument, "RLS step needs a maintained inverse");
  }
  const auto n = state.estimate.size();
  require_length(a, n, "input row");
  MacCounter macs;
  auto fold = linalg::sherman_morrison_fold(*state.inverse, a, linalg::kDenominatorTol, &macs);
  const double error = b - linalg::dot(a, state.estimate, &macs);
  macs.add(1);
  macs.add(static_cast<std::uint64_t>(n));  // x += gain·e

  Step out = correct(state, fold.gain, 1.0, error, macs.count);
  out.state.inverse = std::move(fold.inverse);
  return out;
}

CorrelationPair estimate_correlations(const LinearSystem& sys) {
  const double scale = 1.0 / static_cast<double>(sys.rows());
  Matrix r = scale * (sys.A().transpose() * sys.A());
  Vector p = scale * (sys.A().transpose() * sys.b());
  return CorrelationPair(linalg::symmetrized(r), std::move(p));
}

FilterState sd_step(const FilterState& state, const CorrelationPair& corr, double mu) {
  require_step(mu, "steepest-descent step size");
  const auto n = state.estimate.size();
  if (corr.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "correlation pair does not match the estimate");
  }
  MacCounter macs;
  const Vector gradient = corr.P() - linalg::matvec(corr.R(), state.estimate, &macs);
  macs.add(2 * static_cast<std::uint64_t>(n));
  FilterState out = state;
  out.estimate += mu * gradient;
  out.step_index += 1;
  out.mac_count += macs.count;
  return out;
}

Vector wiener_mmse_solve(const CorrelationPair& corr) {
  linalg::require_invertible_gram(corr.R(), "autocorrelation matrix R");
  return linalg::solve_dense(corr.R(), corr.P());
}

Vector wiener_ls_solve(const LinearSystem& sys) { return linalg::solve_normal_equations(sys); }

Vector reduced_rank_solve(const LinearSystem& sys, double rank_tol) {
  const Matrix gram = linalg::symmetrized(sys.A().transpose() * sys.A());
  return linalg::pinv_psd(gram, rank_tol) * (sys.A().transpose() * sys.b());
}

FilterState reduced_rank_rls_step(const FilterState& state, const Matrix& full_gram,
                                  const Vector& a, double b, double rank_tol) {
  const auto n = state.estimate.size();
  require_length(a, n, "input row");
  if (full_gram.rows() != n || full_gram.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "full Gram must be n×n");
  }
  const Vector gain = linalg::pinv_psd(full_gram, rank_tol) * a;
  const double error = b - a.dot(state.estimate);
  return correct(state, gain, 1.0, error, 0).state;
}

Eigen::Index AffineProjector::default_order(Eigen::Index n) {
  return std::max<Eigen::Index>(1, (n + 3) / 4);
}

AffineProjector::AffineProjector(Eigen::Index n, Eigen::Index order, Vector initial)
    : order_(order),
      gram_(Matrix::Zero(0, 0)),
      state_(initial.size() == 0 ? FilterState::zeros(n) : FilterState::from_guess(initial)) {
  // k < n keeps the window under-determined; n = 1 admits only k = 1.
  const Eigen::Index max_order = std::max<Eigen::Index>(n - 1, 1);
  if (order < 1 || order > max_order) {
    throw Error(ErrorCode::InvalidArgument,
                "projection order must satisfy 1 <= k < n, got k = " + std::to_string(order));
  }
  require_length(state_.estimate, n, "initial guess");
}

UpdateRecord AffineProjector::push(const Vector& a, double b) {
  const Eigen::Index n = state_.estimate.size();
  require_length(a, n, "input row");
  const auto un = static_cast<std::uint64_t>(n);
  MacCounter macs;

  if (static_cast<Eigen::Index>(rows_.size()) == order_) {
    rows_.pop_front();
    observations_.pop_front();
    const Eigen::Index kept = order_ - 1;
    Matrix shifted = gram_.bottomRightCorner(kept, kept);
    gram_ = std::move(shifted);
  }
  rows_.push_back(a);
  observations_.push_back(b);
  const auto k = static_cast<Eigen::Index>(rows_.size());
  gram_.conservativeResize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double g = rows_[static_cast<std::size_t>(i)].dot(a);
    gram_(i, k - 1) = g;
    gram_(k - 1, i) = g;
  }
  macs.add(static_cast<std::uint64_t>(k) * un);

  Vector residual(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    residual(i) = observations_[idx] - rows_[idx].dot(state_.estimate);
  }
  macs.add(static_cast<std::uint64_t>(k) * (un + 1));

  const Vector weights = linalg::solve_dense(gram_, residual, &macs);
  Vector correction = Vector::Zero(n);
  for (Eigen::Index i = 0; i < k; ++i) {
    correction += weights(i) * rows_[static_cast<std::size_t>(i)];
  }
  macs.add(static_cast<std::uint64_t>(k) * un);

  state_.estimate += correction;
  state_.step_index += 1;
  state_.mac_count += macs.count;

  UpdateRecord record;
  record.prior_error = residual(k - 1);
  record.gain_norm = record.prior_error != 0.0 ? correction.norm() / std::abs(record.prior_error)
                                               : 0.0;
  record.macs = macs.count;
  return record;
}

}  // namespace asp::adaptive
