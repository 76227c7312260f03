#include "asp/kalman.hpp"

#include <string>

#include "asp/error.hpp"

namespace asp::kalman {
namespace {

void require_length(const Vector& v, Eigen::Index n, std::string_view what) {
  if (v.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " +
                                                  std::to_string(v.size()) + ", expected " +
                                                  std::to_string(n));
  }
}

// One RLS fold of (coeffs, observation) into the augmented problem.
void fold(KalmanState& state, const Vector& coeffs, double observation, MacCounter* macs) {
  state.inverse =
      linalg::sherman_morrison_update(state.inverse, coeffs, linalg::kDenominatorTol, macs);
  const Vector gain = kalman_gain(state.inverse, coeffs);
  if (macs != nullptr) macs->add(static_cast<std::uint64_t>(coeffs.size() * coeffs.size()));
  const double innovation = observation - linalg::dot(coeffs, state.estimate, macs);
  state.estimate += gain * innovation;
  if (macs != nullptr) macs->add(1 + static_cast<std::uint64_t>(coeffs.size()));
  state.rhs += coeffs * observation;
}

}  // namespace

StateTransition::StateTransition(Matrix f, Vector c) : f_(std::move(f)), c_(std::move(c)) {
  if (f_.rows() != f_.cols() || f_.rows() != c_.size() || c_.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "transition needs F n×n and c of length n");
  }
  linalg::require_finite(f_, "F");
  linalg::require_finite(c_, "c");
}

StateTransition StateTransition::identity(Eigen::Index n) {
  return StateTransition(Matrix::Identity(n, n), Vector::Zero(n));
}

Vector StateTransition::augmented_row(Eigen::Index i) const {
  const Eigen::Index n = size();
  Vector row = Vector::Zero(2 * n);
  row.head(n) = -f_.row(i).transpose();
  row(n + i) = 1.0;
  return row;
}

AugmentedRow AugmentedRow::measurement(const Vector& a, double b) {
  const Eigen::Index n = a.size();
  AugmentedRow row{Vector::Zero(2 * n), b};
  row.coeffs.tail(n) = a;
  return row;
}

Prior Prior::empty(Eigen::Index n, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  return Prior{Matrix::Identity(n, n) / delta, Vector::Zero(n), Vector::Zero(n)};
}

Vector augmented_rhs(const Vector& prior_rhs, const StateTransition& trans) {
  const Eigen::Index n = trans.size();
  require_length(prior_rhs, n, "prior right-hand side");
  Vector rhs = Vector::Zero(2 * n);
  rhs.head(n) = prior_rhs - trans.F().transpose() * trans.c();
  rhs.tail(n) = trans.c();
  return rhs;
}

KalmanState augment(const Matrix& prior_inverse, const Vector& prior_estimate,
                    const Vector& prior_rhs, const StateTransition& trans, double delta) {
  const Eigen::Index n = trans.size();
  if (prior_inverse.rows() != n || prior_inverse.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "prior inverse must be n×n");
  }
  require_length(prior_estimate, n, "prior estimate");
  require_length(prior_rhs, n, "prior right-hand side");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");

  KalmanState state;
  state.n = n;
  state.inverse = Matrix::Zero(2 * n, 2 * n);
  state.inverse.topLeftCorner(n, n) = linalg::symmetrized(prior_inverse);
  state.inverse.bottomRightCorner(n, n) = Matrix::Identity(n, n) / delta;
  state.estimate = Vector::Zero(2 * n);
  state.estimate.head(n) = prior_estimate;
  state.rhs = Vector::Zero(2 * n);
  state.rhs.head(n) = prior_rhs;

  for (Eigen::Index i = 0; i < n; ++i) {
    fold(state, trans.augmented_row(i), trans.c()(i), nullptr);
  }
  state.measurements_since_transition = 0;
  return state;
}

KalmanState augment(const Prior& prior, const StateTransition& trans, double delta) {
  return augment(prior.inverse, prior.estimate, prior.rhs, trans, delta);
}

Vector predict(const KalmanState& state, const Vector& prior_rhs_augmented) {
  require_length(prior_rhs_augmented, 2 * state.n, "augmented right-hand side");
  return state.inverse * prior_rhs_augmented;
}

Vector kalman_gain(const Matrix& updated_inverse, const Vector& coeffs) {
  return updated_inverse * coeffs;
}

KalmanState measurement_update(const KalmanState& state, const AugmentedRow& row,
                               MacCounter* macs) {
  require_length(row.coeffs, 2 * state.n, "augmented measurement row");
  KalmanState out = state;
  fold(out, row.coeffs, row.observation, macs);
  out.measurements_since_transition += 1;
  return out;
}

Prior discard_old_state(const KalmanState& state) {
  if (state.measurements_since_transition == 0) {
    throw Error(ErrorCode::UnderdeterminedNewState,
                "no measurement has been absorbed since the last transition");
  }
  const Eigen::Index n = state.n;
  Matrix marginal = linalg::symmetrized(state.inverse.bottomRightCorner(n, n));
  Vector estimate = state.new_block();
  Vector rhs;
  try {
    linalg::require_invertible_gram(marginal, "new-block inverse");
    rhs = linalg::solve_dense(marginal, estimate);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    throw Error(ErrorCode::UnderdeterminedNewState, e.what());
  }
  return Prior{std::move(marginal), std::move(estimate), std::move(rhs)};
}

}  // namespace asp::kalman
