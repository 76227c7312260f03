#pragma once

// Deterministic least-squares Kalman filter built by state augmentation.
//
// A state transition x̂ = F·x + c appends n rows [−F | I]·[x; x̂] = c to the
// data seen so far, doubling the unknowns to 2n (old block, then new block).
// The inverse of the augmented Gram is kept current with rank-1 updates, so
// prediction, smoothing of the old block, and measurement updates are all
// the same RLS correction applied in the 2n-dimensional space.

#include <cstdint>

#include "asp/linalg.hpp"

namespace asp::kalman {

inline constexpr double kDefaultDelta = 1e-6;

class StateTransition {
 public:
  StateTransition(Matrix f, Vector c);

  /// F = I, c = 0.
  static StateTransition identity(Eigen::Index n);

  const Matrix& F() const noexcept { return f_; }
  const Vector& c() const noexcept { return c_; }
  Eigen::Index size() const noexcept { return c_.size(); }

  /// Row i of [−F | I] as a vector of length 2n.
  Vector augmented_row(Eigen::Index i) const;

 private:
  Matrix f_;
  Vector c_;
};

struct KalmanState {
  Vector estimate;  // length 2n: old block then new block
  Matrix inverse;   // (δI + embedded AᵀA + F̂ᵀF̂ + Σ a·aᵀ)⁻¹, 2n×2n
  Vector rhs;       // embedded Aᵀb + F̂ᵀc + Σ a·b, length 2n
  Eigen::Index n = 0;
  std::uint64_t measurements_since_transition = 0;

  Vector old_block() const { return estimate.head(n); }
  Vector new_block() const { return estimate.tail(n); }
};

struct AugmentedRow {
  Vector coeffs;  // length 2n
  double observation = 0.0;

  /// A measurement of the new state: zeros over the old block, `a` over the new.
  static AugmentedRow measurement(const Vector& a, double b);
};

/// Marginal prior for the next transition, as returned by discard_old_state.
struct Prior {
  Matrix inverse;  // n×n
  Vector estimate;
  Vector rhs;

  /// No data yet: inverse = (1/δ)·I, zero estimate and right-hand side.
  static Prior empty(Eigen::Index n, double delta = kDefaultDelta);
};

/// Stacked right-hand side (Aᵀb, 0) + F̂ᵀc of the augmented normal equations.
Vector augmented_rhs(const Vector& prior_rhs, const StateTransition& trans);

/// Embeds the old problem in the top-left block of a 2n problem whose new
/// block carries only the δ regularizer, then folds the n transition rows
/// in one at a time with the matrix inversion lemma. The returned estimate
/// is the prediction: old block smoothed, new block predicted.
KalmanState augment(const Matrix& prior_inverse, const Vector& prior_estimate,
                    const Vector& prior_rhs, const StateTransition& trans,
                    double delta = kDefaultDelta);

KalmanState augment(const Prior& prior, const StateTransition& trans,
                    double delta = kDefaultDelta);

/// inverse · prior_rhs_augmented.
Vector predict(const KalmanState& state, const Vector& prior_rhs_augmented);

/// The Kalman gain inverse'·coeffs for a row, with inverse' already
/// including the row's rank-1 term.
Vector kalman_gain(const Matrix& updated_inverse, const Vector& coeffs);

/// RLS update of the 2n estimate with one measurement row.
KalmanState measurement_update(const KalmanState& state, const AugmentedRow& row,
                               MacCounter* macs = nullptr);

/// Marginalizes the old block out: the returned inverse is the new-block
/// diagonal sub-block of the 2n inverse (the inverse of the Schur complement
/// of the old block in the Gram), and rhs satisfies inverse·rhs = estimate.
/// Throws UnderdeterminedNewState when no measurement has been absorbed since
/// the transition or the new-block sub-block is numerically singular.
Prior discard_old_state(const KalmanState& state);

}  // namespace asp::kalman
