#pragma once

// Streaming and batch estimators for A·x = b. Every streaming update has the
// same shape,
//
//     x[k+1] = x[k] + gain · residual,
//
// and the algorithms differ only in how the gain is chosen: a fixed step
// (LMS), a row-normalized step (NLMS/Kaczmarz), an under-determined
// pseudoinverse (AP), or a recursively maintained inverse Gram (RLS).

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>

#include "asp/linalg.hpp"

namespace asp::adaptive {

using linalg::LinearSystem;

inline constexpr double kDefaultNlmsEps = 1e-12;
inline constexpr double kDefaultRlsDelta = 1e-6;

struct FilterState {
  Vector estimate;
  /// Maintained (δI + AᵀA)⁻¹; only present for RLS-family filters.
  std::optional<Matrix> inverse;
  std::uint64_t step_index = 0;
  std::uint64_t mac_count = 0;

  /// x[0] = 0 of length n.
  static FilterState zeros(Eigen::Index n);
  static FilterState from_guess(Vector guess);
  /// x[0] = guess (zero when empty) and inverse₀ = (1/δ)·I.
  static FilterState for_rls(Eigen::Index n, double delta = kDefaultRlsDelta,
                             std::optional<Vector> guess = std::nullopt);
};

struct UpdateRecord {
  double prior_error = 0.0;  // b − aᵀx[k]
  double gain_norm = 0.0;
  std::uint64_t macs = 0;
  bool skipped = false;  // degenerate row (‖a‖² < eps) left the estimate alone
};

struct Step {
  FilterState state;
  UpdateRecord record;
};

/// R = E{a·aᵀ}, P = E{a·b}.
class CorrelationPair {
 public:
  CorrelationPair(Matrix r, Vector p);

  const Matrix& R() const noexcept { return r_; }
  const Vector& P() const noexcept { return p_; }
  Eigen::Index size() const noexcept { return p_.size(); }

 private:
  Matrix r_;
  Vector p_;
};

/// x' = x + μ·(b − aᵀx)·a. Costs 2n+1 MACs.
Step lms_step(const FilterState& state, const Vector& a, double b, double mu);

/// LMS with μ = 1/(aᵀa + eps); a single-row orthogonal projection. Rows with
/// aᵀa < eps are skipped. Costs 3n+2 MACs (2n+1 when skipped).
Step nlms_step(const FilterState& state, const Vector& a, double b,
               double eps = kDefaultNlmsEps);

/// Cycles NLMS projections over the rows of `sys` in order 1..m until the
/// largest row residual is below `tol`. Throws NotConverged after
/// `max_sweeps` sweeps.
Vector kaczmarz_solve(const LinearSystem& sys, const Vector& x0, int max_sweeps, double tol,
                      double eps = kDefaultNlmsEps);

/// x' = x + Akᵀ(Ak·Akᵀ)⁻¹(bk − Ak·x); afterwards Ak·x' = bk.
FilterState ap_step(const FilterState& state, const Matrix& ak, const Vector& bk);

/// Folds a·aᵀ into the maintained inverse with the matrix inversion lemma,
/// then x' = x + inverse'·a·(b − aᵀx).
Step rls_step(const FilterState& state, const Vector& a, double b);

/// R = (1/k)·AᵀA, P = (1/k)·Aᵀb over the k rows of `sys`.
CorrelationPair estimate_correlations(const LinearSystem& sys);

/// x' = x + μ·(P − R·x).
FilterState sd_step(const FilterState& state, const CorrelationPair& corr, double mu);

/// Solves R·x = P. Throws RankDeficient for singular R.
Vector wiener_mmse_solve(const CorrelationPair& corr);

/// Solves AᵀA·x = Aᵀb.
Vector wiener_ls_solve(const LinearSystem& sys);

/// (AᵀA)⁺·Aᵀb with the eigen-pseudoinverse; minimum-norm for rank-deficient A.
Vector reduced_rank_solve(const LinearSystem& sys, double rank_tol = linalg::kDefaultRankTol);

/// x' = x + (full_gram)⁺·a·(b − aᵀx), where full_gram already includes a·aᵀ.
FilterState reduced_rank_rls_step(const FilterState& state, const Matrix& full_gram,
                                  const Vector& a, double b,
                                  double rank_tol = linalg::kDefaultRankTol);

/// Sliding-window affine projection over the most recent `order` rows.
///
/// The window Gram AₖAₖᵀ is kept current by computing only the inner
/// products of the incoming row; the k×k system is solved fresh on every
/// step. Until the window fills, the rows seen so far are used.
class AffineProjector {
 public:
  AffineProjector(Eigen::Index n, Eigen::Index order, Vector initial = {});

  UpdateRecord push(const Vector& a, double b);

  const FilterState& state() const noexcept { return state_; }
  Eigen::Index order() const noexcept { return order_; }

  /// Projection order used when the caller does not pick one: ⌈n/4⌉.
  static Eigen::Index default_order(Eigen::Index n);

 private:
  Eigen::Index order_;
  std::deque<Vector> rows_;
  std::deque<double> observations_;
  Matrix gram_;
  FilterState state_;
};

}  // namespace asp::adaptive
