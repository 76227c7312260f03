#pragma once

// Seeded system-identification experiments: synthesize x* and data rows,
// drive an estimator through them, and record learning curves.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asp/linalg.hpp"

namespace asp::sysid {

using linalg::LinearSystem;

enum class Algorithm {
  Lms,
  Nlms,
  Kaczmarz,
  Ap,
  Rls,
  Sd,
  Kalman,
  WienerLs,
  WienerMmse,
  ReducedRank,
};

std::string_view to_string(Algorithm alg) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

/// LMS, NLMS, Kaczmarz, AP and RLS consume one row per step.
bool is_streaming(Algorithm alg) noexcept;

/// Direct solvers produce a single-point curve.
bool is_direct(Algorithm alg) noexcept;

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Lms;
  int n = 5;
  int m = 50;
  int iters = 2000;
  double mu = 0.05;
  double eps = 1e-12;
  double delta = 1e-6;
  double noise_std = 0.01;
  std::uint64_t seed = 1;
  int trials = 32;
  /// AP projection order; 0 picks AffineProjector::default_order(n).
  int ap_order = 0;
  double rank_tol = linalg::kDefaultRankTol;

  /// Throws InvalidArgument for out-of-range fields.
  void validate() const;
};

struct CurvePoint {
  std::size_t iteration = 0;
  double squared_prediction_error = 0.0;  // e[k]²
  double parameter_error = 0.0;           // ‖x[k] − x*‖²
  std::uint64_t cumulative_macs = 0;
};

struct LearningCurve {
  Algorithm algorithm = Algorithm::Lms;
  std::vector<CurvePoint> points;
};

/// x* with entries uniform on [−1, 1], determined by (n, seed).
Vector make_system(int n, std::uint64_t seed);

/// Rows aᵢ ~ N(0, I) and bᵢ = aᵢᵀx* + noise_std·νᵢ with νᵢ ~ N(0, 1).
LinearSystem synthesize_data(const Vector& x_star, int m, double noise_std, std::uint64_t seed);

/// One trial on explicit data; the building block of run_experiment.
LearningCurve run_trial(const ExperimentConfig& cfg, const Vector& x_star,
                        const LinearSystem& data);

/// Runs cfg.trials trials on seeds seed, seed+1, ... and averages the
/// squared errors pointwise. Trials may run concurrently; the result does
/// not depend on scheduling. Errors are rethrown as ExperimentError with the
/// failing iteration attached.
LearningCurve run_experiment(const ExperimentConfig& cfg);

/// Runs every config on the data generated from `shared_seed`. Throws
/// ConfigMismatch unless all configs share n, m and noise_std.
std::vector<LearningCurve> compare_algorithms(std::vector<ExperimentConfig> cfgs,
                                              std::uint64_t shared_seed);

/// Per-step MAC count of a streaming algorithm at filter length n, measured
/// from an instrumented run past warm-up.
std::uint64_t count_ops(Algorithm alg, int n);

/// First 1-based iteration whose parameter error is <= threshold.
std::optional<std::size_t> iterations_to_reach(const LearningCurve& curve, double threshold);

/// CSV header: iteration,squared_prediction_error,parameter_error,cumulative_macs
void write_csv(std::ostream& out, const LearningCurve& curve);
/// Same columns prefixed by `algorithm`.
void write_compare_csv(std::ostream& out, const std::vector<LearningCurve>& curves);

/// Decimal with 17 significant digits.
std::string format_real(double value);

}  // namespace asp::sysid
