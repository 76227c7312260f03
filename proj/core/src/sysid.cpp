#include "asp/sysid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <string>
#include <utility>

#include "asp/adaptive.hpp"
#include "asp/error.hpp"
#include "asp/kalman.hpp"
#include "asp/rng.hpp"

namespace asp::sysid {
namespace {

constexpr std::uint64_t kSystemStream = 1;
constexpr std::uint64_t kDataStream = 2;

struct NameEntry {
  Algorithm alg;
  std::string_view name;
};

constexpr std::array<NameEntry, 10> kNames{{
    {Algorithm::Lms, "lms"},
    {Algorithm::Nlms, "nlms"},
    {Algorithm::Kaczmarz, "kaczmarz"},
    {Algorithm::Ap, "ap"},
    {Algorithm::Rls, "rls"},
    {Algorithm::Sd, "sd"},
    {Algorithm::Kalman, "kalman"},
    {Algorithm::WienerLs, "wiener-ls"},
    {Algorithm::WienerMmse, "wiener-mmse"},
    {Algorithm::ReducedRank, "reduced-rank"},
}};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

double squared_distance(const Vector& a, const Vector& b) { return (a - b).squaredNorm(); }

// Single-point curve for the batch solvers.
LearningCurve direct_curve(const ExperimentConfig& cfg, const Vector& x_star,
                           const LinearSystem& data) {
  const auto m = static_cast<std::uint64_t>(data.rows());
  const auto n = static_cast<std::uint64_t>(data.cols());
  MacCounter macs;
  macs.add(m * n * (n + 1) / 2 + m * n);  // AᵀA (symmetric half) and Aᵀb

  Vector estimate;
  switch (cfg.algorithm) {
    case Algorithm::WienerLs: {
      const Matrix gram = data.A().transpose() * data.A();
      linalg::require_invertible_gram(gram, "AᵀA");
      estimate = linalg::solve_dense(gram, data.A().transpose() * data.b(), &macs);
      break;
    }
    case Algorithm::WienerMmse: {
      const adaptive::CorrelationPair corr = adaptive::estimate_correlations(data);
      macs.add(n * (n + 1) / 2 + n);
      linalg::require_invertible_gram(corr.R(), "R");
      estimate = linalg::solve_dense(corr.R(), corr.P(), &macs);
      break;
    }
    case Algorithm::ReducedRank:
      estimate = adaptive::reduced_rank_solve(data, cfg.rank_tol);
      macs.add(n * n * n + n * n);  // Q·Λ⁺·Qᵀ and its application
      break;
    default:
      invalid("not a direct solver");
  }

  const Vector residual = data.b() - data.A() * estimate;
  CurvePoint point;
  point.iteration = 1;
  point.squared_prediction_error = residual.squaredNorm() / static_cast<double>(m);
  point.parameter_error = squared_distance(estimate, x_star);
  point.cumulative_macs = macs.count;
  return LearningCurve{cfg.algorithm, {point}};
}

LearningCurve streaming_curve(const ExperimentConfig& cfg, const Vector& x_star,
                              const LinearSystem& data) {
  const Eigen::Index n = cfg.n;
  const Eigen::Index m = data.rows();
  LearningCurve curve{cfg.algorithm, {}};
  curve.points.reserve(static_cast<std::size_t>(cfg.iters));

  auto push = [&](std::size_t k, double error, const Vector& estimate, std::uint64_t macs) {
    if (!std::isfinite(error) || !estimate.allFinite()) {
      throw Error(ErrorCode::NonFinite, "estimate became non-finite (diverged)");
    }
    curve.points.push_back(
        CurvePoint{k, error * error, squared_distance(estimate, x_star), macs});
  };

  // Per-algorithm state; only the one in use is touched.
  adaptive::FilterState filter = cfg.algorithm == Algorithm::Rls
                                     ? adaptive::FilterState::for_rls(n, cfg.delta)
                                     : adaptive::FilterState::zeros(n);
  std::optional<adaptive::AffineProjector> projector;
  if (cfg.algorithm == Algorithm::Ap) {
    const Eigen::Index order =
        cfg.ap_order > 0 ? cfg.ap_order : adaptive::AffineProjector::default_order(n);
    projector.emplace(n, order);
  }
  std::optional<adaptive::CorrelationPair> corr;
  if (cfg.algorithm == Algorithm::Sd) corr = adaptive::estimate_correlations(data);
  std::optional<kalman::KalmanState> tracker;
  MacCounter kalman_macs;
  if (cfg.algorithm == Algorithm::Kalman) {
    tracker = kalman::augment(kalman::Prior::empty(n, cfg.delta),
                              kalman::StateTransition::identity(n), cfg.delta);
  }

  for (int it = 0; it < cfg.iters; ++it) {
    const auto k = static_cast<std::size_t>(it) + 1;
    const Eigen::Index row = it % m;
    const Vector a = data.row(row);
    const double b = data.b()(row);
    try {
      switch (cfg.algorithm) {
        case Algorithm::Lms: {
          auto step = adaptive::lms_step(filter, a, b, cfg.mu);
          filter = std::move(step.state);
          push(k, step.record.prior_error, filter.estimate, filter.mac_count);
          break;
        }
        case Algorithm::Nlms:
        case Algorithm::Kaczmarz: {
          auto step = adaptive::nlms_step(filter, a, b, cfg.eps);
          filter = std::move(step.state);
          push(k, step.record.prior_error, filter.estimate, filter.mac_count);
          break;
        }
        case Algorithm::Rls: {
          auto step = adaptive::rls_step(filter, a, b);
          filter = std::move(step.state);
          push(k, step.record.prior_error, filter.estimate, filter.mac_count);
          break;
        }
        case Algorithm::Ap: {
          const adaptive::UpdateRecord rec = projector->push(a, b);
          push(k, rec.prior_error, projector->state().estimate, projector->state().mac_count);
          break;
        }
        case Algorithm::Sd: {
          const double error = b - a.dot(filter.estimate);
          filter = adaptive::sd_step(filter, *corr, cfg.mu);
          push(k, error, filter.estimate, filter.mac_count);
          break;
        }
        case Algorithm::Kalman: {
          const double error = b - a.dot(tracker->new_block());
          tracker = kalman::measurement_update(*tracker, kalman::AugmentedRow::measurement(a, b),
                                               &kalman_macs);
          push(k, error, tracker->new_block(), kalman_macs.count);
          break;
        }
        default:
          invalid("not a streaming algorithm");
      }
    } catch (const ExperimentError&) {
      throw;
    } catch (const Error& e) {
      throw ExperimentError(e.code(), k, e.what());
    }
  }
  return curve;
}

}  // namespace

std::string_view to_string(Algorithm alg) noexcept {
  for (const auto& entry : kNames) {
    if (entry.alg == alg) return entry.name;
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  for (const auto& entry : kNames) {
    if (entry.name == name) return entry.alg;
  }
  return std::nullopt;
}

bool is_streaming(Algorithm alg) noexcept {
  switch (alg) {
    case Algorithm::Lms:
    case Algorithm::Nlms:
    case Algorithm::Kaczmarz:
    case Algorithm::Ap:
    case Algorithm::Rls:
      return true;
    default:
      return false;
  }
}

bool is_direct(Algorithm alg) noexcept {
  return alg == Algorithm::WienerLs || alg == Algorithm::WienerMmse ||
         alg == Algorithm::ReducedRank;
}

void ExperimentConfig::validate() const {
  if (n < 1) invalid("n must be >= 1");
  if (m < 1) invalid("m must be >= 1");
  if (iters < 1) invalid("iters must be >= 1");
  if (trials < 1) invalid("trials must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) invalid("noise must be finite and >= 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) invalid("mu must be finite and >= 0");
  if (!(eps > 0.0)) invalid("eps must be > 0");
  if (!(delta > 0.0)) invalid("delta must be > 0");
  if (ap_order < 0) invalid("ap-order must be >= 0");
  if (algorithm == Algorithm::Ap && ap_order > 0 && ap_order >= std::max(n, 2)) {
    invalid("ap-order must be below n");
  }
  if (!(rank_tol >= 0.0)) invalid("rank_tol must be >= 0");
}

Vector make_system(int n, std::uint64_t seed) {
  if (n < 1) invalid("n must be >= 1");
  SplitMix64 rng = SplitMix64::derive(seed, kSystemStream);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x;
}

LinearSystem synthesize_data(const Vector& x_star, int m, double noise_std, std::uint64_t seed) {
  if (m < 1) invalid("m must be >= 1");
  if (!(noise_std >= 0.0)) invalid("noise must be >= 0");
  SplitMix64 rng = SplitMix64::derive(seed, kDataStream);
  const Eigen::Index n = x_star.size();
  Matrix a(m, n);
  Vector b(m);
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    const double noise = rng.normal();
    b(i) = a.row(i).dot(x_star) + noise_std * noise;
  }
  return LinearSystem(std::move(a), std::move(b));
}

LearningCurve run_trial(const ExperimentConfig& cfg, const Vector& x_star,
                        const LinearSystem& data) {
  cfg.validate();
  if (x_star.size() != cfg.n || data.cols() != cfg.n) {
    throw Error(ErrorCode::DimensionMismatch, "trial data does not match n");
  }
  if (is_direct(cfg.algorithm)) {
    try {
      return direct_curve(cfg, x_star, data);
    } catch (const ExperimentError&) {
      throw;
    } catch (const Error& e) {
      throw ExperimentError(e.code(), 1, e.what());
    }
  }
  return streaming_curve(cfg, x_star, data);
}

LearningCurve run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::future<LearningCurve>> pending;
  pending.reserve(static_cast<std::size_t>(cfg.trials));
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(t);
    pending.push_back(std::async(std::launch::async, [cfg, seed] {
      const Vector x_star = make_system(cfg.n, seed);
      const LinearSystem data = synthesize_data(x_star, cfg.m, cfg.noise_std, seed);
      return run_trial(cfg, x_star, data);
    }));
  }

  // Merge strictly in trial order so the sums are schedule-independent.
  std::vector<LearningCurve> curves;
  curves.reserve(pending.size());
  for (auto& f : pending) curves.push_back(f.get());

  LearningCurve mean = curves.front();
  for (std::size_t t = 1; t < curves.size(); ++t) {
    for (std::size_t i = 0; i < mean.points.size(); ++i) {
      mean.points[i].squared_prediction_error += curves[t].points[i].squared_prediction_error;
      mean.points[i].parameter_error += curves[t].points[i].parameter_error;
    }
  }
  const double scale = 1.0 / static_cast<double>(cfg.trials);
  for (auto& p : mean.points) {
    p.squared_prediction_error *= scale;
    p.parameter_error *= scale;
  }
  return mean;
}

std::vector<LearningCurve> compare_algorithms(std::vector<ExperimentConfig> cfgs,
                                              std::uint64_t shared_seed) {
  if (cfgs.empty()) invalid("no configurations to compare");
  const ExperimentConfig& ref = cfgs.front();
  for (const auto& cfg : cfgs) {
    if (cfg.n != ref.n || cfg.m != ref.m || cfg.noise_std != ref.noise_std) {
      throw Error(ErrorCode::ConfigMismatch,
                  "compared algorithms must share n, m and noise (" +
                      std::string(to_string(cfg.algorithm)) + " differs)");
    }
  }
  std::vector<LearningCurve> out;
  out.reserve(cfgs.size());
  for (auto& cfg : cfgs) {
    cfg.seed = shared_seed;
    out.push_back(run_experiment(cfg));
  }
  return out;
}

std::uint64_t count_ops(Algorithm alg, int n) {
  if (!is_streaming(alg)) {
    invalid("operation counts are defined for streaming algorithms only");
  }
  ExperimentConfig cfg;
  cfg.algorithm = alg;
  cfg.n = n;
  cfg.m = std::max(64, 4 * n);
  cfg.trials = 1;
  cfg.noise_std = 0.0;
  cfg.mu = 1e-3;
  const int warm =
      alg == Algorithm::Ap ? static_cast<int>(adaptive::AffineProjector::default_order(n)) : 1;
  cfg.iters = warm + 3;
  cfg.validate();
  const Vector x_star = make_system(n, 0);
  const LinearSystem data = synthesize_data(x_star, cfg.m, 0.0, 0);
  const LearningCurve curve = run_trial(cfg, x_star, data);

  const auto& p = curve.points;
  const std::size_t last = p.size() - 1;
  const std::uint64_t delta = p[last].cumulative_macs - p[last - 1].cumulative_macs;
  const std::uint64_t before = p[last - 1].cumulative_macs - p[last - 2].cumulative_macs;
  if (delta != before) {
    throw Error(ErrorCode::InvalidArgument, "per-step cost is not constant after warm-up");
  }
  return delta;
}

std::optional<std::size_t> iterations_to_reach(const LearningCurve& curve, double threshold) {
  for (const auto& p : curve.points) {
    if (p.parameter_error <= threshold) return p.iteration;
  }
  return std::nullopt;
}

std::string format_real(double value) {
  std::array<char, 40> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

namespace {

void write_point(std::ostream& out, const CurvePoint& p) {
  out << p.iteration << ',' << format_real(p.squared_prediction_error) << ','
      << format_real(p.parameter_error) << ',' << p.cumulative_macs << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const LearningCurve& curve) {
  out << "iteration,squared_prediction_error,parameter_error,cumulative_macs\n";
  for (const auto& p : curve.points) write_point(out, p);
}

void write_compare_csv(std::ostream& out, const std::vector<LearningCurve>& curves) {
  out << "algorithm,iteration,squared_prediction_error,parameter_error,cumulative_macs\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out << to_string(curve.algorithm) << ',';
      write_point(out, p);
    }
  }
}

}  // namespace asp::sysid
