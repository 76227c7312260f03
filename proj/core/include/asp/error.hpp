#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace asp {

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  InvalidArgument,
  DenominatorNearZero,
  NotSymmetric,
  NegativeEigenvalue,
  RankDeficient,
  NotConverged,
  ZeroDiagonal,
  UnderdeterminedNewState,
  ConfigMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base class for every error raised by the library. The code is stable and
/// is what callers (and the CLI exit-code mapping) should dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative procedures that exhaust their budget.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, double final_residual);

  double final_residual() const noexcept { return final_residual_; }

 private:
  double final_residual_;
};

/// Numerical or configuration failure inside an experiment, tagged with the
/// 1-based iteration at which it occurred (0 when raised during setup).
class ExperimentError : public Error {
 public:
  ExperimentError(ErrorCode code, std::size_t iteration, const std::string& what);

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// True for the failures the CLI reports as numerical (exit code 3).
bool is_numerical_failure(ErrorCode code) noexcept;

}  // namespace asp
