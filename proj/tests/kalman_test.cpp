#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "asp/adaptive.hpp"
#include "asp/error.hpp"
#include "asp/kalman.hpp"
#include "test_support.hpp"

namespace asp::kalman {
namespace {

using testing::Gen;
using testing::max_abs_diff;

// Old problem (δI + AᵀA, Aᵀb) and its RLS-maintained inverse.
struct OldProblem {
  Matrix gram;
  Vector rhs;
  Prior prior;
};

OldProblem old_problem(const Matrix& a, const Vector& b, double delta) {
  const Eigen::Index n = a.cols();
  OldProblem out;
  out.gram = delta * Matrix::Identity(n, n) + a.transpose() * a;
  out.rhs = a.transpose() * b;
  out.prior.inverse = testing::oracle_inverse(out.gram);
  out.prior.inverse = 0.5 * (out.prior.inverse + out.prior.inverse.transpose());
  out.prior.rhs = out.rhs;
  out.prior.estimate = out.prior.inverse * out.rhs;
  return out;
}

// Embedded Gram blockdiag(old, δI) plus the transition rows.
Matrix augmented_gram(const Matrix& old_gram, const StateTransition& trans, double delta) {
  const Eigen::Index n = trans.size();
  Matrix g = Matrix::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) = old_gram;
  g.bottomRightCorner(n, n) = delta * Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector row = trans.augmented_row(i);
    g += row * row.transpose();
  }
  return g;
}

TEST(StateTransition, IdentityRowsHaveMinusIdentityThenIdentity) {
  const auto trans = StateTransition::identity(2);
  Vector r0(4), r1(4);
  r0 << -1.0, 0.0, 1.0, 0.0;
  r1 << 0.0, -1.0, 0.0, 1.0;
  EXPECT_EQ(trans.augmented_row(0), r0);
  EXPECT_EQ(trans.augmented_row(1), r1);
}

TEST(StateTransition, RejectsMismatchedShapes) {
  try {
    StateTransition(Matrix::Identity(2, 2), Vector::Zero(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Augment, InverseMatchesDirectInversion) {
  Gen gen(1);
  const double delta = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = gen.matrix(10, 3);
    const auto old = old_problem(a, gen.vector(10), delta);
    const StateTransition trans(gen.matrix(3, 3), gen.vector(3));
    const auto state = augment(old.prior, trans, delta);
    const Matrix expected = testing::oracle_inverse(augmented_gram(old.gram, trans, delta));
    EXPECT_LT(max_abs_diff(state.inverse, expected), 1e-7);
    EXPECT_TRUE(linalg::is_symmetric(state.inverse, 1e-9));
    EXPECT_EQ(state.estimate.size(), 6);
  }
}

TEST(Augment, EmbeddingKeepsOldGramInTopLeftBlock) {
  Gen gen(2);
  const double delta = 1e-6;
  const Matrix a = gen.matrix(12, 3);
  const auto old = old_problem(a, gen.vector(12), delta);
  const StateTransition trans(gen.matrix(3, 3), gen.vector(3));
  const auto state = augment(old.prior, trans, delta);

  // Remove the transition rows from the recovered Gram; the rest is the embedding.
  Matrix recovered = testing::oracle_inverse(state.inverse);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Vector row = trans.augmented_row(i);
    recovered -= row * row.transpose();
  }
  EXPECT_LT(max_abs_diff(Matrix(recovered.topLeftCorner(3, 3)), old.gram), 1e-7);
  EXPECT_LT(max_abs_diff(Matrix(recovered.topRightCorner(3, 3)), Matrix::Zero(3, 3)), 1e-7);
}

TEST(Augment, CarriesTheAugmentedRightHandSide) {
  Gen gen(3);
  const Matrix a = gen.matrix(8, 2);
  const auto old = old_problem(a, gen.vector(8), 1e-6);
  const StateTransition trans(gen.matrix(2, 2), gen.vector(2));
  const auto state = augment(old.prior, trans);
  EXPECT_LT(max_abs_diff(state.rhs, augmented_rhs(old.rhs, trans)), 1e-12);
  // The folded estimate and the closed-form prediction agree.
  EXPECT_LT(max_abs_diff(state.estimate, predict(state, state.rhs)), 1e-8);
}

TEST(Predict, IdentityTransitionCarriesTheLeastSquaresEstimate) {
  Gen gen(4);
  const Matrix a = gen.matrix(60, 4);
  const Vector x_star = gen.vector(4);
  const auto old = old_problem(a, a * x_star, 1e-6);
  const auto trans = StateTransition::identity(4);
  const auto state = augment(old.prior, trans);
  const Vector prediction = predict(state, augmented_rhs(old.rhs, trans));
  const Vector ls = testing::oracle_min_norm(a, a * x_star);
  EXPECT_LT(max_abs_diff(Vector(prediction.tail(4)), ls), 1e-5);
  EXPECT_LT(max_abs_diff(Vector(prediction.head(4)), ls), 1e-5);
}

TEST(Predict, ScalarDoublingTransition) {
  const Matrix a = Matrix::Ones(20, 1);
  const auto old = old_problem(a, Vector::Constant(20, 3.0), 1e-6);
  const StateTransition trans(Matrix::Constant(1, 1, 2.0), Vector::Zero(1));
  const auto state = augment(old.prior, trans);
  const Vector prediction = predict(state, augmented_rhs(old.rhs, trans));
  EXPECT_NEAR(prediction(1), 6.0, 1e-5);
  EXPECT_NEAR(prediction(0), 3.0, 1e-5);
}

TEST(Predict, FixedPointOfTheTransitionIsPredictedExactly) {
  Gen gen(5);
  const Matrix a = gen.matrix(30, 3);
  const Vector x_star = gen.vector(3);
  const Matrix f = gen.matrix(3, 3);
  const StateTransition trans(f, x_star - f * x_star);
  const auto old = old_problem(a, a * x_star, 1e-6);
  const auto state = augment(old.prior, trans);
  const Vector prediction = predict(state, augmented_rhs(old.rhs, trans));
  EXPECT_LT(max_abs_diff(Vector(prediction.tail(3)), x_star), 1e-5);
}

TEST(MeasurementUpdate, ZeroInnovationLeavesEstimate) {
  Gen gen(6);
  const auto state = augment(Prior::empty(3), StateTransition::identity(3));
  const Vector a = gen.vector(3);
  const auto row = AugmentedRow::measurement(a, a.dot(state.new_block()));
  const auto out = measurement_update(state, row);
  EXPECT_LT(max_abs_diff(out.estimate, state.estimate), 1e-15);
  EXPECT_EQ(out.measurements_since_transition, 1u);
}

TEST(MeasurementUpdate, GainIsTheUpdatedInverseTimesTheRow) {
  Gen gen(7);
  auto state = augment(Prior::empty(3), StateTransition::identity(3));
  for (int k = 0; k < 5; ++k) {
    const auto row = AugmentedRow::measurement(gen.vector(3), gen.normal());
    const auto out = measurement_update(state, row);
    const Vector gain = kalman_gain(out.inverse, row.coeffs);
    const double innovation = row.observation - row.coeffs.dot(state.estimate);
    EXPECT_LT(max_abs_diff(gain, out.inverse * row.coeffs), 1e-12);
    EXPECT_LT(max_abs_diff(out.estimate, state.estimate + gain * innovation), 1e-12);
    EXPECT_EQ(row.coeffs.head(3), Vector::Zero(3));
    state = out;
  }
}

TEST(MeasurementUpdate, NewBlockTracksRlsFromTheMarginalPrior) {
  Gen gen(8);
  const Eigen::Index n = 4;
  const double delta = 1e-6;
  auto state = augment(Prior::empty(n, delta), StateTransition::identity(n), delta);
  auto rls = adaptive::FilterState::for_rls(n, delta, Vector(state.new_block()));
  rls.inverse = Matrix(state.inverse.bottomRightCorner(n, n));
  const Vector x_star = gen.vector(n);
  for (int k = 0; k < 200; ++k) {
    const Vector a = gen.vector(n);
    const double b = a.dot(x_star) + 0.01 * gen.normal();
    state = measurement_update(state, AugmentedRow::measurement(a, b));
    rls = adaptive::rls_step(rls, a, b).state;
    ASSERT_LT(max_abs_diff(state.new_block(), rls.estimate), 1e-9) << "measurement " << k;
  }
}

TEST(MeasurementUpdate, MaintainedInverseMatchesAccumulatedGram) {
  Gen gen(9);
  const Eigen::Index n = 3;
  const double delta = 1e-6;
  const Matrix a = gen.matrix(15, n);
  const auto old = old_problem(a, gen.vector(15), delta);
  const StateTransition trans(gen.matrix(n, n), gen.vector(n));
  auto state = augment(old.prior, trans, delta);
  Matrix gram = augmented_gram(old.gram, trans, delta);
  for (int k = 0; k < 95; ++k) {
    const auto row = AugmentedRow::measurement(gen.vector(n), gen.normal());
    state = measurement_update(state, row);
    gram += row.coeffs * row.coeffs.transpose();
  }
  EXPECT_LT(max_abs_diff(state.inverse, testing::oracle_inverse(gram)), 1e-6);
  EXPECT_TRUE(linalg::is_symmetric(state.inverse, 1e-9));
}

TEST(DiscardOldState, ExtractsTheNewBlock) {
  Gen gen(10);
  auto state = augment(Prior::empty(2), StateTransition::identity(2));
  for (int k = 0; k < 20; ++k) {
    state = measurement_update(state, AugmentedRow::measurement(gen.vector(2), gen.normal()));
  }
  const Prior prior = discard_old_state(state);
  EXPECT_EQ(prior.estimate, state.new_block());
  EXPECT_TRUE(linalg::is_symmetric(prior.inverse, 0.0));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(prior.inverse).eigenvalues().minCoeff(), 0.0);
  EXPECT_LT(max_abs_diff(prior.inverse * prior.rhs, prior.estimate), 1e-9);
}

TEST(DiscardOldState, NeedsAMeasurementSinceTheTransition) {
  const auto state = augment(Prior::empty(2), StateTransition::identity(2));
  try {
    discard_old_state(state);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnderdeterminedNewState);
  }
}

// Full-chain oracle for a scalar state: unknowns x0, x1, x2 with δ on each,
// measurement rows on one unknown and transition rows x_{t+1} − f·x_t = c.
struct Chain {
  Matrix gram = Matrix::Zero(3, 3);
  Vector rhs = Vector::Zero(3);
  void add(const Vector& row, double b) {
    gram += row * row.transpose();
    rhs += row * b;
  }
  Vector solve() const { return Eigen::FullPivLU<Matrix>(gram).solve(rhs); }
};

TEST(DiscardOldState, RoundTripMatchesTheFullChain) {
  Gen gen(11);
  const double delta = 1e-6;
  Chain chain;
  chain.gram = delta * Matrix::Identity(3, 3);

  const std::vector<std::pair<double, double>> transitions = {{0.9, 0.3}, {1.2, -0.5}};
  const auto measure = [&](Eigen::Index unknown, KalmanState& state) {
    for (int k = 0; k < 4; ++k) {
      const double a = gen.normal();
      const double b = 1.5 * a + 0.1 * gen.normal();
      state = measurement_update(state, AugmentedRow::measurement(Vector::Constant(1, a), b));
      chain.add(a * Vector::Unit(3, unknown), b);
    }
  };

  // Epoch 0 data lives on x0: feed it through an identity-free first step by
  // treating it as the prior.
  Matrix a0 = gen.matrix(6, 1);
  Vector b0 = 1.5 * a0.col(0) + 0.1 * gen.vector(6);
  Prior prior;
  {
    Matrix g = delta * Matrix::Identity(1, 1) + a0.transpose() * a0;
    prior.inverse = g.inverse();
    prior.rhs = a0.transpose() * b0;
    prior.estimate = prior.inverse * prior.rhs;
    for (Eigen::Index i = 0; i < 6; ++i) chain.add(a0(i, 0) * Vector::Unit(3, 0), b0(i));
  }

  Vector predicted_new;
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const auto [f, c] = transitions[t];
    const StateTransition trans(Matrix::Constant(1, 1, f), Vector::Constant(1, c));
    Vector row = Vector::Zero(3);
    row(static_cast<Eigen::Index>(t)) = -f;
    row(static_cast<Eigen::Index>(t) + 1) = 1.0;
    chain.add(row, c);

    auto state = augment(prior, trans, delta);
    predicted_new = predict(state, augmented_rhs(prior.rhs, trans));
    const Vector full = chain.solve();
    EXPECT_NEAR(predicted_new(1), full(static_cast<Eigen::Index>(t) + 1), 1e-6) << "epoch " << t;
    EXPECT_NEAR(state.new_block()(0), full(static_cast<Eigen::Index>(t) + 1), 1e-6);

    measure(static_cast<Eigen::Index>(t) + 1, state);
    EXPECT_NEAR(state.new_block()(0), chain.solve()(static_cast<Eigen::Index>(t) + 1), 1e-6);
    prior = discard_old_state(state);
  }
}

TEST(Tracking, ReaugmentedFilterFollowsAJump) {
  Gen gen(12);
  const double noise = 0.01;
  auto kalman_prior = Prior::empty(1);
  auto rls = adaptive::FilterState::for_rls(1);
  int kalman_hit = -1;
  int rls_hit = -1;
  for (int k = 0; k < 2000; ++k) {
    const bool after = k >= 50;
    const double truth = after ? 2.0 : 1.0;
    const double a = gen.normal();
    const double b = a * truth + noise * gen.normal();
    auto state = augment(kalman_prior, StateTransition::identity(1));
    state = measurement_update(state, AugmentedRow::measurement(Vector::Constant(1, a), b));
    kalman_prior = discard_old_state(state);
    rls = adaptive::rls_step(rls, Vector::Constant(1, a), b).state;
    if (!after) continue;
    const int since = k - 50 + 1;
    const auto sq = [&](double x) { return (x - truth) * (x - truth); };
    if (kalman_hit < 0 && sq(kalman_prior.estimate(0)) < 1e-4) kalman_hit = since;
    if (rls_hit < 0 && sq(rls.estimate(0)) < 1e-4) rls_hit = since;
  }
  ASSERT_GT(kalman_hit, 0);
  EXPECT_LE(kalman_hit, 12);
  EXPECT_TRUE(rls_hit < 0 || rls_hit >= 5 * kalman_hit) << "rls " << rls_hit;
}

}  // namespace
}  // namespace asp::kalman
