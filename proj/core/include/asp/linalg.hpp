#pragma once

// Dense kernels shared by every estimator in the library: rank-1 inverse
// updates, symmetric eigendecomposition, pseudoinverses, and small direct
// solves. Sizes are desk scale (n <= 256); storage is plain Eigen.

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace asp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Multiply-accumulate tally. One MAC per scalar multiply-add, one per
/// scalar divide or subtraction that the counting convention names.
struct MacCounter {
  std::uint64_t count = 0;

  void add(std::uint64_t macs) noexcept { count += macs; }
};

namespace linalg {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kDenominatorTol = 1e-12;
inline constexpr double kDefaultRankTol = 1e-10;
/// AᵀA (or AAᵀ) counts as invertible when λ_min > kInvertibleRatio·λ_max.
inline constexpr double kInvertibleRatio = 1e-12;

void require_finite(const Vector& v, std::string_view what);
void require_finite(const Matrix& m, std::string_view what);

/// |S(i,j) − S(j,i)| <= tol·max(1, |S(i,j)|) for every pair.
bool is_symmetric(const Matrix& s, double tol = kSymmetryTol);

/// Returns (S + Sᵀ)/2.
Matrix symmetrized(const Matrix& s);

/// A·x = b with A m×n and b of length m. Entries are checked finite.
class LinearSystem {
 public:
  LinearSystem(Matrix a, Vector b);

  const Matrix& A() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }
  Eigen::Index rows() const noexcept { return a_.rows(); }
  Eigen::Index cols() const noexcept { return a_.cols(); }

  /// Row i of A as a column vector.
  Vector row(Eigen::Index i) const { return a_.row(i).transpose(); }

 private:
  Matrix a_;
  Vector b_;
};

struct EigenDecomposition {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i pairs with eigenvalues(i)
};

/// (M + u·uᵀ)⁻¹ given inverse = M⁻¹, in O(n²):
///   inverse − (inverse·u)(inverse·u)ᵀ / (1 + uᵀ·inverse·u).
/// The result is re-symmetrized. Throws DenominatorNearZero when
/// 1 + uᵀ·inverse·u <= tol and NotSymmetric for an asymmetric input.
Matrix sherman_morrison_update(const Matrix& inverse, const Vector& u,
                               double tol = kDenominatorTol, MacCounter* macs = nullptr);

struct RankOneFold {
  Matrix inverse;  // the updated inverse
  Vector gain;     // updated inverse · u
};

/// sherman_morrison_update that also returns the gain, formed as
/// inverse·u / (1 + uᵀ·inverse·u) from the products the lemma already needs.
/// This equals updated·u but avoids the cancellation in the updated matrix
/// when the starting inverse is large (small δ).
RankOneFold sherman_morrison_fold(const Matrix& inverse, const Vector& u,
                                  double tol = kDenominatorTol, MacCounter* macs = nullptr);

/// Cyclic Jacobi eigensolver for symmetric input. Stops when the
/// off-diagonal Frobenius norm drops below 1e-12·‖S‖_F (max 100 sweeps).
EigenDecomposition symmetric_eigendecompose(const Matrix& s);

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix: eigenvalues above
/// rank_tol·λ_max are inverted, the rest are left at zero.
Matrix pinv_psd(const Matrix& s, double rank_tol = kDefaultRankTol);

/// Least-squares solution of an over-determined (or square) system via
/// AᵀA·x = Aᵀb. Throws RankDeficient when AᵀA is numerically singular.
Vector solve_normal_equations(const LinearSystem& sys);

/// Aᵀ(AAᵀ)⁻¹·v: the minimum-norm solution of A·x = v for wide A.
Vector underdetermined_apply(const Matrix& a, const Vector& v, MacCounter* macs = nullptr);

/// Gaussian elimination with partial pivoting. Throws RankDeficient when a
/// pivot falls below 1e-14 times the largest entry of the input.
Vector solve_dense(const Matrix& a, const Vector& b, MacCounter* macs = nullptr);

/// Dense inverse by Gaussian elimination with partial pivoting.
Matrix inverse_dense(const Matrix& a);

/// Throws RankDeficient unless the symmetric PSD matrix passes the
/// λ_min > kInvertibleRatio·λ_max check.
void require_invertible_gram(const Matrix& gram, std::string_view what);

// Counted primitives. Each adds its MAC cost to `macs` when non-null.
double dot(const Vector& a, const Vector& b, MacCounter* macs = nullptr);
Vector matvec(const Matrix& m, const Vector& v, MacCounter* macs = nullptr);

}  // namespace linalg
}  // namespace asp
