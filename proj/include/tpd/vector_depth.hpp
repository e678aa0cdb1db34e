#pragma once

// Projection depth of vectors.
//
// outlyingness  O(x, F) = sup_{|u|=1} |u'x - mu(F_u)| / sigma(F_u)
// depth         PD(x, F) = 1 / (1 + O(x, F))
//
// With (mean, std) the supremum is the Mahalanobis distance, attained at
// u ~ B^{-1}(x - mean); it is computed exactly by a Cholesky solve. With
// (median, MAD) the supremum has no closed form and is approximated by a
// budgeted direction search that returns a lower bound.

#include <cstdint>
#include <optional>

#include "tpd/location_scale.hpp"
#include "tpd/tensor.hpp"

namespace tpd {

/// Relative eigenvalue cutoff used for every rank decision in the library.
inline constexpr double kRankCutoff = 1e-10;

struct OutlyingnessResult {
  double value;  // >= 0, may be +infinity
  UnitVector direction;
};

class DepthValue {
 public:
  /// 1 / (1 + outlyingness); +infinity maps to 0.
  static DepthValue from_outlyingness(double outlyingness);

  double value() const noexcept { return depth_; }

 private:
  explicit DepthValue(double d) : depth_(d) {}
  double depth_;
};

/// n points in R^p (rows of `points`) with eagerly cached mean, population
/// covariance B, its eigendecomposition and, when B is positive definite, its
/// Cholesky factor. Immutable after construction.
class VectorSample {
 public:
  explicit VectorSample(Matrix points);

  Index size() const noexcept { return static_cast<Index>(points_.rows()); }
  Index dimension() const noexcept { return static_cast<Index>(points_.cols()); }
  const Matrix& points() const noexcept { return points_; }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }

  /// Eigenvalues in descending order; columns of eigenvectors() match.
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }

  /// Number of eigenvalues above kRankCutoff * lambda_max (0 for a degenerate sample).
  Index rank() const noexcept { return rank_; }
  bool positive_definite() const noexcept { return rank_ == dimension(); }
  /// True when the covariance vanishes to rounding (all points coincide).
  bool degenerate() const noexcept { return degenerate_; }

  /// Solves B z = rhs. Throws RankDeficiencyError if B is not positive definite.
  Vector solve(const Vector& rhs) const;

 private:
  Matrix points_;
  Vector mean_;
  Matrix covariance_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Eigen::LLT<Matrix> cholesky_;
  Index rank_ = 0;
  bool degenerate_ = false;
};

/// Exact (mean, std) outlyingness. Requires a positive definite covariance;
/// otherwise throws RankDeficiencyError naming the deficient dimension count.
OutlyingnessResult rayleigh_outlyingness(const Vector& x, const VectorSample& sample);

/// Controls for the (median, MAD) direction search.
struct SearchBudget {
  Index directions = 512;    // uniform random directions on the sphere
  Index refine_steps = 64;   // coordinate-wise refinement steps per start
  Index refine_best = 8;     // number of best candidates refined
  std::uint64_t seed = 0x5eed;
  /// Evaluated first; the result is never worse than this direction.
  std::optional<Vector> warm_start;
};

/// Best-found value of |u'x - Med(F_u)| / MAD(F_u); a lower bound on the
/// supremum. A direction where numerator and MAD both vanish contributes 0; a
/// direction with MAD = 0 and a nonzero numerator returns +infinity at once.
OutlyingnessResult approx_outlyingness_medmad(const Vector& x, const VectorSample& sample,
                                              const SearchBudget& budget = {});

/// Value of the outlyingness ratio for one direction (the 0/0 = 0 and c/0 =
/// +infinity conventions applied).
double directional_outlyingness(const Vector& x, const VectorSample& sample, const Vector& u,
                                LocationScaleKind kind);

OutlyingnessResult outlyingness(const Vector& x, const VectorSample& sample, LocationScaleKind kind,
                                const SearchBudget& budget = {});

DepthValue projection_depth(const Vector& x, const VectorSample& sample, LocationScaleKind kind,
                            const SearchBudget& budget = {});

/// Principal subspace of a sample: eigenvectors of B whose eigenvalue exceeds
/// kRankCutoff * lambda_max.
class VectorPcaModel {
 public:
  /// Throws DegenerateSampleError when the covariance is zero.
  explicit VectorPcaModel(const VectorSample& sample);

  const Matrix& basis() const noexcept { return basis_; }  // p x r, orthonormal columns
  Index rank() const noexcept { return static_cast<Index>(basis_.cols()); }

  Vector transform(const Vector& x) const;
  Matrix transform_rows(const Matrix& points) const;

 private:
  Matrix basis_;
};

struct PcaProjection {
  VectorSample sample;
  Vector x;
  Matrix basis;
};

/// Projects the sample and the query onto the sample's nonzero principal
/// subspace; the components of x in the discarded null space are dropped.
PcaProjection pca_project(const VectorSample& sample, const Vector& x);

}  // namespace tpd
