#pragma once

// Tensor PCA: removes the null space of a tensor sample mode by mode so that
// the covariances seen by the TPD sub-problems are positive definite.
//
// For matrices, with M the sample mean,
//   M_V = sum_i (X_i - M)(X_i - M)^T      (n1 x n1, row space)
//   M_U = sum_i (X_i - M)^T (X_i - M)     (n2 x n2, column space)
// and each X is mapped to V_r1^T X U_r2 where V_r1, U_r2 hold the leading
// eigenvectors. Observations are mapped uncentered.
//
// For order k > 2 the same is done with the scatter of every mode-l
// unfolding, which reduces to M_V and M_U for k = 2.

#include <vector>

#include "json.hpp"
#include "tpd/tensor.hpp"

namespace tpd {

struct TensorPcaOptions {
  double rank_cutoff = 1e-10;  // relative to the largest eigenvalue of each scatter
  /// Caps every rank at n - 1, the number of centered degrees of freedom, so
  /// the reduced covariances can be positive definite at all.
  bool cap_at_sample_dof = true;
};

class TensorPcaModel {
 public:
  TensorPcaModel(DenseTensor mean, std::vector<Matrix> bases, std::vector<Vector> eigenvalues);

  const DenseTensor& mean() const noexcept { return mean_; }
  const Shape& input_shape() const noexcept { return mean_.dims(); }
  Shape output_shape() const;
  /// Orthonormal n_l x r_l basis for mode l.
  const Matrix& basis(Index mode) const { return bases_.at(mode); }
  const std::vector<Matrix>& bases() const noexcept { return bases_; }
  /// Retained eigenvalues (descending) of the mode-l scatter.
  const Vector& eigenvalues(Index mode) const { return eigenvalues_.at(mode); }
  std::vector<Index> ranks() const;

  /// Matrix naming: V_r1 and U_r2.
  const Matrix& left_basis() const { return basis(0); }
  const Matrix& right_basis() const { return basis(1); }

  /// X x_1 B_1^T x_2 ... x_k B_k^T; for matrices V^T X U.
  DenseTensor transform(const DenseTensor& x) const;
  TensorSample transform(const TensorSample& sample) const;

  nlohmann::json to_json() const;
  static TensorPcaModel from_json(const nlohmann::json& doc);

 private:
  DenseTensor mean_;
  std::vector<Matrix> bases_;
  std::vector<Vector> eigenvalues_;
};

/// Throws DimensionError for n < 2 and DegenerateSampleError when all members coincide.
TensorPcaModel fit_tensor_pca(const TensorSample& sample, const TensorPcaOptions& options = {});

DenseTensor transform(const TensorPcaModel& model, const DenseTensor& x);

struct TensorPcaFit {
  TensorPcaModel model;
  TensorSample transformed;
};

TensorPcaFit fit_transform(const TensorSample& sample, const TensorPcaOptions& options = {});

/// Mode-l scatter sum_i unfold(X_i - M, l) unfold(X_i - M, l)^T.
Matrix mode_scatter(const TensorSample& sample, Index mode);

}  // namespace tpd
