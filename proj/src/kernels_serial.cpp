#include <string>

#include "tpd/errors.hpp"
#include "tpd/kernels.hpp"

namespace tpd::kernels::reference {

namespace {

void check_directions(const Shape& dims, std::span<const Vector> directions, Index free_mode) {
  if (directions.size() != dims.size()) throw DimensionError("one direction per mode is required");
  if (free_mode >= dims.size()) throw DimensionError("free mode out of range");
  for (Index m = 0; m < dims.size(); ++m) {
    if (m != free_mode && static_cast<Index>(directions[m].size()) != dims[m]) {
      throw DimensionError("direction for mode " + std::to_string(m) + " has the wrong length");
    }
  }
}

}  // namespace

Vector project_tensor(const DenseTensor& x, std::span<const Vector> directions, Index free_mode) {
  check_directions(x.dims(), directions, free_mode);
  // Contract the highest modes first so the free mode keeps its position.
  DenseTensor t = x;
  for (Index m = x.order(); m-- > 0;) {
    if (m == free_mode) continue;
    t = mode_contract(t, m, directions[m]);
  }
  return vectorize_eigen(t);
}

Matrix project_members(const TensorSample& sample, std::span<const Vector> directions, Index free_mode) {
  check_directions(sample.shape(), directions, free_mode);
  const auto n = static_cast<Eigen::Index>(sample.size());
  Matrix out(n, static_cast<Eigen::Index>(sample.shape()[free_mode]));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i) = project_tensor(sample[static_cast<Index>(i)], directions, free_mode).transpose();
  }
  return out;
}

Moments moments(const Matrix& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index p = points.cols();
  if (n == 0) throw DomainError("moments of an empty point set");
  Vector mean = Vector::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) mean[j] += points(i, j);
  mean /= static_cast<double>(n);

  Matrix cov = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double dj = points(i, j) - mean[j];
      for (Eigen::Index k = 0; k < p; ++k) cov(j, k) += dj * (points(i, k) - mean[k]);
    }
  }
  cov /= static_cast<double>(n);
  return {std::move(mean), std::move(cov)};
}

Vector project_rows(const Matrix& points, const Vector& u) {
  if (points.cols() != u.size()) throw DimensionError("projection direction length mismatch");
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) s += points(i, j) * u[j];
    out[i] = s;
  }
  return out;
}

}  // namespace tpd::kernels::reference
