#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tpd/errors.hpp"
#include "tpd/kernels.hpp"

namespace tpd::kernels {

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

// Outer product of the directions over modes [first, last), flattened with the
// last mode fastest. Empty range gives {1}.
std::vector<double> mode_weights(const Shape& dims, std::span<const Vector> directions, Index first,
                                 Index last) {
  std::vector<double> w{1.0};
  for (Index m = first; m < last; ++m) {
    std::vector<double> next;
    next.reserve(w.size() * dims[m]);
    for (double a : w)
      for (Index j = 0; j < dims[m]; ++j) next.push_back(a * directions[m][static_cast<Eigen::Index>(j)]);
    w = std::move(next);
  }
  return w;
}

struct Weights {
  std::vector<double> outer;
  std::vector<double> inner;
  Index n;
};

Weights weights_for(const Shape& dims, std::span<const Vector> directions, Index free_mode) {
  check_directions(dims, directions, free_mode);
  return {mode_weights(dims, directions, 0, free_mode),
          mode_weights(dims, directions, free_mode + 1, dims.size()), dims[free_mode]};
}

void contract_into(std::span<const double> x, const Weights& w, double* out) {
  const Index inner = w.inner.size();
  for (Index j = 0; j < w.n; ++j) out[j] = 0.0;
  for (Index o = 0; o < w.outer.size(); ++o) {
    const double wo = w.outer[o];
    for (Index j = 0; j < w.n; ++j) {
      const double* src = x.data() + (o * w.n + j) * inner;
      double s = 0.0;
      for (Index i = 0; i < inner; ++i) s += src[i] * w.inner[i];
      out[j] += wo * s;
    }
  }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Vector project_tensor(const DenseTensor& x, std::span<const Vector> directions, Index free_mode) {
  const Weights w = weights_for(x.dims(), directions, free_mode);
  Vector out(static_cast<Eigen::Index>(w.n));
  contract_into(x.data(), w, out.data());
  return out;
}

Matrix project_members(const TensorSample& sample, std::span<const Vector> directions, Index free_mode) {
  const Weights w = weights_for(sample.shape(), directions, free_mode);
  const auto n = static_cast<long long>(sample.size());
  // Row-major scratch so each member writes a contiguous block.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, static_cast<Eigen::Index>(w.n));
  const std::size_t work = sample.size() * shape_size(sample.shape());
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (long long i = 0; i < n; ++i) {
    contract_into(sample[static_cast<Index>(i)].data(), w, out.data() + i * static_cast<long long>(w.n));
  }
  return out;
}

Moments moments(const Matrix& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index p = points.cols();
  if (n == 0) throw DomainError("moments of an empty point set");
  Vector mean(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += points(i, j);
    mean[j] = s / static_cast<double>(n);
  }
  Matrix centered = points.rowwise() - mean.transpose();
  Matrix cov(p, p);
  const std::size_t work = static_cast<std::size_t>(n * p * p);
#pragma omp parallel for schedule(dynamic, 1) if (work > kParallelThreshold)
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += centered(i, j) * centered(i, k);
      cov(j, k) = s / static_cast<double>(n);
      cov(k, j) = cov(j, k);
    }
  }
  return {std::move(mean), std::move(cov)};
}

Vector project_rows(const Matrix& points, const Vector& u) {
  if (points.cols() != u.size()) throw DimensionError("projection direction length mismatch");
  const Eigen::Index n = points.rows();
  Vector out(n);
  const std::size_t work = static_cast<std::size_t>(n * points.cols());
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = points.row(i).dot(u);
  return out;
}

}  // namespace tpd::kernels
