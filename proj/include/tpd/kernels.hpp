#pragma once

// Data-parallel inner loops shared by the depth solvers.
//
// Every kernel exists twice:
//   tpd::kernels::reference  plain serial loops, written for readability and
//                            kept as the test oracle for the parallel path;
//   tpd::kernels             fused loops parallelised with OpenMP once the
//                            work exceeds `kParallelThreshold` flops.
// The two agree to rounding (1e-12 relative in tests); the parallel kernels
// are deterministic for a fixed input regardless of thread count because no
// reduction crosses threads.

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#include "tpd/tensor.hpp"

namespace tpd::kernels {

inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 14;

struct Moments {
  Vector mean;
  Matrix covariance;  // population (1/n) normalisation
};

/// Row i is member i contracted with `directions[m]` on every mode m except
/// `free_mode`; directions[free_mode] is ignored. Result: n x dims[free_mode].
Matrix project_members(const TensorSample& sample, std::span<const Vector> directions, Index free_mode);

/// Same contraction applied to a single tensor.
Vector project_tensor(const DenseTensor& x, std::span<const Vector> directions, Index free_mode);

/// Mean and population covariance of the rows of `points` (n x p).
Moments moments(const Matrix& points);

/// points * u, one projection per row.
Vector project_rows(const Matrix& points, const Vector& u);

namespace reference {

Matrix project_members(const TensorSample& sample, std::span<const Vector> directions, Index free_mode);
Vector project_tensor(const DenseTensor& x, std::span<const Vector> directions, Index free_mode);
Moments moments(const Matrix& points);
Vector project_rows(const Matrix& points, const Vector& u);

}  // namespace reference

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

/// Runs fn(i) for i in [0, count) across OpenMP threads. If iterations
/// throw, the exception from the lowest failing index is rethrown on the
/// calling thread after the loop, so failures are reported deterministically.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  std::exception_ptr failure;
  long long failed_at = -1;
  std::mutex guard;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (failed_at < 0 || i < failed_at) {
        failed_at = i;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tpd::kernels
