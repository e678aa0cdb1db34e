#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <stdexcept>

#include "support/oracles.hpp"
#include "tpd/kernels.hpp"

using namespace tpd;

namespace {

double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

std::vector<Vector> directions_for(const Shape& dims, std::mt19937_64& rng) {
  std::vector<Vector> dirs;
  for (Index d : dims) dirs.push_back(oracle::random_unit(d, rng));
  return dirs;
}

}  // namespace

// Sizes straddle kParallelThreshold so both the serial fallback and the
// OpenMP branch are exercised.
TEST(Kernels, ProjectMembersMatchesReference) {
  std::mt19937_64 rng(200);
  for (const Shape& dims : {Shape{3, 2}, Shape{8, 8}, Shape{4, 3, 5}, Shape{16, 16, 4}}) {
    for (Index n : {Index{5}, Index{400}}) {
      const TensorSample s = oracle::tensor_sample(n, dims, rng);
      const auto dirs = directions_for(dims, rng);
      for (Index mode = 0; mode < dims.size(); ++mode) {
        const Matrix got = kernels::project_members(s, dirs, mode);
        const Matrix want = kernels::reference::project_members(s, dirs, mode);
        ASSERT_EQ(got.rows(), static_cast<Eigen::Index>(n));
        ASSERT_EQ(got.cols(), static_cast<Eigen::Index>(dims[mode]));
        EXPECT_LT(rel_diff(got, want), 1e-12);
      }
    }
  }
}

TEST(Kernels, ReferenceProjectionMatchesExplicitContraction) {
  std::mt19937_64 rng(201);
  const Shape dims{3, 4, 2};
  const DenseTensor x = oracle::gaussian_tensor(dims, rng);
  const auto dirs = directions_for(dims, rng);
  // Free mode 1: contract mode 2 first, then mode 0.
  const DenseTensor t = oracle::contract(oracle::contract(x, 2, dirs[2]), 0, dirs[0]);
  const Vector want = vectorize_eigen(t);
  EXPECT_LT((kernels::reference::project_tensor(x, dirs, 1) - want).norm(), 1e-13);
  EXPECT_LT((kernels::project_tensor(x, dirs, 1) - want).norm(), 1e-13);
}

TEST(Kernels, MomentsMatchReference) {
  std::mt19937_64 rng(202);
  for (Index n : {Index{3}, Index{50}, Index{3000}}) {
    const Matrix pts = oracle::correlated_points(n, 7, rng);
    const kernels::Moments got = kernels::moments(pts), want = kernels::reference::moments(pts);
    EXPECT_LT(rel_diff(got.mean, want.mean), 1e-12);
    EXPECT_LT(rel_diff(got.covariance, want.covariance), 1e-12);
    // Population normalisation.
    const Matrix c = pts.rowwise() - pts.colwise().mean();
    EXPECT_LT(rel_diff(got.covariance, c.transpose() * c / static_cast<double>(n)), 1e-12);
  }
}

TEST(Kernels, ProjectRowsMatchesReference) {
  std::mt19937_64 rng(203);
  for (Index n : {Index{4}, Index{5000}}) {
    const Matrix pts = oracle::gaussian_matrix(n, 6, rng);
    const Vector u = oracle::random_unit(6, rng);
    EXPECT_LT(rel_diff(kernels::project_rows(pts, u), kernels::reference::project_rows(pts, u)), 1e-12);
  }
}

TEST(Kernels, ParallelResultsAreRepeatable) {
  std::mt19937_64 rng(204);
  const TensorSample s = oracle::tensor_sample(300, {12, 10}, rng);
  const auto dirs = directions_for({12, 10}, rng);
  const Matrix a = kernels::project_members(s, dirs, 0), b = kernels::project_members(s, dirs, 0);
  EXPECT_EQ(a, b);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  kernels::parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_GE(kernels::max_threads(), 1);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    kernels::parallel_for(100, [](std::size_t i) {
      if (i == 91 || i == 17 || i == 40) throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "index 17");
  }
  EXPECT_NO_THROW(kernels::parallel_for(0, [](std::size_t) { throw std::runtime_error("never"); }));
}
