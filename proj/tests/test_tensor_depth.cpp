#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tpd/errors.hpp"
#include "tpd/tensor_depth.hpp"

using namespace tpd;

namespace {

constexpr auto kMean = LocationScaleKind::MeanStd;
constexpr auto kMed = LocationScaleKind::MedianMad;

TpdConfig restarts(Index r, std::uint64_t seed = 7) {
  TpdConfig cfg;
  cfg.restarts = r;
  cfg.init = InitPolicy::Random;
  cfg.seed = seed;
  return cfg;
}

TensorSample transform(const TensorSample& s, const Matrix& a, const Matrix& b, const Matrix& c) {
  std::vector<DenseTensor> out;
  for (const auto& m : s) out.push_back(DenseTensor::from_matrix(a * m.to_matrix() * b + c));
  return TensorSample(std::move(out));
}

TensorSample squeeze_last(const TensorSample& s) {
  std::vector<DenseTensor> out;
  for (const auto& m : s) out.push_back(m.reshaped({m.dim(0), m.dim(1)}));
  return TensorSample(std::move(out));
}

void expect_monotone(const std::vector<double>& t) {
  for (Index i = 1; i < t.size(); ++i) EXPECT_GE(t[i], t[i - 1] - 1e-10) << "step " << i;
}

}  // namespace

TEST(TpdMatrix, MeanQueryIsDeepest) {
  std::mt19937_64 rng(50);
  const TensorSample s = oracle::matrix_sample(40, 3, 2, rng);
  const TpdResult r = tpd_outlyingness_matrix(s.mean(), s, {});
  EXPECT_NEAR(r.outlyingness, 0.0, 1e-12);
  EXPECT_NEAR(r.depth.value(), 1.0, 1e-12);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.directions.size(), 2u);
}

TEST(TpdMatrix, ObjectiveMatchesOracleAtReturnedDirections) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const Index r = 2 + rng() % 4, c = 2 + rng() % 4;
    const TensorSample s = oracle::matrix_sample(60, r, c, rng);
    const DenseTensor x = oracle::gaussian_tensor({r, c}, rng);
    const TpdResult res = tpd_outlyingness_matrix(x, s, {});
    const double check =
        oracle::matrix_ratio(x, s, res.directions[0].coords(), res.directions[1].coords(), kMean);
    EXPECT_NEAR(check, res.outlyingness, 1e-9 * (1 + res.outlyingness));
    EXPECT_EQ(res.trajectory.back(), res.outlyingness);
    EXPECT_DOUBLE_EQ(res.depth.value(), 1.0 / (1.0 + res.outlyingness));
  }
}

TEST(TpdMatrix, SingleColumnReducesToVectorDepth) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 2 + rng() % 5;
    const TensorSample s = oracle::matrix_sample(10 * p, p, 1, rng);
    const DenseTensor x = oracle::gaussian_tensor({p, 1}, rng);
    const double tpd = tpd_outlyingness_matrix(x, s, {}).outlyingness;
    const double rpd = oracle::vectorized_mahalanobis(x, s);
    EXPECT_NEAR(tpd, rpd, 1e-9 * (1 + rpd));
  }
}

TEST(TpdMatrix, BoundedByVectorizedDepth) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    const TensorSample s = oracle::matrix_sample(20, 3, 2, rng);
    const DenseTensor x = oracle::gaussian_tensor({3, 2}, rng);
    const double tpd = tpd_outlyingness_matrix(x, s, {}).outlyingness;
    EXPECT_LE(tpd, oracle::vectorized_mahalanobis(x, s) + 1e-9);
  }
}

TEST(TpdMatrix, NotConvergedWhenSweepsRunOut) {
  std::mt19937_64 rng(54);
  const TensorSample s = oracle::matrix_sample(50, 4, 4, rng);
  const DenseTensor x = oracle::gaussian_tensor({4, 4}, rng);
  TpdConfig cfg;
  cfg.max_iter = 1;
  const TpdResult r = tpd_outlyingness_matrix(x, s, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.trajectory.size(), 2u);
  EXPECT_GT(r.outlyingness, 0.0);
}

TEST(TpdMatrix, RankDeficientSubproblemSuggestsTensorPca) {
  std::mt19937_64 rng(55);
  // Fewer members than rows: X_i v lives in an (n-1)-dimensional space.
  const TensorSample s = oracle::matrix_sample(3, 5, 2, rng);
  const DenseTensor x = oracle::gaussian_tensor({5, 2}, rng);
  try {
    tpd_outlyingness_matrix(x, s, {});
    FAIL() << "expected RankDeficiencyError";
  } catch (const RankDeficiencyError& e) {
    EXPECT_NE(std::string(e.what()).find("--tensor-pca"), std::string::npos) << e.what();
    EXPECT_GE(e.deficient_dims(), 1u);
  }
}

TEST(TpdMatrix, ShapeErrors) {
  std::mt19937_64 rng(56);
  const TensorSample s = oracle::matrix_sample(10, 2, 2, rng);
  EXPECT_THROW(tpd_outlyingness_matrix(DenseTensor(Shape{2, 3}), s, {}), DimensionError);
  EXPECT_THROW(tpd_outlyingness_matrix(DenseTensor(Shape{4}), s, {}), DimensionError);
  TpdConfig bad;
  bad.tol = 0.0;
  EXPECT_THROW(tpd_outlyingness_matrix(s.mean(), s, bad), DomainError);
  bad = {};
  bad.restarts = 0;
  EXPECT_THROW(tpd_outlyingness_matrix(s.mean(), s, bad), DomainError);
}

TEST(TpdOrderK, AgreesWithMatrixSolver) {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 30; ++trial) {
    const Index r = 2 + rng() % 4, c = 2 + rng() % 4;
    const TensorSample s = oracle::matrix_sample(40, r, c, rng);
    const DenseTensor x = oracle::gaussian_tensor({r, c}, rng);
    const TpdConfig cfg = restarts(1 + trial % 3);
    const TpdResult a = tpd_outlyingness_matrix(x, s, cfg);
    const TpdResult b = tpd_outlyingness_order_k(x, s, cfg);
    EXPECT_NEAR(a.outlyingness, b.outlyingness, 1e-9 * (1 + a.outlyingness));
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(TpdOrderK, TrailingSingletonModeMatchesMatrix) {
  std::mt19937_64 rng(58);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r = 2 + rng() % 3, c = 2 + rng() % 3;
    const TensorSample s3 = oracle::tensor_sample(50, {r, c, 1}, rng);
    const DenseTensor x3 = oracle::gaussian_tensor({r, c, 1}, rng);
    const double a = tpd_outlyingness_order_k(x3, s3, {}).outlyingness;
    const double b = tpd_outlyingness_matrix(x3.reshaped({r, c}), squeeze_last(s3), {}).outlyingness;
    EXPECT_NEAR(a, b, 1e-9 * (1 + b));
  }
}

TEST(TpdOrderK, MeanIsZeroAndDispatch) {
  std::mt19937_64 rng(59);
  const TensorSample s = oracle::tensor_sample(60, {2, 3, 2}, rng);
  EXPECT_NEAR(tpd_outlyingness(s.mean(), s, {}).outlyingness, 0.0, 1e-12);
  const DenseTensor x = oracle::gaussian_tensor({2, 3, 2}, rng);
  EXPECT_EQ(tpd_outlyingness(x, s, {}).outlyingness, tpd_outlyingness_order_k(x, s, {}).outlyingness);
  const TpdResult r = tpd_outlyingness(x, s, {});
  ASSERT_EQ(r.directions.size(), 3u);
  for (Index m = 0; m < 3; ++m) EXPECT_EQ(r.directions[m].dimension(), s.shape()[m]);
}

TEST(TpdOrderK, OrderOneFallsBackToVectorDepth) {
  std::mt19937_64 rng(60);
  const Matrix pts = oracle::correlated_points(30, 3, rng);
  std::vector<DenseTensor> members;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) members.push_back(DenseTensor::from_vector(pts.row(i).transpose()));
  const TensorSample s(std::move(members));
  const Vector x = oracle::gaussian_vector(3, rng);
  EXPECT_NEAR(tpd_outlyingness(DenseTensor::from_vector(x), s, {}).outlyingness, oracle::mahalanobis(x, pts), 1e-9);
}

TEST(TpdDepth, Formula) {
  std::mt19937_64 rng(61);
  const TensorSample s = oracle::matrix_sample(30, 2, 2, rng);
  const DenseTensor x = oracle::gaussian_tensor({2, 2}, rng);
  const double o = tpd_outlyingness(x, s, {}).outlyingness;
  EXPECT_DOUBLE_EQ(tpd_depth(x, s, {}).value(), 1.0 / (1.0 + o));
  EXPECT_NEAR(tpd_depth(s.mean(), s, {}).value(), 1.0, 1e-12);
}

TEST(TpdDepth, CenterOfSymmetricSampleIsDeepest) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    // Centrally symmetric: every member appears together with its reflection.
    const TensorSample half = oracle::matrix_sample(15, 3, 2, rng);
    const DenseTensor center = oracle::gaussian_tensor({3, 2}, rng);
    std::vector<DenseTensor> members;
    for (const auto& m : half) {
      const Matrix d = m.to_matrix() - half.mean().to_matrix();
      members.push_back(DenseTensor::from_matrix(center.to_matrix() + d));
      members.push_back(DenseTensor::from_matrix(center.to_matrix() - d));
    }
    const TensorSample s(std::move(members));
    const double at_center = tpd_depth(center, s, {}).value();
    EXPECT_NEAR(at_center, 1.0, 1e-12);
    for (int probe = 0; probe < 100; ++probe) {
      EXPECT_LE(tpd_depth(oracle::gaussian_tensor({3, 2}, rng), s, {}).value(), at_center);
    }
  }
}

TEST(TpdMedmad, TrajectoryMonotoneAndFlaggedApproximate) {
  std::mt19937_64 rng(63);
  TpdConfig cfg;
  cfg.kind = kMed;
  cfg.search.directions = 64;
  cfg.search.refine_steps = 16;
  for (int trial = 0; trial < 10; ++trial) {
    const TensorSample s = oracle::matrix_sample(31, 3, 3, rng);
    const DenseTensor x = oracle::gaussian_tensor({3, 3}, rng);
    const TpdResult r = tpd_outlyingness_matrix(x, s, cfg);
    EXPECT_TRUE(r.approximate);
    expect_monotone(r.trajectory);
    EXPECT_NEAR(oracle::matrix_ratio(x, s, r.directions[0].coords(), r.directions[1].coords(), kMed), r.outlyingness,
                1e-9 * (1 + r.outlyingness));
  }
}

TEST(TpdMedmad, InfiniteWhenProjectionHasNoSpread) {
  // Column 0 is the same in every member, so v = e_0 leaves no spread for any u.
  std::mt19937_64 rng(64);
  std::vector<DenseTensor> members;
  for (int i = 0; i < 11; ++i) {
    DenseTensor t = oracle::gaussian_tensor({2, 2}, rng);
    t({0, 0}) = 1.0;
    t({1, 0}) = -2.0;
    members.push_back(t);
  }
  const TensorSample s(std::move(members));
  DenseTensor x = s.mean();
  x({0, 0}) = 5.0;
  x({1, 0}) = 3.0;
  TpdConfig cfg;
  cfg.kind = kMed;
  cfg.init = InitPolicy::Random;
  cfg.restarts = 4;
  const TpdResult r = tpd_outlyingness_matrix(x, s, cfg);
  EXPECT_TRUE(std::isinf(r.outlyingness));
  EXPECT_EQ(r.depth.value(), 0.0);
}

TEST(TpdRestarts, DeterministicAndBestWins) {
  std::mt19937_64 rng(65);
  const TensorSample s = oracle::matrix_sample(40, 4, 3, rng);
  const DenseTensor x = oracle::gaussian_tensor({4, 3}, rng);
  const TpdResult a = tpd_outlyingness_matrix(x, s, restarts(6));
  const TpdResult b = tpd_outlyingness_matrix(x, s, restarts(6));
  EXPECT_EQ(a.outlyingness, b.outlyingness);
  EXPECT_EQ(a.best_restart, b.best_restart);
  for (Index m = 0; m < 2; ++m) EXPECT_EQ(a.directions[m].coords(), b.directions[m].coords());
  for (Index r = 1; r <= 6; ++r) EXPECT_GE(a.outlyingness, tpd_outlyingness_matrix(x, s, restarts(r)).outlyingness);
}

TEST(TpdRestarts, DirectionsAreSignCanonical) {
  std::mt19937_64 rng(66);
  const TensorSample s = oracle::matrix_sample(40, 3, 3, rng);
  const TpdResult r = tpd_outlyingness_matrix(oracle::gaussian_tensor({3, 3}, rng), s, restarts(4));
  for (const auto& d : r.directions) {
    for (Index j = 0; j < d.dimension(); ++j) {
      if (std::abs(d[j]) > 1e-12) {
        EXPECT_GT(d[j], 0.0);
        break;
      }
    }
  }
}

// ---- properties ----

TEST(TpdProperties, TrajectoriesNeverDecrease) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 100; ++trial) {
    Shape dims{2 + rng() % 5, 1 + rng() % 5};
    if (trial % 4 == 3) dims.push_back(2 + rng() % 3);
    const TensorSample s = oracle::tensor_sample(100, dims, rng);
    const DenseTensor x = oracle::gaussian_tensor(dims, rng);
    const TpdResult r = tpd_outlyingness(x, s, restarts(1 + trial % 2, trial));
    expect_monotone(r.trajectory);
    EXPECT_TRUE(r.converged);
  }
}

TEST(TpdProperties, AffineInvariance) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const Index r = 2 + rng() % 3, c = 2 + rng() % 3;
    const TensorSample s = oracle::matrix_sample(60, r, c, rng);
    const DenseTensor x = oracle::gaussian_tensor({r, c}, rng);
    const Matrix a = oracle::well_conditioned(r, rng), b = oracle::well_conditioned(c, rng);
    const Matrix shift = oracle::gaussian_matrix(r, c, rng);
    const double before = tpd_depth(x, s, restarts(8)).value();
    const DenseTensor moved = DenseTensor::from_matrix(a * x.to_matrix() * b + shift);
    const double after = tpd_depth(moved, transform(s, a, b, shift), restarts(8)).value();
    EXPECT_NEAR(before, after, 1e-6);
  }
}

TEST(TpdProperties, ConvexOutlyingness) {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const TensorSample s = oracle::matrix_sample(50, 3, 2, rng);
    const DenseTensor x1 = oracle::gaussian_tensor({3, 2}, rng), x2 = oracle::gaussian_tensor({3, 2}, rng);
    const double lambda = unif(rng);
    const DenseTensor mid = DenseTensor::from_matrix((1 - lambda) * x1.to_matrix() + lambda * x2.to_matrix());
    const auto o = [&](const DenseTensor& x) { return tpd_outlyingness(x, s, restarts(8)).outlyingness; };
    EXPECT_LE(o(mid), (1 - lambda) * o(x1) + lambda * o(x2) + 1e-6);
  }
}

TEST(TpdProperties, MonotoneAlongRaysAndVanishing) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const TensorSample s = oracle::matrix_sample(50, 3, 3, rng);
    const Matrix center = s.mean().to_matrix();
    Matrix d = oracle::gaussian_matrix(3, 3, rng);
    d /= d.norm();
    double previous = 2.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0, 1e3}) {
      const double depth = tpd_depth(DenseTensor::from_matrix(center + t * d), s, restarts(8)).value();
      EXPECT_LE(depth, previous + 1e-9);
      previous = depth;
    }
    EXPECT_LT(previous, 0.1);
  }
}

// A restart that ends below the best one is still a fixed point of the
// alternation: no single-mode update can improve it.
TEST(TpdProperties, EveryConvergedRestartIsStationary) {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r = 2 + rng() % 4, c = 2 + rng() % 4;
    const TensorSample s = oracle::matrix_sample(80, r, c, rng);
    const DenseTensor x = oracle::gaussian_tensor({r, c}, rng);
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      const TpdResult res = tpd_outlyingness_matrix(x, s, restarts(1, seed));
      ASSERT_TRUE(res.converged);
      const Vector u = res.directions[0].coords(), v = res.directions[1].coords();
      // Best u for this v and best v for this u, by the Mahalanobis oracle.
      Matrix rows_u(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(r));
      Matrix rows_v(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(c));
      for (Index i = 0; i < s.size(); ++i) {
        rows_u.row(static_cast<Eigen::Index>(i)) = (s[i].to_matrix() * v).transpose();
        rows_v.row(static_cast<Eigen::Index>(i)) = (s[i].to_matrix().transpose() * u).transpose();
      }
      const double best_u = oracle::mahalanobis(x.to_matrix() * v, rows_u);
      const double best_v = oracle::mahalanobis(x.to_matrix().transpose() * u, rows_v);
      EXPECT_NEAR(best_u, res.outlyingness, 1e-6 * res.outlyingness);
      EXPECT_NEAR(best_v, res.outlyingness, 1e-6 * res.outlyingness);
    }
  }
}

TEST(TpdProperties, RestartStabilityForRayleighInstances) {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r = 2 + rng() % 4, c = 2 + rng() % 4;
    const TensorSample s = oracle::matrix_sample(80, r, c, rng);
    const DenseTensor x = oracle::gaussian_tensor({r, c}, rng);
    double lo = INFINITY, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      const double o = tpd_outlyingness_matrix(x, s, restarts(1, seed)).outlyingness;
      lo = std::min(lo, o);
      hi = std::max(hi, o);
    }
    EXPECT_LE(hi - lo, 1e-6 * hi) << "trial " << trial << " shape " << r << "x" << c;
  }
}
