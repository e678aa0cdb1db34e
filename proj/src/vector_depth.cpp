#include "tpd/vector_depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tpd/errors.hpp"
#include "tpd/kernels.hpp"
#include "tpd/random.hpp"

namespace tpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ratio with the 0/0 = 0 and c/0 = +inf conventions; `reference` sets the
// magnitude below which numerator and scale count as zero.
double guarded_ratio(double numerator, double scale, double reference) {
  const double tol = 1e-12 * reference;
  if (scale <= tol) return numerator <= tol ? 0.0 : kInf;
  return numerator / scale;
}

double max_abs(const Vector& y) { return y.size() ? y.cwiseAbs().maxCoeff() : 0.0; }

double medmad_ratio(const Vector& projected, double xu) {
  std::vector<double> buf(projected.data(), projected.data() + projected.size());
  const LocationScale ls = location_scale(buf, LocationScaleKind::MedianMad);
  const double reference = std::max(max_abs(projected), std::abs(xu));
  return guarded_ratio(std::abs(xu - ls.location), ls.scale, reference);
}

}  // namespace

DepthValue DepthValue::from_outlyingness(double o) {
  if (std::isnan(o) || o < 0.0) throw DomainError("outlyingness must be a non-negative number");
  if (std::isinf(o)) return DepthValue(0.0);
  return DepthValue(1.0 / (1.0 + o));
}

VectorSample::VectorSample(Matrix points) : points_(std::move(points)) {
  if (points_.rows() == 0 || points_.cols() == 0) throw DimensionError("vector sample must be non-empty");
  if (!points_.allFinite()) throw DomainError("vector sample contains non-finite values");
  auto m = kernels::moments(points_);
  mean_ = std::move(m.mean);
  covariance_ = std::move(m.covariance);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_);
  // Eigen returns ascending order; store descending.
  eigenvalues_ = eig.eigenvalues().reverse();
  eigenvectors_ = eig.eigenvectors().rowwise().reverse();

  const double lambda_max = std::max(eigenvalues_[0], 0.0);
  const double magnitude = points_.cwiseAbs().maxCoeff();
  degenerate_ = magnitude == 0.0 || std::sqrt(lambda_max) <= 1e-13 * magnitude;
  rank_ = 0;
  if (!degenerate_) {
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i)
      if (eigenvalues_[i] > kRankCutoff * lambda_max) ++rank_;
  }
  if (positive_definite()) cholesky_.compute(covariance_);
}

Vector VectorSample::solve(const Vector& rhs) const {
  if (!positive_definite() || cholesky_.info() != Eigen::Success) {
    const Index p = dimension();
    throw RankDeficiencyError(p - rank_, p,
                              "covariance is rank deficient: " + std::to_string(p - rank_) + " of " +
                                  std::to_string(p) + " dimensions have no spread (n = " +
                                  std::to_string(size()) + ")");
  }
  return cholesky_.solve(rhs);
}

OutlyingnessResult rayleigh_outlyingness(const Vector& x, const VectorSample& sample) {
  if (static_cast<Index>(x.size()) != sample.dimension()) {
    throw DimensionError("query has dimension " + std::to_string(x.size()) + ", sample has " +
                         std::to_string(sample.dimension()));
  }
  const Vector d = x - sample.mean();
  const Vector z = sample.solve(d);
  const double q = std::max(d.dot(z), 0.0);
  if (q == 0.0 || z.norm() == 0.0) return {0.0, UnitVector::basis(sample.dimension(), 0)};
  return {std::sqrt(q), UnitVector::normalized(z)};
}

double directional_outlyingness(const Vector& x, const VectorSample& sample, const Vector& u,
                                LocationScaleKind kind) {
  if (u.size() != x.size() || static_cast<Index>(u.size()) != sample.dimension()) {
    throw DimensionError("direction, query and sample dimensions differ");
  }
  const Vector y = kernels::project_rows(sample.points(), u);
  const double xu = x.dot(u);
  if (kind == LocationScaleKind::MedianMad) return medmad_ratio(y, xu);
  std::vector<double> buf(y.data(), y.data() + y.size());
  const LocationScale ls = location_scale(buf, kind);
  return guarded_ratio(std::abs(xu - ls.location), ls.scale, std::max(max_abs(y), std::abs(xu)));
}

OutlyingnessResult approx_outlyingness_medmad(const Vector& x, const VectorSample& sample,
                                              const SearchBudget& budget) {
  const Index p = sample.dimension();
  if (static_cast<Index>(x.size()) != p) throw DimensionError("query dimension does not match sample");
  const Matrix& pts = sample.points();
  auto evaluate = [&](const Vector& u) { return medmad_ratio(pts * u, x.dot(u)); };

  if (p == 1) {
    Vector u = Vector::Ones(1);
    return {evaluate(u), UnitVector(u)};
  }

  std::vector<Vector> candidates;
  if (budget.warm_start) {
    if (static_cast<Index>(budget.warm_start->size()) != p) throw DimensionError("warm start has the wrong dimension");
    if (budget.warm_start->norm() > 0) candidates.push_back(budget.warm_start->normalized());
  }
  for (Index j = 0; j < p; ++j) candidates.push_back(UnitVector::basis(p, j).coords());
  {
    // Direction from the coordinatewise median towards x.
    Vector med(static_cast<Eigen::Index>(p));
    for (Index j = 0; j < p; ++j) {
      const auto col = pts.col(static_cast<Eigen::Index>(j));
      std::vector<double> buf(col.data(), col.data() + col.size());
      med[static_cast<Eigen::Index>(j)] = median_inplace(buf);
    }
    const Vector d = x - med;
    if (d.norm() > 0) candidates.push_back(d.normalized());
  }
  std::mt19937_64 rng(budget.seed);
  for (Index k = 0; k < budget.directions; ++k) {
    Vector g(static_cast<Eigen::Index>(p));
    for (Index j = 0; j < p; ++j) g[static_cast<Eigen::Index>(j)] = gaussian(rng);
    if (g.norm() > 0) candidates.push_back(g.normalized());
  }

  std::vector<double> values(candidates.size());
  const auto count = static_cast<long long>(candidates.size());
  const std::size_t work = candidates.size() * sample.size() * p;
#pragma omp parallel for schedule(static) if (work > kernels::kParallelThreshold)
  for (long long k = 0; k < count; ++k) values[static_cast<std::size_t>(k)] = evaluate(candidates[static_cast<std::size_t>(k)]);

  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (std::isinf(values[k])) return {kInf, UnitVector::normalized(candidates[k])};
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  Vector best = candidates[order[0]];
  double best_value = values[order[0]];
  const Index starts = std::min<Index>(budget.refine_best, order.size());
  for (Index s = 0; s < starts; ++s) {
    Vector u = candidates[order[s]];
    double value = values[order[s]];
    double step = 0.25;
    Index stale = 0;
    for (Index it = 0; it < budget.refine_steps; ++it) {
      const auto j = static_cast<Eigen::Index>(it % p);
      bool improved = false;
      for (double sign : {1.0, -1.0}) {
        Vector trial = u;
        trial[j] += sign * step;
        if (trial.norm() == 0) continue;
        trial.normalize();
        const double v = evaluate(trial);
        if (std::isinf(v)) return {kInf, UnitVector::normalized(trial)};
        if (v > value) {
          value = v;
          u = trial;
          improved = true;
        }
      }
      stale = improved ? 0 : stale + 1;
      if (stale >= p) {
        step *= 0.5;
        stale = 0;
      }
    }
    if (value > best_value) {
      best_value = value;
      best = u;
    }
  }
  return {best_value, UnitVector::normalized(best)};
}

OutlyingnessResult outlyingness(const Vector& x, const VectorSample& sample, LocationScaleKind kind,
                                const SearchBudget& budget) {
  if (kind == LocationScaleKind::MeanStd) return rayleigh_outlyingness(x, sample);
  return approx_outlyingness_medmad(x, sample, budget);
}

DepthValue projection_depth(const Vector& x, const VectorSample& sample, LocationScaleKind kind,
                            const SearchBudget& budget) {
  return DepthValue::from_outlyingness(outlyingness(x, sample, kind, budget).value);
}

VectorPcaModel::VectorPcaModel(const VectorSample& sample) {
  if (sample.degenerate()) throw DegenerateSampleError("cannot run PCA: sample covariance is zero (all points coincide)");
  basis_ = sample.eigenvectors().leftCols(static_cast<Eigen::Index>(sample.rank()));
  for (Eigen::Index c = 0; c < basis_.cols(); ++c) {
    basis_.col(c) = UnitVector::normalized(basis_.col(c)).canonical().coords();
  }
}

Vector VectorPcaModel::transform(const Vector& x) const {
  if (x.size() != basis_.rows()) throw DimensionError("PCA transform: dimension mismatch");
  return basis_.transpose() * x;
}

Matrix VectorPcaModel::transform_rows(const Matrix& points) const {
  if (points.cols() != basis_.rows()) throw DimensionError("PCA transform: dimension mismatch");
  return points * basis_;
}

PcaProjection pca_project(const VectorSample& sample, const Vector& x) {
  const VectorPcaModel model(sample);
  return {VectorSample(model.transform_rows(sample.points())), model.transform(x), model.basis()};
}

}  // namespace tpd
