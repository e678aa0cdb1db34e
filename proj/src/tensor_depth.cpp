#include "tpd/tensor_depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tpd/errors.hpp"
#include "tpd/kernels.hpp"
#include "tpd/random.hpp"

namespace tpd {

namespace {

struct RunResult {
  double value = 0.0;
  std::vector<Vector> directions;
  std::vector<double> trajectory;
  Index sweeps = 0;
  bool converged = false;
};

// One single-mode update: `rows` are the sample members contracted on every
// other mode, `query` the observation contracted the same way.
OutlyingnessResult solve_mode(const Matrix& rows, const Vector& query, const TpdConfig& cfg,
                              const Vector* warm_start, std::uint64_t step_seed, Index mode) {
  try {
    const VectorSample sub(rows);
    if (cfg.kind == LocationScaleKind::MeanStd) return rayleigh_outlyingness(query, sub);
    SearchBudget budget = cfg.search;
    budget.seed = step_seed;
    if (warm_start) budget.warm_start = *warm_start;
    return approx_outlyingness_medmad(query, sub, budget);
  } catch (const RankDeficiencyError& e) {
    throw RankDeficiencyError(e.deficient_dims(), e.dimension(),
                              "projected covariance for mode " + std::to_string(mode) + " is singular (" +
                                  e.what() + "); reduce the sample with tensor PCA (--tensor-pca)");
  }
}

// Relative increase for objectives above 1, absolute below.
bool sweep_converged(double before, double after, double tol) {
  return after - before <= tol * std::max(1.0, std::abs(before));
}

// Updates `dirs[mode]` for modes last..0 until the objective stops growing.
// `project(dirs, mode)` returns {rows, query} for that mode.
template <typename Project>
RunResult alternate(std::vector<Vector> dirs, const TpdConfig& cfg, Index restart, Project&& project) {
  const Index k = dirs.size();
  RunResult run;
  std::vector<bool> solved(k, false);
  double sweep_start = 0.0;
  Index step = 0;
  for (Index sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    for (Index m = k; m-- > 0;) {
      const auto [rows, query] = project(dirs, m);
      const Vector* warm = solved[m] ? &dirs[m] : nullptr;
      OutlyingnessResult r = solve_mode(rows, query, cfg, warm, mix_seed(cfg.search.seed, restart, step++), m);
      dirs[m] = r.direction.coords();
      solved[m] = true;
      run.value = r.value;
      run.trajectory.push_back(r.value);
      if (std::isinf(r.value)) {
        run.sweeps = sweep;
        run.converged = true;
        run.directions = std::move(dirs);
        return run;
      }
    }
    run.sweeps = sweep;
    if (sweep_converged(sweep_start, run.value, cfg.tol)) {
      run.converged = true;
      break;
    }
    sweep_start = run.value;
  }
  run.directions = std::move(dirs);
  return run;
}

std::vector<UnitVector> canonical_directions(const std::vector<Vector>& dirs) {
  std::vector<UnitVector> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(UnitVector::normalized(d).canonical());
  return out;
}

bool lexicographically_less(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b) {
  for (Index m = 0; m < a.size(); ++m) {
    for (Index j = 0; j < a[m].dimension(); ++j) {
      if (a[m][j] < b[m][j]) return true;
      if (a[m][j] > b[m][j]) return false;
    }
  }
  return false;
}

template <typename Project>
TpdResult solve(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg, Project&& project) {
  cfg.validate();
  require_same_shape(x.dims(), sample.shape(), "tensor projection depth");

  std::vector<RunResult> runs(cfg.restarts);
  kernels::parallel_for(cfg.restarts, [&](std::size_t r) {
    runs[r] = alternate(initial_directions(sample.shape(), cfg, r), cfg, r, project);
  });

  // Best objective wins; near-ties go to the lexicographically smallest
  // sign-canonical direction tuple.
  Index best = 0;
  std::vector<UnitVector> best_dirs = canonical_directions(runs[0].directions);
  for (Index r = 1; r < runs.size(); ++r) {
    auto dirs = canonical_directions(runs[r].directions);
    const double a = runs[r].value;
    const double b = runs[best].value;
    const bool tie = (std::isinf(a) && std::isinf(b)) || std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
    if ((!tie && a > b) || (tie && lexicographically_less(dirs, best_dirs))) {
      best = r;
      best_dirs = std::move(dirs);
    }
  }

  RunResult& w = runs[best];
  TpdResult result;
  result.outlyingness = w.value;
  result.depth = DepthValue::from_outlyingness(w.value);
  result.directions = std::move(best_dirs);
  result.trajectory = std::move(w.trajectory);
  result.iterations = w.sweeps;
  result.converged = w.converged;
  result.approximate = cfg.kind == LocationScaleKind::MedianMad;
  result.best_restart = best;
  return result;
}

}  // namespace

void TpdConfig::validate() const {
  if (!(tol > 0.0)) throw DomainError("TPD tolerance must be positive");
  if (max_iter < 1) throw DomainError("TPD max_iter must be at least 1");
  if (restarts < 1) throw DomainError("TPD restarts must be at least 1");
}

std::vector<Vector> initial_directions(const Shape& dims, const TpdConfig& cfg, Index restart) {
  std::vector<Vector> dirs(dims.size());
  const bool constant = cfg.init == InitPolicy::ConstantOnes && restart == 0;
  for (Index m = 0; m < dims.size(); ++m) {
    const auto n = static_cast<Eigen::Index>(dims[m]);
    if (constant) {
      dirs[m] = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
      continue;
    }
    std::mt19937_64 rng(mix_seed(cfg.seed, restart, m));
    Vector g(n);
    do {
      for (Eigen::Index j = 0; j < n; ++j) g[j] = gaussian(rng);
    } while (g.norm() == 0.0);
    dirs[m] = g.normalized();
  }
  return dirs;
}

double tpd_objective(const DenseTensor& x, const TensorSample& sample, std::span<const Vector> directions,
                     LocationScaleKind kind) {
  require_same_shape(x.dims(), sample.shape(), "tpd_objective");
  const Matrix rows = kernels::project_members(sample, directions, 0);
  const Vector query = kernels::project_tensor(x, directions, 0);
  const VectorSample sub(rows);
  return directional_outlyingness(query, sub, directions[0], kind);
}

TpdResult tpd_outlyingness_matrix(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg) {
  if (x.order() != 2 || sample.order() != 2) throw DimensionError("matrix TPD requires order-2 tensors");
  require_same_shape(x.dims(), sample.shape(), "matrix TPD");
  const Matrix xm = x.to_matrix();
  std::vector<Matrix> members;
  members.reserve(sample.size());
  for (const auto& m : sample) members.push_back(m.to_matrix());
  const auto n = static_cast<Eigen::Index>(members.size());

  // mode 1 (v): x_i = X_i^T u;  mode 0 (u): x_i = X_i v.
  auto project = [&](const std::vector<Vector>& dirs, Index mode) {
    const Eigen::Index width = mode == 0 ? xm.rows() : xm.cols();
    Matrix rows(n, width);
    Vector query;
    if (mode == 1) {
      for (Eigen::Index i = 0; i < n; ++i) rows.row(i) = (members[static_cast<Index>(i)].transpose() * dirs[0]).transpose();
      query = xm.transpose() * dirs[0];
    } else {
      for (Eigen::Index i = 0; i < n; ++i) rows.row(i) = (members[static_cast<Index>(i)] * dirs[1]).transpose();
      query = xm * dirs[1];
    }
    return std::pair<Matrix, Vector>{std::move(rows), std::move(query)};
  };
  return solve(x, sample, cfg, project);
}

TpdResult tpd_outlyingness_order_k(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg) {
  if (x.order() < 2) throw DimensionError("order-k TPD requires order >= 2");
  require_same_shape(x.dims(), sample.shape(), "order-k TPD");
  auto project = [&](const std::vector<Vector>& dirs, Index mode) {
    return std::pair<Matrix, Vector>{kernels::project_members(sample, dirs, mode),
                                     kernels::project_tensor(x, dirs, mode)};
  };
  return solve(x, sample, cfg, project);
}

TpdResult tpd_outlyingness(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg) {
  if (x.order() == 1) {
    cfg.validate();
    require_same_shape(x.dims(), sample.shape(), "projection depth");
    Matrix pts(static_cast<Eigen::Index>(sample.size()), static_cast<Eigen::Index>(x.size()));
    for (Index i = 0; i < sample.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = vectorize_eigen(sample[i]).transpose();
    SearchBudget budget = cfg.search;
    budget.seed = mix_seed(cfg.search.seed, 0, 0);
    const OutlyingnessResult r = outlyingness(vectorize_eigen(x), VectorSample(std::move(pts)), cfg.kind, budget);
    TpdResult result;
    result.outlyingness = r.value;
    result.depth = DepthValue::from_outlyingness(r.value);
    result.directions = {r.direction.canonical()};
    result.trajectory = {r.value};
    result.iterations = 1;
    result.converged = true;
    result.approximate = cfg.kind == LocationScaleKind::MedianMad;
    return result;
  }
  if (x.order() == 2) return tpd_outlyingness_matrix(x, sample, cfg);
  return tpd_outlyingness_order_k(x, sample, cfg);
}

DepthValue tpd_depth(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg) {
  return tpd_outlyingness(x, sample, cfg).depth;
}

}  // namespace tpd
