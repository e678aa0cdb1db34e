#pragma once

// Tensor projection depth (TPD).
//
// For an order-k observation X and sample {X_i}, the outlyingness is the
// supremum over unit u_1..u_k of
//
//     |X(u_1,..,u_k) - mu(X_i(u_1,..,u_k))| / sigma(X_i(u_1,..,u_k))
//
// and is maximised by alternation: with all directions but one fixed, the
// contracted data are vectors and the remaining direction is the solution of
// a vector projection-depth problem. Each such step cannot decrease the
// objective, so the recorded trajectory is non-decreasing. Modes are updated
// from the last to the first (for matrices: v given u, then u given v).

#include <cstdint>
#include <vector>

#include "tpd/location_scale.hpp"
#include "tpd/tensor.hpp"
#include "tpd/vector_depth.hpp"

namespace tpd {

enum class InitPolicy {
  /// First restart starts from the normalised all-ones vector, later restarts
  /// from random directions.
  ConstantOnes,
  /// Every restart starts from random directions.
  Random,
};

struct TpdConfig {
  InitPolicy init = InitPolicy::ConstantOnes;
  Index restarts = 1;
  double tol = 1e-9;      // objective increase per full sweep, relative once above 1
  Index max_iter = 200;   // sweep cap
  LocationScaleKind kind = LocationScaleKind::MeanStd;
  std::uint64_t seed = 0;
  SearchBudget search;    // used by the (median, MAD) sub-problems

  /// Throws DomainError unless tol > 0, max_iter >= 1 and restarts >= 1.
  void validate() const;
};

struct TpdResult {
  double outlyingness = 0.0;
  DepthValue depth = DepthValue::from_outlyingness(0.0);
  std::vector<UnitVector> directions;  // one per mode, sign-canonical
  std::vector<double> trajectory;      // objective after every single-mode update
  Index iterations = 0;                // full sweeps of the winning restart
  bool converged = false;
  bool approximate = false;            // true for (median, MAD): sub-problems are searched
  Index best_restart = 0;
};

TpdResult tpd_outlyingness_matrix(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg);
TpdResult tpd_outlyingness_order_k(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg);

/// Dispatches on order: 1 is plain vector depth, 2 the matrix solver, >= 3
/// the order-k solver.
TpdResult tpd_outlyingness(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg);

DepthValue tpd_depth(const DenseTensor& x, const TensorSample& sample, const TpdConfig& cfg);

/// Starting directions for one restart; entry k-1 is unused because the last
/// mode is solved first. Shared by both solvers so they walk identical paths.
std::vector<Vector> initial_directions(const Shape& dims, const TpdConfig& cfg, Index restart);

/// The ratio at fixed directions (one per mode), with the 0/0 and c/0 conventions.
double tpd_objective(const DenseTensor& x, const TensorSample& sample, std::span<const Vector> directions,
                     LocationScaleKind kind);

}  // namespace tpd
