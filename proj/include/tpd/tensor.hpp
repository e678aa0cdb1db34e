#pragma once

// Dense order-k tensors and the contractions the depth solvers are built on.
//
// Layout: row-major generalised to k modes, i.e. the last index varies
// fastest. For a matrix this is the usual row-major order, so vectorize() of
// [[1,2],[3,4]] is (1,2,3,4). Modes are numbered from 0.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tpd {

using Index = std::size_t;
using Shape = std::vector<Index>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Euclidean unit vector; the norm is checked to within 1e-12 on construction.
class UnitVector {
 public:
  /// Takes coordinates that are already unit norm.
  explicit UnitVector(Vector coords);

  /// Scales `v` to unit norm. Throws DomainError for a zero vector.
  static UnitVector normalized(const Vector& v);

  /// e_index in R^dimension.
  static UnitVector basis(Index dimension, Index index);

  const Vector& coords() const noexcept { return coords_; }
  Index dimension() const noexcept { return static_cast<Index>(coords_.size()); }
  double operator[](Index i) const { return coords_[static_cast<Eigen::Index>(i)]; }

  /// Flips the sign so the first coordinate with magnitude above 1e-12 is positive.
  UnitVector canonical() const;

 private:
  Vector coords_;
};

class DenseTensor {
 public:
  /// Zero tensor of the given shape.
  explicit DenseTensor(Shape dims);
  DenseTensor(Shape dims, std::vector<double> data);

  /// Order-1, size-1 tensor holding `value`; the result of a full contraction.
  static DenseTensor scalar(double value);
  static DenseTensor from_matrix(const Matrix& m);
  static DenseTensor from_vector(const Vector& v);

  const Shape& dims() const noexcept { return dims_; }
  Index order() const noexcept { return dims_.size(); }
  Index size() const noexcept { return data_.size(); }
  Index dim(Index mode) const { return dims_.at(mode); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Index offset(std::span<const Index> index) const;
  double operator()(std::initializer_list<Index> index) const;
  double& operator()(std::initializer_list<Index> index);

  /// Bare value of an order-1 size-1 tensor.
  double scalar_value() const;
  /// Copy as an Eigen matrix; requires order 2.
  Matrix to_matrix() const;

  DenseTensor reshaped(Shape dims) const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Shape dims_;
  std::vector<double> data_;
};

/// A non-empty set of same-shape tensors treated as an empirical distribution.
class TensorSample {
 public:
  explicit TensorSample(std::vector<DenseTensor> members);

  const Shape& shape() const noexcept { return shape_; }
  Index size() const noexcept { return members_.size(); }
  Index order() const noexcept { return shape_.size(); }
  const DenseTensor& operator[](Index i) const { return members_[i]; }
  const std::vector<DenseTensor>& members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  /// Elementwise mean member.
  DenseTensor mean() const;

 private:
  Shape shape_;
  std::vector<DenseTensor> members_;
};

Index shape_size(const Shape& dims);
void require_same_shape(const Shape& a, const Shape& b, const char* what);

double inner_product(const DenseTensor& a, const DenseTensor& b);
double frobenius_norm(const DenseTensor& a);

/// T x_mode a: weighted sum along `mode`, removing it. Contracting the only
/// mode of an order-1 tensor yields DenseTensor::scalar.
DenseTensor mode_contract(const DenseTensor& t, Index mode, std::span<const double> a);
DenseTensor mode_contract(const DenseTensor& t, Index mode, const Vector& a);

/// Mode-n product with a matrix: replaces dimension n_mode by m.rows().
DenseTensor mode_product(const DenseTensor& t, Index mode, const Matrix& m);

/// u^T X v for an order-2 tensor.
double bilinear_project(const DenseTensor& x, const UnitVector& u, const UnitVector& v);

DenseTensor outer(const Vector& a, const Vector& b);

std::vector<double> vectorize(const DenseTensor& x);
Vector vectorize_eigen(const DenseTensor& x);
DenseTensor reshape(std::span<const double> values, Shape dims);

/// Mode-`mode` unfolding: n_mode rows, remaining modes (in order) flattened
/// into columns.
Matrix unfold(const DenseTensor& t, Index mode);

}  // namespace tpd
