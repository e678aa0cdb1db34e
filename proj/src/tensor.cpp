#include "tpd/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "tpd/errors.hpp"

namespace tpd {

namespace {

std::string shape_string(const Shape& dims) {
  std::ostringstream os;
  for (Index i = 0; i < dims.size(); ++i) {
    if (i) os << 'x';
    os << dims[i];
  }
  return os.str();
}

void check_shape(const Shape& dims) {
  if (dims.empty()) throw DimensionError("tensor order must be at least 1");
  for (Index d : dims) {
    if (d == 0) throw DimensionError("tensor dimension must be positive, got shape " + shape_string(dims));
  }
}

// Product of dims in [first, last).
Index span_size(const Shape& dims, Index first, Index last) {
  Index n = 1;
  for (Index i = first; i < last; ++i) n *= dims[i];
  return n;
}

}  // namespace

UnitVector::UnitVector(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() == 0) throw DimensionError("unit vector must have positive dimension");
  if (std::abs(coords_.norm() - 1.0) > 1e-12) {
    throw DomainError("unit vector norm differs from 1 by more than 1e-12");
  }
}

UnitVector UnitVector::normalized(const Vector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero or non-finite vector");
  Vector u = v / n;
  // One more pass removes the last ulp of drift for badly scaled inputs.
  u /= u.norm();
  return UnitVector(std::move(u));
}

UnitVector UnitVector::basis(Index dimension, Index index) {
  if (index >= dimension) throw DimensionError("basis index out of range");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(dimension));
  e[static_cast<Eigen::Index>(index)] = 1.0;
  return UnitVector(std::move(e));
}

UnitVector UnitVector::canonical() const {
  for (Eigen::Index i = 0; i < coords_.size(); ++i) {
    if (std::abs(coords_[i]) > 1e-12) {
      if (coords_[i] < 0) return UnitVector(Vector(-coords_));
      return *this;
    }
  }
  return *this;
}

DenseTensor::DenseTensor(Shape dims) : dims_(std::move(dims)) {
  check_shape(dims_);
  data_.assign(shape_size(dims_), 0.0);
}

DenseTensor::DenseTensor(Shape dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_shape(dims_);
  if (data_.size() != shape_size(dims_)) {
    throw DimensionError("tensor of shape " + shape_string(dims_) + " needs " +
                         std::to_string(shape_size(dims_)) + " values, got " +
                         std::to_string(data_.size()));
  }
}

DenseTensor DenseTensor::scalar(double value) { return DenseTensor({1}, {value}); }

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<Index>(m.rows()), static_cast<Index>(m.cols())});
  Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.data_[k++] = m(i, j);
  return t;
}

DenseTensor DenseTensor::from_vector(const Vector& v) {
  return DenseTensor({static_cast<Index>(v.size())}, std::vector<double>(v.data(), v.data() + v.size()));
}

Index DenseTensor::offset(std::span<const Index> index) const {
  if (index.size() != dims_.size()) throw DimensionError("index arity does not match tensor order");
  Index off = 0;
  for (Index m = 0; m < dims_.size(); ++m) {
    if (index[m] >= dims_[m]) throw DimensionError("tensor index out of range");
    off = off * dims_[m] + index[m];
  }
  return off;
}

double DenseTensor::operator()(std::initializer_list<Index> index) const {
  return data_[offset(std::span<const Index>(index.begin(), index.size()))];
}

double& DenseTensor::operator()(std::initializer_list<Index> index) {
  return data_[offset(std::span<const Index>(index.begin(), index.size()))];
}

double DenseTensor::scalar_value() const {
  if (dims_.size() != 1 || dims_[0] != 1) throw DimensionError("not a scalar tensor");
  return data_[0];
}

Matrix DenseTensor::to_matrix() const {
  if (order() != 2) throw DimensionError("to_matrix requires an order-2 tensor");
  const auto rows = static_cast<Eigen::Index>(dims_[0]);
  const auto cols = static_cast<Eigen::Index>(dims_[1]);
  Matrix m(rows, cols);
  Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data_[k++];
  return m;
}

DenseTensor DenseTensor::reshaped(Shape dims) const { return DenseTensor(std::move(dims), data_); }

TensorSample::TensorSample(std::vector<DenseTensor> members) : members_(std::move(members)) {
  if (members_.empty()) throw DimensionError("a tensor sample needs at least one member");
  shape_ = members_.front().dims();
  for (Index i = 1; i < members_.size(); ++i) {
    if (members_[i].dims() != shape_) {
      throw DimensionError("sample member " + std::to_string(i) + " has shape " +
                           shape_string(members_[i].dims()) + ", expected " + shape_string(shape_));
    }
  }
}

DenseTensor TensorSample::mean() const {
  DenseTensor m(shape_);
  auto out = m.data();
  for (const auto& x : members_) {
    auto in = x.data();
    for (Index k = 0; k < out.size(); ++k) out[k] += in[k];
  }
  const double inv = 1.0 / static_cast<double>(members_.size());
  for (double& v : out) v *= inv;
  return m;
}

Index shape_size(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": shape " + shape_string(a) + " does not match " +
                         shape_string(b));
  }
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a.dims(), b.dims(), "inner_product");
  auto x = a.data();
  auto y = b.data();
  double s = 0.0;
  for (Index k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double frobenius_norm(const DenseTensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

DenseTensor mode_contract(const DenseTensor& t, Index mode, std::span<const double> a) {
  const Shape& dims = t.dims();
  if (mode >= dims.size()) throw DimensionError("contraction mode out of range");
  if (a.size() != dims[mode]) {
    throw DimensionError("contraction vector has length " + std::to_string(a.size()) + ", mode " +
                         std::to_string(mode) + " has dimension " + std::to_string(dims[mode]));
  }
  const Index outer = span_size(dims, 0, mode);
  const Index n = dims[mode];
  const Index inner = span_size(dims, mode + 1, dims.size());

  Shape out_dims;
  for (Index m = 0; m < dims.size(); ++m)
    if (m != mode) out_dims.push_back(dims[m]);
  if (out_dims.empty()) out_dims.push_back(1);

  std::vector<double> out(outer * inner, 0.0);
  auto in = t.data();
  for (Index o = 0; o < outer; ++o) {
    for (Index j = 0; j < n; ++j) {
      const double w = a[j];
      const double* src = in.data() + (o * n + j) * inner;
      double* dst = out.data() + o * inner;
      for (Index i = 0; i < inner; ++i) dst[i] += src[i] * w;
    }
  }
  return DenseTensor(std::move(out_dims), std::move(out));
}

DenseTensor mode_contract(const DenseTensor& t, Index mode, const Vector& a) {
  return mode_contract(t, mode, std::span<const double>(a.data(), static_cast<Index>(a.size())));
}

DenseTensor mode_product(const DenseTensor& t, Index mode, const Matrix& m) {
  const Shape& dims = t.dims();
  if (mode >= dims.size()) throw DimensionError("product mode out of range");
  if (static_cast<Index>(m.cols()) != dims[mode]) throw DimensionError("mode product: matrix columns do not match mode dimension");
  const Index outer = span_size(dims, 0, mode);
  const Index n = dims[mode];
  const Index inner = span_size(dims, mode + 1, dims.size());
  const auto rows = static_cast<Index>(m.rows());
  if (rows == 0) throw DimensionError("mode product with an empty matrix");

  Shape out_dims = dims;
  out_dims[mode] = rows;
  std::vector<double> out(outer * rows * inner, 0.0);
  auto in = t.data();
  for (Index o = 0; o < outer; ++o) {
    for (Index r = 0; r < rows; ++r) {
      double* dst = out.data() + (o * rows + r) * inner;
      for (Index j = 0; j < n; ++j) {
        const double w = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        const double* src = in.data() + (o * n + j) * inner;
        for (Index i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
    }
  }
  return DenseTensor(std::move(out_dims), std::move(out));
}

double bilinear_project(const DenseTensor& x, const UnitVector& u, const UnitVector& v) {
  if (x.order() != 2) throw DimensionError("bilinear_project requires an order-2 tensor");
  if (x.dim(0) != u.dimension() || x.dim(1) != v.dimension()) {
    throw DimensionError("bilinear_project: direction lengths do not match matrix shape");
  }
  const Index rows = x.dim(0);
  const Index cols = x.dim(1);
  auto d = x.data();
  double s = 0.0;
  for (Index i = 0; i < rows; ++i) {
    double row = 0.0;
    for (Index j = 0; j < cols; ++j) row += d[i * cols + j] * v[j];
    s += u[i] * row;
  }
  return s;
}

DenseTensor outer(const Vector& a, const Vector& b) {
  return DenseTensor::from_matrix(a * b.transpose());
}

std::vector<double> vectorize(const DenseTensor& x) {
  auto d = x.data();
  return {d.begin(), d.end()};
}

Vector vectorize_eigen(const DenseTensor& x) {
  auto d = x.data();
  return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

DenseTensor reshape(std::span<const double> values, Shape dims) {
  return DenseTensor(std::move(dims), std::vector<double>(values.begin(), values.end()));
}

Matrix unfold(const DenseTensor& t, Index mode) {
  const Shape& dims = t.dims();
  if (mode >= dims.size()) throw DimensionError("unfold mode out of range");
  const Index outer = span_size(dims, 0, mode);
  const Index n = dims[mode];
  const Index inner = span_size(dims, mode + 1, dims.size());
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(outer * inner));
  auto d = t.data();
  for (Index o = 0; o < outer; ++o)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < inner; ++i)
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(o * inner + i)) = d[(o * n + j) * inner + i];
  return m;
}

}  // namespace tpd
