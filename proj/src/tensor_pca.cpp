#include "tpd/tensor_pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tpd/errors.hpp"
#include "tpd/kernels.hpp"

namespace tpd {

TensorPcaModel::TensorPcaModel(DenseTensor mean, std::vector<Matrix> bases, std::vector<Vector> eigenvalues)
    : mean_(std::move(mean)), bases_(std::move(bases)), eigenvalues_(std::move(eigenvalues)) {
  if (bases_.size() != mean_.order() || eigenvalues_.size() != mean_.order()) {
    throw DimensionError("tensor PCA model needs one basis and spectrum per mode");
  }
  for (Index m = 0; m < bases_.size(); ++m) {
    if (static_cast<Index>(bases_[m].rows()) != mean_.dim(m) || bases_[m].cols() == 0 ||
        bases_[m].cols() != eigenvalues_[m].size()) {
      throw DimensionError("tensor PCA basis for mode " + std::to_string(m) + " has the wrong shape");
    }
  }
}

Shape TensorPcaModel::output_shape() const {
  Shape s;
  for (const auto& b : bases_) s.push_back(static_cast<Index>(b.cols()));
  return s;
}

std::vector<Index> TensorPcaModel::ranks() const { return output_shape(); }

DenseTensor TensorPcaModel::transform(const DenseTensor& x) const {
  require_same_shape(x.dims(), input_shape(), "tensor PCA transform");
  DenseTensor t = x;
  for (Index m = 0; m < bases_.size(); ++m) t = mode_product(t, m, bases_[m].transpose());
  return t;
}

TensorSample TensorPcaModel::transform(const TensorSample& sample) const {
  std::vector<DenseTensor> out;
  out.reserve(sample.size());
  for (const auto& x : sample) out.push_back(transform(x));
  return TensorSample(std::move(out));
}

nlohmann::json TensorPcaModel::to_json() const {
  nlohmann::json doc;
  doc["dims"] = input_shape();
  doc["ranks"] = ranks();
  doc["mean"] = vectorize(mean_);
  auto bases = nlohmann::json::array();
  auto spectra = nlohmann::json::array();
  for (Index m = 0; m < bases_.size(); ++m) {
    std::vector<double> rows;  // row-major n_l x r_l
    for (Eigen::Index i = 0; i < bases_[m].rows(); ++i)
      for (Eigen::Index j = 0; j < bases_[m].cols(); ++j) rows.push_back(bases_[m](i, j));
    bases.push_back(rows);
    spectra.push_back(std::vector<double>(eigenvalues_[m].data(), eigenvalues_[m].data() + eigenvalues_[m].size()));
  }
  doc["bases"] = bases;
  doc["eigenvalues"] = spectra;
  return doc;
}

TensorPcaModel TensorPcaModel::from_json(const nlohmann::json& doc) {
  try {
    const auto dims = doc.at("dims").get<Shape>();
    const auto ranks = doc.at("ranks").get<std::vector<Index>>();
    if (ranks.size() != dims.size()) throw FormatError("tensor PCA JSON: ranks and dims differ in length");
    DenseTensor mean(dims, doc.at("mean").get<std::vector<double>>());
    std::vector<Matrix> bases;
    std::vector<Vector> spectra;
    for (Index m = 0; m < dims.size(); ++m) {
      const auto flat = doc.at("bases").at(m).get<std::vector<double>>();
      const auto ev = doc.at("eigenvalues").at(m).get<std::vector<double>>();
      if (flat.size() != dims[m] * ranks[m] || ev.size() != ranks[m]) {
        throw FormatError("tensor PCA JSON: basis " + std::to_string(m) + " has the wrong size");
      }
      Matrix b(static_cast<Eigen::Index>(dims[m]), static_cast<Eigen::Index>(ranks[m]));
      for (Index i = 0; i < dims[m]; ++i)
        for (Index j = 0; j < ranks[m]; ++j) b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * ranks[m] + j];
      bases.push_back(std::move(b));
      spectra.push_back(Eigen::Map<const Vector>(ev.data(), static_cast<Eigen::Index>(ev.size())));
    }
    return TensorPcaModel(std::move(mean), std::move(bases), std::move(spectra));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor PCA JSON: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("tensor PCA JSON: ") + e.what());
  }
}

Matrix mode_scatter(const TensorSample& sample, Index mode) {
  if (mode >= sample.order()) throw DimensionError("scatter mode out of range");
  const DenseTensor mean = sample.mean();
  const auto n = static_cast<Eigen::Index>(sample.shape()[mode]);
  Matrix scatter = Matrix::Zero(n, n);
  for (const auto& x : sample) {
    std::vector<double> centered = vectorize(x);
    auto m = mean.data();
    for (Index k = 0; k < centered.size(); ++k) centered[k] -= m[k];
    const Matrix d = unfold(DenseTensor(x.dims(), std::move(centered)), mode);
    scatter.noalias() += d * d.transpose();
  }
  return scatter;
}

TensorPcaModel fit_tensor_pca(const TensorSample& sample, const TensorPcaOptions& options) {
  if (sample.size() < 2) throw DimensionError("tensor PCA needs at least two samples");
  const DenseTensor mean = sample.mean();

  double magnitude = 0.0;
  for (const auto& x : sample)
    for (double v : x.data()) magnitude = std::max(magnitude, std::abs(v));

  std::vector<Matrix> bases;
  std::vector<Vector> spectra;
  for (Index mode = 0; mode < sample.order(); ++mode) {
    const Matrix scatter = mode_scatter(sample, mode);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
    const Vector values = eig.eigenvalues().reverse();
    const Matrix vectors = eig.eigenvectors().rowwise().reverse();
    const double lambda_max = std::max(values[0], 0.0);
    // Scatter sums n squared deviations; compare its root-mean to the data scale.
    const double spread = std::sqrt(lambda_max / static_cast<double>(sample.size()));
    if (magnitude == 0.0 || spread <= 1e-13 * magnitude) {
      throw DegenerateSampleError("cannot fit tensor PCA: all " + std::to_string(sample.size()) +
                                  " samples are identical");
    }
    Index rank = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (values[i] > options.rank_cutoff * lambda_max) ++rank;
    if (options.cap_at_sample_dof) rank = std::min(rank, sample.size() - 1);

    Matrix basis = vectors.leftCols(static_cast<Eigen::Index>(rank));
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
      basis.col(c) = UnitVector::normalized(basis.col(c)).canonical().coords();
    }
    bases.push_back(std::move(basis));
    spectra.push_back(values.head(static_cast<Eigen::Index>(rank)));
  }
  return TensorPcaModel(mean, std::move(bases), std::move(spectra));
}

DenseTensor transform(const TensorPcaModel& model, const DenseTensor& x) { return model.transform(x); }

TensorPcaFit fit_transform(const TensorSample& sample, const TensorPcaOptions& options) {
  TensorPcaModel model = fit_tensor_pca(sample, options);
  TensorSample transformed = model.transform(sample);
  return {std::move(model), std::move(transformed)};
}

}  // namespace tpd
