#include "tpd/classify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "tpd/errors.hpp"

namespace tpd {

std::string_view to_string(DepthKind kind) { return kind == DepthKind::Tpd ? "tpd" : "pd"; }

std::string_view to_string(Preprocessing prep) {
  switch (prep) {
    case Preprocessing::None: return "none";
    case Preprocessing::TensorPca: return "tensor-pca";
    case Preprocessing::VectorPca: return "vector-pca";
  }
  return "none";
}

DepthKind parse_depth_kind(std::string_view name) {
  if (name == "tpd") return DepthKind::Tpd;
  if (name == "pd" || name == "rpd") return DepthKind::VectorPd;
  throw FormatError("unknown depth kind '" + std::string(name) + "' (expected pd, rpd or tpd)");
}

Preprocessing parse_preprocessing(std::string_view name) {
  if (name == "none") return Preprocessing::None;
  if (name == "tensor-pca") return Preprocessing::TensorPca;
  if (name == "vector-pca") return Preprocessing::VectorPca;
  throw FormatError("unknown preprocessing '" + std::string(name) + "' (expected none, tensor-pca or vector-pca)");
}

LabeledDataset::LabeledDataset(std::vector<std::string> labels, std::vector<TensorSample> classes)
    : labels_(std::move(labels)), classes_(std::move(classes)) {
  if (classes_.size() < 2) throw DimensionError("a labeled dataset needs at least two classes");
  if (labels_.size() != classes_.size()) throw DimensionError("one label per class is required");
  for (Index j = 0; j < classes_.size(); ++j) {
    if (classes_[j].size() < 2) throw DimensionError("class '" + labels_[j] + "' has fewer than two members");
    require_same_shape(classes_[j].shape(), classes_[0].shape(), "labeled dataset");
  }
}

Index LabeledDataset::min_class_size() const {
  Index n = classes_[0].size();
  for (const auto& c : classes_) n = std::min(n, c.size());
  return n;
}

namespace {

Matrix stack_vectorized(const TensorSample& sample) {
  Matrix pts(static_cast<Eigen::Index>(sample.size()), static_cast<Eigen::Index>(shape_size(sample.shape())));
  for (Index i = 0; i < sample.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = vectorize_eigen(sample[i]).transpose();
  return pts;
}

}  // namespace

struct MaxDepthClassifier::ClassModel {
  std::optional<TensorPcaModel> tensor_pca;
  std::optional<VectorPcaModel> vector_pca;
  std::optional<VectorSample> vectors;
  std::optional<TensorSample> tensors;
};

MaxDepthClassifier::MaxDepthClassifier(const LabeledDataset& training, ClassifierOptions options)
    : labels_(training.labels()), options_(std::move(options)), shape_(training.shape()) {
  options_.tpd.validate();
  if (options_.depth == DepthKind::Tpd && options_.preprocessing == Preprocessing::VectorPca) {
    throw ProtocolError("vector-pca preprocessing applies to vector depth only; use tensor-pca with tpd");
  }
  models_.resize(training.num_classes());
  for (Index j = 0; j < training.num_classes(); ++j) {
    try {
      ClassModel& m = models_[j];
      TensorSample members = training[j];
      if (options_.preprocessing == Preprocessing::TensorPca) {
        m.tensor_pca = fit_tensor_pca(members);
        members = m.tensor_pca->transform(members);
      }
      if (options_.depth == DepthKind::Tpd) {
        m.tensors = std::move(members);
        continue;
      }
      VectorSample vs(stack_vectorized(members));
      if (options_.preprocessing == Preprocessing::VectorPca) {
        m.vector_pca.emplace(vs);
        vs = VectorSample(m.vector_pca->transform_rows(vs.points()));
      }
      m.vectors = std::move(vs);
    } catch (const Error&) {
      rethrow_with_context("class '" + labels_[j] + "': ");
    }
  }
}

MaxDepthClassifier::~MaxDepthClassifier() = default;
MaxDepthClassifier::MaxDepthClassifier(MaxDepthClassifier&&) noexcept = default;
MaxDepthClassifier& MaxDepthClassifier::operator=(MaxDepthClassifier&&) noexcept = default;

Index MaxDepthClassifier::num_classes() const noexcept { return models_.size(); }

double MaxDepthClassifier::depth(const DenseTensor& x, Index j) const {
  require_same_shape(x.dims(), shape_, "classifier query");
  const ClassModel& m = models_.at(j);
  try {
    const DenseTensor reduced = m.tensor_pca ? m.tensor_pca->transform(x) : x;
    if (m.tensors) return tpd_depth(reduced, *m.tensors, options_.tpd).value();
    Vector v = vectorize_eigen(reduced);
    if (m.vector_pca) v = m.vector_pca->transform(v);
    return projection_depth(v, *m.vectors, options_.tpd.kind, options_.tpd.search).value();
  } catch (const Error&) {
    rethrow_with_context("class '" + labels_[j] + "': ");
  }
}

Classification MaxDepthClassifier::classify(const DenseTensor& x) const {
  Classification c;
  c.depths.reserve(models_.size());
  for (Index j = 0; j < models_.size(); ++j) c.depths.push_back(depth(x, j));
  const double best = *std::max_element(c.depths.begin(), c.depths.end());
  const double tol = 1e-12 * std::max(1.0, best);
  Index hits = 0;
  bool found = false;
  for (Index j = 0; j < c.depths.size(); ++j) {
    if (best - c.depths[j] <= tol) {
      ++hits;
      if (!found) {
        c.label = j;
        found = true;
      }
    }
  }
  c.tie = hits > 1;
  return c;
}

Classification max_depth_classify(const DenseTensor& x, const LabeledDataset& classes,
                                  const ClassifierOptions& options) {
  return MaxDepthClassifier(classes, options).classify(x);
}

}  // namespace tpd
