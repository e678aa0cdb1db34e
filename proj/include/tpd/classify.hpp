#pragma once

// Max-depth classification: a query is assigned to the class in which it is
// deepest. Preprocessing (PCA / tensor PCA) is fitted per class on that
// class's members and applied to the query before that class's depth.

#include <string>
#include <string_view>
#include <vector>

#include "tpd/tensor.hpp"
#include "tpd/tensor_depth.hpp"
#include "tpd/tensor_pca.hpp"
#include "tpd/vector_depth.hpp"

namespace tpd {

enum class DepthKind { VectorPd, Tpd };
enum class Preprocessing { None, TensorPca, VectorPca };

std::string_view to_string(DepthKind kind);
std::string_view to_string(Preprocessing prep);
DepthKind parse_depth_kind(std::string_view name);
Preprocessing parse_preprocessing(std::string_view name);

/// q >= 2 groups of same-shape tensors, each with at least two members.
class LabeledDataset {
 public:
  LabeledDataset(std::vector<std::string> labels, std::vector<TensorSample> classes);

  Index num_classes() const noexcept { return classes_.size(); }
  const Shape& shape() const noexcept { return classes_.front().shape(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<TensorSample>& classes() const noexcept { return classes_; }
  const TensorSample& operator[](Index j) const { return classes_.at(j); }
  Index min_class_size() const;

 private:
  std::vector<std::string> labels_;
  std::vector<TensorSample> classes_;
};

struct ClassifierOptions {
  DepthKind depth = DepthKind::Tpd;
  /// Location/scale, restarts and search budget; for VectorPd only `kind`
  /// and `search` are used.
  TpdConfig tpd;
  Preprocessing preprocessing = Preprocessing::None;
};

struct Classification {
  Index label = 0;
  std::vector<double> depths;  // one per class
  bool tie = false;            // several classes within 1e-12 of the maximum
};

/// Per-class depth models fitted once and queried many times.
class MaxDepthClassifier {
 public:
  MaxDepthClassifier(const LabeledDataset& training, ClassifierOptions options);
  ~MaxDepthClassifier();
  MaxDepthClassifier(MaxDepthClassifier&&) noexcept;
  MaxDepthClassifier& operator=(MaxDepthClassifier&&) noexcept;

  /// Depth of x in class j.
  double depth(const DenseTensor& x, Index j) const;
  Classification classify(const DenseTensor& x) const;

  Index num_classes() const noexcept;

 private:
  struct ClassModel;
  std::vector<ClassModel> models_;
  std::vector<std::string> labels_;
  ClassifierOptions options_;
  Shape shape_;
};

Classification max_depth_classify(const DenseTensor& x, const LabeledDataset& classes,
                                  const ClassifierOptions& options);

}  // namespace tpd
