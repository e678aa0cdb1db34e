#pragma once

// Randomised recognition-rate experiment for the max-depth classifier.
//
//   1. draw `test_per_class` test members per class once (seeded);
//   2. for every training size n_k and round t, draw n_k training members
//      per class from what is left, classify all q*p test members and record
//      the per-class correct counts l_j and the rate eta_t = sum_j l_j / (q p);
//   3. summarise eta_t over rounds: mean, min, max, population variance.
//
// Each (size, round) pair draws from its own sub-seed, so rounds may run in
// parallel and the report is identical regardless of scheduling.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpd/classify.hpp"

namespace tpd {

struct ExperimentProtocol {
  Index test_per_class = 10;
  std::vector<Index> training_sizes;
  Index rounds = 10;
  std::uint64_t seed = 0;
  ClassifierOptions classifier;
  /// How vector records were laid out as tensors; carried into the report.
  std::string reshape_order = "row-major";

  /// Throws ProtocolError when the protocol cannot run on `data`.
  void validate(const LabeledDataset& data) const;

  nlohmann::json to_json() const;
  /// Missing keys take the defaults above; unknown keys are rejected.
  static ExperimentProtocol from_json(const nlohmann::json& doc);
};

struct RoundResult {
  Index round = 0;
  double rate = 0.0;
  std::vector<Index> correct;  // per class
  Index ties = 0;
};

struct SizeSummary {
  Index training_size = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;  // population variance over rounds
  Index ties = 0;
  std::vector<RoundResult> rounds;
};

struct ExperimentReport {
  ExperimentProtocol protocol;
  std::vector<std::string> labels;
  Shape shape;
  std::vector<std::vector<Index>> test_indices;  // per class, into the full dataset
  std::vector<SizeSummary> sizes;

  nlohmann::json to_json() const;
  /// Header `size,mean,min,max,variance`, preceded by `# key=value` lines
  /// holding the configuration; floats use 10 significant digits.
  std::string to_csv() const;
};

/// A replacement for the depth classifier, used to test the harness itself.
/// Receives the round's training set, a test member and its true class index.
using QueryClassifier = std::function<Index(const LabeledDataset& training, const DenseTensor& query, Index truth)>;

ExperimentReport run_experiment(const LabeledDataset& data, const ExperimentProtocol& protocol);
ExperimentReport run_experiment(const LabeledDataset& data, const ExperimentProtocol& protocol,
                                const QueryClassifier& classifier);

/// Formats with 10 significant digits, the precision of every CSV the tools write.
std::string format_real(double value);

}  // namespace tpd
