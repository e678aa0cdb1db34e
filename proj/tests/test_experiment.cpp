#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support/oracles.hpp"
#include "tpd/errors.hpp"
#include "tpd/experiment.hpp"

using namespace tpd;

namespace {

LabeledDataset three_classes(Index per_class, std::mt19937_64& rng) {
  std::vector<TensorSample> classes;
  for (int j = 0; j < 3; ++j) {
    std::vector<DenseTensor> members;
    const Matrix center = 6.0 * oracle::gaussian_matrix(2, 2, rng);
    for (Index i = 0; i < per_class; ++i)
      members.push_back(DenseTensor::from_matrix(center + oracle::gaussian_matrix(2, 2, rng)));
    classes.emplace_back(std::move(members));
  }
  return LabeledDataset({"a", "b", "c"}, std::move(classes));
}

ExperimentProtocol protocol(std::vector<Index> sizes, Index rounds = 4, Index test = 5) {
  ExperimentProtocol p;
  p.training_sizes = std::move(sizes);
  p.rounds = rounds;
  p.test_per_class = test;
  p.seed = 99;
  return p;
}

}  // namespace

TEST(RunExperiment, OracleClassifierScoresPerfectly) {
  std::mt19937_64 rng(110);
  const LabeledDataset d = three_classes(20, rng);
  const ExperimentReport r =
      run_experiment(d, protocol({5, 10}), [](const LabeledDataset&, const DenseTensor&, Index truth) { return truth; });
  ASSERT_EQ(r.sizes.size(), 2u);
  for (const auto& s : r.sizes) {
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 1.0);
    EXPECT_EQ(s.variance, 0.0);
    ASSERT_EQ(s.rounds.size(), 4u);
    for (const auto& round : s.rounds) EXPECT_EQ(round.correct, (std::vector<Index>{5, 5, 5}));
  }
}

TEST(RunExperiment, ConstantClassifierScoresOneOverQ) {
  std::mt19937_64 rng(111);
  const LabeledDataset d = three_classes(20, rng);
  const ExperimentReport r =
      run_experiment(d, protocol({5}), [](const LabeledDataset&, const DenseTensor&, Index) { return Index{1}; });
  EXPECT_DOUBLE_EQ(r.sizes[0].mean, 1.0 / 3.0);
  EXPECT_EQ(r.sizes[0].variance, 0.0);
}

TEST(RunExperiment, TrainingDrawsAvoidTestMembersAndSizesMatch) {
  std::mt19937_64 rng(112);
  const LabeledDataset d = three_classes(20, rng);
  // Members are identified by their first entry, which is almost surely unique.
  const ExperimentReport r = run_experiment(d, protocol({3, 7, 15}), [&](const LabeledDataset& train, const DenseTensor& q, Index truth) {
    EXPECT_EQ(train[0].size(), train[2].size());
    for (const auto& m : train[truth]) EXPECT_NE(m.data()[0], q.data()[0]);
    return truth;
  });
  ASSERT_EQ(r.test_indices.size(), 3u);
  for (const auto& t : r.test_indices) {
    EXPECT_EQ(t.size(), 5u);
    EXPECT_EQ(std::set<Index>(t.begin(), t.end()).size(), 5u);
  }
}

TEST(RunExperiment, TestSetPersistsAcrossTrainingSizes) {
  std::mt19937_64 rng(113);
  const LabeledDataset d = three_classes(20, rng);
  std::set<double> queries_small, queries_large;
  run_experiment(d, protocol({4}), [&](const LabeledDataset&, const DenseTensor& q, Index t) {
#pragma omp critical
    queries_small.insert(q.data()[0]);
    return t;
  });
  run_experiment(d, protocol({4, 12}), [&](const LabeledDataset&, const DenseTensor& q, Index t) {
#pragma omp critical
    queries_large.insert(q.data()[0]);
    return t;
  });
  EXPECT_EQ(queries_small, queries_large);
  EXPECT_EQ(queries_small.size(), 15u);
}

TEST(RunExperiment, ReportInvariantsWithDepthClassifier) {
  std::mt19937_64 rng(114);
  const LabeledDataset d = three_classes(25, rng);
  for (auto depth : {DepthKind::Tpd, DepthKind::VectorPd}) {
    ExperimentProtocol p = protocol({6, 12, 18});
    p.classifier.depth = depth;
    const ExperimentReport r = run_experiment(d, p);
    for (const auto& s : r.sizes) {
      EXPECT_LE(0.0, s.min);
      EXPECT_LE(s.min, s.mean);
      EXPECT_LE(s.mean, s.max);
      EXPECT_LE(s.max, 1.0);
      EXPECT_GE(s.variance, 0.0);
      double mean = 0.0;
      for (const auto& round : s.rounds) {
        Index total = 0;
        for (Index c : round.correct) total += c;
        EXPECT_DOUBLE_EQ(round.rate, static_cast<double>(total) / 15.0);
        mean += round.rate / 4.0;
      }
      EXPECT_NEAR(s.mean, mean, 1e-15);
    }
  }
}

TEST(RunExperiment, SameSeedSameReport) {
  std::mt19937_64 rng(115);
  const LabeledDataset d = three_classes(20, rng);
  ExperimentProtocol p = protocol({5, 10});
  p.classifier.tpd.restarts = 3;
  p.classifier.tpd.init = InitPolicy::Random;
  EXPECT_EQ(run_experiment(d, p).to_json().dump(), run_experiment(d, p).to_json().dump());
  EXPECT_EQ(run_experiment(d, p).to_csv(), run_experiment(d, p).to_csv());
  ExperimentProtocol other = p;
  other.seed = 100;
  EXPECT_NE(run_experiment(d, p).test_indices, run_experiment(d, other).test_indices);
}

TEST(ExperimentProtocol, ValidationIsPreflight) {
  std::mt19937_64 rng(116);
  const LabeledDataset d = three_classes(12, rng);
  EXPECT_THROW(run_experiment(d, protocol({8})), ProtocolError);  // 12 - 5 = 7 left
  EXPECT_NO_THROW(run_experiment(d, protocol({7})));
  EXPECT_THROW(run_experiment(d, protocol({5}, 0)), ProtocolError);
  EXPECT_THROW(run_experiment(d, protocol({5}, 2, 0)), ProtocolError);
  EXPECT_THROW(run_experiment(d, protocol({})), ProtocolError);
  EXPECT_THROW(run_experiment(d, protocol({5}, 2, 12)), ProtocolError);
  ExperimentProtocol bad = protocol({5});
  bad.classifier.tpd.tol = -1.0;
  EXPECT_THROW(run_experiment(d, bad), ProtocolError);
}

TEST(ExperimentProtocol, JsonRoundTripAndStrictKeys) {
  ExperimentProtocol p = protocol({10, 20}, 7, 3);
  p.classifier.depth = DepthKind::VectorPd;
  p.classifier.preprocessing = Preprocessing::VectorPca;
  p.classifier.tpd.kind = LocationScaleKind::MedianMad;
  p.classifier.tpd.restarts = 4;
  p.classifier.tpd.init = InitPolicy::Random;
  p.classifier.tpd.search.directions = 99;
  const ExperimentProtocol back = ExperimentProtocol::from_json(p.to_json());
  EXPECT_EQ(back.to_json(), p.to_json());

  EXPECT_THROW(ExperimentProtocol::from_json({{"rounds", 3}, {"typo", 1}}), ProtocolError);
  EXPECT_THROW(ExperimentProtocol::from_json({{"rounds", -3}}), ProtocolError);
  EXPECT_THROW(ExperimentProtocol::from_json({{"rounds", "many"}}), ProtocolError);
  EXPECT_THROW(ExperimentProtocol::from_json({{"depth", "halfspace"}}), ProtocolError);
  EXPECT_THROW(ExperimentProtocol::from_json(nlohmann::json::array()), ProtocolError);
  const ExperimentProtocol rpd = ExperimentProtocol::from_json({{"depth", "rpd"}, {"location_scale", "medmad"}});
  EXPECT_EQ(rpd.classifier.depth, DepthKind::VectorPd);
  EXPECT_EQ(rpd.classifier.tpd.kind, LocationScaleKind::MeanStd);
  EXPECT_EQ(ExperimentProtocol::from_json(nlohmann::json::object()).rounds, 10u);
}

TEST(ExperimentReport, CsvLayout) {
  std::mt19937_64 rng(117);
  const LabeledDataset d = three_classes(15, rng);
  const ExperimentReport r = run_experiment(d, protocol({6, 9}));
  const std::string csv = r.to_csv();
  EXPECT_NE(csv.find("\nsize,mean,min,max,variance\n"), std::string::npos);
  EXPECT_NE(csv.find("# protocol={"), std::string::npos);
  EXPECT_NE(csv.find("\"seed\":99"), std::string::npos);
  EXPECT_NE(csv.find("# shape=2x2"), std::string::npos);
  const nlohmann::json j = r.to_json();
  EXPECT_EQ(j.at("metadata").at("reshape_order"), "row-major");
  EXPECT_EQ(j.at("results").size(), 2u);
  EXPECT_EQ(format_real(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.3333333333");
}
