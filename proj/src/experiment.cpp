#include "tpd/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "tpd/errors.hpp"
#include "tpd/kernels.hpp"
#include "tpd/random.hpp"
#include "tpd/version.hpp"

namespace tpd {

namespace {

constexpr std::uint64_t kTestStream = 0x7e57;

// First `count` entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<Index> draw(std::vector<Index> pool, Index count, std::mt19937_64& rng) {
  for (Index i = 0; i < count; ++i) {
    const Index j = i + static_cast<Index>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

TensorSample subset(const TensorSample& sample, const std::vector<Index>& idx) {
  std::vector<DenseTensor> members;
  members.reserve(idx.size());
  for (Index i : idx) members.push_back(sample[i]);
  return TensorSample(std::move(members));
}

std::string_view init_name(InitPolicy p) { return p == InitPolicy::ConstantOnes ? "ones" : "random"; }

InitPolicy parse_init(const std::string& s) {
  if (s == "ones") return InitPolicy::ConstantOnes;
  if (s == "random") return InitPolicy::Random;
  throw ProtocolError("unknown init policy '" + s + "' (expected ones or random)");
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void ExperimentProtocol::validate(const LabeledDataset& data) const {
  if (test_per_class < 1) throw ProtocolError("test_per_class must be at least 1");
  if (rounds < 1) throw ProtocolError("rounds must be at least 1");
  if (training_sizes.empty()) throw ProtocolError("training_sizes must not be empty");
  const Index smallest = data.min_class_size();
  if (smallest <= test_per_class) {
    throw ProtocolError("the smallest class has " + std::to_string(smallest) +
                        " members, not enough for " + std::to_string(test_per_class) + " test members plus training");
  }
  const Index available = smallest - test_per_class;
  for (Index n : training_sizes) {
    if (n < 1) throw ProtocolError("training sizes must be positive");
    if (n > available) {
      throw ProtocolError("training size " + std::to_string(n) + " exceeds the " + std::to_string(available) +
                          " members left in the smallest class after drawing " + std::to_string(test_per_class) +
                          " test members");
    }
  }
  try {
    classifier.tpd.validate();
  } catch (const Error& e) {
    throw ProtocolError(e.what());
  }
}

nlohmann::json ExperimentProtocol::to_json() const {
  const TpdConfig& c = classifier.tpd;
  return {
      {"test_per_class", test_per_class},
      {"training_sizes", training_sizes},
      {"rounds", rounds},
      {"seed", seed},
      {"depth", std::string(to_string(classifier.depth))},
      {"location_scale", std::string(to_string(c.kind))},
      {"preprocessing", std::string(to_string(classifier.preprocessing))},
      {"init", std::string(init_name(c.init))},
      {"restarts", c.restarts},
      {"tol", c.tol},
      {"max_iter", c.max_iter},
      {"tpd_seed", c.seed},
      {"search",
       {{"directions", c.search.directions},
        {"refine_steps", c.search.refine_steps},
        {"refine_best", c.search.refine_best},
        {"seed", c.search.seed}}},
      {"reshape_order", reshape_order},
  };
}

ExperimentProtocol ExperimentProtocol::from_json(const nlohmann::json& doc) {
  static const std::set<std::string> known = {
      "test_per_class", "training_sizes", "rounds", "seed",     "depth",    "location_scale", "preprocessing",
      "init",           "restarts",       "tol",    "max_iter", "tpd_seed", "search",         "reshape_order"};
  if (!doc.is_object()) throw ProtocolError("protocol must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ProtocolError("unknown protocol key '" + key + "'");
  }
  ExperimentProtocol p;
  try {
    // Signed reads so negative counts are reported rather than wrapped.
    auto count = [&](const char* key, Index fallback) -> Index {
      if (!doc.contains(key)) return fallback;
      const auto v = doc.at(key).get<long long>();
      if (v < 0) throw ProtocolError(std::string(key) + " must not be negative");
      return static_cast<Index>(v);
    };
    p.test_per_class = count("test_per_class", p.test_per_class);
    p.rounds = count("rounds", p.rounds);
    if (doc.contains("training_sizes")) {
      for (const auto& v : doc.at("training_sizes")) {
        const auto n = v.get<long long>();
        if (n < 0) throw ProtocolError("training sizes must not be negative");
        p.training_sizes.push_back(static_cast<Index>(n));
      }
    }
    p.seed = doc.value("seed", std::uint64_t{0});
    const std::string depth = doc.value("depth", std::string("tpd"));
    p.classifier.depth = parse_depth_kind(depth);
    TpdConfig& c = p.classifier.tpd;
    c.kind = depth == "rpd" ? LocationScaleKind::MeanStd
                            : parse_location_scale(doc.value("location_scale", std::string("meanstd")));
    p.classifier.preprocessing = parse_preprocessing(doc.value("preprocessing", std::string("none")));
    c.init = parse_init(doc.value("init", std::string("ones")));
    c.restarts = count("restarts", c.restarts);
    c.tol = doc.value("tol", c.tol);
    c.max_iter = count("max_iter", c.max_iter);
    c.seed = doc.value("tpd_seed", c.seed);
    if (doc.contains("search")) {
      const auto& s = doc.at("search");
      c.search.directions = s.value("directions", c.search.directions);
      c.search.refine_steps = s.value("refine_steps", c.search.refine_steps);
      c.search.refine_best = s.value("refine_best", c.search.refine_best);
      c.search.seed = s.value("seed", c.search.seed);
    }
    p.reshape_order = doc.value("reshape_order", p.reshape_order);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed protocol: ") + e.what());
  } catch (const FormatError& e) {
    throw ProtocolError(e.what());
  }
  return p;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& s : sizes) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : s.rounds) {
      rounds.push_back({{"round", r.round}, {"rate", r.rate}, {"correct", r.correct}, {"ties", r.ties}});
    }
    results.push_back({{"training_size", s.training_size},
                       {"mean", s.mean},
                       {"min", s.min},
                       {"max", s.max},
                       {"variance", s.variance},
                       {"ties", s.ties},
                       {"rounds", rounds}});
  }
  return {
      {"version", kVersion},
      {"protocol", protocol.to_json()},
      {"metadata", {{"labels", labels}, {"shape", shape}, {"reshape_order", protocol.reshape_order}}},
      {"test_indices", test_indices},
      {"results", results},
  };
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "# tpd experiment report\n";
  os << "# version=" << kVersion << '\n';
  os << "# protocol=" << protocol.to_json().dump() << '\n';
  os << "# shape=";
  for (Index i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << '\n';
  os << "size,mean,min,max,variance\n";
  for (const auto& s : sizes) {
    os << s.training_size << ',' << format_real(s.mean) << ',' << format_real(s.min) << ',' << format_real(s.max)
       << ',' << format_real(s.variance) << '\n';
  }
  return os.str();
}

ExperimentReport run_experiment(const LabeledDataset& data, const ExperimentProtocol& protocol) {
  return run_experiment(data, protocol, nullptr);
}

ExperimentReport run_experiment(const LabeledDataset& data, const ExperimentProtocol& protocol,
                                const QueryClassifier& classifier) {
  protocol.validate(data);
  const Index q = data.num_classes();
  const Index p = protocol.test_per_class;

  ExperimentReport report;
  report.protocol = protocol;
  report.labels = data.labels();
  report.shape = data.shape();

  // Step 1: one test draw per class, kept for every training size.
  std::vector<std::vector<Index>> pools(q);
  {
    std::mt19937_64 rng(mix_seed(protocol.seed, kTestStream));
    for (Index j = 0; j < q; ++j) {
      std::vector<Index> all(data[j].size());
      std::iota(all.begin(), all.end(), Index{0});
      std::vector<Index> test = draw(all, p, rng);
      std::vector<Index> rest;
      std::set_difference(all.begin(), all.end(), test.begin(), test.end(), std::back_inserter(rest));
      report.test_indices.push_back(std::move(test));
      pools[j] = std::move(rest);
    }
  }

  const Index sizes = protocol.training_sizes.size();
  const Index rounds = protocol.rounds;
  report.sizes.resize(sizes);
  for (Index s = 0; s < sizes; ++s) {
    report.sizes[s].training_size = protocol.training_sizes[s];
    report.sizes[s].rounds.resize(rounds);
  }

  kernels::parallel_for(sizes * rounds, [&](std::size_t job) {
    const Index s = job / rounds;
    const Index t = job % rounds;
    const Index n_train = protocol.training_sizes[s];
    std::mt19937_64 rng(mix_seed(protocol.seed, s + 1, t + 1));
    std::vector<std::string> labels = data.labels();
    std::vector<TensorSample> train;
    for (Index j = 0; j < q; ++j) train.push_back(subset(data[j], draw(pools[j], n_train, rng)));
    const LabeledDataset training(std::move(labels), std::move(train));

    RoundResult& r = report.sizes[s].rounds[t];
    r.round = t;
    r.correct.assign(q, 0);
    if (classifier) {
      for (Index j = 0; j < q; ++j)
        for (Index i : report.test_indices[j])
          if (classifier(training, data[j][i], j) == j) ++r.correct[j];
    } else {
      const MaxDepthClassifier model(training, protocol.classifier);
      for (Index j = 0; j < q; ++j) {
        for (Index i : report.test_indices[j]) {
          const Classification c = model.classify(data[j][i]);
          if (c.label == j) ++r.correct[j];
          if (c.tie) ++r.ties;
        }
      }
    }
    const Index total = std::accumulate(r.correct.begin(), r.correct.end(), Index{0});
    r.rate = static_cast<double>(total) / static_cast<double>(q * p);
  });

  for (auto& s : report.sizes) {
    double sum = 0.0;
    s.min = s.rounds.front().rate;
    s.max = s.min;
    for (const auto& r : s.rounds) {
      sum += r.rate;
      s.min = std::min(s.min, r.rate);
      s.max = std::max(s.max, r.rate);
      s.ties += r.ties;
    }
    s.mean = std::clamp(sum / static_cast<double>(rounds), s.min, s.max);
    double var = 0.0;
    for (const auto& r : s.rounds) var += (r.rate - s.mean) * (r.rate - s.mean);
    s.variance = var / static_cast<double>(rounds);
  }
  return report;
}

}  // namespace tpd
