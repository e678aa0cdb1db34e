// tpd: command-line front end for projection depth queries, tensor PCA and
// classification experiments.
//
// Exit codes: 0 success, 2 usage/I/O/format errors, 3 rank deficiency or a
// degenerate sample, 4 infeasible experiment protocol.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpd/classify.hpp"
#include "tpd/errors.hpp"
#include "tpd/experiment.hpp"
#include "tpd/io.hpp"
#include "tpd/kernels.hpp"
#include "tpd/tensor_depth.hpp"
#include "tpd/tensor_pca.hpp"
#include "tpd/vector_depth.hpp"
#include "tpd/version.hpp"

namespace {

using namespace tpd;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRank = 3;
constexpr int kExitProtocol = 4;

struct DepthArgs {
  std::string manifest;
  std::string queries;
  std::string label;
  std::string depth = "tpd";
  std::string location_scale = "meanstd";
  bool tensor_pca = false;
  Index restarts = 1;
  double tol = 1e-9;
  Index max_iter = 200;
  std::uint64_t seed = 0;
  std::string shape;
  std::string output;
};

struct ExperimentArgs {
  std::string manifest;
  std::string protocol;
  std::string output_prefix;
  std::string shape;
};

struct PcaArgs {
  std::string manifest;
  std::string label;
  std::string shape;
  std::string output;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

io::DatasetManifest load_manifest(const std::string& path, const std::string& shape_override) {
  io::DatasetManifest m = io::DatasetManifest::load(path);
  if (!shape_override.empty()) {
    m.shape = io::parse_shape(shape_override);
    if (m.format == io::DatasetFormat::CsvVectors) m.format = io::DatasetFormat::CsvTensors;
  }
  return m;
}

TensorSample select_sample(const io::Records& records, const std::string& label) {
  std::vector<DenseTensor> members;
  for (Index i = 0; i < records.tensors.size(); ++i)
    if (label.empty() || records.labels[i] == label) members.push_back(records.tensors[i]);
  if (members.empty()) {
    throw FormatError(label.empty() ? std::string("dataset has no records") : "no records with label '" + label + "'");
  }
  return TensorSample(std::move(members));
}

io::Records load_queries(const std::string& path, const io::DatasetManifest& manifest) {
  const io::CsvTable table = io::read_csv(path);
  auto has = [&](const std::optional<std::string>& col) {
    return col && std::find(table.header.begin(), table.header.end(), *col) != table.header.end();
  };
  const auto label = has(manifest.label_column) ? manifest.label_column : std::nullopt;
  const auto id = has(manifest.id_column) ? manifest.id_column : std::nullopt;
  return io::read_csv_records(path, manifest.shape, label, id);
}

std::string format_directions(const std::vector<UnitVector>& dirs) {
  std::string out;
  for (Index m = 0; m < dirs.size(); ++m) {
    if (m) out += '|';
    for (Index i = 0; i < dirs[m].dimension(); ++i) {
      if (i) out += ';';
      out += format_real(dirs[m][i]);
    }
  }
  return out;
}

struct DepthRow {
  double outlyingness = 0.0;
  double depth = 1.0;
  Index iterations = 0;
  bool converged = true;
  std::vector<UnitVector> directions;
};

int run_depth(const DepthArgs& args) {
  const io::DatasetManifest manifest = load_manifest(args.manifest, args.shape);
  const io::Records records = io::load_records(manifest);
  TensorSample sample = select_sample(records, args.label);
  const io::Records queries = load_queries(args.queries, manifest);
  for (const auto& q : queries.tensors) require_same_shape(q.dims(), sample.shape(), "query");

  const DepthKind depth_kind = parse_depth_kind(args.depth);
  TpdConfig cfg;
  cfg.kind = args.depth == "rpd" ? LocationScaleKind::MeanStd : parse_location_scale(args.location_scale);
  cfg.restarts = args.restarts;
  cfg.tol = args.tol;
  cfg.max_iter = args.max_iter;
  cfg.seed = args.seed;
  cfg.search.seed = args.seed ^ cfg.search.seed;
  cfg.validate();

  std::vector<DenseTensor> points = queries.tensors;
  const bool tensor_mode = depth_kind == DepthKind::Tpd && sample.order() >= 2;
  std::optional<VectorSample> vectors;
  std::optional<VectorPcaModel> vpca;

  if (tensor_mode && args.tensor_pca) {
    const TensorPcaModel model = fit_tensor_pca(sample);
    const auto ranks = model.ranks();
    std::cerr << "tensor-pca ranks:";
    for (Index l = 0; l < ranks.size(); ++l) std::cerr << " r" << (l + 1) << '=' << ranks[l];
    std::cerr << '\n';
    sample = model.transform(sample);
    for (auto& p : points) p = model.transform(p);
  }
  if (!tensor_mode) {
    Matrix pts(static_cast<Eigen::Index>(sample.size()), static_cast<Eigen::Index>(shape_size(sample.shape())));
    for (Index i = 0; i < sample.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = vectorize_eigen(sample[i]).transpose();
    vectors.emplace(std::move(pts));
    if (args.tensor_pca) {
      vpca.emplace(*vectors);
      std::cerr << "vector-pca rank: " << vpca->rank() << '\n';
      vectors.emplace(vpca->transform_rows(vectors->points()));
    }
  }

  std::vector<DepthRow> rows(points.size());
  kernels::parallel_for(points.size(), [&](std::size_t q) {
    try {
      DepthRow& row = rows[q];
      if (tensor_mode) {
        const TpdResult r = tpd_outlyingness(points[q], sample, cfg);
        row = {r.outlyingness, r.depth.value(), r.iterations, r.converged, r.directions};
      } else {
        Vector x = vectorize_eigen(points[q]);
        if (vpca) x = vpca->transform(x);
        const OutlyingnessResult r = outlyingness(x, *vectors, cfg.kind, cfg.search);
        row = {r.value, DepthValue::from_outlyingness(r.value).value(), 1, true, {r.direction.canonical()}};
      }
    } catch (const Error&) {
      rethrow_with_context("query '" + queries.ids[q] + "': ");
    }
  });

  std::ostringstream os;
  os << "# tpd depth\n";
  os << "# version=" << kVersion << '\n';
  os << "# depth=" << args.depth << '\n';
  os << "# location_scale=" << to_string(cfg.kind) << '\n';
  os << "# tensor_pca=" << (args.tensor_pca ? "true" : "false") << '\n';
  os << "# restarts=" << cfg.restarts << '\n';
  os << "# tol=" << format_real(cfg.tol) << '\n';
  os << "# max_iter=" << cfg.max_iter << '\n';
  os << "# seed=" << cfg.seed << '\n';
  os << "# shape=" << io::shape_to_string(queries.tensors.empty() ? sample.shape() : queries.tensors[0].dims()) << '\n';
  os << "# reshape_order=" << manifest.reshape_order << '\n';
  if (!args.label.empty()) os << "# class=" << args.label << '\n';
  os << "id,outlyingness,depth,iterations,converged,directions\n";
  for (Index q = 0; q < rows.size(); ++q) {
    const DepthRow& r = rows[q];
    os << queries.ids[q] << ',' << format_real(r.outlyingness) << ',' << format_real(r.depth) << ',' << r.iterations
       << ',' << (r.converged ? "true" : "false") << ',' << format_directions(r.directions) << '\n';
  }
  write_text(args.output, os.str());
  return kExitOk;
}

int run_experiment_cmd(const ExperimentArgs& args) {
  ExperimentProtocol protocol;
  {
    std::ifstream in(args.protocol);
    if (!in) throw IoError("cannot open protocol '" + args.protocol + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("protocol '" + args.protocol + "' is not valid JSON: " + e.what());
    }
    protocol = ExperimentProtocol::from_json(doc);
  }
  const io::DatasetManifest manifest = load_manifest(args.manifest, args.shape);
  if (protocol.reshape_order != manifest.reshape_order) {
    throw ProtocolError("protocol reshape order '" + protocol.reshape_order + "' differs from the manifest's '" +
                        manifest.reshape_order + "'");
  }
  const LabeledDataset data = io::group_by_label(io::load_records(manifest));
  protocol.validate(data);

  const ExperimentReport report = run_experiment(data, protocol);
  write_text(args.output_prefix + ".json", report.to_json().dump(2) + "\n");
  write_text(args.output_prefix + ".csv", report.to_csv());
  for (const auto& s : report.sizes) {
    std::cerr << "size " << s.training_size << ": mean " << format_real(s.mean) << " (min " << format_real(s.min)
              << ", max " << format_real(s.max) << ", ties " << s.ties << ")\n";
  }
  return kExitOk;
}

int run_pca(const PcaArgs& args) {
  const io::DatasetManifest manifest = load_manifest(args.manifest, args.shape);
  const TensorSample sample = select_sample(io::load_records(manifest), args.label);
  const TensorPcaModel model = fit_tensor_pca(sample);
  write_text(args.output, model.to_json().dump(2) + "\n");
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::RankDeficiency:
    case ErrorCode::DegenerateSample: return kExitRank;
    case ErrorCode::Protocol: return kExitProtocol;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection depth for vectors, matrices and tensors"};
  app.set_version_flag("--version", std::string(tpd::kVersion));
  app.require_subcommand(1);

  DepthArgs depth;
  auto* cmd_depth = app.add_subcommand("depth", "Depth of query records with respect to a dataset");
  cmd_depth->add_option("--manifest", depth.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd_depth->add_option("--queries", depth.queries, "CSV of query records")->required()->check(CLI::ExistingFile);
  cmd_depth->add_option("--class", depth.label, "Use only records with this label as the sample");
  cmd_depth->add_option("--depth", depth.depth, "pd, rpd or tpd")->check(CLI::IsMember({"pd", "rpd", "tpd"}));
  cmd_depth->add_option("--location-scale", depth.location_scale, "meanstd or medmad")
      ->check(CLI::IsMember({"meanstd", "medmad"}));
  cmd_depth->add_flag("--tensor-pca", depth.tensor_pca, "Remove the sample null space before computing depth");
  cmd_depth->add_option("--restarts", depth.restarts, "TPD restarts")->check(CLI::PositiveNumber);
  cmd_depth->add_option("--tol", depth.tol, "Relative convergence tolerance")->check(CLI::PositiveNumber);
  cmd_depth->add_option("--max-iter", depth.max_iter, "Sweep cap")->check(CLI::PositiveNumber);
  cmd_depth->add_option("--seed", depth.seed, "Seed for random restarts and direction search");
  cmd_depth->add_option("--shape", depth.shape, "Reinterpret records as d1xd2[x...] tensors");
  cmd_depth->add_option("--output,-o", depth.output, "Output CSV (default stdout)");

  ExperimentArgs exp;
  auto* cmd_exp = app.add_subcommand("experiment", "Randomized max-depth classification experiment");
  cmd_exp->add_option("--manifest", exp.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd_exp->add_option("--protocol", exp.protocol, "Experiment protocol (JSON)")->required()->check(CLI::ExistingFile);
  cmd_exp->add_option("--output-prefix", exp.output_prefix, "Writes <prefix>.json and <prefix>.csv")->required();
  cmd_exp->add_option("--shape", exp.shape, "Reinterpret records as d1xd2[x...] tensors");

  PcaArgs pca;
  auto* cmd_pca = app.add_subcommand("pca", "Fit tensor PCA and print the model as JSON");
  cmd_pca->add_option("--manifest", pca.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd_pca->add_option("--class", pca.label, "Use only records with this label");
  cmd_pca->add_option("--shape", pca.shape, "Reinterpret records as d1xd2[x...] tensors");
  cmd_pca->add_option("--output,-o", pca.output, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*cmd_depth) return run_depth(depth);
    if (*cmd_exp) return run_experiment_cmd(exp);
    if (*cmd_pca) return run_pca(pca);
  } catch (const tpd::RankDeficiencyError& e) {
    std::cerr << "error: " << e.what() << "\nhint: run with --tensor-pca to remove the sample null space\n";
    return kExitRank;
  } catch (const tpd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
