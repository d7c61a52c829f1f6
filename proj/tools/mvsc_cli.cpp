// Command-line front end: run experiments, embed a single view, evaluate a
// labeling, and generate synthetic datasets.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvsc/mvsc.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(const mvsc::Error& e) {
  switch (e.kind()) {
    case mvsc::ErrorKind::config: return kExitConfig;
    case mvsc::ErrorKind::data: return kExitData;
    case mvsc::ErrorKind::numerical: return kExitNumerical;
  }
  return 1;
}

std::pair<int, int> parse_nystrom(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) throw mvsc::Error(mvsc::ErrorCode::invalid_config, "--nystrom expects m,s");
  try {
    return {std::stoi(spec.substr(0, comma)), std::stoi(spec.substr(comma + 1))};
  } catch (const std::exception&) {
    throw mvsc::Error(mvsc::ErrorCode::invalid_config, "--nystrom expects two integers m,s");
  }
}

mvsc::Labeling read_label_file(const std::string& path) { return mvsc::read_labels(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view spectral clustering toolkit"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a configured experiment grid and write reports");
  std::string config_path, out_dir;
  int workers = 1;
  run->add_option("--config", config_path, "Experiment JSON")->required();
  run->add_option("--out", out_dir, "Report directory")->required();
  run->add_option("--workers", workers, "Parallel grid cells")->check(CLI::PositiveNumber);

  // embed
  auto* embed = app.add_subcommand("embed", "Spectral embedding of one view at a given order");
  std::string view_path, embed_out, nystrom_spec;
  int order = 1, k = 2, neighbors = 10;
  double bandwidth = 0.0;
  bool is_affinity = false;
  std::uint64_t embed_seed = 0;
  embed->add_option("--view", view_path, "Feature (or affinity) CSV")->required();
  embed->add_option("--order", order, "Affinity order O")->check(CLI::PositiveNumber);
  embed->add_option("--k", k, "Embedding dimension")->required()->check(CLI::PositiveNumber);
  embed->add_option("--nystrom", nystrom_spec, "Use the Nystrom backend with m,s");
  embed->add_option("--neighbors", neighbors, "KNN neighbour count N")->check(CLI::PositiveNumber);
  embed->add_option("--bandwidth", bandwidth, "Gaussian bandwidth (default: median heuristic)");
  embed->add_flag("--affinity", is_affinity, "Input CSV is a precomputed affinity");
  embed->add_option("--seed", embed_seed, "Nystrom seed");
  embed->add_option("--out", embed_out, "Output CSV (n x k)")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score a predicted labeling against ground truth");
  std::string pred_path, truth_path;
  eval->add_option("--pred", pred_path, "Predicted labels CSV")->required();
  eval->add_option("--truth", truth_path, "Ground-truth labels CSV")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a Gaussian-blob multi-view dataset");
  mvsc::SynthConfig sc;
  std::string synth_out;
  synth->add_option("--n", sc.n, "Samples")->required();
  synth->add_option("--k", sc.k, "Clusters")->required();
  synth->add_option("--views", sc.views, "Views")->required();
  synth->add_option("--noise", sc.noise, "Within-cluster sigma")->required();
  synth->add_option("--separation", sc.separation, "Center distance in sigmas");
  synth->add_option("--dims", sc.dims, "Feature dimension (default k + 2)");
  synth->add_option("--corrupt", sc.corrupted, "Zero-based views replaced by pure noise");
  synth->add_option("--seed", sc.seed, "Seed");
  synth->add_option("--out", synth_out, "Dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const mvsc::ExperimentConfig cfg = mvsc::load_experiment_config(config_path);
      const mvsc::MultiViewDataset ds = mvsc::load_dataset(cfg.dataset);
      const mvsc::ExperimentReport rep = mvsc::run_experiment(ds, cfg, workers);
      mvsc::emit_report(rep, out_dir);
      for (const auto& [method, idx] : rep.best) {
        const auto& row = rep.rows[static_cast<std::size_t>(idx)];
        std::cout << method << ": ACC " << row.acc << "  NMI " << row.nmi << "  purity " << row.purity
                  << "  (N=" << row.neighbors << ", hash " << row.config_hash << ")\n";
      }
      std::size_t failed = 0;
      for (const auto& row : rep.rows) failed += row.status != "ok";
      std::cout << rep.rows.size() << " rows, " << failed << " failed; reports in " << out_dir << "\n";
    } else if (*embed) {
      const mvsc::Matrix input = mvsc::read_csv(view_path);
      mvsc::AffinityMatrix first;
      if (is_affinity) {
        mvsc::validate_affinity_input(input, view_path);
        first = mvsc::build_knn_affinity(input, neighbors, 0);
      } else {
        mvsc::GraphConfig g{neighbors, std::nullopt, order};
        if (bandwidth > 0.0) g.bandwidth = bandwidth;
        first = mvsc::knn_affinity_from_features({input, 0}, g);
      }
      const mvsc::AffinityMatrix a = order == 1 ? first : mvsc::high_order_affinity(first, order);
      mvsc::EmbeddingBackend backend;
      if (!nystrom_spec.empty()) {
        const auto [m, s] = parse_nystrom(nystrom_spec);
        backend.kind = mvsc::EmbeddingKind::nystrom;
        backend.nystrom = {m, s, k, embed_seed};
      }
      mvsc::write_csv(embed_out, mvsc::embed_affinity(a, k, backend).values);
    } else if (*eval) {
      const mvsc::Metrics m = mvsc::evaluate(read_label_file(pred_path), read_label_file(truth_path));
      nlohmann::json j{{"acc", m.acc}, {"nmi", m.nmi}, {"purity", m.purity}};
      std::cout << j.dump() << "\n";
    } else if (*synth) {
      mvsc::save_dataset(synth_out, mvsc::synthesize(sc));
    }
  } catch (const mvsc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
