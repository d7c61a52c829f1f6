#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mvsc/core.hpp"
#include "mvsc/dataset.hpp"
#include "mvsc/early_fusion.hpp"
#include "mvsc/eval.hpp"
#include "mvsc/graph.hpp"
#include "mvsc/late_fusion.hpp"
#include "mvsc/spectral.hpp"

namespace mvsc {

// ---------------------------------------------------------------------------
// Graph construction for a dataset

/// First-order union-KNN graphs, one per view. Feature views go through the
/// Gaussian kernel; precomputed affinities are sparsified directly.
inline std::vector<AffinityMatrix> first_order_affinities(const MultiViewDataset& ds, const GraphConfig& cfg) {
  std::vector<AffinityMatrix> out;
  for (int p = 0; p < ds.v(); ++p) {
    const DatasetView& view = ds.views[static_cast<std::size_t>(p)];
    if (view.kind == ViewKind::features) {
      out.push_back(knn_affinity_from_features({view.data, p}, cfg));
    } else {
      out.push_back(build_knn_affinity(view.data, cfg.neighbors, p));
    }
  }
  return out;
}

struct ClusteringOutcome {
  Labeling labeling;
  std::optional<Metrics> metrics;
};

inline ClusteringOutcome cluster_rows(const Matrix& h, int k, const KmeansConfig& km,
                                      const std::optional<Labeling>& truth) {
  ClusteringOutcome out{kmeans(h, k, km).labeling, std::nullopt};
  if (truth) out.metrics = evaluate(out.labeling, *truth);
  return out;
}

/// Spectral clustering on the uniformly averaged first-order Laplacian.
inline ClusteringOutcome baseline_amvsc(const MultiViewDataset& ds, int k, const GraphConfig& graph,
                                        const KmeansConfig& km = {}, const EmbeddingBackend& backend = {}) {
  const auto graphs = first_order_affinities(ds, graph);
  const Index n = ds.n();
  Matrix h;
  if (backend.kind == EmbeddingKind::exact) {
    Matrix avg = Matrix::Zero(n, n);
    for (const AffinityMatrix& a : graphs) avg += normalized_laplacian(a).values;
    avg /= static_cast<double>(graphs.size());
    h = bottom_k_eigenvectors(avg, k).values;
  } else {
    Matrix g = Matrix::Zero(n, n);
    for (const AffinityMatrix& a : graphs) g += normalized_affinity(a);
    g /= static_cast<double>(graphs.size());
    NystromConfig cfg = backend.nystrom;
    cfg.rank = k;
    h = orthogonalize(nystrom_embedding(g, cfg)).partition.values;
  }
  return cluster_rows(h, k, km, ds.labels);
}

struct SbscOutcome {
  std::vector<ClusteringOutcome> per_view;
  int best_view = 0;
};

/// Spectral clustering per view; reports the view with the highest ACC.
inline SbscOutcome baseline_sbsc(const MultiViewDataset& ds, int k, const GraphConfig& graph,
                                 const KmeansConfig& km = {}, const EmbeddingBackend& backend = {}) {
  require(ds.labels.has_value(), ErrorCode::missing_labels, "single-best-view selection needs ground truth");
  SbscOutcome out;
  const auto graphs = first_order_affinities(ds, graph);
  for (const AffinityMatrix& a : graphs) {
    out.per_view.push_back(cluster_rows(embed_affinity(a, k, backend).values, k, km, ds.labels));
    const auto& cur = out.per_view.back();
    if (cur.metrics->acc > out.per_view[static_cast<std::size_t>(out.best_view)].metrics->acc)
      out.best_view = static_cast<int>(out.per_view.size()) - 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration

enum class Method { onmsc_ef, onmsc_lf, amvsc, sbsc };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::onmsc_ef: return "onmsc-ef";
    case Method::onmsc_lf: return "onmsc-lf";
    case Method::amvsc: return "amvsc";
    case Method::sbsc: return "sbsc";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "onmsc-ef") return Method::onmsc_ef;
  if (s == "onmsc-lf") return Method::onmsc_lf;
  if (s == "amvsc") return Method::amvsc;
  if (s == "sbsc") return Method::sbsc;
  throw Error(ErrorCode::invalid_config, "unknown method '" + s + "'");
}

/// Powers of two 2^lo, 2^(lo+step), ..., 2^hi.
inline std::vector<double> power_grid(int lo, int hi, int step) {
  std::vector<double> out;
  for (int e = lo; e <= hi; e += step) out.push_back(std::ldexp(1.0, e));
  return out;
}

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::vector<Method> methods{Method::onmsc_lf};
  int k = 2;
  int order = 2;
  std::vector<double> neighbor_fractions{0.1};  // of s = n / k
  std::optional<double> bandwidth;
  std::vector<double> lambda1{1.0};
  std::vector<double> lambda2{1.0};
  std::vector<double> alpha{1.0};
  EmbeddingBackend embedding;
  KmeansConfig kmeans;
  std::uint64_t seed = 0;
  QpVariant qp_variant = QpVariant::derived;
  double tol = 1e-4;
  int max_iter = 100;
};

inline void validate(const ExperimentConfig& cfg) {
  require(!cfg.methods.empty(), ErrorCode::invalid_config, "no methods");
  require(cfg.k >= 1, ErrorCode::invalid_config, "k must be >= 1");
  require(cfg.order >= 1, ErrorCode::invalid_config, "order must be >= 1");
  require(!cfg.neighbor_fractions.empty() && !cfg.lambda1.empty() && !cfg.lambda2.empty() && !cfg.alpha.empty(),
          ErrorCode::invalid_config, "parameter grids must be non-empty");
  for (double f : cfg.neighbor_fractions) require(f > 0.0, ErrorCode::invalid_config, "neighbor fractions must be > 0");
  for (double l : cfg.lambda1) require(l >= 0.0, ErrorCode::invalid_config, "lambda1 must be >= 0");
  for (double l : cfg.lambda2) require(l >= 0.0, ErrorCode::invalid_config, "lambda2 must be >= 0");
  for (double a : cfg.alpha) require(a >= 0.0, ErrorCode::invalid_config, "alpha must be >= 0");
  require(cfg.kmeans.restarts >= 1, ErrorCode::invalid_config, "kmeans restarts must be >= 1");
}

namespace detail {

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

}  // namespace detail

/// Parses the JSON experiment document. Relative dataset paths resolve
/// against `base_dir`.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                                const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  try {
    const std::filesystem::path ds = j.at("dataset").get<std::string>();
    cfg.dataset = ds.is_absolute() || base_dir.empty() ? ds : base_dir / ds;
    cfg.methods.clear();
    for (const auto& m : detail::scalar_or_list<std::string>(j, "method", {"onmsc-lf"})) cfg.methods.push_back(parse_method(m));
    cfg.k = j.at("k").get<int>();
    cfg.order = j.value("order", 2);
    cfg.neighbor_fractions = detail::scalar_or_list<double>(j, "neighbor_fractions", cfg.neighbor_fractions);
    if (j.contains("bandwidth")) {
      const auto& b = j.at("bandwidth");
      if (b.is_string()) {
        require(b.get<std::string>() == "median", ErrorCode::invalid_config, "bandwidth must be a number or \"median\"");
      } else {
        cfg.bandwidth = b.get<double>();
        require(*cfg.bandwidth > 0.0, ErrorCode::invalid_config, "bandwidth must be positive");
      }
    }
    cfg.lambda1 = detail::scalar_or_list<double>(j, "lambda1", cfg.lambda1);
    cfg.lambda2 = detail::scalar_or_list<double>(j, "lambda2", cfg.lambda2);
    cfg.alpha = detail::scalar_or_list<double>(j, "alpha", cfg.alpha);
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("embedding")) {
      const auto& e = j.at("embedding");
      const std::string kind = e.value("kind", std::string("exact"));
      require(kind == "exact" || kind == "nystrom", ErrorCode::invalid_config, "embedding kind must be exact or nystrom");
      if (kind == "nystrom") {
        cfg.embedding.kind = EmbeddingKind::nystrom;
        cfg.embedding.nystrom.samples = e.at("m").get<int>();
        cfg.embedding.nystrom.oversampling = e.value("s", 10);
        cfg.embedding.nystrom.seed = e.value("seed", derive_seed(cfg.seed, 0x4e7953ULL));
        require(cfg.embedding.nystrom.oversampling >= 2, ErrorCode::invalid_config, "oversampling s must be >= 2");
      }
    }
    if (j.contains("kmeans")) {
      const auto& km = j.at("kmeans");
      cfg.kmeans.restarts = km.value("restarts", 50);
      cfg.kmeans.max_iterations = km.value("max_iterations", 300);
      cfg.kmeans.seed = km.value("seed", cfg.seed);
    } else {
      cfg.kmeans.seed = cfg.seed;
    }
    const std::string variant = j.value("qp_variant", std::string("derived"));
    require(variant == "derived" || variant == "literal", ErrorCode::invalid_config,
            "qp_variant must be derived or literal");
    cfg.qp_variant = variant == "derived" ? QpVariant::derived : QpVariant::literal;
    cfg.tol = j.value("tol", 1e-4);
    cfg.max_iter = j.value("max_iter", 100);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::invalid_config, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("config: ") + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Report

struct ReportRow {
  std::string method;
  std::string config_hash;
  int neighbors = 0;
  double neighbor_fraction = 0.0;
  int order = 1;
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  std::string error;
  double acc = std::numeric_limits<double>::quiet_NaN();
  double nmi = std::numeric_limits<double>::quiet_NaN();
  double purity = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = true;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> weights;
  int best_view = -1;
  // indicative only
  double wall_time_s = 0.0;
  long peak_rss_kb = 0;
  SolveTrace trace;
};

struct ExperimentReport {
  std::string dataset;
  Index n = 0;
  int v = 0;
  int k = 0;
  std::vector<ReportRow> rows;
  std::map<std::string, int> best;  // method -> row index with the highest ACC
};

/// High-water resident set size of this process, from /proc (0 if absent).
inline long peak_rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("VmHWM:", 0) == 0) return std::stol(line.substr(6));
  return 0;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fnv1a_hex(const std::string& s) {
  const std::uint64_t h = fnv1a(s);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

struct Cell {
  Method method;
  double fraction;
  double lambda1;
  double lambda2;
  double alpha;
};

inline std::vector<Cell> expand_grid(const ExperimentConfig& cfg) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Cell> cells;
  for (Method m : cfg.methods)
    for (double f : cfg.neighbor_fractions) {
      switch (m) {
        case Method::onmsc_lf:
          for (double l1 : cfg.lambda1)
            for (double l2 : cfg.lambda2) cells.push_back({m, f, l1, l2, nan});
          break;
        case Method::onmsc_ef:
          for (double a : cfg.alpha) cells.push_back({m, f, nan, nan, a});
          break;
        default:
          cells.push_back({m, f, nan, nan, nan});
      }
    }
  return cells;
}

inline int neighbors_for(double fraction, Index n, int k) {
  const double s = static_cast<double>(n) / static_cast<double>(k);
  const long count = std::lround(fraction * s);
  return static_cast<int>(std::clamp<long>(count, 1, static_cast<long>(n) - 1));
}

inline std::string cell_key(const Cell& c, int neighbors, const ExperimentConfig& cfg) {
  std::string key = std::string(to_string(c.method)) + "|N=" + std::to_string(neighbors) +
                    "|O=" + std::to_string(cfg.order) + "|l1=" + format_double(c.lambda1) +
                    "|l2=" + format_double(c.lambda2) + "|a=" + format_double(c.alpha) +
                    "|seed=" + std::to_string(cfg.seed);
  if (cfg.embedding.kind == EmbeddingKind::nystrom)
    key += "|m=" + std::to_string(cfg.embedding.nystrom.samples) + "|s=" +
           std::to_string(cfg.embedding.nystrom.oversampling);
  return key;
}

inline void fill_metrics(ReportRow& row, const ClusteringOutcome& out) {
  if (!out.metrics) return;
  row.acc = out.metrics->acc;
  row.nmi = out.metrics->nmi;
  row.purity = out.metrics->purity;
}

inline ReportRow run_cell(const MultiViewDataset& ds, const ExperimentConfig& cfg, const Cell& cell) {
  const auto start = std::chrono::steady_clock::now();
  ReportRow row;
  row.method = to_string(cell.method);
  row.neighbor_fraction = cell.fraction;
  row.neighbors = neighbors_for(cell.fraction, ds.n(), cfg.k);
  row.order = cell.method == Method::onmsc_lf || cell.method == Method::onmsc_ef ? cfg.order : 1;
  row.lambda1 = cell.lambda1;
  row.lambda2 = cell.lambda2;
  row.alpha = cell.alpha;
  const std::string key = cell_key(cell, row.neighbors, cfg);
  row.config_hash = fnv1a_hex(key);

  KmeansConfig km = cfg.kmeans;
  km.seed = derive_seed(cfg.kmeans.seed, fnv1a(key));
  const GraphConfig graph{row.neighbors, cfg.bandwidth, cfg.order};

  try {
    switch (cell.method) {
      case Method::amvsc:
        fill_metrics(row, baseline_amvsc(ds, cfg.k, graph, km, cfg.embedding));
        break;
      case Method::sbsc: {
        const SbscOutcome out = baseline_sbsc(ds, cfg.k, graph, km, cfg.embedding);
        row.best_view = out.best_view;
        fill_metrics(row, out.per_view[static_cast<std::size_t>(out.best_view)]);
        break;
      }
      case Method::onmsc_lf: {
        const auto graphs = first_order_affinities(ds, graph);
        LfProblem prob;
        prob.base = base_partitions(graphs, cfg.order, cfg.k, cfg.embedding);
        prob.average = average_partition(graphs, cfg.k, cfg.embedding);
        prob.lambda1 = cell.lambda1;
        prob.lambda2 = cell.lambda2;
        prob.variant = cfg.qp_variant;
        const LfResult res = solve_lf(prob, cfg.tol, cfg.max_iter);
        row.trace = res.trace;
        row.weights.assign(res.state.mu.data(), res.state.mu.data() + res.state.mu.size());
        fill_metrics(row, cluster_rows(res.state.consensus, cfg.k, km, ds.labels));
        break;
      }
      case Method::onmsc_ef: {
        const auto graphs = first_order_affinities(ds, graph);
        const EfProblem prob = make_ef_problem(graphs, cfg.order, cfg.k, cell.alpha);
        const EfResult res = solve_ef(prob, cfg.tol, cfg.max_iter);
        row.trace = res.trace;
        row.weights.assign(res.state.mu.data(), res.state.mu.data() + res.state.mu.size());
        fill_metrics(row, cluster_rows(res.state.h.values, cfg.k, km, ds.labels));
        break;
      }
    }
    row.iterations = row.trace.iterations();
    row.converged = row.trace.objective.empty() || row.trace.converged;
    if (!row.trace.objective.empty()) row.objective = row.trace.objective.back();
  } catch (const Error& e) {
    row.status = "failed";
    row.error = e.what();
  }
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.peak_rss_kb = peak_rss_kb();
  return row;
}

}  // namespace detail

/// Runs every grid cell; failures are recorded per row. Rows keep grid
/// order regardless of worker count.
inline ExperimentReport run_experiment(const MultiViewDataset& ds, const ExperimentConfig& cfg, int workers = 1) {
  validate(cfg);
  require(ds.v() >= 1, ErrorCode::invalid_config, "dataset has no views");
  require(cfg.k <= ds.n(), ErrorCode::invalid_config, "k exceeds sample count");
  for (Method m : cfg.methods)
    if (m == Method::sbsc)
      require(ds.labels.has_value(), ErrorCode::missing_labels, "sbsc needs ground-truth labels");

  ExperimentReport report;
  report.dataset = ds.name;
  report.n = ds.n();
  report.v = ds.v();
  report.k = cfg.k;
  const std::vector<detail::Cell> cells = detail::expand_grid(cfg);
  report.rows.resize(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) report.rows[i] = detail::run_cell(ds, cfg, cells[i]);
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const ReportRow& row = report.rows[i];
    if (row.status != "ok" || std::isnan(row.acc)) continue;
    auto it = report.best.find(row.method);
    if (it == report.best.end() || row.acc > report.rows[static_cast<std::size_t>(it->second)].acc)
      report.best[row.method] = static_cast<int>(i);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report emission

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "method", "config_hash", "neighbors", "neighbor_fraction", "order", "lambda1", "lambda2", "alpha",
      "status", "acc", "nmi", "purity", "iterations", "converged", "objective", "weights", "best_view",
      "wall_time_s", "peak_rss_kb", "error"};
  return cols;
}

namespace detail {

inline std::string num_field(double x) { return std::isnan(x) ? "" : format_double(x); }

inline nlohmann::json num_json(double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string join_weights(const std::vector<double>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? ";" : "") + format_double(w[i]);
  return out;
}

}  // namespace detail

inline nlohmann::json row_to_json(const ReportRow& r) {
  using detail::num_json;
  return {{"method", r.method},
          {"config_hash", r.config_hash},
          {"neighbors", r.neighbors},
          {"neighbor_fraction", r.neighbor_fraction},
          {"order", r.order},
          {"lambda1", num_json(r.lambda1)},
          {"lambda2", num_json(r.lambda2)},
          {"alpha", num_json(r.alpha)},
          {"status", r.status},
          {"acc", num_json(r.acc)},
          {"nmi", num_json(r.nmi)},
          {"purity", num_json(r.purity)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"objective", num_json(r.objective)},
          {"weights", r.weights},
          {"best_view", r.best_view},
          {"wall_time_s", r.wall_time_s},
          {"peak_rss_kb", r.peak_rss_kb},
          {"error", r.error},
          {"trace", r.trace.objective}};
}

inline std::vector<std::string> row_to_csv_fields(const ReportRow& r) {
  using detail::num_field;
  return {r.method,
          r.config_hash,
          std::to_string(r.neighbors),
          format_double(r.neighbor_fraction),
          std::to_string(r.order),
          num_field(r.lambda1),
          num_field(r.lambda2),
          num_field(r.alpha),
          r.status,
          num_field(r.acc),
          num_field(r.nmi),
          num_field(r.purity),
          std::to_string(r.iterations),
          r.converged ? "true" : "false",
          num_field(r.objective),
          detail::join_weights(r.weights),
          std::to_string(r.best_view),
          format_double(r.wall_time_s),
          std::to_string(r.peak_rss_kb),
          detail::csv_escape(r.error)};
}

inline nlohmann::json report_to_json(const ExperimentReport& rep) {
  nlohmann::json j;
  j["dataset"] = rep.dataset;
  j["n"] = rep.n;
  j["v"] = rep.v;
  j["k"] = rep.k;
  j["selection"] = "oracle: best ACC over the parameter grid against ground truth, no validation split";
  j["nmi_normalization"] = "geometric mean of entropies";
  j["timing_note"] = "wall_time_s and peak_rss_kb are indicative self-measurements";
  j["rows"] = nlohmann::json::array();
  for (const ReportRow& r : rep.rows) j["rows"].push_back(row_to_json(r));
  j["best"] = nlohmann::json::object();
  for (const auto& [method, idx] : rep.best) j["best"][method] = idx;
  return j;
}

/// Writes report.json, report.csv and one trace_<config_hash>.csv per row
/// that has an objective trace.
inline void emit_report(const ExperimentReport& rep, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorCode::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
  {
    std::ofstream out(out_dir / "report.json");
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write report.json");
    out << report_to_json(rep).dump(2) << '\n';
  }
  {
    std::ofstream out(out_dir / "report.csv");
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write report.csv");
    const auto& cols = report_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (const ReportRow& r : rep.rows) {
      const auto fields = row_to_csv_fields(r);
      for (std::size_t c = 0; c < fields.size(); ++c) out << (c ? "," : "") << fields[c];
      out << '\n';
    }
    require(static_cast<bool>(out), ErrorCode::io_error, "write failed for report.csv");
  }
  for (const ReportRow& r : rep.rows) {
    if (r.trace.objective.empty()) continue;
    std::ofstream out(out_dir / ("trace_" + r.config_hash + ".csv"));
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write trace file");
    out << "iteration,objective,seconds";
    const std::size_t v = r.trace.weights.empty() ? 0 : static_cast<std::size_t>(r.trace.weights.front().size());
    for (std::size_t p = 0; p < v; ++p) out << ",mu_" << p;
    out << '\n';
    for (std::size_t t = 0; t < r.trace.objective.size(); ++t) {
      out << t + 1 << ',' << format_double(r.trace.objective[t]) << ',' << format_double(r.trace.seconds[t]);
      for (std::size_t p = 0; p < v; ++p) out << ',' << format_double(r.trace.weights[t](static_cast<Index>(p)));
      out << '\n';
    }
  }
}

}  // namespace mvsc
