#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvsc/core.hpp"
#include "mvsc/eval.hpp"
#include "mvsc/graph.hpp"

namespace mvsc {

namespace fs = std::filesystem;

enum class ViewKind { features, affinity };

struct DatasetView {
  ViewKind kind = ViewKind::features;
  Matrix data;
  std::string file;
};

struct MultiViewDataset {
  std::string name;
  std::vector<DatasetView> views;
  std::optional<Labeling> labels;

  Index n() const { return views.empty() ? 0 : views.front().data.rows(); }
  int v() const { return static_cast<int>(views.size()); }
};

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto r = std::from_chars(field.data(), field.data() + field.size(), value);
  require(r.ec == std::errc() && r.ptr == field.data() + field.size(), ErrorCode::parse_failure,
          "cannot parse '" + std::string(field) + "' in " + where);
  return value;
}

inline std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(parse_double(std::string_view(line).substr(start, comma - start), where));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorCode::parse_failure,
            "ragged row at " + where);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix read_csv(const fs::path& path) {
  const auto rows = read_csv_rows(path);
  require(!rows.empty(), ErrorCode::parse_failure, "empty matrix file " + path.string());
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

/// Shortest round-tripping decimal text, row-major.
inline void write_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::io_error, "write failed for " + path.string());
}

inline Labeling read_labels(const fs::path& path) {
  const Matrix m = read_csv(path);
  require(m.cols() == 1, ErrorCode::parse_failure, "label file must have a single column: " + path.string());
  std::vector<int> labels;
  for (Index i = 0; i < m.rows(); ++i) {
    const double x = m(i, 0);
    require(x >= 0.0 && std::floor(x) == x, ErrorCode::parse_failure, "labels must be non-negative integers");
    labels.push_back(static_cast<int>(x));
  }
  return make_labeling(std::move(labels));
}

inline void write_labels(const fs::path& path, const Labeling& l) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path.string());
  for (int x : l.labels) out << x << '\n';
}

// ---------------------------------------------------------------------------
// Dataset directories

inline void validate_affinity_input(const Matrix& a, const std::string& what) {
  require(a.rows() == a.cols(), ErrorCode::shape_mismatch, what + " affinity must be square");
  require(all_finite(a), ErrorCode::rejected_input, what + " affinity has non-finite entries");
  require(symmetry_defect(a) <= 1e-10, ErrorCode::symmetry_error, what + " affinity is not symmetric");
  require(a.minCoeff() >= 0.0, ErrorCode::rejected_input, what + " affinity has negative entries");
}

inline MultiViewDataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  require(static_cast<bool>(in), ErrorCode::io_error, "missing " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_failure, "manifest.json: " + std::string(e.what()));
  }
  MultiViewDataset ds;
  try {
    ds.name = manifest.value("name", dir.filename().string());
    const auto& views = manifest.at("views");
    require(views.is_array() && !views.empty(), ErrorCode::parse_failure, "manifest lists no views");
    for (const auto& v : views) {
      DatasetView view;
      const std::string kind = v.at("kind").get<std::string>();
      require(kind == "features" || kind == "affinity", ErrorCode::parse_failure, "unknown view kind " + kind);
      view.kind = kind == "features" ? ViewKind::features : ViewKind::affinity;
      view.file = v.at("file").get<std::string>();
      view.data = read_csv(dir / view.file);
      ds.views.push_back(std::move(view));
    }
    const Index n = ds.views.front().data.rows();
    if (manifest.contains("n"))
      require(manifest.at("n").get<Index>() == n, ErrorCode::shape_mismatch, "manifest n disagrees with view rows");
    for (const DatasetView& view : ds.views) {
      require(view.data.rows() == n, ErrorCode::shape_mismatch, view.file + " has a different sample count");
      if (view.kind == ViewKind::affinity)
        validate_affinity_input(view.data, view.file);
      else
        require(all_finite(view.data), ErrorCode::rejected_input, view.file + " has non-finite entries");
    }
    if (manifest.contains("labels") && !manifest.at("labels").is_null()) {
      ds.labels = read_labels(dir / manifest.at("labels").get<std::string>());
      require(static_cast<Index>(ds.labels->size()) == n, ErrorCode::shape_mismatch, "label count differs from n");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_failure, "manifest.json: " + std::string(e.what()));
  }
  return ds;
}

inline void save_dataset(const fs::path& dir, const MultiViewDataset& ds) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["name"] = ds.name;
  manifest["n"] = ds.n();
  manifest["views"] = nlohmann::json::array();
  for (int p = 0; p < ds.v(); ++p) {
    const DatasetView& view = ds.views[static_cast<std::size_t>(p)];
    const bool features = view.kind == ViewKind::features;
    const std::string file =
        view.file.empty() ? (features ? "view_" : "affinity_") + std::to_string(p + 1) + ".csv" : view.file;
    write_csv(dir / file, view.data);
    manifest["views"].push_back({{"kind", features ? "features" : "affinity"}, {"file", file}});
  }
  if (ds.labels) {
    write_labels(dir / "labels.csv", *ds.labels);
    manifest["labels"] = "labels.csv";
  }
  std::ofstream out(dir / "manifest.json");
  require(static_cast<bool>(out), ErrorCode::io_error, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthConfig {
  Index n = 300;
  int k = 3;
  int views = 3;
  double noise = 1.0;        // sigma of the within-cluster spread
  double separation = 6.0;   // center distance in units of sigma
  int dims = 0;              // 0: k + 2
  std::vector<int> corrupted;  // views replaced by structureless noise
  std::uint64_t seed = 0;
};

/// Gaussian blobs, one feature view per entry; sample i belongs to cluster
/// i mod k. Each view places the cluster centers on a per-view permutation
/// of the coordinate axes so pairwise center distance is separation * sigma.
inline MultiViewDataset synthesize(const SynthConfig& cfg) {
  require(cfg.n >= 2 && cfg.k >= 1 && cfg.k <= cfg.n && cfg.views >= 1, ErrorCode::invalid_config,
          "synthetic generator needs n >= k >= 1 and at least one view");
  require(cfg.noise > 0.0, ErrorCode::invalid_config, "noise must be positive");
  const int dims = cfg.dims > 0 ? cfg.dims : cfg.k + 2;
  require(dims >= cfg.k, ErrorCode::invalid_config, "dims must be >= k");
  MultiViewDataset ds;
  ds.name = "synthetic";
  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  for (Index i = 0; i < cfg.n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % cfg.k);
  ds.labels = Labeling{labels, cfg.k};
  const double radius = cfg.separation * cfg.noise / std::sqrt(2.0);
  for (int p = 0; p < cfg.views; ++p) {
    std::mt19937_64 gen(derive_seed(cfg.seed, static_cast<std::uint64_t>(p)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<int> axes(static_cast<std::size_t>(dims));
    std::iota(axes.begin(), axes.end(), 0);
    std::shuffle(axes.begin(), axes.end(), gen);
    const bool corrupt = std::find(cfg.corrupted.begin(), cfg.corrupted.end(), p) != cfg.corrupted.end();
    Matrix x(cfg.n, dims);
    for (Index i = 0; i < cfg.n; ++i) {
      for (int d = 0; d < dims; ++d) x(i, d) = cfg.noise * normal(gen);
      if (!corrupt) x(i, axes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]) += radius;
    }
    ds.views.push_back({ViewKind::features, std::move(x), ""});
  }
  return ds;
}

}  // namespace mvsc
