#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mvsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Failure category. Each maps onto one CLI exit code.
enum class ErrorKind {
  config,     // bad parameters, grids, missing labels
  data,       // malformed or inconsistent input
  numerical,  // degenerate spectra, rank deficiency, non-convergence
};

enum class ErrorCode {
  rejected_input,
  invalid_config,
  invalid_order,
  invalid_rank,
  degenerate_spectrum,
  rank_deficiency,
  convergence_failure,
  degenerate_view,
  length_mismatch,
  shape_mismatch,
  symmetry_error,
  parse_failure,
  missing_labels,
  io_error,
};

inline ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_order:
    case ErrorCode::invalid_rank:
    case ErrorCode::missing_labels:
      return ErrorKind::config;
    case ErrorCode::degenerate_spectrum:
    case ErrorCode::rank_deficiency:
    case ErrorCode::convergence_failure:
    case ErrorCode::degenerate_view:
      return ErrorKind::numerical;
    default:
      return ErrorKind::data;
  }
}

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::rejected_input: return "rejected_input";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::invalid_order: return "invalid_order";
    case ErrorCode::invalid_rank: return "invalid_rank";
    case ErrorCode::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorCode::rank_deficiency: return "rank_deficiency";
    case ErrorCode::convergence_failure: return "convergence_failure";
    case ErrorCode::degenerate_view: return "degenerate_view";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::symmetry_error: return "symmetry_error";
    case ErrorCode::parse_failure: return "parse_failure";
    case ErrorCode::missing_labels: return "missing_labels";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

/// splitmix64 finalizer; used to derive independent seeded streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
  return mix64(seed ^ mix64(a + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double symmetry_defect(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Flip each column so its entry of largest magnitude is positive
/// (first such entry on ties).
inline void fix_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

}  // namespace mvsc
