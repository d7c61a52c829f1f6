#pragma once

#include <chrono>
#include <vector>

#include "mvsc/core.hpp"

namespace mvsc {

/// Per-iteration record of a solver run.
struct SolveTrace {
  std::vector<double> objective;       // one value per completed iteration
  std::vector<double> step_objective;  // value after every block step
  std::vector<Vector> weights;
  std::vector<double> seconds;
  bool converged = false;

  int iterations() const { return static_cast<int>(objective.size()); }

  void record(double obj, const Vector& mu, std::chrono::steady_clock::duration elapsed) {
    objective.push_back(obj);
    weights.push_back(mu);
    seconds.push_back(std::chrono::duration<double>(elapsed).count());
  }
};

}  // namespace mvsc
