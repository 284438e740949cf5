// optimize.hpp
// Fidelity-landscape grid scans over the detuning mismatches and the pulse
// period, and bounded Nelder-Mead refinement of an operating point.

#pragma once

#include "facilitrans/observables.hpp"

#include <functional>
#include <string>
#include <vector>

namespace facilitrans {

enum class Objective { TruthTable, TransferPopulation };

Objective objective_from_string(const std::string& name);
std::string to_string(Objective objective);

/// Tunable parameter names: "d_delta1", "d_delta2", "period_scale".
void set_parameter(ModelParams& params, const std::string& name, Real value);
Real get_parameter(const ModelParams& params, const std::string& name);

struct ScanAxis {
  std::string name;
  Real min = 0.0;
  Real max = 0.0;
  int count = 2;

  Real value(int i) const { return count == 1 ? min : min + (max - min) * i / (count - 1); }
};

struct ScanGrid {
  std::vector<ScanAxis> axes;
  Objective objective = Objective::TruthTable;

  void validate() const;
  std::size_t size() const;
  /// Row-major: the last axis varies fastest.
  std::vector<Real> point(std::size_t flat) const;
};

/// Everything held fixed while the tuned parameters move.
struct TransportProblem {
  ChainGeometry geometry;
  ModelParams params;
  PulseSchedule schedule;
  int in_site = 1;
  int out_site = 1;
  RunOptions options;
};

Real evaluate_objective(const TransportProblem& problem, Objective objective,
                        const std::vector<std::string>& names, const std::vector<Real>& values);

struct ScanSurface {
  std::vector<ScanAxis> axes;
  std::vector<std::vector<Real>> points;
  std::vector<Real> values;

  std::size_t argmax() const;
};

ScanSurface scan(const ScanGrid& grid, const TransportProblem& problem, int workers = 1);

struct NelderMeadSettings {
  Real reflection = 1.0;
  Real expansion = 2.0;
  Real contraction = 0.5;
  Real shrink = 0.5;
  Real initial_edge = 0.02;  // fraction of each bound range
  Real spread_tolerance = 1e-5;
  int max_iterations = 200;
};

struct RefineStep {
  int iteration = 0;
  Real best = 0.0;
  std::vector<Real> point;
};

struct OptimumReport {
  std::vector<std::string> names;
  std::vector<Real> best_point;
  Real best_objective = 0.0;
  Real start_objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool max_iterations_reached = false;
  bool at_bound = false;
  std::vector<RefineStep> trace;
};

/// Maximizes `objective` inside [lower, upper]; trial points are clamped to the box.
/// The reported best is a running maximum over every evaluated point.
OptimumReport refine(const std::function<Real(const std::vector<Real>&)>& objective,
                     const std::vector<Real>& start, const std::vector<Real>& lower,
                     const std::vector<Real>& upper, const NelderMeadSettings& settings = {});

OptimumReport refine(const TransportProblem& problem, Objective objective,
                     const std::vector<std::string>& names, const std::vector<Real>& start,
                     const std::vector<Real>& lower, const std::vector<Real>& upper,
                     const NelderMeadSettings& settings = {});

}  // namespace facilitrans
