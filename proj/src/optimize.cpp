#include "facilitrans/optimize.hpp"

#include "facilitrans/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace facilitrans {

Objective objective_from_string(const std::string& name) {
  if (name == "truth_table") return Objective::TruthTable;
  if (name == "transfer_population") return Objective::TransferPopulation;
  throw Error(ErrorCode::Config, "unknown objective '" + name + "'");
}

std::string to_string(Objective objective) {
  return objective == Objective::TruthTable ? "truth_table" : "transfer_population";
}

void set_parameter(ModelParams& params, const std::string& name, Real value) {
  if (name == "d_delta1") {
    params.d_delta1 = value;
  } else if (name == "d_delta2") {
    params.d_delta2 = value;
  } else if (name == "period_scale") {
    params.period_scale = value;
  } else {
    throw Error(ErrorCode::Config, "unknown scan parameter '" + name + "'");
  }
}

Real get_parameter(const ModelParams& params, const std::string& name) {
  if (name == "d_delta1") return params.d_delta1;
  if (name == "d_delta2") return params.d_delta2;
  if (name == "period_scale") return params.period_scale;
  throw Error(ErrorCode::Config, "unknown scan parameter '" + name + "'");
}

void ScanGrid::validate() const {
  if (axes.empty() || axes.size() > 3) throw Error(ErrorCode::InvalidGrid, "grid needs 1 to 3 axes");
  for (const auto& axis : axes) {
    ModelParams probe;
    set_parameter(probe, axis.name, 0.0);
    if (axis.count < 1) throw Error(ErrorCode::InvalidGrid, axis.name + ": count must be positive");
    // A single-point axis is a degenerate scan at `min`.
    if (axis.count == 1 ? axis.max != axis.min : !(axis.min < axis.max)) {
      throw Error(ErrorCode::InvalidGrid, axis.name + ": need min < max (or min == max with count 1)");
    }
  }
}

std::size_t ScanGrid::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= static_cast<std::size_t>(axis.count);
  return n;
}

std::vector<Real> ScanGrid::point(std::size_t flat) const {
  std::vector<Real> out(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const auto count = static_cast<std::size_t>(axes[k].count);
    out[k] = axes[k].value(static_cast<int>(flat % count));
    flat /= count;
  }
  return out;
}

Real evaluate_objective(const TransportProblem& problem, Objective objective,
                        const std::vector<std::string>& names, const std::vector<Real>& values) {
  ModelParams params = problem.params;
  for (std::size_t k = 0; k < names.size(); ++k) set_parameter(params, names[k], values[k]);
  if (objective == Objective::TruthTable) {
    return truth_table_fidelity(problem.geometry, params, problem.schedule, problem.in_site,
                                problem.out_site, problem.options);
  }
  const PureState input = single_excitation(problem.geometry.n_sites(), problem.in_site);
  RunOptions fast = problem.options;
  fast.samples_per_pulse = 1;
  const QuantumState initial =
      params.dissipative() ? QuantumState(to_density(input)) : QuantumState(input);
  const auto traj = run_schedule(initial, problem.schedule, problem.geometry, params, fast);
  return transfer_population(traj, problem.out_site, problem.schedule.size());
}

std::size_t ScanSurface::argmax() const {
  if (values.empty()) throw Error(ErrorCode::InvalidGrid, "empty surface");
  // First maximum in flat order, so ties resolve deterministically.
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

ScanSurface scan(const ScanGrid& grid, const TransportProblem& problem, int workers) {
  grid.validate();
  ScanSurface surface;
  surface.axes = grid.axes;
  std::vector<std::string> names;
  for (const auto& axis : grid.axes) names.push_back(axis.name);
  const std::size_t n = grid.size();
  surface.points.resize(n);
  surface.values.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    surface.points[i] = grid.point(i);
    try {
      surface.values[i] = evaluate_objective(problem, grid.objective, names, surface.points[i]);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "grid point " << i << " (";
      for (std::size_t k = 0; k < names.size(); ++k) {
        msg << (k ? ", " : "") << names[k] << "=" << surface.points[i][k];
      }
      msg << "): " << e.what();
      throw Error(e.code(), msg.str());
    }
  });
  return surface;
}

OptimumReport refine(const std::function<Real(const std::vector<Real>&)>& objective,
                     const std::vector<Real>& start, const std::vector<Real>& lower,
                     const std::vector<Real>& upper, const NelderMeadSettings& settings) {
  const std::size_t dim = start.size();
  if (dim == 0 || lower.size() != dim || upper.size() != dim) {
    throw Error(ErrorCode::InvalidGrid, "start and bounds differ in dimension");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(lower[k] < upper[k]) || start[k] < lower[k] || start[k] > upper[k]) {
      throw Error(ErrorCode::InvalidGrid, "start must lie inside non-empty bounds");
    }
  }
  using Point = std::vector<Real>;
  OptimumReport report;
  auto clamp = [&](Point p) {
    for (std::size_t k = 0; k < dim; ++k) p[k] = std::clamp(p[k], lower[k], upper[k]);
    return p;
  };
  // Minimizes the negated objective; tracks the running maximum.
  auto cost = [&](const Point& p) {
    const Real value = objective(p);
    ++report.evaluations;
    if (report.evaluations == 1 || value > report.best_objective) {
      report.best_objective = value;
      report.best_point = p;
    }
    return -value;
  };

  std::vector<Point> simplex(dim + 1, start);
  std::vector<Real> f(dim + 1);
  f[0] = cost(start);
  report.start_objective = -f[0];
  for (std::size_t k = 0; k < dim; ++k) {
    const Real edge = settings.initial_edge * (upper[k] - lower[k]);
    Point& p = simplex[k + 1];
    p[k] = start[k] + edge <= upper[k] ? start[k] + edge : start[k] - edge;
    p = clamp(p);
    f[k + 1] = cost(p);
  }

  auto combine = [&](const Point& a, const Point& b, Real t) {
    // a + t (b - a)
    Point out(dim);
    for (std::size_t k = 0; k < dim; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return clamp(out);
  };

  std::vector<std::size_t> order(dim + 1);
  int iteration = 0;
  for (;; ++iteration) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
    std::vector<Point> s2;
    std::vector<Real> f2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(f[i]);
    }
    simplex.swap(s2);
    f.swap(f2);
    report.trace.push_back({iteration, report.best_objective, report.best_point});

    if (f.back() - f.front() < settings.spread_tolerance) {
      report.converged = true;
      break;
    }
    if (iteration >= settings.max_iterations) {
      report.max_iterations_reached = true;
      break;
    }

    Point centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / static_cast<Real>(dim);
    }
    const Point& worst = simplex.back();
    const Point reflected = combine(centroid, worst, -settings.reflection);
    const Real fr = cost(reflected);
    if (fr < f.front()) {
      const Point expanded = combine(centroid, reflected, settings.expansion);
      const Real fe = cost(expanded);
      if (fe < fr) {
        simplex.back() = expanded;
        f.back() = fe;
      } else {
        simplex.back() = reflected;
        f.back() = fr;
      }
      continue;
    }
    if (fr < f[dim - 1]) {
      simplex.back() = reflected;
      f.back() = fr;
      continue;
    }
    const bool outside = fr < f.back();
    const Point contracted =
        outside ? combine(centroid, reflected, settings.contraction)
                : combine(centroid, worst, settings.contraction);
    const Real fc = cost(contracted);
    if (fc < (outside ? fr : f.back())) {
      simplex.back() = contracted;
      f.back() = fc;
      continue;
    }
    for (std::size_t i = 1; i <= dim; ++i) {
      simplex[i] = combine(simplex.front(), simplex[i], settings.shrink);
      f[i] = cost(simplex[i]);
    }
  }
  report.iterations = iteration;
  for (std::size_t k = 0; k < dim; ++k) {
    const Real eps = 1e-12 * (upper[k] - lower[k]);
    if (report.best_point[k] <= lower[k] + eps || report.best_point[k] >= upper[k] - eps) {
      report.at_bound = true;
    }
  }
  return report;
}

OptimumReport refine(const TransportProblem& problem, Objective objective,
                     const std::vector<std::string>& names, const std::vector<Real>& start,
                     const std::vector<Real>& lower, const std::vector<Real>& upper,
                     const NelderMeadSettings& settings) {
  auto report = refine(
      [&](const std::vector<Real>& x) { return evaluate_objective(problem, objective, names, x); },
      start, lower, upper, settings);
  report.names = names;
  return report;
}

}  // namespace facilitrans
