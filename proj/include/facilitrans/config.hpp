// config.hpp
// JSON run configuration for the command-line tool. Unknown keys are rejected
// and every physical invariant is re-checked on load.

#pragma once

#include "facilitrans/disorder.hpp"
#include "facilitrans/optimize.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace facilitrans {

struct InitialSpec {
  enum class Kind { Excitation, Bell, Patterns };
  Kind kind = Kind::Excitation;
  int site = 1;
  int site_a = 0;
  int site_b = 0;
  std::vector<std::string> patterns;
  std::vector<Complex> amplitudes;
  /// Start from a density matrix even without dissipation.
  bool density = false;
};

struct RouteSpec {
  int start = 1;
  std::vector<int> waypoints;
};

struct OptimizeSpec {
  Objective objective = Objective::TruthTable;
  std::vector<std::string> names;
  std::optional<std::vector<Real>> start;
  std::vector<Real> lower;
  std::vector<Real> upper;
  NelderMeadSettings settings;
};

struct RunConfig {
  nlohmann::json source;
  ChainGeometry geometry{2, 1.0, 2.0};
  ModelParams params;
  std::optional<RouteSpec> route;
  std::optional<PulseSchedule> schedule;
  InitialSpec initial;
  std::optional<int> in_site;
  std::optional<int> out_site;
  RunOptions options;
  std::optional<DisorderSpec> disorder;
  int mc_draws = 100000;
  std::optional<ScanGrid> scan;
  std::optional<OptimizeSpec> optimize;
  std::optional<PhysicalUnits> units;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  /// Schedule from the explicit token list, else planned from the route.
  PulseSchedule resolved_schedule() const;
  QuantumState initial_state() const;
  TransportProblem problem() const;
};

/// Throws Error(ErrorCode::Config, ...) naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Stable 64-bit FNV-1a hash of the compact serialization.
std::uint64_t config_hash(const nlohmann::json& doc);

}  // namespace facilitrans
