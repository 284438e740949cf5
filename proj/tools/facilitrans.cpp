// facilitrans: command-line front end.
//
//   facilitrans simulate --config fig2.json --out out/fig2
//   facilitrans plan     --config route.json
//   facilitrans scan     --config fig2c.json --workers 8
//   facilitrans optimize --config fig2_optimize.json
//   facilitrans disorder --config fig4a.json
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "facilitrans/config.hpp"
#include "facilitrans/output.hpp"
#include "facilitrans/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace facilitrans;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::string config;
  std::string out;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  bool no_svg = false;
};

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load(const Flags& flags) {
  try {
    std::ifstream probe(flags.config);
    if (!probe) throw Error(ErrorCode::Config, "cannot open config file '" + flags.config + "'");
    json doc;
    try {
      probe >> doc;
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Config, flags.config + ": " + e.what());
    }
    if (flags.seed) doc["seed"] = *flags.seed;
    return parse_config(doc);
  } catch (const Error& e) {
    throw ConfigFailure(e.what());
  }
}

fs::path output_dir(const Flags& flags, const RunConfig& cfg) {
  fs::path dir = flags.out.empty() ? fs::path(cfg.output_dir) : fs::path(flags.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigFailure("cannot create output directory '" + dir.string() + "'");
  return dir;
}

json base_result(const RunConfig& cfg, const char* command) {
  return {{"tool", "facilitrans"},
          {"version", FACILITRANS_VERSION},
          {"command", command},
          {"seed", cfg.seed},
          {"config", cfg.source}};
}

json geometry_json(const RunConfig& cfg) {
  json g = {{"n_sites", cfg.geometry.n_sites()},
            {"r1", cfg.geometry.r1()},
            {"r2", cfg.geometry.r2()},
            {"c6", cfg.params.c6_for(cfg.geometry)},
            {"pi_pulse_period", effective_rabi(cfg.params.omega).period * cfg.params.period_scale}};
  if (cfg.units) {
    const auto& u = *cfg.units;
    const Real period = effective_rabi(cfg.params.omega).period * cfg.params.period_scale;
    const Real hop_um = u.length_to_um(0.5 * (cfg.geometry.r1() + cfg.geometry.r2()));
    g["physical"] = {{"pi_pulse_us", u.time_to_us(period)},
                     {"r1_um", u.length_to_um(cfg.geometry.r1())},
                     {"r2_um", u.length_to_um(cfg.geometry.r2())},
                     {"mean_speed_um_per_us", hop_um / u.time_to_us(period)}};
  }
  return g;
}

int cmd_simulate(const Flags& flags) {
  const RunConfig cfg = load(flags);
  const fs::path dir = output_dir(flags, cfg);
  const PulseSchedule schedule = cfg.resolved_schedule();
  const Trajectory traj =
      run_schedule(cfg.initial_state(), schedule, cfg.geometry, cfg.params, cfg.options);

  json result = base_result(cfg, "simulate");
  json report = json::object();
  const std::size_t last = schedule.size();
  if (cfg.out_site) {
    report["transfer_population"] = {{"site", *cfg.out_site},
                                     {"value", transfer_population(traj, *cfg.out_site, last)}};
  }
  if (cfg.in_site && cfg.out_site) {
    report["truth_table"] =
        to_json(truth_table(cfg.geometry, cfg.params, schedule, *cfg.in_site, *cfg.out_site, cfg.options));
  }
  if (cfg.initial.kind == InitialSpec::Kind::Bell && cfg.initial.site_b == cfg.initial.site_a + 1) {
    json bell = json::array();
    const auto seq = bell_fidelity_sequence(traj, cfg.initial.site_a);
    for (std::size_t i = 0; i < seq.size(); ++i) bell.push_back({{"pulse", i + 1}, {"fidelity", seq[i]}});
    report["bell_fidelities"] = bell;
  }
  report["final_populations"] = to_json(traj.populations.back());
  result["report"] = report;
  result["schedule"] = schedule.indices();
  result["geometry"] = geometry_json(cfg);
  result["diagnostics"] = {{"hierarchy", to_json(hierarchy_diagnostics(cfg.params, cfg.geometry))},
                           {"lindblad_accepted_steps", traj.lindblad.accepted_steps},
                           {"lindblad_rejected_steps", traj.lindblad.rejected_steps},
                           {"hermitization", traj.lindblad.hermitization},
                           {"warnings", traj.warnings}};

  write_text(dir / "trajectory.csv", trajectory_csv(traj));
  write_json(dir / "result.json", result);
  if (!flags.no_svg) {
    write_text(dir / "heatmap.svg",
               population_heatmap_svg(traj.times, traj.populations, traj.boundaries,
                                      config_hash(cfg.source), "Rydberg population"));
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_plan(const Flags& flags) {
  const RunConfig cfg = load(flags);
  if (!cfg.route) throw ConfigFailure("config.route: plan needs a route");
  const fs::path dir = output_dir(flags, cfg);
  const PulseSchedule schedule = cfg.resolved_schedule();
  const auto diag = to_json(hierarchy_diagnostics(cfg.params, cfg.geometry));
  json doc = {{"route", {{"start", cfg.route->start}, {"waypoints", cfg.route->waypoints}}},
              {"tokens", schedule.indices()}};
  write_json(dir / "schedule.json", doc);
  write_json(dir / "diagnostics.json", diag);
  std::cout << json{{"tokens", schedule.indices()}, {"diagnostics", diag}}.dump(2) << "\n";
  return 0;
}

json scan_json(const ScanSurface& surface) {
  const auto best = surface.argmax();
  json point = json::object();
  for (std::size_t k = 0; k < surface.axes.size(); ++k) point[surface.axes[k].name] = surface.points[best][k];
  return {{"points", surface.values.size()}, {"argmax", point}, {"best", surface.values[best]}};
}

void save_surface(const fs::path& dir, const ScanSurface& surface, Objective objective) {
  std::vector<std::string> header;
  for (const auto& axis : surface.axes) header.push_back(axis.name);
  header.push_back(to_string(objective));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < surface.values.size(); ++i) {
    auto row = surface.points[i];
    row.push_back(surface.values[i]);
    csv.row(row);
  }
  csv.save(dir / "surface.csv");
}

int cmd_scan(const Flags& flags) {
  const RunConfig cfg = load(flags);
  if (!cfg.scan) throw ConfigFailure("config.scan: scan needs a scan block");
  const TransportProblem problem = [&] {
    try {
      return cfg.problem();
    } catch (const Error& e) {
      throw ConfigFailure(e.what());
    }
  }();
  const fs::path dir = output_dir(flags, cfg);
  const auto surface = scan(*cfg.scan, problem, resolve_workers(flags.workers));
  save_surface(dir, surface, cfg.scan->objective);
  json result = base_result(cfg, "scan");
  result["scan"] = scan_json(surface);
  write_json(dir / "result.json", result);
  std::cout << result["scan"].dump(2) << "\n";
  return 0;
}

int cmd_optimize(const Flags& flags) {
  const RunConfig cfg = load(flags);
  if (!cfg.optimize) throw ConfigFailure("config.optimize: optimize needs an optimize block");
  const TransportProblem problem = [&] {
    try {
      return cfg.problem();
    } catch (const Error& e) {
      throw ConfigFailure(e.what());
    }
  }();
  const fs::path dir = output_dir(flags, cfg);
  const auto& spec = *cfg.optimize;
  json result = base_result(cfg, "optimize");

  std::vector<Real> start;
  std::optional<Real> grid_best;
  if (spec.start) {
    start = *spec.start;
  } else if (cfg.scan) {
    const auto surface = scan(*cfg.scan, problem, resolve_workers(flags.workers));
    save_surface(dir, surface, cfg.scan->objective);
    result["scan"] = scan_json(surface);
    const auto best = surface.argmax();
    grid_best = surface.values[best];
    for (const auto& name : spec.names) {
      std::optional<Real> value;
      for (std::size_t k = 0; k < surface.axes.size(); ++k) {
        if (surface.axes[k].name == name) value = surface.points[best][k];
      }
      start.push_back(value ? *value : get_parameter(cfg.params, name));
    }
  } else {
    for (const auto& name : spec.names) start.push_back(get_parameter(cfg.params, name));
  }
  OptimumReport report = [&] {
    try {
      return refine(problem, spec.objective, spec.names, start, spec.lower, spec.upper, spec.settings);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidGrid) throw ConfigFailure(e.what());
      throw;
    }
  }();
  result["optimum"] = to_json(report);
  result["objective"] = to_string(spec.objective);
  if (grid_best) result["optimum"]["grid_best"] = *grid_best;
  write_json(dir / "result.json", result);
  json summary = result["optimum"];
  summary.erase("trace");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_disorder(const Flags& flags) {
  const RunConfig cfg = load(flags);
  if (!cfg.disorder) throw ConfigFailure("config.disorder: disorder needs a disorder block");
  const fs::path dir = output_dir(flags, cfg);
  const PulseSchedule schedule = cfg.resolved_schedule();
  const auto& spec = *cfg.disorder;
  const auto ensemble = disorder_average(cfg.geometry, cfg.params, schedule, cfg.initial_state(),
                                         spec, cfg.options, resolve_workers(flags.workers));
  const int n = cfg.geometry.n_sites();

  std::vector<std::string> header{"time", "pulse_index"};
  for (int j = 1; j <= n; ++j) header.push_back("mean_site_" + std::to_string(j));
  for (int j = 1; j <= n; ++j) header.push_back("stderr_site_" + std::to_string(j));
  CsvWriter mean_csv(header);
  for (std::size_t s = 0; s < ensemble.times.size(); ++s) {
    std::vector<std::string> row{format_real(ensemble.times[s]), std::to_string(ensemble.pulse_of_sample[s])};
    for (int j = 0; j < n; ++j) row.push_back(format_real(ensemble.mean[s][j]));
    for (int j = 0; j < n; ++j) row.push_back(format_real(ensemble.std_error[s][j]));
    mean_csv.row(row);
  }
  mean_csv.save(dir / "ensemble_mean.csv");

  std::vector<std::string> rheader{"realization", "seed", "attempts"};
  for (int j = 1; j <= n; ++j) rheader.push_back("final_pop_site_" + std::to_string(j));
  CsvWriter real_csv(rheader);
  for (std::size_t i = 0; i < ensemble.seeds.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), std::to_string(ensemble.seeds[i]),
                                 std::to_string(ensemble.attempts[i])};
    for (int j = 0; j < n; ++j) row.push_back(format_real(ensemble.final_populations[i][j]));
    real_csv.row(row);
  }
  real_csv.save(dir / "realizations.csv");

  // Linearized estimate against sampled pair deviations for both gap kinds.
  const Real c6 = cfg.params.c6_for(cfg.geometry);
  json estimates = json::array();
  CsvWriter est_csv({"gap", "coupling", "estimate", "mc_mean_abs", "mc_rms", "estimate_over_mc_rms"});
  for (int kind = 1; kind <= 2; ++kind) {
    const Real v = kind == 1 ? cfg.params.v1 : cfg.params.v2;
    const Real r = kind == 1 ? cfg.geometry.r1() : cfg.geometry.r2();
    const Real estimate = interaction_deviation_estimate(v, spec.sigma.x(), c6);
    const auto mc = monte_carlo_coupling_deviation(v, r, Vec3(spec.sigma.x(), 0.0, 0.0), cfg.mc_draws,
                                                   realization_seed(cfg.seed, 0xe5e5e5e5ULL + kind));
    estimates.push_back({{"gap", kind}, {"coupling", v}, {"estimate", estimate},
                         {"mc_mean_abs", mc.mean_abs}, {"mc_rms", mc.rms}});
    est_csv.row({std::to_string(kind), format_real(v), format_real(estimate), format_real(mc.mean_abs),
                 format_real(mc.rms), format_real(mc.rms > 0.0 ? estimate / mc.rms : 0.0)});
  }
  est_csv.save(dir / "deviation_estimate.csv");

  json result = base_result(cfg, "disorder");
  result["realizations"] = spec.n_realizations;
  result["sigma"] = {spec.sigma.x(), spec.sigma.y(), spec.sigma.z()};
  result["final_mean"] = to_json(ensemble.mean.back());
  result["final_stderr"] = to_json(ensemble.std_error.back());
  if (cfg.out_site) {
    const auto j = static_cast<Eigen::Index>(*cfg.out_site - 1);
    result["transfer"] = {{"site", *cfg.out_site},
                          {"mean", ensemble.mean.back()[j]},
                          {"stderr", ensemble.std_error.back()[j]}};
  }
  result["deviation_estimates"] = estimates;
  result["geometry"] = geometry_json(cfg);
  write_json(dir / "result.json", result);
  if (!flags.no_svg) {
    write_text(dir / "heatmap.svg",
               population_heatmap_svg(ensemble.times, ensemble.mean, {}, config_hash(cfg.source),
                                      "Disorder-averaged Rydberg population"));
  }
  json summary = {{"final_mean", result["final_mean"]}, {"deviation_estimates", estimates}};
  if (result.contains("transfer")) summary["transfer"] = result["transfer"];
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional excitation and Bell-pair transport in alternating-spacing atom chains"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--out", flags.out, "output directory (overrides output_dir)");
    sub->add_option("--workers", flags.workers, "parallel workers (default: FACILITRANS_WORKERS or all cores)");
    sub->add_option("--seed", flags.seed, "base seed (overrides config)");
    sub->add_flag("--no-svg", flags.no_svg, "skip heatmap.svg");
  };
  auto* simulate = app.add_subcommand("simulate", "run a schedule and write trajectory, result and heatmap");
  auto* plan = app.add_subcommand("plan", "turn a route into a pulse schedule");
  auto* scan_cmd = app.add_subcommand("scan", "grid scan of the transport objective");
  auto* optimize = app.add_subcommand("optimize", "scan (optional) then Nelder-Mead refinement");
  auto* disorder = app.add_subcommand("disorder", "position-disorder ensemble average");
  for (auto* sub : {simulate, plan, scan_cmd, optimize, disorder}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(flags);
    if (*plan) return cmd_plan(flags);
    if (*scan_cmd) return cmd_scan(flags);
    if (*optimize) return cmd_optimize(flags);
    if (*disorder) return cmd_disorder(flags);
  } catch (const ConfigFailure& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
