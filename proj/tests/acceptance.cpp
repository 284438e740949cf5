// Acceptance suite. Usage: acceptance <1..9|units|all>
// Prints one verdict line per criterion plus indented measurements; exits
// non-zero when any verdict fails.

#include "facilitrans/config.hpp"
#include "facilitrans/output.hpp"
#include "facilitrans/parallel.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

using namespace facilitrans;
namespace fs = std::filesystem;

namespace {

class Report {
 public:
  explicit Report(std::string name) : name_(std::move(name)), start_(Clock::now()) {}

  bool check(bool ok, const std::string& what) {
    std::printf("  %s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    pass_ = pass_ && ok;
    return ok;
  }
  void note(const std::string& what) { std::printf("  note %s\n", what.c_str()); }
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  void runtime(double budget) {
    check(seconds() < budget, fmt("runtime %.1f s < %.0f s", seconds(), budget));
  }
  bool finish() const {
    std::printf("%s %s\n", pass_ ? "PASS" : "FAIL", name_.c_str());
    std::fflush(stdout);
    return pass_;
  }

  template <typename... Args>
  static std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::string name_;
  Clock::time_point start_;
  bool pass_ = true;
};

ChainGeometry chain(int n, Real v1, Real v2) { return ChainGeometry::from_couplings(n, v1, v2, v1); }

ModelParams reference_params() {
  ModelParams p;
  p.v1 = 20.0;
  p.v2 = 10.0;
  p.d_delta1 = -0.133;
  p.d_delta2 = -0.033;
  return p;
}

ModelParams disorder_params() {
  ModelParams p;
  p.v1 = 8.4;
  p.v2 = 4.2;
  p.d_delta1 = -0.293;
  p.d_delta2 = -0.267;
  p.gamma_decay = 0.002;
  p.gamma_deph = 0.004;
  return p;
}

const PulseSchedule kFivePulse = PulseSchedule::from_indices({1, 2, 1, 2, 1});

RunOptions boundary_only() {
  RunOptions o;
  o.samples_per_pulse = 1;
  return o;
}

bool within(Real value, Real target, Real tol) { return std::abs(value - target) <= tol; }

// ---------------------------------------------------------------------------

bool criterion_1() {
  Report r("criterion 1: N=7 directional transport benchmark (F6 = 0.950 +- 0.010, P6 = 0.956 +- 0.010)");
  const auto geom = chain(7, 20.0, 10.0);
  const auto params = reference_params();
  const auto table = truth_table(geom, params, kFivePulse, 1, 6);
  r.check(within(table.fidelity(), 0.950, 0.010), Report::fmt("F6 = %.5f", table.fidelity()));
  r.check(within(table.p1, 0.956, 0.010), Report::fmt("P6 = %.5f", table.p1));
  r.note(Report::fmt("p0 = %.5f (probability of no output excitation for the empty input)", table.p0));
  auto no_nnn = params;
  no_nnn.include_nnn = false;
  const auto t2 = truth_table(geom, no_nnn, kFivePulse, 1, 6);
  r.note(Report::fmt("next-nearest couplings off: F6 = %.5f, P6 = %.5f", t2.fidelity(), t2.p1));
  RunOptions raw;
  raw.frame_correction = false;
  const auto t3 = truth_table(geom, params, kFivePulse, 1, 6, raw);
  r.note(Report::fmt("frame correction off: F6 = %.5f, P6 = %.5f", t3.fidelity(), t3.p1));
  r.runtime(5.0);
  return r.finish();
}

bool criterion_2() {
  Report r("criterion 2: mismatch grid argmax and period scan peak");
  TransportProblem problem{chain(7, 20.0, 10.0), reference_params(), kFivePulse, 1, 6, boundary_only()};
  const ScanGrid grid{{{"d_delta1", -0.3, 0.1, 11}, {"d_delta2", -0.3, 0.1, 11}}, Objective::TruthTable};
  const auto surface = scan(grid, problem, 1);
  const auto best = surface.points[surface.argmax()];
  const Real cell = 0.04;
  r.check(std::abs(best[0] + 0.133) <= cell + 1e-12 && std::abs(best[1] + 0.033) <= cell + 1e-12,
          Report::fmt("grid argmax (%.3f, %.3f), F6 = %.5f; within one cell (%.2f) of (-0.133, -0.033)", best[0],
                      best[1], surface.values[surface.argmax()], cell));
  const ScanGrid periods{{{"period_scale", 0.8, 1.2, 41}}, Objective::TruthTable};
  const auto line = scan(periods, problem, 1);
  const Real peak = 0.5 * line.points[line.argmax()][0];
  r.check(within(peak, 0.50, 0.02),
          Report::fmt("period scan peaks at Omega_t T / 2pi = %.3f (F6 = %.5f)", peak, line.values[line.argmax()]));
  r.runtime(600.0);
  return r.finish();
}

bool criterion_3() {
  Report r("criterion 3: N=8 Bell-pair transport with decay and dephasing");
  const auto geom = chain(8, 20.0, 10.0);
  const auto schedule = PulseSchedule::from_indices({1, 2, 1});
  const auto input = bell_pair(8, 4, 5);
  const std::vector<std::pair<Real, Real>> rates{{0.0, 0.0}, {0.002, 0.0}, {0.0, 0.004}, {0.002, 0.004}};
  const char* labels[] = {"none", "decay", "dephasing", "both"};
  std::vector<std::vector<Real>> curves;
  RVector final_pops;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    auto params = reference_params();
    params.gamma_decay = rates[k].first;
    params.gamma_deph = rates[k].second;
    const QuantumState initial = params.dissipative() ? QuantumState(to_density(input)) : QuantumState(input);
    const auto traj = run_schedule(initial, schedule, geom, params, boundary_only());
    curves.push_back(bell_fidelity_sequence(traj, 4));
    r.note(Report::fmt("%-9s Bell fidelities %.5f %.5f %.5f; P1 = %.5f", labels[k], curves[k][0], curves[k][1],
                       curves[k][2], traj.populations.back()[0]));
    if (k == 3) final_pops = traj.populations.back();
  }
  r.check(within(final_pops[0], 0.491, 0.005) && within(final_pops[7], 0.491, 0.005),
          Report::fmt("P1 = %.5f, P8 = %.5f (target 0.491 +- 0.005)", final_pops[0], final_pops[7]));
  const auto& both = curves[3];
  r.check(both[0] > both[1] && both[1] > both[2], "Bell fidelity strictly decreasing with both channels");
  bool order = true;
  for (int i = 0; i < 3; ++i) {
    order = order && curves[0][i] >= curves[1][i] && curves[0][i] >= curves[2][i] &&
            curves[1][i] >= curves[3][i] && curves[2][i] >= curves[3][i];
  }
  r.check(order, "pulse-wise ordering: none >= decay-only, dephasing-only >= both");
  r.runtime(120.0);
  return r.finish();
}

// Naive DFT magnitude peak (excluding DC) of a real series sampled on [0, span).
Real dominant_angular_frequency(const std::vector<Real>& series, Real span) {
  const std::size_t n = series.size();
  Real mean = 0.0;
  for (Real x : series) mean += x / static_cast<Real>(n);
  std::size_t best = 1;
  Real best_mag = -1.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    Complex acc{};
    for (std::size_t t = 0; t < n; ++t) {
      acc += (series[t] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<Real>(k * t) / n);
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return 2.0 * std::numbers::pi * static_cast<Real>(best) / span;
}

bool criterion_4() {
  Report r("criterion 4: two-atom facilitation spectroscopy");
  const Real v = 20.0;
  const auto h = build_pulse_hamiltonian(2, Couplings{{v}, {}}, 1.0, v);
  const UnitaryPropagator propagator(h.matrix);
  const Real span = 20.0 * effective_rabi(1.0).period;
  const int samples = 2000;
  const CVector start = single_excitation(2, 1).amplitudes();
  std::vector<Real> p11, p10;
  for (int k = 0; k < samples; ++k) {
    const CVector psi = propagator.apply(start, span * k / samples);
    p11.push_back(std::norm(psi[3]));
    p10.push_back(std::norm(psi[2]));
  }
  const Real f11 = dominant_angular_frequency(p11, span);
  const Real f10 = dominant_angular_frequency(p10, span);
  r.check(within(f11 / std::sqrt(2.0), 1.0, 0.02), Report::fmt("P11 peak at %.5f Omega (target sqrt(2) = 1.41421)", f11));
  r.check(within(f10 / (std::sqrt(2.0) / 2), 1.0, 0.02),
          Report::fmt("P10 peak at %.5f Omega (target sqrt(2)/2 = 0.70711)", f10));
  const Real max11 = *std::max_element(p11.begin(), p11.end());
  r.check(within(max11, 0.50, 0.02), Report::fmt("max P11 = %.5f", max11));
  return r.finish();
}

bool criterion_5() {
  Report r("criterion 5: linearized interaction-deviation estimate vs Monte-Carlo mean |dV| (15%)");
  const Real v = 8.4, c6 = 8.4;  // r1 = 1
  for (Real sx : {0.005, 0.01, 0.02}) {
    const Real estimate = interaction_deviation_estimate(v, sx, c6);
    const auto mc = monte_carlo_coupling_deviation(v, 1.0, Vec3(sx, 0.0, 0.0), 100000, realization_seed(5, 0));
    r.check(std::abs(estimate / mc.mean_abs - 1.0) <= 0.15,
            Report::fmt("sigma_x/r1 = %.3f: estimate %.5f, MC mean |dV| %.5f, ratio %.3f", sx, estimate, mc.mean_abs,
                        estimate / mc.mean_abs));
    r.note(Report::fmt("sigma_x/r1 = %.3f: MC rms dV %.5f, estimate/rms %.3f", sx, mc.rms, estimate / mc.rms));
  }
  return r.finish();
}

bool criterion_6() {
  Report r("criterion 6: disorder ordering over three thermal spreads (50 realizations each)");
  const PhysicalUnits units{3.0, 11.4};
  const auto geom = chain(7, 8.4, 4.2);
  const auto params = disorder_params();
  const std::vector<std::array<Real, 2>> spreads{{35, 315}, {50, 450}, {120, 1080}};
  std::vector<std::pair<Real, Real>> stats;
  const int workers = resolve_workers();
  for (const auto& s : spreads) {
    const Real sx = units.length_from_nm(s[0]);
    const DisorderSpec spec{Vec3(sx, sx, units.length_from_nm(s[1])), 50, 20240417};
    const auto ens = disorder_average(geom, params, kFivePulse, to_density(single_excitation(7, 1)), spec,
                                      boundary_only(), workers);
    stats.emplace_back(ens.mean.back()[5], ens.std_error.back()[5]);
    r.note(Report::fmt("sigma = (%.0f, %.0f, %.0f) nm: mean P6 = %.5f +- %.5f", s[0], s[0], s[1], stats.back().first,
                       stats.back().second));
  }
  r.check(stats[0].first >= stats[1].first && stats[1].first >= stats[2].first, "means non-increasing in sigma");
  const Real gap = stats[0].first - stats[2].first;
  const Real se = std::hypot(stats[0].second, stats[2].second);
  r.check(gap > 2.0 * se, Report::fmt("extreme sets separated by %.5f > 2 x %.5f", gap, se));
  r.note(Report::fmt("workers = %d", workers));
  r.runtime(workers >= 8 ? 300.0 : 1800.0);
  return r.finish();
}

bool criterion_7() {
  Report r("criterion 7: closed-system Lindblad equals unitary evolution (trace distance < 1e-7)");
  const auto geom = chain(7, 20.0, 10.0);
  const auto params = reference_params();
  // Global integrator error grows to a few hundred times the per-step bound over five pulses.
  RunOptions options = boundary_only();
  options.tol = 1e-11;
  r.note(Report::fmt("integrator tolerance %.0e", options.tol));
  for (const auto& indices : {std::vector<int>{1, 2, 1, 2, 1}, std::vector<int>{2, 2, 1, 1, 2}}) {
    const auto schedule = PulseSchedule::from_indices(indices);
    for (const auto& [label, psi] : {std::pair{"excitation", single_excitation(7, 1)},
                                     std::pair{"Bell", bell_pair(7, 3, 4)}}) {
      const auto pure = run_schedule(psi, schedule, geom, params, options);
      const auto mixed = run_schedule(to_density(psi), schedule, geom, params, options);
      Real worst = 0.0;
      for (std::size_t k = 0; k < pure.boundary_states.size(); ++k) {
        const auto& a = std::get<PureState>(pure.boundary_states[k]);
        const auto& b = std::get<DensityMatrix>(mixed.boundary_states[k]);
        worst = std::max(worst, trace_distance(to_density(a).matrix(), b.matrix()));
      }
      std::ostringstream s;
      for (int i : indices) s << i;
      r.check(worst < 1e-7,
              Report::fmt("schedule %s, %s input: max trace distance %.2e", s.str().c_str(), label, worst));
    }
  }
  return r.finish();
}

bool criterion_8() {
  Report r("criterion 8: conservation suite");
  const auto geom7 = chain(7, 20.0, 10.0);
  const auto params = reference_params();

  const auto ten = PulseSchedule::from_indices({1, 2, 1, 2, 1, 2, 1, 2, 1, 2});
  const auto unitary = run_schedule(single_excitation(7, 1), ten, geom7, params);
  Real norm_drift = 0.0;
  for (const auto& s : unitary.boundary_states) {
    norm_drift = std::max(norm_drift, std::abs(std::get<PureState>(s).amplitudes().norm() - 1.0));
  }
  r.check(norm_drift < 1e-10, Report::fmt("unitary norm drift %.2e over 10 pulses", norm_drift));

  auto open = params;
  open.gamma_decay = 0.002;
  open.gamma_deph = 0.004;
  const auto lind = run_schedule(to_density(bell_pair(8, 4, 5)), PulseSchedule::from_indices({1, 2, 1}),
                                 chain(8, 20.0, 10.0), open, boundary_only());
  Real trace_drift = 0.0, min_eig = 1.0;
  for (const auto& s : lind.boundary_states) {
    const auto& rho = std::get<DensityMatrix>(s);
    trace_drift = std::max(trace_drift, std::abs(rho.trace_real() - 1.0));
    min_eig = std::min(min_eig, rho.min_eigenvalue());
  }
  r.check(trace_drift < 1e-8, Report::fmt("Lindblad trace drift %.2e", trace_drift));
  r.check(min_eig >= -1e-7, Report::fmt("Lindblad minimum eigenvalue %.2e", min_eig));

  // Frame toggle, instantaneous: the diagonal phase itself leaves populations untouched.
  Real instant = 0.0;
  for (std::size_t k = 1; k < unitary.boundary_states.size(); ++k) {
    const auto& psi = std::get<PureState>(unitary.boundary_states[k]);
    const CVector phase = frame_switch_phase(7, params.detuning(1), params.detuning(2), unitary.boundaries[k]);
    const PureState rotated(7, phase.cwiseProduct(psi.amplitudes()));
    instant = std::max(instant, (site_populations(rotated) - site_populations(psi)).cwiseAbs().maxCoeff());
  }
  r.check(instant <= 1e-10, Report::fmt("frame phase at a boundary changes populations by %.2e", instant));

  // Frame toggle, full trajectory.
  RunOptions raw;
  raw.frame_correction = false;
  const auto a = run_schedule(single_excitation(7, 1), kFivePulse, geom7, params);
  const auto b = run_schedule(single_excitation(7, 1), kFivePulse, geom7, params, raw);
  Real traj_diff = 0.0;
  for (std::size_t i = 0; i < a.populations.size(); ++i) {
    traj_diff = std::max(traj_diff, (a.populations[i] - b.populations[i]).cwiseAbs().maxCoeff());
  }
  r.check(traj_diff <= 1e-10, Report::fmt("frame toggle changes trajectory populations by %.2e", traj_diff));

  auto no_nnn = params;
  no_nnn.include_nnn = false;
  const Real f_on = truth_table_fidelity(geom7, params, kFivePulse, 1, 6);
  const Real f_off = truth_table_fidelity(geom7, no_nnn, kFivePulse, 1, 6);
  r.check(std::abs(f_on - f_off) < 0.01, Report::fmt("next-nearest toggle changes F6 by %.5f", std::abs(f_on - f_off)));
  return r.finish();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool criterion_9() {
  Report r("criterion 9: bit-identical outputs at 1, 4 and 8 workers");
  const fs::path work = fs::temp_directory_path() / "facilitrans_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path presets = FACILITRANS_PRESETS;
  const std::vector<std::pair<std::string, std::string>> jobs{
      {"disorder", "determinism_disorder.json"}, {"scan", "determinism_scan.json"}};
  for (const auto& [command, preset] : jobs) {
    std::map<std::string, std::string> reference;
    for (int workers : {1, 4, 8}) {
      const fs::path out = work / (command + "_" + std::to_string(workers));
      const std::string cmd = std::string("\"") + FACILITRANS_CLI + "\" " + command + " --config \"" +
                              (presets / preset).string() + "\" --out \"" + out.string() + "\" --workers " +
                              std::to_string(workers) + " > /dev/null";
      if (!r.check(std::system(cmd.c_str()) == 0, command + " exits cleanly at " + std::to_string(workers) + " workers")) {
        continue;
      }
      std::map<std::string, std::string> files;
      for (const auto& entry : fs::directory_iterator(out)) files[entry.path().filename()] = slurp(entry.path());
      if (reference.empty()) {
        reference = files;
        r.note(command + ": " + std::to_string(files.size()) + " files at 1 worker");
      } else {
        r.check(files == reference, command + ": outputs at " + std::to_string(workers) + " workers match 1 worker");
      }
    }
  }
  return r.finish();
}

bool criterion_units() {
  Report r("units: physical-scale transport claims (5%)");
  const PhysicalUnits u{3.0, 11.4};
  const Real r1 = 1.0, r2 = std::pow(20.0 / 10.0, 1.0 / 6.0);
  const Real period_us = u.time_to_us(effective_rabi(1.0).period);
  const Real three_hops = 3.0 * period_us;
  r.check(within(three_hops / 0.7, 1.0, 0.05), Report::fmt("three hops take %.4f us (claim 0.7)", three_hops));
  const Real speed = u.length_to_um(0.5 * (r1 + r2)) / period_us;
  r.check(within(speed / 51.0, 1.0, 0.05), Report::fmt("mean speed %.2f um/us (claim 51)", speed));
  const Real separation = u.length_to_um(4.0 * r1 + 3.0 * r2);
  r.check(within(separation / 80.0, 1.0, 0.05),
          Report::fmt("pair separation after three hops %.2f um (claim 80), r2 = %.3f um", separation,
                      u.length_to_um(r2)));
  return r.finish();
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<bool()>> criteria{
      {"1", criterion_1}, {"2", criterion_2}, {"3", criterion_3}, {"4", criterion_4},
      {"5", criterion_5}, {"6", criterion_6}, {"7", criterion_7}, {"8", criterion_8},
      {"9", criterion_9}, {"units", criterion_units}};
  const std::string which = argc > 1 ? argv[1] : "all";
  bool ok = true;
  try {
    if (which == "all") {
      for (const auto& [name, fn] : criteria) ok = fn() && ok;
    } else if (auto it = criteria.find(which); it != criteria.end()) {
      ok = it->second();
    } else {
      std::cerr << "unknown criterion '" << which << "'\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::printf("FAIL %s: %s\n", which.c_str(), e.what());
    return 1;
  }
  return ok ? 0 : 1;
}
