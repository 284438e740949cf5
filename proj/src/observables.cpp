#include "facilitrans/observables.hpp"

namespace facilitrans {

namespace {

QuantumState input_state(int n_sites, std::optional<int> excited_site, bool dissipative) {
  PureState pure = excited_site ? single_excitation(n_sites, *excited_site)
                                : basis_state(OccupationPattern(std::vector<std::uint8_t>(
                                      static_cast<std::size_t>(n_sites), 0)));
  if (dissipative) return to_density(pure);
  return pure;
}

}  // namespace

Real transfer_population(const Trajectory& trajectory, int site, std::size_t at_pulse) {
  const auto& pops = trajectory.populations_at_pulse(at_pulse);
  if (site < 1 || site > pops.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "site " + std::to_string(site));
  }
  return pops[site - 1];
}

TruthTable truth_table(const ChainGeometry& geometry, const ModelParams& params,
                       const PulseSchedule& schedule, int in_site, int out_site,
                       const RunOptions& options) {
  const int n = geometry.n_sites();
  if (in_site < 1 || in_site > n || out_site < 1 || out_site > n) {
    throw Error(ErrorCode::IndexOutOfRange, "truth-table sites outside the chain");
  }
  RunOptions fast = options;
  fast.samples_per_pulse = 1;
  const bool open = params.dissipative();
  const auto one = run_schedule(input_state(n, in_site, open), schedule, geometry, params, fast);
  const auto zero =
      run_schedule(input_state(n, std::nullopt, open), schedule, geometry, params, fast);
  const std::size_t last = schedule.size();
  return TruthTable{1.0 - transfer_population(zero, out_site, last),
                    transfer_population(one, out_site, last)};
}

Real truth_table_fidelity(const ChainGeometry& geometry, const ModelParams& params,
                          const PulseSchedule& schedule, int in_site, int out_site,
                          const RunOptions& options) {
  return truth_table(geometry, params, schedule, in_site, out_site, options).fidelity();
}

std::vector<Real> bell_fidelity_sequence(const Trajectory& trajectory, int site_a) {
  const int n = n_sites_of(trajectory.final_state());
  const PureState target = psi_plus();
  std::vector<Real> out;
  for (std::size_t i = 1; i <= trajectory.pulse_count(); ++i) {
    const int left = site_a - static_cast<int>(i);
    const int right = site_a + 1 + static_cast<int>(i);
    if (left < 1 || right > n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "pair leaves the chain after pulse " + std::to_string(i));
    }
    out.push_back(state_fidelity(partial_trace(trajectory.boundary_states[i], left, right), target));
  }
  return out;
}

std::vector<Real> bell_fidelity_sequence(int site_a, const PulseSchedule& schedule,
                                         const ChainGeometry& geometry,
                                         const ModelParams& params, const RunOptions& options) {
  const int n = geometry.n_sites();
  if (site_a < 1 || site_a + 1 > n) {
    throw Error(ErrorCode::IndexOutOfRange, "Bell pair outside the chain");
  }
  if (site_a - static_cast<int>(schedule.size()) < 1 ||
      site_a + 1 + static_cast<int>(schedule.size()) > n) {
    throw Error(ErrorCode::IndexOutOfRange, "schedule moves the pair past the chain ends");
  }
  const PureState pair = bell_pair(n, site_a, site_a + 1);
  QuantumState initial = params.dissipative() ? QuantumState(to_density(pair)) : QuantumState(pair);
  RunOptions fast = options;
  fast.samples_per_pulse = 1;
  return bell_fidelity_sequence(run_schedule(initial, schedule, geometry, params, fast), site_a);
}

}  // namespace facilitrans
