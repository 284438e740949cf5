// observables.hpp
// Figures of merit: transfer population, truth-table transport fidelity and
// the Bell-fidelity sequence of an outward-moving pair.

#pragma once

#include "facilitrans/dynamics.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace facilitrans {

Real transfer_population(const Trajectory& trajectory, int site, std::size_t at_pulse);

struct TruthTable {
  Real p0 = 0.0;  // P(out = 0 | in = 0)
  Real p1 = 0.0;  // P(out = 1 | in = 1)
  Real fidelity() const { return 0.5 * (p0 + p1); }
};

/// Unweighted average of the classical rows 0 -> 0 and 1 -> 1. Unitary dynamics
/// without dissipation, Lindblad otherwise.
TruthTable truth_table(const ChainGeometry& geometry, const ModelParams& params,
                       const PulseSchedule& schedule, int in_site, int out_site,
                       const RunOptions& options = {});

Real truth_table_fidelity(const ChainGeometry& geometry, const ModelParams& params,
                          const PulseSchedule& schedule, int in_site, int out_site,
                          const RunOptions& options = {});

/// F_i = <Psi+|rho_i|Psi+> on sites (a - i, a + 1 + i) after pulse i, i = 1..len.
std::vector<Real> bell_fidelity_sequence(const Trajectory& trajectory, int site_a);

std::vector<Real> bell_fidelity_sequence(int site_a, const PulseSchedule& schedule,
                                         const ChainGeometry& geometry,
                                         const ModelParams& params,
                                         const RunOptions& options = {});

struct FidelityReport {
  std::optional<TruthTable> truth_table;
  std::optional<Real> transfer_population;
  std::optional<int> transfer_site;
  std::vector<std::pair<int, Real>> bell_fidelities;
};

}  // namespace facilitrans
