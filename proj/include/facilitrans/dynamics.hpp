// dynamics.hpp
// Piecewise-constant time evolution: exact unitary propagation per pulse for
// pure states and adaptive Dormand-Prince integration of the Lindblad master
// equation for density matrices.

#pragma once

#include "facilitrans/hilbert.hpp"
#include "facilitrans/model.hpp"

#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

namespace facilitrans {

/// exp(-i H t) via a cached Hermitian eigendecomposition.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const CMatrix& hamiltonian);

  CVector apply(const CVector& psi, Real duration) const;
  CMatrix unitary(Real duration) const;

 private:
  CMatrix vectors_;
  RVector energies_;
};

PureState evolve_unitary(const PureState& state, const HermitianOperator& h, Real duration);

struct LindbladStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  Real last_step = 0.0;
  Real hermitization = 0.0;
};

/// Dormand-Prince 5(4) integrator for
///   drho/dt = -i[H, rho] + (decay/2) sum_k (2 s-_k rho s+_k - {n_k, rho})
///             + (deph/2) sum_k (sz_k rho sz_k - rho)
/// with a per-step max-abs error bound `tol`.
class LindbladIntegrator {
 public:
  LindbladIntegrator(const HermitianOperator& h, Real gamma_decay, Real gamma_deph, Real tol);

  /// Advances rho in place; re-Hermitizes on exit.
  void advance(CMatrix& rho, Real duration);

  /// Right-hand side, exposed for tests.
  void rhs(const CMatrix& rho, CMatrix& out) const;

  const LindbladStats& stats() const { return stats_; }

 private:
  const HermitianOperator& h_;
  int n_sites_;
  Real gamma_decay_;
  Real gamma_deph_;
  Real tol_;
  Real step_hint_ = 0.0;
  LindbladStats stats_;
  CMatrix k_[7];
  CMatrix trial_;
};

DensityMatrix evolve_lindblad(const DensityMatrix& rho, const HermitianOperator& h,
                              Real gamma_decay, Real gamma_deph, Real duration,
                              Real tol = 1e-8, LindbladStats* stats = nullptr);

struct RunOptions {
  int samples_per_pulse = 50;
  Real tol = 1e-8;
  bool frame_correction = true;
};

inline constexpr Real kHermitizationWarning = 1e-7;

struct Trajectory {
  std::vector<Real> times;
  std::vector<RVector> populations;
  /// Pulse in progress at each sample; 0 for the initial sample, boundaries close their pulse.
  std::vector<int> pulse_of_sample;
  /// Cumulative pulse boundary times including t = 0.
  std::vector<Real> boundaries;
  /// Sample index of each boundary.
  std::vector<std::size_t> boundary_samples;
  /// State at each boundary, in the rotating frame of the pulse that just ended.
  std::vector<QuantumState> boundary_states;
  std::vector<std::string> warnings;
  LindbladStats lindblad;

  const QuantumState& final_state() const { return boundary_states.back(); }
  std::size_t pulse_count() const { return boundaries.size() - 1; }
  const RVector& populations_at_pulse(std::size_t pulse) const;
};

/// Pulse duration of a token in units of 1/omega.
Real pulse_duration(const ModelParams& params, const PulseToken& token);

Trajectory run_schedule(const QuantumState& initial, const PulseSchedule& schedule,
                        const ChainGeometry& geometry, const ModelParams& params,
                        const RunOptions& options = {});

/// Variant taking precomputed couplings (disorder realizations).
Trajectory run_schedule(const QuantumState& initial, const PulseSchedule& schedule,
                        const Couplings& couplings, const ModelParams& params,
                        const RunOptions& options = {});

}  // namespace facilitrans
