#include "facilitrans/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

namespace facilitrans {

namespace {

// Dormand-Prince 5(4) tableau. The right-hand side is autonomous within a
// pulse, so the nodes c_i never enter.
constexpr Real a21 = 1.0 / 5;
constexpr Real a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
               a54 = -212.0 / 729;
constexpr Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
               a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr Real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
               b6 = 11.0 / 84;
constexpr Real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
               e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

void check_square(const CMatrix& m, Eigen::Index dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, what);
  }
}

}  // namespace

UnitaryPropagator::UnitaryPropagator(const CMatrix& hamiltonian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::ToleranceNotMet, "eigendecomposition failed");
  }
  vectors_ = solver.eigenvectors();
  energies_ = solver.eigenvalues();
}

CVector UnitaryPropagator::apply(const CVector& psi, Real duration) const {
  if (psi.size() != vectors_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "state and Hamiltonian dimensions differ");
  }
  CVector coeffs = vectors_.adjoint() * psi;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    coeffs[i] *= std::polar(1.0, -energies_[i] * duration);
  }
  return vectors_ * coeffs;
}

CMatrix UnitaryPropagator::unitary(Real duration) const {
  CVector phases(energies_.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::polar(1.0, -energies_[i] * duration);
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

PureState evolve_unitary(const PureState& state, const HermitianOperator& h, Real duration) {
  check_square(h.matrix, state.dim(), "state and Hamiltonian dimensions differ");
  if (duration < 0.0) throw Error(ErrorCode::InvalidParams, "negative duration");
  if (duration == 0.0) return state;
  UnitaryPropagator propagator(h.matrix);
  return PureState(state.n_sites(), propagator.apply(state.amplitudes(), duration));
}

LindbladIntegrator::LindbladIntegrator(const HermitianOperator& h, Real gamma_decay,
                                       Real gamma_deph, Real tol)
    : h_(h), gamma_decay_(gamma_decay), gamma_deph_(gamma_deph), tol_(tol) {
  if (gamma_decay < 0.0 || gamma_deph < 0.0) {
    throw Error(ErrorCode::InvalidParams, "rates must be non-negative");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParams, "tolerance must be positive");
  const auto dim = h.matrix.rows();
  n_sites_ = 0;
  while ((Eigen::Index{1} << n_sites_) < dim) ++n_sites_;
  if ((Eigen::Index{1} << n_sites_) != dim || dim != h.matrix.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian dimension is not 2^N");
  }
  for (auto& k : k_) k.resize(dim, dim);
  trial_.resize(dim, dim);
}

void LindbladIntegrator::rhs(const CMatrix& rho, CMatrix& out) const {
  const Eigen::Index dim = rho.rows();
  const int n = n_sites_;
  const Complex minus_i{0.0, -1.0};
  out.resize(dim, dim);
  const bool structured = h_.structure.has_value();
  if (!structured) {
    out.noalias() = minus_i * (h_.matrix * rho);
    out.noalias() -= minus_i * (rho * h_.matrix);
    if (gamma_decay_ <= 0.0 && gamma_deph_ <= 0.0) return;
  }
  const Real* diag = structured ? h_.structure->diagonal.data() : nullptr;
  const Complex hop = structured ? minus_i * h_.structure->half_omega : Complex{};
  const Real half_decay = 0.5 * gamma_decay_;
  const bool decay = gamma_decay_ > 0.0;
  std::vector<Eigen::Index> masks(n);
  for (int j = 0; j < n; ++j) masks[j] = static_cast<Eigen::Index>(site_mask(n, j + 1));
  std::vector<const Complex*> flipped(n);

  // One pass per column b; every term reads column b or a column one bit away.
  for (Eigen::Index b = 0; b < dim; ++b) {
    const Complex* src = rho.data() + b * dim;
    Complex* dst = out.data() + b * dim;
    for (int j = 0; j < n; ++j) flipped[j] = rho.data() + (b ^ masks[j]) * dim;
    const int mb = excitation_number(static_cast<BasisIndex>(b));
    for (Eigen::Index a = 0; a < dim; ++a) {
      const Complex r = src[a];
      Complex acc{};
      if (structured) {
        Complex sum{};
        for (int j = 0; j < n; ++j) sum += src[a ^ masks[j]] - flipped[j][a];
        acc = minus_i * (diag[a] - diag[b]) * r + hop * sum;
      }
      const auto ab = static_cast<BasisIndex>(a ^ b);
      acc -= (half_decay * (excitation_number(static_cast<BasisIndex>(a)) + mb) +
              gamma_deph_ * excitation_number(ab)) * r;
      if (decay) {
        // Recycling from rho(a|m, b|m) for every site m empty in both a and b.
        Complex gain{};
        for (int j = 0; j < n; ++j) {
          const Eigen::Index m = masks[j];
          if (!((a | b) & m)) gain += flipped[j][a | m];
        }
        acc += gamma_decay_ * gain;
      }
      if (structured) {
        dst[a] = acc;
      } else {
        dst[a] += acc;
      }
    }
  }
}

void LindbladIntegrator::advance(CMatrix& rho, Real duration) {
  if (duration < 0.0) throw Error(ErrorCode::InvalidParams, "negative duration");
  if (duration == 0.0) return;
  auto& [k1, k2, k3, k4, k5, k6, k7] = k_;
  if (step_hint_ <= 0.0) {
    Real scale = 1.0 + gamma_decay_ * n_sites_ + gamma_deph_ * n_sites_;
    if (h_.structure) {
      scale += h_.structure->diagonal.cwiseAbs().maxCoeff() + 2.0 * h_.structure->half_omega * n_sites_;
    } else {
      scale += h_.matrix.cwiseAbs().rowwise().sum().maxCoeff();
    }
    step_hint_ = 0.1 / scale;
  }
  const Real min_step = 1e-13 * std::max(1.0, duration);
  rhs(rho, k1);
  Real t = 0.0;
  while (t < duration) {
    const Real remaining = duration - t;
    const bool last = step_hint_ >= remaining;
    const Real h = last ? remaining : step_hint_;

    trial_.noalias() = rho + (h * a21) * k1;
    rhs(trial_, k2);
    trial_.noalias() = rho + h * (a31 * k1 + a32 * k2);
    rhs(trial_, k3);
    trial_.noalias() = rho + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(trial_, k4);
    trial_.noalias() = rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(trial_, k5);
    trial_.noalias() = rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(trial_, k6);
    trial_.noalias() = rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(trial_, k7);

    const Real err =
        (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).cwiseAbs().maxCoeff() /
        tol_;
    const Real factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      rho.swap(trial_);
      std::swap(k1, k7);
      t = last ? duration : t + h;
      ++stats_.accepted_steps;
      stats_.last_step = h;
      // A truncated final step says nothing about the natural step size.
      if (!last || factor < 1.0) step_hint_ = std::max(step_hint_, h) * factor;
    } else {
      ++stats_.rejected_steps;
      step_hint_ = h * factor;
    }
    if (step_hint_ < min_step) {
      std::ostringstream msg;
      msg << "step size underflow at t=" << t << " (step " << step_hint_ << ")";
      throw Error(ErrorCode::ToleranceNotMet, msg.str());
    }
  }
  trial_ = rho.adjoint();
  const Real correction = 0.5 * (rho - trial_).cwiseAbs().maxCoeff();
  stats_.hermitization = std::max(stats_.hermitization, correction);
  rho = 0.5 * (rho + trial_);
}

DensityMatrix evolve_lindblad(const DensityMatrix& rho, const HermitianOperator& h,
                              Real gamma_decay, Real gamma_deph, Real duration, Real tol,
                              LindbladStats* stats) {
  check_square(h.matrix, rho.dim(), "state and Hamiltonian dimensions differ");
  // Re-validates invariants of states built through DensityMatrix::unchecked.
  DensityMatrix checked(rho.n_sites(), rho.matrix());
  LindbladIntegrator integrator(h, gamma_decay, gamma_deph, tol);
  CMatrix m = checked.matrix();
  integrator.advance(m, duration);
  if (stats) *stats = integrator.stats();
  return DensityMatrix::unchecked(rho.n_sites(), std::move(m));
}

const RVector& Trajectory::populations_at_pulse(std::size_t pulse) const {
  if (pulse >= boundary_samples.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "pulse " + std::to_string(pulse) + " of " +
                                                std::to_string(pulse_count()));
  }
  return populations[boundary_samples[pulse]];
}

Real pulse_duration(const ModelParams& params, const PulseToken& token) {
  return token.duration_in_T * params.period_scale * effective_rabi(params.omega).period;
}

Trajectory run_schedule(const QuantumState& initial, const PulseSchedule& schedule,
                        const ChainGeometry& geometry, const ModelParams& params,
                        const RunOptions& options) {
  if (n_sites_of(initial) != geometry.n_sites()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state and geometry differ in N");
  }
  return run_schedule(initial, schedule, chain_couplings(geometry, params), params, options);
}

Trajectory run_schedule(const QuantumState& initial, const PulseSchedule& schedule,
                        const Couplings& couplings, const ModelParams& params,
                        const RunOptions& options) {
  schedule.validate();
  params.validate();
  if (options.samples_per_pulse < 1) {
    throw Error(ErrorCode::InvalidParams, "samples_per_pulse must be at least 1");
  }
  const int n = n_sites_of(initial);
  if (static_cast<int>(couplings.nn.size()) != n - 1) {
    throw Error(ErrorCode::DimensionMismatch, "coupling table does not match N");
  }

  const bool unitary_path = std::holds_alternative<PureState>(initial) && !params.dissipative();

  std::map<std::pair<int, Real>, HermitianOperator> hamiltonians;
  std::map<std::pair<int, Real>, UnitaryPropagator> propagators;
  auto hamiltonian_for = [&](int index, Real detuning) -> const HermitianOperator& {
    const auto key = std::make_pair(index, detuning);
    auto it = hamiltonians.find(key);
    if (it == hamiltonians.end()) {
      it = hamiltonians.emplace(key, build_pulse_hamiltonian(n, couplings, params.omega, detuning)).first;
    }
    return it->second;
  };

  Trajectory traj;
  auto record = [&](Real t, int pulse, RVector pops) {
    traj.times.push_back(t);
    traj.pulse_of_sample.push_back(pulse);
    traj.populations.push_back(std::move(pops));
  };

  CVector psi;
  CMatrix rho;
  if (unitary_path) {
    psi = std::get<PureState>(initial).amplitudes();
  } else if (const auto* pure = std::get_if<PureState>(&initial)) {
    rho = pure->amplitudes() * pure->amplitudes().adjoint();
  } else {
    rho = DensityMatrix(n, std::get<DensityMatrix>(initial).matrix()).matrix();
  }

  record(0.0, 0, site_populations(initial));
  traj.boundaries.push_back(0.0);
  traj.boundary_samples.push_back(0);
  traj.boundary_states.push_back(initial);

  Real t = 0.0;
  Real prev_detuning = 0.0;
  const int samples = options.samples_per_pulse;
  for (std::size_t k = 0; k < schedule.tokens.size(); ++k) {
    const auto& token = schedule.tokens[k];
    const Real base = token.detuning_index == 1 ? params.v1 : params.v2;
    const Real detuning = token.d_delta ? base + *token.d_delta : params.detuning(token.detuning_index);
    const int pulse = static_cast<int>(k) + 1;

    if (k > 0 && options.frame_correction && detuning != prev_detuning) {
      const CVector phase = frame_switch_phase(n, prev_detuning, detuning, t);
      if (unitary_path) {
        psi = phase.cwiseProduct(psi);
      } else {
        rho = phase.asDiagonal() * rho * phase.conjugate().asDiagonal();
      }
    }

    const Real duration = pulse_duration(params, token);
    const HermitianOperator& h = hamiltonian_for(token.detuning_index, detuning);
    const Real dt = duration / (samples + 1);

    if (unitary_path) {
      const auto key = std::make_pair(token.detuning_index, detuning);
      auto it = propagators.find(key);
      if (it == propagators.end()) it = propagators.emplace(key, UnitaryPropagator(h.matrix)).first;
      const CVector start = psi;
      for (int s = 1; s <= samples; ++s) {
        record(t + s * dt, pulse, site_populations(PureState(n, it->second.apply(start, s * dt))));
      }
      psi = it->second.apply(start, duration);
      t += duration;
      PureState end(n, psi);
      record(t, pulse, site_populations(end));
      traj.boundary_states.emplace_back(std::move(end));
    } else {
      LindbladIntegrator integrator(h, params.gamma_decay, params.gamma_deph, options.tol);
      for (int s = 1; s <= samples + 1; ++s) {
        integrator.advance(rho, dt);
        const bool boundary = s == samples + 1;
        auto state = DensityMatrix::unchecked(n, rho);
        record(boundary ? t + duration : t + s * dt, pulse, site_populations(state));
        if (boundary) traj.boundary_states.emplace_back(std::move(state));
      }
      t += duration;
      const auto& st = integrator.stats();
      traj.lindblad.accepted_steps += st.accepted_steps;
      traj.lindblad.rejected_steps += st.rejected_steps;
      traj.lindblad.last_step = st.last_step;
      traj.lindblad.hermitization = std::max(traj.lindblad.hermitization, st.hermitization);
      if (st.hermitization > kHermitizationWarning) {
        std::ostringstream msg;
        msg << "pulse " << pulse << ": Hermiticity correction " << st.hermitization;
        traj.warnings.push_back(msg.str());
      }
    }
    traj.boundaries.push_back(t);
    traj.boundary_samples.push_back(traj.times.size() - 1);
    prev_detuning = detuning;
  }
  return traj;
}

}  // namespace facilitrans
