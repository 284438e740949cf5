#include "facilitrans/model.hpp"

#include <cmath>
#include <sstream>

namespace facilitrans {

ChainGeometry::ChainGeometry(int n_sites, Real r1, Real r2, std::vector<Vec3> displacements)
    : n_sites_(n_sites), r1_(r1), r2_(r2), displacements_(std::move(displacements)) {
  if (n_sites < 2 || n_sites > kMaxSites) {
    throw Error(ErrorCode::InvalidGeometry, "chain needs 2.." + std::to_string(kMaxSites) +
                                                " sites, got " + std::to_string(n_sites));
  }
  if (!(r1 > 0.0) || !(r2 > r1)) {
    throw Error(ErrorCode::InvalidGeometry, "spacings must satisfy 0 < r1 < r2");
  }
  if (displacements_.empty()) {
    displacements_.assign(static_cast<std::size_t>(n_sites), Vec3::Zero());
  } else if (static_cast<int>(displacements_.size()) != n_sites) {
    throw Error(ErrorCode::InvalidGeometry, "one displacement per site required");
  }
  for (int site = 1; site < n_sites; ++site) {
    if (!(position(site + 1).x() > position(site).x())) {
      throw Error(ErrorCode::InvalidGeometry,
                  "atoms " + std::to_string(site) + " and " + std::to_string(site + 1) +
                      " cross along the chain axis");
    }
  }
}

ChainGeometry ChainGeometry::from_couplings(int n_sites, Real v1, Real v2, Real c6) {
  if (v1 == 0.0 || v2 == 0.0 || c6 == 0.0 || v1 / c6 <= 0.0 || v2 / c6 <= 0.0) {
    throw Error(ErrorCode::InvalidParams, "couplings and c6 must be nonzero with equal sign");
  }
  return ChainGeometry(n_sites, std::pow(c6 / v1, 1.0 / 6.0), std::pow(c6 / v2, 1.0 / 6.0));
}

bool ChainGeometry::displaced() const {
  for (const auto& d : displacements_) {
    if (!d.isZero(0.0)) return true;
  }
  return false;
}

Vec3 ChainGeometry::ideal_position(int site) const {
  Real x = 0.0;
  for (int j = 1; j < site; ++j) x += gap(j);
  return Vec3(x, 0.0, 0.0);
}

Vec3 ChainGeometry::position(int site) const {
  return ideal_position(site) + displacements_[static_cast<std::size_t>(site - 1)];
}

ChainGeometry ChainGeometry::with_displacements(std::vector<Vec3> displacements) const {
  return ChainGeometry(n_sites_, r1_, r2_, std::move(displacements));
}

void ModelParams::validate() const {
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidParams, "omega must be positive");
  if (v1 == 0.0 || v2 == 0.0 || !(std::abs(v1) > std::abs(v2))) {
    throw Error(ErrorCode::InvalidParams, "need |v1| > |v2| > 0");
  }
  if ((v1 > 0.0) != (v2 > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "v1 and v2 must share a sign");
  }
  if (c6 && (*c6 == 0.0 || (*c6 > 0.0) != (v1 > 0.0))) {
    throw Error(ErrorCode::InvalidParams, "c6 must share the sign of the couplings");
  }
  if (gamma_decay < 0.0 || gamma_deph < 0.0) {
    throw Error(ErrorCode::InvalidParams, "rates must be non-negative");
  }
  if (!(period_scale > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "period_scale must be positive");
  }
}

PulseSchedule PulseSchedule::from_indices(const std::vector<int>& indices) {
  PulseSchedule schedule;
  for (int i : indices) schedule.tokens.push_back(PulseToken{i, 1.0, std::nullopt});
  schedule.validate();
  return schedule;
}

std::vector<int> PulseSchedule::indices() const {
  std::vector<int> out;
  for (const auto& t : tokens) out.push_back(t.detuning_index);
  return out;
}

void PulseSchedule::validate() const {
  if (tokens.empty()) throw Error(ErrorCode::InvalidParams, "schedule is empty");
  for (const auto& t : tokens) {
    if (t.detuning_index != 1 && t.detuning_index != 2) {
      throw Error(ErrorCode::InvalidParams, "detuning index must be 1 or 2");
    }
    if (!(t.duration_in_T > 0.0)) {
      throw Error(ErrorCode::InvalidParams, "pulse duration must be positive");
    }
  }
}

Real interaction_strength(const Vec3& separation, Real c6) {
  const Real r2 = separation.squaredNorm();
  if (r2 == 0.0) throw Error(ErrorCode::ZeroDistance, "coincident atoms");
  return c6 / (r2 * r2 * r2);
}

EffectiveRabi effective_rabi(Real omega) {
  const Real omega_tilde = std::sqrt(2.0) * omega / 2.0;
  return {omega_tilde, std::numbers::pi / omega_tilde};
}

Couplings chain_couplings(const ChainGeometry& geometry, const ModelParams& params) {
  const int n = geometry.n_sites();
  const Real c6 = params.c6_for(geometry);
  Couplings out;
  out.nn.resize(static_cast<std::size_t>(n - 1));
  out.nnn.assign(static_cast<std::size_t>(std::max(n - 2, 0)), 0.0);
  if (!geometry.displaced()) {
    for (int j = 1; j < n; ++j) {
      out.nn[static_cast<std::size_t>(j - 1)] = ChainGeometry::gap_kind(j) == 1 ? params.v1 : params.v2;
    }
    if (params.include_nnn) {
      const Real span = geometry.r1() + geometry.r2();
      const Real v_nnn = interaction_strength(Vec3(span, 0.0, 0.0), c6);
      std::fill(out.nnn.begin(), out.nnn.end(), v_nnn);
    }
    return out;
  }
  out = couplings_from_positions(geometry, c6);
  if (!params.include_nnn) std::fill(out.nnn.begin(), out.nnn.end(), 0.0);
  return out;
}

Couplings couplings_from_positions(const ChainGeometry& geometry, Real c6) {
  const int n = geometry.n_sites();
  const auto& d = geometry.displacements();
  Couplings out;
  // Ideal gap plus displacement difference, so zero displacement reproduces
  // c6 / gap^6 exactly.
  for (int j = 1; j < n; ++j) {
    const Vec3 sep = Vec3(geometry.gap(j), 0.0, 0.0) +
                     (d[static_cast<std::size_t>(j)] - d[static_cast<std::size_t>(j - 1)]);
    out.nn.push_back(interaction_strength(sep, c6));
  }
  for (int j = 1; j + 2 <= n; ++j) {
    const Vec3 sep = Vec3(geometry.gap(j) + geometry.gap(j + 1), 0.0, 0.0) +
                     (d[static_cast<std::size_t>(j + 1)] - d[static_cast<std::size_t>(j - 1)]);
    out.nnn.push_back(interaction_strength(sep, c6));
  }
  return out;
}

HermitianOperator build_pulse_hamiltonian(int n_sites, const Couplings& couplings, Real omega,
                                          Real detuning) {
  const auto dim = static_cast<Eigen::Index>(basis_dimension(n_sites));
  DriveStructure structure{RVector::Zero(dim), omega / 2.0, n_sites};
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto idx = static_cast<BasisIndex>(s);
    Real e = -detuning * excitation_number(idx);
    for (int j = 1; j < n_sites; ++j) {
      const BasisIndex pair = site_mask(n_sites, j) | site_mask(n_sites, j + 1);
      if ((idx & pair) == pair) e += couplings.nn[static_cast<std::size_t>(j - 1)];
    }
    for (int j = 1; j + 2 <= n_sites; ++j) {
      const BasisIndex pair = site_mask(n_sites, j) | site_mask(n_sites, j + 2);
      if ((idx & pair) == pair) e += couplings.nnn[static_cast<std::size_t>(j - 1)];
    }
    structure.diagonal[s] = e;
  }
  CMatrix h = CMatrix::Zero(dim, dim);
  h.diagonal() = structure.diagonal.cast<Complex>();
  for (Eigen::Index s = 0; s < dim; ++s) {
    for (int j = 1; j <= n_sites; ++j) {
      const auto t = static_cast<Eigen::Index>(static_cast<BasisIndex>(s) ^ site_mask(n_sites, j));
      h(t, s) += structure.half_omega;
    }
  }
  return HermitianOperator{std::move(h), detuning, std::move(structure)};
}

HermitianOperator build_pulse_hamiltonian(const ChainGeometry& geometry,
                                          const ModelParams& params, int pulse_index,
                                          std::optional<Real> d_delta_override) {
  if (pulse_index != 1 && pulse_index != 2) {
    throw Error(ErrorCode::InvalidParams, "pulse index must be 1 or 2");
  }
  // Detunings track the ideal spacings regardless of displacements.
  Real detuning = params.detuning(pulse_index);
  if (d_delta_override) detuning = (pulse_index == 1 ? params.v1 : params.v2) + *d_delta_override;
  return build_pulse_hamiltonian(geometry.n_sites(), chain_couplings(geometry, params),
                                 params.omega, detuning);
}

CVector frame_switch_phase(int n_sites, Real delta_prev, Real delta_next, Real t_switch) {
  const auto dim = static_cast<Eigen::Index>(basis_dimension(n_sites));
  const Real phase = (delta_next - delta_prev) * t_switch;
  // One phase factor per excitation number.
  std::vector<Complex> by_count(static_cast<std::size_t>(n_sites + 1));
  for (int m = 0; m <= n_sites; ++m) by_count[static_cast<std::size_t>(m)] = std::polar(1.0, phase * m);
  CVector diag(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    diag[s] = by_count[static_cast<std::size_t>(excitation_number(static_cast<BasisIndex>(s)))];
  }
  return diag;
}

PulseSchedule plan_route(const ChainGeometry& geometry, int start_site,
                         const std::vector<int>& waypoints) {
  const int n = geometry.n_sites();
  auto in_range = [n](int s) { return s >= 1 && s <= n; };
  if (!in_range(start_site)) {
    throw Error(ErrorCode::UnreachableWaypoint, "start site " + std::to_string(start_site));
  }
  if (waypoints.empty()) throw Error(ErrorCode::UnreachableWaypoint, "route has no waypoints");
  PulseSchedule schedule;
  int here = start_site;
  for (int target : waypoints) {
    if (!in_range(target)) {
      throw Error(ErrorCode::UnreachableWaypoint, "waypoint " + std::to_string(target) +
                                                      " outside chain of " + std::to_string(n));
    }
    if (target == here) {
      throw Error(ErrorCode::UnreachableWaypoint, "waypoint " + std::to_string(target) +
                                                      " repeats the current site");
    }
    const int step = target > here ? 1 : -1;
    while (here != target) {
      const int gap_site = step > 0 ? here : here - 1;
      schedule.tokens.push_back(PulseToken{ChainGeometry::gap_kind(gap_site), 1.0, std::nullopt});
      here += step;
    }
  }
  return schedule;
}

HierarchyReport hierarchy_diagnostics(const ModelParams& params, const ChainGeometry& geometry) {
  HierarchyReport r;
  const Real c6 = params.c6_for(geometry);
  const Real v_nnn =
      interaction_strength(Vec3(geometry.r1() + geometry.r2(), 0.0, 0.0), c6);
  r.omega_over_v2 = params.omega / std::abs(params.v2);
  r.omega_over_dv = params.omega / std::abs(params.v1 - params.v2);
  r.nnn_ratio = v_nnn / params.v2;
  r.nnn_bound = params.v1 / (64.0 * params.v2);
  r.geometric_ratio = std::pow(geometry.r2() / (geometry.r1() + geometry.r2()), 6);
  std::ostringstream msg;
  if (r.omega_over_v2 > kHierarchyWarning) {
    r.warning = true;
    msg << "omega/|V_r2| = " << r.omega_over_v2 << " exceeds " << kHierarchyWarning << "; ";
  }
  if (r.omega_over_dv > kHierarchyWarning) {
    r.warning = true;
    msg << "omega/|V_r1 - V_r2| = " << r.omega_over_dv << " exceeds " << kHierarchyWarning << "; ";
  }
  r.message = r.warning ? msg.str() : "ok";
  return r;
}

}  // namespace facilitrans
