// model.hpp
// Chain geometry, van der Waals couplings, rotating-frame pulse Hamiltonians,
// pi-pulse timing, route planning and energy-hierarchy diagnostics.
//
// Internal units: frequencies in units of the drive Rabi frequency, lengths in
// units of the short spacing r1 unless the geometry says otherwise.

#pragma once

#include "facilitrans/hilbert.hpp"
#include "facilitrans/types.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace facilitrans {

/// Alternating-spacing chain along x. Gap (2j-1, 2j) has length r1, gap (2j, 2j+1) r2.
class ChainGeometry {
 public:
  ChainGeometry(int n_sites, Real r1, Real r2, std::vector<Vec3> displacements = {});

  /// Spacings chosen so that c6 / r_i^6 reproduces v1 and v2.
  static ChainGeometry from_couplings(int n_sites, Real v1, Real v2, Real c6);

  int n_sites() const { return n_sites_; }
  Real r1() const { return r1_; }
  Real r2() const { return r2_; }
  const std::vector<Vec3>& displacements() const { return displacements_; }
  bool displaced() const;

  /// Gap length between `site` and `site + 1` in the ideal chain.
  Real gap(int site) const { return site % 2 == 1 ? r1_ : r2_; }
  /// 1 for an r1 gap, 2 for an r2 gap.
  static int gap_kind(int site) { return site % 2 == 1 ? 1 : 2; }

  Vec3 ideal_position(int site) const;
  Vec3 position(int site) const;

  ChainGeometry with_displacements(std::vector<Vec3> displacements) const;

 private:
  int n_sites_;
  Real r1_;
  Real r2_;
  std::vector<Vec3> displacements_;
};

struct ModelParams {
  Real omega = 1.0;
  Real v1 = 20.0;
  Real v2 = 10.0;
  Real d_delta1 = 0.0;
  Real d_delta2 = 0.0;
  bool include_nnn = true;
  /// Defaults to v1 * r1^6 of the geometry in use.
  std::optional<Real> c6;
  Real gamma_decay = 0.0;
  Real gamma_deph = 0.0;
  /// Pulse length in units of pi / omega_tilde.
  Real period_scale = 1.0;

  void validate() const;
  Real c6_for(const ChainGeometry& geometry) const {
    return c6 ? *c6 : v1 * std::pow(geometry.r1(), 6);
  }
  /// Signed resonance detuning of pulse kind 1 or 2 including the mismatch.
  Real detuning(int pulse_index) const {
    return pulse_index == 1 ? v1 + d_delta1 : v2 + d_delta2;
  }
  bool dissipative() const { return gamma_decay > 0.0 || gamma_deph > 0.0; }
};

struct PulseToken {
  int detuning_index = 1;
  Real duration_in_T = 1.0;
  /// Per-step mismatch override; replaces d_delta1/d_delta2 for this pulse only.
  std::optional<Real> d_delta;

  friend bool operator==(const PulseToken&, const PulseToken&) = default;
};

struct PulseSchedule {
  std::vector<PulseToken> tokens;

  static PulseSchedule from_indices(const std::vector<int>& indices);
  std::vector<int> indices() const;
  std::size_t size() const { return tokens.size(); }
  void validate() const;
};

/// Diagonal energies plus a uniform transverse drive (drive/2) * sum_j sigma^x_j.
struct DriveStructure {
  RVector diagonal;
  Real half_omega = 0.0;
  int n_sites = 0;
};

struct HermitianOperator {
  CMatrix matrix;
  Real detuning = 0.0;
  /// Present for operators built by build_pulse_hamiltonian; enables O(D^2 N) Lindblad steps.
  std::optional<DriveStructure> structure;
};

/// Nearest and next-nearest couplings; nnn is all zero when the term is disabled.
struct Couplings {
  std::vector<Real> nn;   // gap (j, j+1) at index j-1
  std::vector<Real> nnn;  // pair (j, j+2) at index j-1
};

struct EffectiveRabi {
  Real omega_tilde;
  Real period;
};

/// c6 / |r|^6.
Real interaction_strength(const Vec3& separation, Real c6);

EffectiveRabi effective_rabi(Real omega);

/// Couplings of the ideal chain when undisplaced, otherwise from displaced 3D positions.
Couplings chain_couplings(const ChainGeometry& geometry, const ModelParams& params);

/// NN and NNN couplings from displaced 3D separations, NNN always included.
Couplings couplings_from_positions(const ChainGeometry& geometry, Real c6);

/// Rotating-frame operator -Delta*sum n_j + (omega/2) sum sigma^x_j + interactions.
HermitianOperator build_pulse_hamiltonian(const ChainGeometry& geometry,
                                          const ModelParams& params, int pulse_index,
                                          std::optional<Real> d_delta_override = std::nullopt);

/// Same operator from precomputed couplings (disorder realizations reuse this).
HermitianOperator build_pulse_hamiltonian(int n_sites, const Couplings& couplings,
                                          Real omega, Real detuning);

/// Diagonal of exp(i (delta_next - delta_prev) t_switch * sum_j n_j).
CVector frame_switch_phase(int n_sites, Real delta_prev, Real delta_next, Real t_switch);

PulseSchedule plan_route(const ChainGeometry& geometry, int start_site,
                         const std::vector<int>& waypoints);

struct HierarchyReport {
  Real omega_over_v2 = 0.0;
  Real omega_over_dv = 0.0;
  Real nnn_ratio = 0.0;       // V_{r1+r2} / V_{r2}
  Real nnn_bound = 0.0;       // V_{r1} / (2^6 V_{r2})
  Real geometric_ratio = 0.0; // (r2 / (r1 + r2))^6
  bool warning = false;
  std::string message;
};

inline constexpr Real kHierarchyWarning = 0.25;

HierarchyReport hierarchy_diagnostics(const ModelParams& params, const ChainGeometry& geometry);

/// Converts between internal units and lab units (2pi*MHz, microseconds, micrometers).
struct PhysicalUnits {
  Real omega_2pi_mhz = 1.0;
  Real length_unit_um = 1.0;

  Real omega_rad_per_us() const { return 2.0 * std::numbers::pi * omega_2pi_mhz; }
  Real time_to_us(Real t) const { return t / omega_rad_per_us(); }
  Real time_from_us(Real t_us) const { return t_us * omega_rad_per_us(); }
  Real rate_from_2pi_mhz(Real f) const { return f / omega_2pi_mhz; }
  Real length_from_um(Real um) const { return um / length_unit_um; }
  Real length_to_um(Real l) const { return l * length_unit_um; }
  Real length_from_nm(Real nm) const { return length_from_um(nm * 1e-3); }
  Real c6_from_lab(Real c6_2pi_mhz_um6) const {
    return c6_2pi_mhz_um6 / (omega_2pi_mhz * std::pow(length_unit_um, 6));
  }
};

}  // namespace facilitrans
