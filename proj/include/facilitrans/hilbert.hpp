// hilbert.hpp
// Occupation-basis bookkeeping for a chain of two-level atoms.
//
// Basis convention: site 1 is the most significant bit of the basis index,
// so the binary representation of an index prints kets left to right.
// Sites are 1-based everywhere in the public interface.

#pragma once

#include "facilitrans/types.hpp"

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace facilitrans {

using BasisIndex = std::uint64_t;

inline constexpr int kMaxSites = 16;

/// Single-site mask of `site` (1-based) in an `n_sites` chain.
constexpr BasisIndex site_mask(int n_sites, int site) {
  return BasisIndex{1} << (n_sites - site);
}

constexpr BasisIndex basis_dimension(int n_sites) { return BasisIndex{1} << n_sites; }

constexpr int excitation_number(BasisIndex index) { return std::popcount(index); }

class OccupationPattern {
 public:
  OccupationPattern() = default;
  explicit OccupationPattern(std::vector<std::uint8_t> bits);

  /// Parses a ket string such as "00010000".
  static OccupationPattern from_string(std::string_view ket);

  int size() const { return static_cast<int>(bits_.size()); }
  std::uint8_t operator[](int site) const { return bits_.at(site - 1); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::string to_string() const;

  friend bool operator==(const OccupationPattern&, const OccupationPattern&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

BasisIndex basis_index(const OccupationPattern& pattern);
OccupationPattern pattern_from_index(int n_sites, BasisIndex index);

/// Normalized amplitude vector over the 2^N occupation basis.
class PureState {
 public:
  PureState(int n_sites, CVector amplitudes);

  int n_sites() const { return n_sites_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const CVector& amplitudes() const { return amplitudes_; }

 private:
  int n_sites_;
  CVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite operator on 2^N states.
class DensityMatrix {
 public:
  /// Validates all invariants (including the eigenvalue bound).
  DensityMatrix(int n_sites, CMatrix matrix);

  /// Skips validation; for integrator internals that check drift separately.
  static DensityMatrix unchecked(int n_sites, CMatrix matrix);

  int n_sites() const { return n_sites_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const CMatrix& matrix() const { return matrix_; }

  Real trace_real() const { return matrix_.trace().real(); }
  Real hermiticity_error() const;
  Real min_eigenvalue() const;

 private:
  DensityMatrix(int n_sites, CMatrix matrix, bool validate);

  int n_sites_;
  CMatrix matrix_;
};

using QuantumState = std::variant<PureState, DensityMatrix>;

int n_sites_of(const QuantumState& state);

/// 4x4 state of sites (a, b), basis |00>,|01>,|10>,|11> with a as the left slot.
struct ReducedTwoAtomState {
  Eigen::Matrix4cd matrix;
  int site_a = 0;
  int site_b = 0;
};

PureState make_pure(const std::vector<OccupationPattern>& patterns,
                    const std::vector<Complex>& amplitudes);
PureState basis_state(const OccupationPattern& pattern);
PureState single_excitation(int n_sites, int site);
/// (|..1_a..0_b..> + |..0_a..1_b..>)/sqrt(2)
PureState bell_pair(int n_sites, int site_a, int site_b);
/// Two-atom Psi+ = (|01> + |10>)/sqrt(2).
PureState psi_plus();

DensityMatrix to_density(const PureState& state);

ReducedTwoAtomState partial_trace(const PureState& state, int site_a, int site_b);
ReducedTwoAtomState partial_trace(const DensityMatrix& state, int site_a, int site_b);
ReducedTwoAtomState partial_trace(const QuantumState& state, int site_a, int site_b);

/// <target|rho|target>; throws NonHermitianInput rather than symmetrizing.
Real state_fidelity(const ReducedTwoAtomState& reduced, const PureState& target);

RVector site_populations(const PureState& state);
RVector site_populations(const DensityMatrix& state);
RVector site_populations(const QuantumState& state);

/// Trace distance 0.5 * ||a - b||_1 via Hermitian eigenvalues.
Real trace_distance(const CMatrix& a, const CMatrix& b);

}  // namespace facilitrans
