#include "facilitrans/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

namespace facilitrans {

namespace {

constexpr Real kNormTol = 1e-10;
constexpr Real kHermTol = 1e-10;
constexpr Real kTraceTol = 1e-8;
constexpr Real kPsdTol = 1e-8;

void check_site_count(int n_sites) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw Error(ErrorCode::InvalidState,
                "site count " + std::to_string(n_sites) + " outside [1, " +
                    std::to_string(kMaxSites) + "]");
  }
}

void check_pair(int n_sites, int a, int b) {
  if (a == b || a < 1 || b < 1 || a > n_sites || b > n_sites) {
    throw Error(ErrorCode::InvalidSites, "site pair (" + std::to_string(a) + ", " +
                                             std::to_string(b) + ") for N=" +
                                             std::to_string(n_sites));
  }
}

}  // namespace

OccupationPattern::OccupationPattern(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) throw Error(ErrorCode::InvalidState, "empty occupation pattern");
  for (auto b : bits_) {
    if (b > 1) throw Error(ErrorCode::InvalidState, "occupation must be 0 or 1");
  }
}

OccupationPattern OccupationPattern::from_string(std::string_view ket) {
  std::vector<std::uint8_t> bits;
  bits.reserve(ket.size());
  for (char c : ket) {
    if (c != '0' && c != '1') {
      throw Error(ErrorCode::InvalidState, "bad ket character '" + std::string(1, c) + "'");
    }
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return OccupationPattern(std::move(bits));
}

std::string OccupationPattern::to_string() const {
  std::string out;
  for (auto b : bits_) out.push_back(static_cast<char>('0' + b));
  return out;
}

BasisIndex basis_index(const OccupationPattern& pattern) {
  BasisIndex index = 0;
  for (auto b : pattern.bits()) index = (index << 1) | b;
  return index;
}

OccupationPattern pattern_from_index(int n_sites, BasisIndex index) {
  check_site_count(n_sites);
  if (index >= basis_dimension(n_sites)) {
    throw Error(ErrorCode::IndexOutOfRange, "basis index " + std::to_string(index));
  }
  std::vector<std::uint8_t> bits(n_sites);
  for (int site = 1; site <= n_sites; ++site) {
    bits[site - 1] = (index & site_mask(n_sites, site)) ? 1 : 0;
  }
  return OccupationPattern(std::move(bits));
}

PureState::PureState(int n_sites, CVector amplitudes)
    : n_sites_(n_sites), amplitudes_(std::move(amplitudes)) {
  check_site_count(n_sites);
  if (static_cast<BasisIndex>(amplitudes_.size()) != basis_dimension(n_sites)) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude vector length does not match 2^N");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > kNormTol) {
    throw Error(ErrorCode::InvalidState, "state norm deviates from 1");
  }
}

DensityMatrix::DensityMatrix(int n_sites, CMatrix matrix)
    : DensityMatrix(n_sites, std::move(matrix), true) {}

DensityMatrix DensityMatrix::unchecked(int n_sites, CMatrix matrix) {
  return DensityMatrix(n_sites, std::move(matrix), false);
}

DensityMatrix::DensityMatrix(int n_sites, CMatrix matrix, bool validate)
    : n_sites_(n_sites), matrix_(std::move(matrix)) {
  check_site_count(n_sites);
  if (matrix_.rows() != matrix_.cols() ||
      static_cast<BasisIndex>(matrix_.rows()) != basis_dimension(n_sites)) {
    throw Error(ErrorCode::DimensionMismatch, "density matrix must be 2^N x 2^N");
  }
  if (!validate) return;
  if (hermiticity_error() > kHermTol) {
    throw Error(ErrorCode::InvalidState, "density matrix is not Hermitian");
  }
  if (std::abs(trace_real() - 1.0) > kTraceTol) {
    throw Error(ErrorCode::InvalidState, "density matrix trace deviates from 1");
  }
  if (min_eigenvalue() < -kPsdTol) {
    throw Error(ErrorCode::InvalidState, "density matrix has a negative eigenvalue");
  }
}

Real DensityMatrix::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

Real DensityMatrix::min_eigenvalue() const {
  CMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

int n_sites_of(const QuantumState& state) {
  return std::visit([](const auto& s) { return s.n_sites(); }, state);
}

PureState make_pure(const std::vector<OccupationPattern>& patterns,
                    const std::vector<Complex>& amplitudes) {
  if (patterns.empty() || patterns.size() != amplitudes.size()) {
    throw Error(ErrorCode::DimensionMismatch, "patterns and amplitudes differ in length");
  }
  const int n_sites = patterns.front().size();
  check_site_count(n_sites);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(basis_dimension(n_sites)));
  std::set<BasisIndex> seen;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    if (patterns[k].size() != n_sites) {
      throw Error(ErrorCode::DimensionMismatch, "patterns differ in length");
    }
    const auto index = basis_index(patterns[k]);
    if (!seen.insert(index).second) {
      throw Error(ErrorCode::InvalidState, "duplicate pattern " + patterns[k].to_string());
    }
    amps[static_cast<Eigen::Index>(index)] = amplitudes[k];
  }
  const Real norm = amps.norm();
  if (norm == 0.0) throw Error(ErrorCode::ZeroVector, "all amplitudes are zero");
  amps /= norm;
  return PureState(n_sites, std::move(amps));
}

PureState basis_state(const OccupationPattern& pattern) {
  return make_pure({pattern}, {Complex{1.0, 0.0}});
}

PureState single_excitation(int n_sites, int site) {
  check_site_count(n_sites);
  if (site < 1 || site > n_sites) {
    throw Error(ErrorCode::InvalidSites, "site " + std::to_string(site));
  }
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(basis_dimension(n_sites)));
  amps[static_cast<Eigen::Index>(site_mask(n_sites, site))] = 1.0;
  return PureState(n_sites, std::move(amps));
}

PureState bell_pair(int n_sites, int site_a, int site_b) {
  check_site_count(n_sites);
  check_pair(n_sites, site_a, site_b);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(basis_dimension(n_sites)));
  const Real h = 1.0 / std::sqrt(2.0);
  amps[static_cast<Eigen::Index>(site_mask(n_sites, site_a))] = h;
  amps[static_cast<Eigen::Index>(site_mask(n_sites, site_b))] = h;
  return PureState(n_sites, std::move(amps));
}

PureState psi_plus() { return bell_pair(2, 1, 2); }

DensityMatrix to_density(const PureState& state) {
  const auto& v = state.amplitudes();
  return DensityMatrix::unchecked(state.n_sites(), v * v.adjoint());
}

ReducedTwoAtomState partial_trace(const PureState& state, int site_a, int site_b) {
  const int n = state.n_sites();
  check_pair(n, site_a, site_b);
  if (site_a > site_b) throw Error(ErrorCode::InvalidSites, "site pair must satisfy a < b");
  const BasisIndex ma = site_mask(n, site_a);
  const BasisIndex mb = site_mask(n, site_b);
  const BasisIndex keep = ma | mb;
  const auto& psi = state.amplitudes();
  ReducedTwoAtomState out{Eigen::Matrix4cd::Zero(), site_a, site_b};
  // Environment configurations are indices with the kept bits cleared.
  const BasisIndex dim = basis_dimension(n);
  for (BasisIndex env = 0; env < dim; ++env) {
    if (env & keep) continue;
    const BasisIndex idx[4] = {env, env | mb, env | ma, env | ma | mb};
    for (int r = 0; r < 4; ++r) {
      const Complex pr = psi[static_cast<Eigen::Index>(idx[r])];
      if (pr == Complex{}) continue;
      for (int c = 0; c < 4; ++c) {
        out.matrix(r, c) += pr * std::conj(psi[static_cast<Eigen::Index>(idx[c])]);
      }
    }
  }
  return out;
}

ReducedTwoAtomState partial_trace(const DensityMatrix& state, int site_a, int site_b) {
  const int n = state.n_sites();
  check_pair(n, site_a, site_b);
  if (site_a > site_b) throw Error(ErrorCode::InvalidSites, "site pair must satisfy a < b");
  const BasisIndex ma = site_mask(n, site_a);
  const BasisIndex mb = site_mask(n, site_b);
  const BasisIndex keep = ma | mb;
  const auto& rho = state.matrix();
  ReducedTwoAtomState out{Eigen::Matrix4cd::Zero(), site_a, site_b};
  const BasisIndex dim = basis_dimension(n);
  for (BasisIndex env = 0; env < dim; ++env) {
    if (env & keep) continue;
    const BasisIndex idx[4] = {env, env | mb, env | ma, env | ma | mb};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        out.matrix(r, c) +=
            rho(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c]));
      }
    }
  }
  return out;
}

ReducedTwoAtomState partial_trace(const QuantumState& state, int site_a, int site_b) {
  return std::visit([&](const auto& s) { return partial_trace(s, site_a, site_b); }, state);
}

Real state_fidelity(const ReducedTwoAtomState& reduced, const PureState& target) {
  if (target.dim() != 4) {
    throw Error(ErrorCode::DimensionMismatch, "target must be a two-atom state");
  }
  const auto& rho = reduced.matrix;
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw Error(ErrorCode::NonHermitianInput, "reduced state is not Hermitian");
  }
  const Eigen::Vector4cd t = target.amplitudes();
  const Complex overlap = t.dot(rho * t);
  if (std::abs(overlap.imag()) > kHermTol) {
    throw Error(ErrorCode::NonHermitianInput, "fidelity has an imaginary part");
  }
  return overlap.real();
}

RVector site_populations(const PureState& state) {
  const int n = state.n_sites();
  RVector pops = RVector::Zero(n);
  const auto& psi = state.amplitudes();
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const Real p = std::norm(psi[i]);
    if (p == 0.0) continue;
    for (int site = 1; site <= n; ++site) {
      if (static_cast<BasisIndex>(i) & site_mask(n, site)) pops[site - 1] += p;
    }
  }
  return pops;
}

RVector site_populations(const DensityMatrix& state) {
  const int n = state.n_sites();
  RVector pops = RVector::Zero(n);
  const auto& rho = state.matrix();
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    const Real p = rho(i, i).real();
    for (int site = 1; site <= n; ++site) {
      if (static_cast<BasisIndex>(i) & site_mask(n, site)) pops[site - 1] += p;
    }
  }
  return pops;
}

RVector site_populations(const QuantumState& state) {
  return std::visit([](const auto& s) { return site_populations(s); }, state);
}

Real trace_distance(const CMatrix& a, const CMatrix& b) {
  CMatrix diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace facilitrans
