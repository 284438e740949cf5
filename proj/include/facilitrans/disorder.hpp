// disorder.hpp
// Frozen thermal position disorder: Gaussian displacement sampling with
// counter-based seeding, couplings of displaced chains, the linearized
// interaction-deviation estimate, and seeded ensemble averaging.

#pragma once

#include "facilitrans/dynamics.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace facilitrans {

inline constexpr Real kBoltzmann = 1.380649e-23;  // J/K
inline constexpr Real kRb87Mass = 1.44316e-25;    // kg

struct DisorderSpec {
  Vec3 sigma = Vec3::Zero();  // (sx, sy, sz), chain along x
  int n_realizations = 1;
  std::uint64_t base_seed = 0;

  void validate() const;
};

/// sqrt(k_B T / (m w^2)) in metres.
Real thermal_sigma(Real temperature, Real mass, Real trap_frequency);

/// SplitMix64 finalizer over (base_seed, realization, attempt).
std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t realization,
                               std::uint64_t attempt = 0);

/// Standard normal draws by Box-Muller over mt19937_64. The algorithm is fixed so
/// published seeds reproduce bit-identically.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  Real next();

 private:
  std::mt19937_64 engine_;
  std::optional<Real> spare_;
};

/// Raw draw for one realization (attempt 0), no rejection.
std::vector<Vec3> sample_displacements(int n_sites, const DisorderSpec& spec,
                                       int realization_index, std::uint64_t attempt = 0);

struct Realization {
  std::vector<Vec3> displacements;
  std::uint64_t seed = 0;
  int attempts = 1;
};

inline constexpr Real kMinSeparation = 0.1;  // in units of r1
inline constexpr int kMaxResamples = 1000;

/// Resamples with the next attempt counter while atoms cross or come closer than 0.1 r1.
Realization sample_realization(const ChainGeometry& ideal, const DisorderSpec& spec,
                               int realization_index);

/// 6 |v|^(7/6) sqrt(2) sigma_x / |c6|^(1/6).
Real interaction_deviation_estimate(Real v, Real sigma_x, Real c6);

/// NN and NNN couplings from displaced 3D separations (ideal gap + displacement difference).
Couplings disordered_couplings(const ChainGeometry& geometry, Real c6);

struct CouplingDeviation {
  Real mean_abs = 0.0;
  Real rms = 0.0;
};

/// Monte-Carlo deviation of one pair coupling v at ideal separation r when both
/// atoms are displaced independently with per-axis spread sigma.
CouplingDeviation monte_carlo_coupling_deviation(Real v, Real r, const Vec3& sigma, int draws,
                                                 std::uint64_t seed);

struct DisorderEnsembleResult {
  std::vector<Real> times;
  std::vector<int> pulse_of_sample;
  std::vector<std::size_t> boundary_samples;
  std::vector<RVector> mean;
  std::vector<RVector> std_error;
  std::vector<RVector> final_populations;
  std::vector<std::uint64_t> seeds;
  std::vector<int> attempts;
};

DisorderEnsembleResult disorder_average(const ChainGeometry& geometry, const ModelParams& params,
                                        const PulseSchedule& schedule,
                                        const QuantumState& initial, const DisorderSpec& spec,
                                        const RunOptions& options = {}, int workers = 1);

}  // namespace facilitrans
