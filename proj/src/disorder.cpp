#include "facilitrans/disorder.hpp"

#include "facilitrans/parallel.hpp"

#include <cmath>
#include <numbers>

namespace facilitrans {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool acceptable(const ChainGeometry& ideal, const std::vector<Vec3>& d) {
  const int n = ideal.n_sites();
  const Real floor = kMinSeparation * ideal.r1();
  for (int j = 1; j < n; ++j) {
    const Vec3 sep = Vec3(ideal.gap(j), 0.0, 0.0) + d[static_cast<std::size_t>(j)] -
                     d[static_cast<std::size_t>(j - 1)];
    if (!(sep.x() > 0.0) || sep.norm() < floor) return false;
  }
  for (int j = 1; j + 2 <= n; ++j) {
    const Vec3 sep = Vec3(ideal.gap(j) + ideal.gap(j + 1), 0.0, 0.0) +
                     d[static_cast<std::size_t>(j + 1)] - d[static_cast<std::size_t>(j - 1)];
    if (sep.norm() < floor) return false;
  }
  return true;
}

}  // namespace

void DisorderSpec::validate() const {
  if ((sigma.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidParams, "sigma components must be non-negative");
  }
  if (n_realizations < 1) throw Error(ErrorCode::InvalidParams, "need at least one realization");
}

Real thermal_sigma(Real temperature, Real mass, Real trap_frequency) {
  if (!(temperature > 0.0) || !(mass > 0.0) || !(trap_frequency > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "temperature, mass and trap frequency must be positive");
  }
  return std::sqrt(kBoltzmann * temperature / (mass * trap_frequency * trap_frequency));
}

std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t realization,
                               std::uint64_t attempt) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ realization) ^ (attempt * 0xd1b54a32d192ed03ULL));
}

Real GaussianSource::next() {
  if (spare_) {
    const Real z = *spare_;
    spare_.reset();
    return z;
  }
  // 53-bit uniforms; u1 in (0, 1] keeps the logarithm finite.
  const Real u1 = (static_cast<Real>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  const Real u2 = static_cast<Real>(engine_() >> 11) * 0x1.0p-53;
  const Real radius = std::sqrt(-2.0 * std::log(u1));
  const Real angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::vector<Vec3> sample_displacements(int n_sites, const DisorderSpec& spec,
                                       int realization_index, std::uint64_t attempt) {
  spec.validate();
  if (realization_index < 0 || realization_index >= spec.n_realizations) {
    throw Error(ErrorCode::IndexOutOfRange, "realization " + std::to_string(realization_index));
  }
  GaussianSource gauss(realization_seed(spec.base_seed, static_cast<std::uint64_t>(realization_index), attempt));
  std::vector<Vec3> out(static_cast<std::size_t>(n_sites));
  for (auto& d : out) {
    for (int axis = 0; axis < 3; ++axis) d[axis] = spec.sigma[axis] * gauss.next();
  }
  return out;
}

Realization sample_realization(const ChainGeometry& ideal, const DisorderSpec& spec,
                               int realization_index) {
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    auto d = sample_displacements(ideal.n_sites(), spec, realization_index,
                                  static_cast<std::uint64_t>(attempt));
    if (acceptable(ideal, d)) {
      return Realization{std::move(d),
                         realization_seed(spec.base_seed, static_cast<std::uint64_t>(realization_index),
                                          static_cast<std::uint64_t>(attempt)),
                         attempt + 1};
    }
  }
  throw Error(ErrorCode::InvalidGeometry,
              "realization " + std::to_string(realization_index) + " rejected " +
                  std::to_string(kMaxResamples) + " times; sigma too large for the chain");
}

Real interaction_deviation_estimate(Real v, Real sigma_x, Real c6) {
  if (v == 0.0 || c6 == 0.0) throw Error(ErrorCode::ZeroCoupling, "coupling and c6 must be nonzero");
  if (sigma_x < 0.0) throw Error(ErrorCode::InvalidParams, "sigma_x must be non-negative");
  return 6.0 * std::pow(std::abs(v), 7.0 / 6.0) * std::sqrt(2.0) * sigma_x /
         std::pow(std::abs(c6), 1.0 / 6.0);
}

Couplings disordered_couplings(const ChainGeometry& geometry, Real c6) {
  return couplings_from_positions(geometry, c6);
}

CouplingDeviation monte_carlo_coupling_deviation(Real v, Real r, const Vec3& sigma, int draws,
                                                 std::uint64_t seed) {
  if (draws < 1) throw Error(ErrorCode::InvalidParams, "need at least one draw");
  const Real c6 = v * std::pow(r, 6);
  GaussianSource gauss(seed);
  Real sum_abs = 0.0;
  Real sum_sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    Vec3 sep(r, 0.0, 0.0);
    for (int axis = 0; axis < 3; ++axis) sep[axis] -= sigma[axis] * gauss.next();
    for (int axis = 0; axis < 3; ++axis) sep[axis] += sigma[axis] * gauss.next();
    const Real dv = interaction_strength(sep, c6) - v;
    sum_abs += std::abs(dv);
    sum_sq += dv * dv;
  }
  return {sum_abs / draws, std::sqrt(sum_sq / draws)};
}

DisorderEnsembleResult disorder_average(const ChainGeometry& geometry, const ModelParams& params,
                                        const PulseSchedule& schedule,
                                        const QuantumState& initial, const DisorderSpec& spec,
                                        const RunOptions& options, int workers) {
  spec.validate();
  params.validate();
  const auto count = static_cast<std::size_t>(spec.n_realizations);

  std::vector<Trajectory> runs(count);
  std::vector<Realization> draws(count);
  parallel_for(count, workers, [&](std::size_t i) {
    draws[i] = sample_realization(geometry, spec, static_cast<int>(i));
    try {
      const auto displaced = geometry.with_displacements(draws[i].displacements);
      runs[i] = run_schedule(initial, schedule, chain_couplings(displaced, params), params, options);
    } catch (const Error& e) {
      throw Error(e.code(), "realization " + std::to_string(i) + " (seed " +
                                std::to_string(draws[i].seed) + "): " + e.what());
    }
  });

  DisorderEnsembleResult out;
  const auto& first = runs.front();
  out.times = first.times;
  out.pulse_of_sample = first.pulse_of_sample;
  out.boundary_samples = first.boundary_samples;
  const std::size_t samples = first.times.size();
  const Eigen::Index n = first.populations.front().size();
  out.mean.assign(samples, RVector::Zero(n));
  std::vector<RVector> m2(samples, RVector::Zero(n));
  // Welford updates in realization order: identical inputs give an exact mean.
  for (std::size_t i = 0; i < count; ++i) {
    const Real k = static_cast<Real>(i + 1);
    for (std::size_t s = 0; s < samples; ++s) {
      const RVector delta = runs[i].populations[s] - out.mean[s];
      out.mean[s] += delta / k;
      m2[s] += delta.cwiseProduct(runs[i].populations[s] - out.mean[s]);
    }
    out.final_populations.push_back(runs[i].populations.back());
    out.seeds.push_back(draws[i].seed);
    out.attempts.push_back(draws[i].attempts);
  }
  out.std_error.assign(samples, RVector::Zero(n));
  if (count > 1) {
    const Real scale = 1.0 / (static_cast<Real>(count - 1) * static_cast<Real>(count));
    for (std::size_t s = 0; s < samples; ++s) out.std_error[s] = (m2[s] * scale).cwiseSqrt();
  }
  return out;
}

}  // namespace facilitrans
