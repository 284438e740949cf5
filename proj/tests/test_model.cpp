#include "facilitrans/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace facilitrans;

namespace {

ChainGeometry reference_geometry(int n) {
  return ChainGeometry::from_couplings(n, 20.0, 10.0, 20.0);
}

// Kronecker-product construction, independent of the bit-twiddling builder.
CMatrix kron_hamiltonian(int n, const std::vector<Real>& nn, const std::vector<Real>& nnn,
                         Real omega, Real detuning) {
  const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  const Eigen::Matrix2cd nop = (Eigen::Matrix2cd() << 0, 0, 0, 1).finished();
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  auto embed = [&](std::vector<std::pair<int, Eigen::Matrix2cd>> ops) {
    CMatrix out = CMatrix::Ones(1, 1);
    for (int s = 1; s <= n; ++s) {
      Eigen::Matrix2cd f = id;
      for (auto& [site, op] : ops) {
        if (site == s) f = op;
      }
      CMatrix next(out.rows() * 2, out.cols() * 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c) next(2 * r + i, 2 * c + j) = out(r, c) * f(i, j);
      out = next;
    }
    return out;
  };
  const auto dim = static_cast<Eigen::Index>(basis_dimension(n));
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int j = 1; j <= n; ++j) h += -detuning * embed({{j, nop}}) + 0.5 * omega * embed({{j, sx}});
  for (int j = 1; j < n; ++j) h += nn[j - 1] * embed({{j, nop}, {j + 1, nop}});
  for (int j = 1; j + 2 <= n; ++j) h += nnn[j - 1] * embed({{j, nop}, {j + 2, nop}});
  return h;
}

}  // namespace

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(ChainGeometry(1, 1.0, 2.0), Error);
  CHECK_THROWS_AS(ChainGeometry(4, 2.0, 1.0), Error);
  CHECK_THROWS_AS(ChainGeometry(17, 1.0, 2.0), Error);
  CHECK_THROWS_AS(ChainGeometry(3, 1.0, 2.0, {Vec3::Zero()}), Error);
  const ChainGeometry g(4, 1.0, 2.0);
  CHECK(g.position(3).x() == doctest::Approx(3.0));
  CHECK(g.gap(1) == 1.0);
  CHECK(g.gap(2) == 2.0);
}

TEST_CASE("interaction strength") {
  CHECK(interaction_strength(Vec3(1, 0, 0), 20.0) == doctest::Approx(20.0));
  CHECK(interaction_strength(Vec3(std::pow(2.0, 1.0 / 6), 0, 0), 20.0) == doctest::Approx(10.0));
  try {
    interaction_strength(Vec3::Zero(), 1.0);
    FAIL("expected ZeroDistance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroDistance);
  }
}

TEST_CASE("effective Rabi frequency and period") {
  const auto r = effective_rabi(1.0);
  CHECK(r.omega_tilde == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(r.period == doctest::Approx(std::numbers::pi * std::sqrt(2.0)));
  CHECK(r.omega_tilde * r.period / (2 * std::numbers::pi) == doctest::Approx(0.5));
}

TEST_CASE("next-nearest coupling at the N=7 reference point") {
  const auto c = chain_couplings(reference_geometry(7), ModelParams{});
  const Real expected = 20.0 / std::pow(1.0 + std::pow(2.0, 1.0 / 6), 6);
  CHECK(c.nnn[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.2188).epsilon(1e-3));
  CHECK(c.nn[0] == doctest::Approx(20.0));
  CHECK(c.nn[1] == doctest::Approx(10.0));
  ModelParams off;
  off.include_nnn = false;
  const auto c2 = chain_couplings(reference_geometry(7), off);
  for (Real v : c2.nnn) CHECK(v == 0.0);
}

TEST_CASE("Hamiltonian matches Kronecker construction") {
  for (int n : {2, 3, 5}) {
    const auto geom = reference_geometry(n);
    ModelParams p;
    p.d_delta1 = -0.133;
    p.d_delta2 = -0.033;
    for (int k : {1, 2}) {
      const auto h = build_pulse_hamiltonian(geom, p, k);
      const auto c = chain_couplings(geom, p);
      const CMatrix ref = kron_hamiltonian(n, c.nn, c.nnn, p.omega, p.detuning(k));
      CHECK((h.matrix - ref).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("Omega = 0 gives a diagonal Hamiltonian") {
  ModelParams p;
  p.omega = 0.0;
  const auto h = build_pulse_hamiltonian(reference_geometry(4), p, 1);
  CMatrix off = h.matrix;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Two-atom Hamiltonian diagonal") {
  ModelParams p;
  p.d_delta1 = 0.0;
  const auto h = build_pulse_hamiltonian(reference_geometry(2), p, 1);
  CHECK(h.matrix(0, 0).real() == doctest::Approx(0.0));
  CHECK(h.matrix(1, 1).real() == doctest::Approx(-20.0));
  CHECK(h.matrix(3, 3).real() == doctest::Approx(-20.0));
}

TEST_CASE("frame phase") {
  const CVector ph = frame_switch_phase(2, 20.0, 10.0, 1.0);
  CHECK(std::abs(ph[0] - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(ph[1] - std::polar(1.0, -10.0)) < 1e-14);
  CHECK(std::abs(ph[3] - std::polar(1.0, -20.0)) < 1e-14);
  const CVector same = frame_switch_phase(3, 4.0, 4.0, 2.5);
  CHECK((same.array() - Complex(1, 0)).abs().maxCoeff() == 0.0);
}

TEST_CASE("route planning") {
  const auto g = reference_geometry(7);
  CHECK(plan_route(g, 1, {6}).indices() == std::vector<int>{1, 2, 1, 2, 1});
  CHECK(plan_route(g, 6, {1}).indices() == std::vector<int>{1, 2, 1, 2, 1});
  CHECK(plan_route(g, 2, {5}).indices() == std::vector<int>{2, 1, 2});
  CHECK(plan_route(g, 1, {3, 1}).indices() == std::vector<int>{1, 2, 2, 1});
  for (auto w : {std::vector<int>{8}, std::vector<int>{1}, std::vector<int>{}}) {
    try {
      plan_route(g, 1, w);
      FAIL("expected UnreachableWaypoint");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnreachableWaypoint);
    }
  }
}

TEST_CASE("hierarchy diagnostics") {
  const auto strong = hierarchy_diagnostics(ModelParams{}, reference_geometry(7));
  CHECK(strong.omega_over_v2 == doctest::Approx(0.1));
  CHECK(strong.omega_over_dv == doctest::Approx(0.1));
  CHECK_FALSE(strong.warning);
  CHECK(strong.nnn_ratio < strong.nnn_bound);
  ModelParams p4;
  p4.v1 = 8.4;
  p4.v2 = 4.2;
  const auto weak_pair = hierarchy_diagnostics(p4, ChainGeometry::from_couplings(7, 8.4, 4.2, 8.4));
  CHECK(weak_pair.omega_over_v2 == doctest::Approx(0.238).epsilon(1e-2));
  CHECK_FALSE(weak_pair.warning);
  ModelParams weak;
  weak.v1 = 4.0;
  weak.v2 = 2.0;
  CHECK(hierarchy_diagnostics(weak, ChainGeometry::from_couplings(7, 4.0, 2.0, 4.0)).warning);
}

TEST_CASE("params validation") {
  ModelParams p;
  p.v2 = 30.0;
  CHECK_THROWS_AS(p.validate(), Error);
  ModelParams q;
  q.gamma_decay = -1.0;
  CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("physical units") {
  PhysicalUnits u{3.0, 11.4};
  const Real period = effective_rabi(1.0).period;
  CHECK(u.time_to_us(period) == doctest::Approx(0.2357).epsilon(1e-3));
  CHECK(u.time_from_us(u.time_to_us(1.7)) == doctest::Approx(1.7));
  CHECK(u.length_from_nm(114.0) == doctest::Approx(0.01));
}
