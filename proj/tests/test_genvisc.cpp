#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "viscostep/genvisc.hpp"

using namespace viscostep;

namespace {

Kinematics<double> uniaxial_isochoric(double stretch) {
  const double lat = 1.0 / std::sqrt(stretch);
  return Kinematics<double>::from_F(Tensor2<double>::diag(stretch, lat, lat));
}

}  // namespace

TEST_CASE("generalized parameter validation") {
  CHECK_THROWS_AS(GenViscParams<double>(0.45, -0.048, 0.011, 0.0, {}), InvalidParameter);
  CHECK_THROWS_AS(GenViscParams<double>(0.45, -0.048, 0.011, -5.0, {}), InvalidParameter);

  const auto p = GenViscParams<double>::benchmark();
  CHECK(p.c10 == 0.45);
  CHECK(p.c20 == -0.048);
  CHECK(p.c30 == 0.011);
  CHECK(p.k == 1000.0);
  REQUIRE(p.branches.size() == 4);
  for (const auto& b : p.branches) CHECK(b.mu == Catch::Approx(0.2).epsilon(1e-15));
  CHECK(p.branches[0].eta == Catch::Approx(0.02).epsilon(1e-12));
  CHECK(p.branches[3].eta == Catch::Approx(20.0).epsilon(1e-12));
  CHECK(p.max_tau() == Catch::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("undeformed body carries no stress") {
  const auto p = GenViscParams<double>::benchmark();
  const auto kin = Kinematics<double>::from_F(Tensor2<double>::identity());
  CHECK(norm(equilibrium_stress(kin, p)) == 0.0);
  const auto s = GenViscState<double>::fresh(4);
  CHECK(norm(total_stress(kin, s, p)) == 0.0);
  CHECK(total_free_energy(kin, s, p) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("pure dilation") {
  // Cbar = 1 kills the deviatoric part; the volumetric response is closed form
  const auto p = GenViscParams<double>::benchmark();
  const double lam = 1.2;
  const auto kin = Kinematics<double>::from_F(Tensor2<double>::identity() * lam);
  const auto t = equilibrium_stress(kin, p);
  const double expect = 3.0 * p.k * lam * (lam - 1.0) / (lam * lam);
  CHECK(t(0, 0) == Catch::Approx(expect).epsilon(1e-13));
  CHECK(t(0, 0) == Catch::Approx(500.0).epsilon(1e-13));
  CHECK(std::abs(t(0, 1)) + std::abs(t(0, 2)) + std::abs(t(1, 2)) <= 1e-14);

  const auto s = GenViscState<double>::fresh(4);
  CHECK(norm(total_stress(kin, s, p) - t) <= 1e-13 * norm(t));  // branches stay silent
  CHECK(total_free_energy(kin, s, p) == Catch::Approx(4.5 * p.k * (lam - 1.0) * (lam - 1.0)).epsilon(1e-12));
  CHECK(total_free_energy(kin, s, p) == Catch::Approx(180.0).epsilon(1e-12));
}

TEST_CASE("small simple shear") {
  // leading order: T12 = 2 c10 gamma
  const auto p = GenViscParams<double>::benchmark();
  const double gamma = 1e-5;
  auto F = Tensor2<double>::identity();
  F(0, 1) = gamma;
  const auto kin = Kinematics<double>::from_F(F);
  const auto t = equilibrium_stress(kin, p);
  CHECK(t(0, 1) == Catch::Approx(2.0 * p.c10 * gamma).epsilon(1e-3));
}

TEST_CASE("stress is twice the energy gradient") {
  const auto p = GenViscParams<double>::benchmark();
  std::mt19937 rng(51u);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int n = 0; n < 30; ++n) {
    Tensor2<double> g = Tensor2<double>::identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) += u(rng);
    const auto C = symmetrize(transpose(g) * g) + Tensor2<double>::identity() * 0.05;

    GenViscState<double> s = GenViscState<double>::fresh(4);
    // move the branches off the identity so the overstress part is exercised
    for (auto& b : s.branches) b = MaxwellState<double>(unimodular(C * 0.3 + Tensor2<double>::identity() * 0.7));

    const auto kin = Kinematics<double>::from_F(sqrt_spd(C));
    const auto t = total_stress(kin, s, p);

    const int ii[6] = {0, 1, 2, 0, 0, 1};
    const int jj[6] = {0, 1, 2, 1, 2, 2};
    for (int a = 0; a < 6; ++a) {
      auto E = Tensor2<double>::zero();
      E(ii[a], jj[a]) = 1.0;
      E(jj[a], ii[a]) = 1.0;
      const double h = 1e-6;
      auto energy_at = [&](double sgn) {
        const auto Cp = C + E * (sgn * h);
        return total_free_energy(Kinematics<double>::from_F(sqrt_spd(Cp)), s, p);
      };
      const double fd = (energy_at(1.0) - energy_at(-1.0)) / (2.0 * h);
      const double expect = 0.5 * ddot(t, E);
      CHECK(fd == Catch::Approx(expect).margin(1e-6 * std::max(1.0, std::abs(expect))));
    }
  }
}

TEST_CASE("fresh branches add a closed-form overstress") {
  const auto p = GenViscParams<double>::benchmark();
  const auto kin = uniaxial_isochoric(1.5);
  const auto s = GenViscState<double>::fresh(4);
  const auto eq = equilibrium_stress(kin, p);
  const auto total = total_stress(kin, s, p);
  const auto over = symmetrize(inv(kin.C) * dev(unimodular(kin.C)) * (4.0 * 0.2));
  CHECK(norm(total - eq - over) <= 1e-13 * norm(total));
}

TEST_CASE("relaxed branches reduce to the equilibrium response") {
  const auto p = GenViscParams<double>::benchmark();
  const auto kin = uniaxial_isochoric(1.7);

  // no branches at all
  const GenViscParams<double> eq_only(p.c10, p.c20, p.c30, p.k, {});
  CHECK(norm(total_stress(kin, GenViscState<double>::fresh(0), eq_only) -
             equilibrium_stress(kin, p)) <= 1e-14);

  // branches pinned at Cbar
  GenViscState<double> s = GenViscState<double>::fresh(4);
  for (auto& b : s.branches) b = MaxwellState<double>(unimodular(kin.C));
  CHECK(norm(total_stress(kin, s, p) - equilibrium_stress(kin, p)) <=
        1e-12 * norm(equilibrium_stress(kin, p)));
}

TEST_CASE("branch count mismatch is rejected") {
  const auto p = GenViscParams<double>::benchmark();
  const auto kin = uniaxial_isochoric(1.5);
  CHECK_THROWS_AS(total_stress(kin, GenViscState<double>::fresh(2), p), InvalidParameter);
  CHECK_THROWS_AS(step(GenViscState<double>::fresh(2), kin.C, 0.1, p), InvalidParameter);
  CHECK_THROWS_AS(total_free_energy(kin, GenViscState<double>::fresh(5), p), InvalidParameter);
}

TEST_CASE("stepping the composite state") {
  const auto p = GenViscParams<double>::benchmark();
  const auto kin = uniaxial_isochoric(1.5);
  const auto s0 = GenViscState<double>::fresh(4);

  // zero step changes nothing
  const auto sz = step(s0, kin.C, 0.0, p);
  for (std::size_t m = 0; m < 4; ++m) CHECK(norm(sz.branches[m].C_i - s0.branches[m].C_i) == 0.0);

  // undeformed hold keeps the identity
  const auto si = step(s0, Tensor2<double>::identity(), 0.3, p);
  for (const auto& b : si.branches)
    CHECK(norm(b.C_i - Tensor2<double>::identity()) <= 1e-14);

  // the composite step is exactly the per-branch update
  const auto s1 = step(s0, kin.C, 0.05, p);
  for (std::size_t m = 0; m < 4; ++m) {
    const auto lone = step_ebmsc(StepInput<double>(s0.branches[m], kin.C, 0.05, p.branches[m]));
    CHECK(norm(s1.branches[m].C_i - lone.C_i) == 0.0);
    CHECK(s1.branches[m].det_drift() <= 1e-13);
  }

  // faster branches relax further
  double prev = 0.0;
  for (std::size_t m = 0; m < 4; ++m) {
    const double moved = norm(s1.branches[m].C_i - Tensor2<double>::identity());
    if (m > 0) CHECK(moved < prev);
    prev = moved;
  }

  // the exponential variant agrees to leading order at this step size
  const auto se = step(s0, kin.C, 0.01, p, BranchIntegrator::em);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(se.branches[m].det_drift() <= 1e-12);
    CHECK(norm(se.branches[m].C_i - step(s0, kin.C, 0.01, p).branches[m].C_i) <= 0.05);
  }
}

TEST_CASE("long hold approaches the equilibrium curve") {
  const auto p = GenViscParams<double>::benchmark();
  const auto kin = uniaxial_isochoric(1.5);
  auto s = GenViscState<double>::fresh(4);
  const double dt = 0.5;
  for (int n = 0; n < 1000; ++n) s = step(s, kin.C, dt, p);  // 500 s, five slowest periods

  const auto Cbar = unimodular(kin.C);
  for (const auto& b : s.branches) CHECK(norm(b.C_i - Cbar) <= 0.02 * norm(Cbar));
  const auto eq = equilibrium_stress(kin, p);
  CHECK(norm(total_stress(kin, s, p) - eq) <= 0.01 * norm(eq));
}

TEST_CASE("branch order does not matter for the total response") {
  auto p = GenViscParams<double>::benchmark();
  const auto kin = uniaxial_isochoric(1.4);

  auto s = GenViscState<double>::fresh(4);
  for (int n = 0; n < 20; ++n) s = step(s, kin.C, 0.05, p);

  GenViscParams<double> rev(p.c10, p.c20, p.c30, p.k,
                            {p.branches[3], p.branches[2], p.branches[1], p.branches[0]});
  GenViscState<double> srev;
  srev.branches = {s.branches[3], s.branches[2], s.branches[1], s.branches[0]};

  CHECK(norm(total_stress(kin, srev, rev) - total_stress(kin, s, p)) <=
        1e-13 * std::max(1.0, norm(total_stress(kin, s, p))));
  CHECK(total_free_energy(kin, srev, rev) ==
        Catch::Approx(total_free_energy(kin, s, p)).epsilon(1e-13));
}
