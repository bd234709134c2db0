#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <vector>

#include "bosekit/thermo.hpp"

using namespace bosekit;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

HamiltonianSpec thermo_spec(const Grid& g) {
  return HamiltonianSpec{g, [](double r) { return 0.6 * std::exp(-2.0 * r * r); }, 2.0, 0.0};
}

double trace_gap(const CMatrix& rho) {
  cx tr = 0.0;
  for (std::size_t i = 0; i < rho.rows; ++i) tr += rho(i, i);
  return std::abs(tr - 1.0);
}

}  // namespace

TEST_CASE("ground energies vanish for the free gas and detect square-well binding") {
  SECTION("free untrapped spectrum starts at zero") {
    Grid g{6, 0.8};
    FockBasis b = enumerate_basis(6, 2);
    HamiltonianSpec free_spec{g, nullptr, std::nullopt, 0.0};
    CHECK(ground_energy(b, free_spec, 0) == 0.0);
    CHECK(std::abs(ground_energy(b, free_spec, 1)) <= 1e-12);
    CHECK(std::abs(ground_energy(b, free_spec, 2)) <= 1e-12);
  }
  SECTION("attractive square well binds a pair below the vacuum") {
    Grid g{16, 1.0};
    FockBasis b = enumerate_basis(16, 2);
    HamiltonianSpec well{g, [](double r) { return std::abs(r) <= 1.5 ? -1.0 : 0.0; },
                         std::nullopt, 0.0};
    CHECK(std::abs(ground_energy(b, well, 1)) <= 1e-12);
    CHECK(ground_energy(b, well, 2) == Approx(1.317962).margin(1e-4));
  }
  SECTION("sector out of range is rejected") {
    Grid g{4, 0.7};
    FockBasis b = enumerate_basis(4, 2);
    CHECK_THROWS_AS(ground_energy(b, thermo_spec(g), 3), std::invalid_argument);
  }
}

TEST_CASE("renormalized hamiltonian is positive semidefinite with the vacuum in its kernel") {
  Grid g{4, 0.7};
  FockBasis b = enumerate_basis(4, 3);
  const HamiltonianSpec spec = thermo_spec(g);
  const FullOperator Hr = renormalized_hamiltonian(b, spec);
  CHECK(hermiticity_defect(Hr.matrix) <= 1e-12);
  CHECK(std::abs(Hr.matrix(0, 0)) <= 1e-12);
  const EigenDecomposition ed = hermitian_eig(Hr.matrix);
  CHECK(ed.eigenvalues.front() >= -1e-10);
  for (int n = 1; n <= b.N_max; ++n) {
    const EigenDecomposition sed = hermitian_eig(sector_block(b, Hr.matrix, n));
    CHECK(std::abs(sed.eigenvalues.front()) <= 1e-10);
  }
}

TEST_CASE("positive-type transform accepts gaussian and single-site, rejects a negative mode") {
  Grid g{4, 0.7};
  FockBasis b = enumerate_basis(4, 3);
  SECTION("narrow gaussian is positive type and bounded below by the chemical shift") {
    const PositiveType pt = positive_type_check(b, thermo_spec(g));
    CHECK(pt.accepted);
    CHECK(pt.min_mode >= 0.1);
    CHECK(pt.transform[0] == Approx(1.062276).margin(1e-4));
    CHECK(pt.min_renormalized >= -1e-10);
    CHECK(pt.report.pass);
  }
  SECTION("single-site potential has a flat transform") {
    HamiltonianSpec delta{g, [&g](double r) { return std::abs(r) < 0.5 * g.h ? 1.0 : 0.0; },
                          2.0, 0.0};
    const PositiveType pt = positive_type_check(b, delta);
    CHECK(pt.accepted);
    for (double m : pt.transform) CHECK(m == Approx(1.0).margin(1e-12));
  }
  SECTION("an inverted cosine mode is rejected") {
    const double period = g.d * g.h;
    HamiltonianSpec neg{g, [period](double r) { return -std::cos(2.0 * kPi * r / period); },
                        2.0, 0.0};
    const PositiveType pt = positive_type_check(b, neg);
    CHECK_FALSE(pt.accepted);
    CHECK(pt.min_mode <= -1.9);
    CHECK(pt.report.pass);  // rejection is a verdict, not a bound violation
    CHECK(pt.report.parameters[0].second == 0.0);
  }
  SECTION("no potential is trivially accepted") {
    HamiltonianSpec empty{g, nullptr, 2.0, 0.0};
    CHECK(positive_type_check(b, empty).accepted);
  }
  SECTION("open boundary has no mode decomposition") {
    Grid open{6, 0.5, false};
    FockBasis bo = enumerate_basis(6, 1);
    CHECK_THROWS_AS(positive_type_check(bo, thermo_spec(open)), std::invalid_argument);
  }
}

TEST_CASE("gibbs state is a normalized number-conserving density matrix") {
  Grid g{4, 0.7};
  FockBasis b = enumerate_basis(4, 3);
  const HamiltonianSpec spec = thermo_spec(g);
  const double mu = -0.6;

  SECTION("trace, hermiticity, positivity, block structure") {
    const GibbsState gs = gibbs_state(b, spec, 1.0, mu);
    CHECK_FALSE(gs.flagged);
    CHECK(trace_gap(gs.rho) <= 1e-12);
    CHECK(hermiticity_defect(gs.rho) <= 1e-13);
    CHECK(hermitian_eig(gs.rho).eigenvalues.front() >= -1e-12);
    double offblock = 0.0;
    for (std::size_t i = 0; i < b.dim; ++i)
      for (std::size_t j = 0; j < b.dim; ++j)
        if (b.sector_of(i) != b.sector_of(j)) offblock = std::max(offblock, std::abs(gs.rho(i, j)));
    CHECK(offblock == 0.0);
  }
  SECTION("density matches the direct matrix exponential") {
    const double beta = 1.0;
    const GibbsState gs = gibbs_state(b, spec, beta, mu);
    CMatrix K = full_hamiltonian(spec, b).matrix;
    for (std::size_t i = 0; i < b.dim; ++i) K(i, i) -= mu * double(b.sector_of(i));
    const CMatrix expK = matrix_function(K, [beta](double l) { return std::exp(-beta * l); });
    cx z = 0.0;
    for (std::size_t i = 0; i < b.dim; ++i) z += expK(i, i);
    CHECK(max_abs(sub(gs.rho, scale(1.0 / z, expK))) <= 1e-12);
    CHECK(gs.log_partition() == Approx(std::log(std::real(z))).margin(1e-10));
  }
  SECTION("deep cold limit concentrates on the vacuum") {
    const GibbsState gs = gibbs_state(b, spec, 64.0, mu);
    CHECK(std::real(gs.rho(0, 0)) >= 0.999);
    CHECK(trace_gap(gs.rho) <= 1e-12);
  }
  SECTION("partition value and energy expectation both decrease in beta") {
    const FullOperator H = full_hamiltonian(spec, b);
    double prev_z = 1e300, prev_e = 1e300;
    for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const GibbsState gs = gibbs_state(b, spec, beta, mu);
      const double lz = gs.log_partition(), e = gibbs_expectation(gs, H.matrix);
      CHECK(lz < prev_z);
      CHECK(e < prev_e);
      prev_z = lz;
      prev_e = e;
    }
  }
  SECTION("state is invariant under the generating dynamics") {
    const GibbsState gs = gibbs_state(b, spec, 1.0, mu);
    const PropagatorCache cache = build_propagator_cache(b, spec);
    Rng rng(5);
    const FullOperator A = make_full(b, random_hermitian(rng, b.dim));
    const FullOperator At = heisenberg_evolve(cache, A, 0.7);
    CHECK(std::abs(gibbs_expectation(gs, At.matrix) - gibbs_expectation(gs, A.matrix)) <= 1e-10);
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(gibbs_state(b, spec, 0.0, mu), std::invalid_argument);
    CHECK_THROWS_AS(gibbs_state(b, spec, -1.0, mu), std::invalid_argument);
    HamiltonianSpec untrapped = spec;
    untrapped.trap_L.reset();
    CHECK_THROWS_WITH(gibbs_state(b, untrapped, 1.0, mu), ContainsSubstring("trap"));
    CHECK_THROWS_WITH(gibbs_state(b, spec, 1.0, -0.3), ContainsSubstring("chemical potential"));
    const GibbsState forced = gibbs_state(b, spec, 1.0, -0.3, true);
    CHECK(forced.flagged);
    CHECK(trace_gap(forced.rho) <= 1e-12);
  }
}

TEST_CASE("kms condition holds for gibbs states and detects perturbed densities") {
  Grid g{4, 1.4};
  FockBasis b = enumerate_basis(4, 2);
  const HamiltonianSpec spec = thermo_spec(g);
  const double mu = -0.6;
  Rng rng(11);
  const FullOperator A = make_full(b, random_hermitian(rng, b.dim));
  const FullOperator B = make_full(b, random_hermitian(rng, b.dim));

  SECTION("residual vanishes for the equilibrium state") {
    const GibbsState gs = gibbs_state(b, spec, 1.0, mu);
    CHECK(kms_residual(gs, A, B, 0.0) <= 1e-10);
    CHECK(kms_residual(gs, A, B, 0.5) <= 1e-10);
    Rng rng2(23);
    const FullOperator A2 = make_full(b, random_hermitian(rng2, b.dim));
    const FullOperator B2 = make_full(b, random_hermitian(rng2, b.dim));
    CHECK(kms_residual(gs, A2, B2, 0.5) <= 1e-10);
    const GibbsState colder = gibbs_state(b, spec, 2.0, mu);
    CHECK(kms_residual(colder, A, B, 0.5) <= 1e-10);
  }
  SECTION("perturbed density is detected with linear response") {
    std::vector<double> det;
    for (double eps : {0.01, 0.02, 0.04}) {
      HamiltonianSpec pert = spec;
      pert.potential = [eps](double r) { return (1.0 + eps) * 0.6 * std::exp(-2.0 * r * r); };
      GibbsState mixed = gibbs_state(b, spec, 1.0, mu);
      mixed.rho = gibbs_state(b, pert, 1.0, mu, true).rho;
      det.push_back(kms_residual(mixed, A, B, 0.5));
    }
    CHECK(det[0] > 1e-3);
    CHECK(det[1] / det[0] == Approx(2.0).margin(0.4));
    CHECK(det[2] / det[1] == Approx(2.0).margin(0.4));
  }
  SECTION("continuation range guard and basis mismatch") {
    const GibbsState deep = gibbs_state(b, spec, 64.0, mu);
    CHECK_THROWS_WITH(kms_residual(deep, A, B, 0.5), ContainsSubstring("safe range"));
    FockBasis other = enumerate_basis(4, 2);
    const GibbsState gs = gibbs_state(b, spec, 1.0, mu);
    const FullOperator C = make_full(other, random_hermitian(rng, other.dim));
    CHECK_THROWS_AS(kms_residual(gs, C, B, 0.0), std::invalid_argument);
  }
}

TEST_CASE("interacting renormalized trace is dominated by the free trapped trace") {
  Grid g{4, 0.7};
  FockBasis b = enumerate_basis(4, 3);
  const HamiltonianSpec spec = thermo_spec(g);

  SECTION("no interaction gives exact equality") {
    HamiltonianSpec free_spec = spec;
    free_spec.potential = nullptr;
    const CheckReport r = golden_thompson_check(b, free_spec, 1.0);
    CHECK(r.value == Approx(1.0).margin(1e-14));
    CHECK(r.pass);
  }
  SECTION("positive-type interaction pushes the trace strictly down") {
    for (double beta : {0.25, 1.0, 4.0}) {
      const CheckReport r = golden_thompson_check(b, spec, beta);
      CHECK(r.pass);
      CHECK(r.value < 0.9);
    }
    CHECK(golden_thompson_check(b, spec, 1.0).value == Approx(0.454489).margin(1e-4));
  }
  SECTION("non-positive-type potential is skipped with a reason") {
    const double period = g.d * g.h;
    HamiltonianSpec neg{g, [period](double r) { return -std::cos(2.0 * kPi * r / period); },
                        2.0, 0.0};
    const CheckReport r = golden_thompson_check(b, neg, 1.0);
    CHECK(r.pass);
    REQUIRE_FALSE(r.parameters.empty());
    CHECK(r.parameters[0].first == "skipped");
    CHECK(r.parameters[0].second == 1.0);
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(golden_thompson_check(b, spec, 0.0), std::invalid_argument);
    HamiltonianSpec untrapped = spec;
    untrapped.trap_L.reset();
    CHECK_THROWS_AS(golden_thompson_check(b, untrapped, 1.0), std::invalid_argument);
  }
}

TEST_CASE("condensate trial states carry the rescaled one-particle kinetic energy") {
  auto prof = [](double x) { return std::exp(-x * x); };

  SECTION("energy is the one-particle kinetic value and linear in n") {
    Grid g{12, 0.8};
    FockBasis b = enumerate_basis(12, 3);
    const CondensateEnergy c1 = condensate_energy(b, g, prof, 1.0, 1);
    CHECK(std::abs(vnorm(c1.state) - 1.0) <= 1e-12);
    CHECK(c1.energy == Approx(c1.per_particle).margin(1e-12));
    const CondensateEnergy c3 = condensate_energy(b, g, prof, 1.0, 3);
    CHECK(c3.energy == Approx(3.0 * c1.energy).margin(1e-10));
    CHECK(c3.per_particle == Approx(c1.per_particle).margin(1e-12));
  }
  SECTION("doubling the length scale quarters the energy") {
    Grid g{128, 0.5};
    FockBasis b = enumerate_basis(128, 1);
    const CondensateEnergy e2 = condensate_energy(b, g, prof, 2.0, 1);
    const CondensateEnergy e4 = condensate_energy(b, g, prof, 4.0, 1);
    const CondensateEnergy e8 = condensate_energy(b, g, prof, 8.0, 1);
    CHECK(e2.energy == Approx(0.24613412).margin(1e-6));
    CHECK(e2.energy / e4.energy == Approx(4.0).margin(0.2));
    CHECK(e4.energy / e8.energy == Approx(4.0).margin(0.2));
  }
  SECTION("rejections") {
    Grid g{128, 0.5};
    FockBasis b = enumerate_basis(128, 1);
    CHECK_THROWS_WITH(condensate_energy(b, g, prof, 32.0, 1), ContainsSubstring("leaves the grid"));
    CHECK_THROWS_AS(condensate_energy(b, g, prof, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(condensate_energy(b, g, prof, 2.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(condensate_energy(b, g, prof, 2.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(condensate_energy(b, g, [](double) { return 0.0; }, 2.0, 1),
                    std::invalid_argument);
    Grid small{12, 0.8};
    CHECK_THROWS_AS(condensate_energy(b, small, prof, 1.0, 1), std::invalid_argument);
  }
}
