#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bosekit/lattice.hpp"

using namespace bosekit;

TEST_CASE("laplacian: zero mode, symmetry, Fourier spectrum, positivity") {
  Grid g(8, 0.5);
  CMatrix L = laplacian(g);
  // constant vector → 0
  CVector c(g.d, cx(1.0));
  REQUIRE(vnorm(mul_vec(L, c)) <= 1e-12);
  // exact symmetry
  for (int i = 0; i < g.d; ++i)
    for (int j = 0; j < g.d; ++j) REQUIRE(L(i, j) == L(j, i));
  // periodic eigenvalues (2 − 2cos(2πk/d))/h²
  auto ed = hermitian_eig(L);
  std::vector<double> expect;
  for (int k = 0; k < g.d; ++k) expect.push_back((2.0 - 2.0 * std::cos(2.0 * kPi * k / g.d)) / (g.h * g.h));
  std::sort(expect.begin(), expect.end());
  for (int k = 0; k < g.d; ++k) REQUIRE(ed.eigenvalues[k] == Catch::Approx(expect[k]).margin(1e-10));
  REQUIRE(ed.eigenvalues.front() >= -1e-12);

  Grid open(6, 1.0, false);
  auto edo = hermitian_eig(laplacian(open));
  REQUIRE(edo.eigenvalues.front() >= -1e-12);
}

TEST_CASE("position_diag: values and Hermitian expectations") {
  Grid g(2, 1.0);
  CMatrix Q = position_diag(g);
  REQUIRE(std::abs(Q(0, 0) - (-1.0)) <= 1e-15);
  REQUIRE(std::abs(Q(1, 1) - 0.0) <= 1e-15);

  Grid g2(16, 0.25);
  WaveFn f = wave_packet(g2, 0.3, 0.4, 1.1);
  const cx e = inner(f, WaveFn(g2, mul_vec(position_diag(g2), f.amps)));
  REQUIRE(std::abs(std::imag(e)) <= 1e-13);
}

TEST_CASE("wave_packet: normalization, disjoint supports, momentum expectation") {
  Grid g(64, 0.25);
  WaveFn f = wave_packet(g, 0.0, 0.7, 0.0);
  REQUIRE(norm(f) == Catch::Approx(1.0).margin(1e-12));

  WaveFn a = wave_packet(g, -4.0, 0.5, 0.3, 1.5);
  WaveFn b = wave_packet(g, 4.0, 0.5, -0.2, 1.5);
  REQUIRE(std::abs(inner(a, b)) == 0.0);  // exactly disjoint supports

  // ⟨f, P f⟩ ≈ p within O(h²)
  const double p = 0.8;
  WaveFn fp = wave_packet(g, 0.0, 1.0, p);
  const cx pe = inner(fp, WaveFn(g, mul_vec(momentum_fd(g), fp.amps)));
  REQUIRE(std::abs(std::real(pe) - p) <= 0.05 * p);
  REQUIRE(std::abs(std::imag(pe)) <= 1e-12);
}

TEST_CASE("wave_packet: dispersion ⟨P²⟩ ≈ p² + 1/(4 width²) on fine grids") {
  Grid g(256, 0.125);
  const double p = 0.4, w = 1.2;
  WaveFn f = wave_packet(g, 0.0, w, p);
  const cx k2 = inner(f, WaveFn(g, mul_vec(laplacian(g), f.amps)));
  const double expect = p * p + 1.0 / (4.0 * w * w);
  REQUIRE(std::real(k2) == Catch::Approx(expect).epsilon(0.05));
}

TEST_CASE("wave_packet: rejections") {
  Grid g(8, 1.0);
  REQUIRE_THROWS_AS(wave_packet(g, 0.0, -1.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(wave_packet(g, 0.0, 1.0, 0.0, 0.5), std::invalid_argument);
  // support radius so small that no grid point survives
  REQUIRE_THROWS_AS(wave_packet(Grid(8, 1.0), 0.4999, 0.3, 0.0, 0.45), std::invalid_argument);
}

TEST_CASE("translate: full period, zero shift, inner-product preservation") {
  Grid g(12, 0.5);
  WaveFn f = wave_packet(g, 0.0, 0.6, 0.9);
  WaveFn fd = translate(f, g.d);
  WaveFn f0 = translate(f, 0);
  for (int j = 0; j < g.d; ++j) {
    REQUIRE(fd.amps[j] == f.amps[j]);
    REQUIRE(f0.amps[j] == f.amps[j]);
  }
  WaveFn h = wave_packet(g, 1.0, 0.6, -0.4);
  const cx before = inner(f, h);
  const cx after = inner(translate(f, 5), translate(h, 5));
  REQUIRE(std::abs(before - after) <= 1e-14);  // reindexing changes only the summation order

  // entries are preserved bit-exactly (translation is a pure permutation)
  WaveFn ft = translate(f, 3);
  auto key = [](const cx& v) { return std::make_pair(std::real(v), std::imag(v)); };
  std::vector<std::pair<double, double>> sf, st;
  for (int j = 0; j < g.d; ++j) { sf.push_back(key(f.amps[j])); st.push_back(key(ft.amps[j])); }
  std::sort(sf.begin(), sf.end());
  std::sort(st.begin(), st.end());
  REQUIRE(sf == st);
}

TEST_CASE("translate: open-boundary overflow rejected") {
  Grid open(8, 1.0, false);
  WaveFn f = wave_packet(open, 0.0, 0.5, 0.0, 1.0);
  REQUIRE_THROWS_AS(translate(f, 7), std::invalid_argument);
}

TEST_CASE("pair_potential_table: zero, Gaussian peak, compact support, symmetry rejection") {
  Grid g(16, 0.5);
  CMatrix T0 = pair_potential_table(g, [](double) { return 0.0; });
  REQUIRE(max_abs(T0) == 0.0);

  auto gauss = [](double r) { return std::exp(-r * r); };
  CMatrix T = pair_potential_table(g, gauss);
  for (int j = 0; j < g.d; ++j)
    for (int k = 0; k < g.d; ++k) {
      REQUIRE(T(j, k) == T(k, j));
      REQUIRE(std::real(T(j, k)) <= std::real(T(j, j)) + 1e-15);
    }
  REQUIRE(std::real(T(0, 0)) == Catch::Approx(1.0).margin(1e-15));

  auto compact = [](double r) { return std::abs(r) <= 1.0 ? 1.0 - std::abs(r) : 0.0; };
  CMatrix Tc = pair_potential_table(g, compact);
  for (int j = 0; j < g.d; ++j)
    for (int k = 0; k < g.d; ++k)
      if (std::abs(g.separation(g.x(j) - g.x(k))) > 1.0) REQUIRE(std::abs(Tc(j, k)) == 0.0);

  REQUIRE_THROWS_AS(pair_potential_table(g, [](double r) { return r; }), std::invalid_argument);
}

TEST_CASE("momentum_dft: Hermitian, plane-wave eigenvalues") {
  Grid g(8, 0.5);
  CMatrix P = momentum_dft(g);
  REQUIRE(hermiticity_defect(P) <= 1e-12);
  // plane wave e^{i p x} with p = 2π·2/(d·h) is an eigenvector with eigenvalue p
  const double p = 2.0 * kPi * 2.0 / (g.d * g.h);
  CVector v(g.d);
  for (int j = 0; j < g.d; ++j) v[j] = std::exp(cx(0.0, p * g.x(j)));
  CVector Pv = mul_vec(P, v);
  for (int j = 0; j < g.d; ++j) REQUIRE(std::abs(Pv[j] - p * v[j]) <= 1e-10);
}
