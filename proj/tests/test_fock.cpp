#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bosekit/fock.hpp"

using namespace bosekit;

namespace {

const cx I(0.0, 1.0);

WaveFn site_mode(const Grid& g, int j) {
  CVector a(g.d, cx(0.0));
  a[j] = 1.0 / std::sqrt(g.h);
  return WaveFn(g, a);
}

WaveFn random_fn(const Grid& g, Rng& rng) {
  CVector a(g.d);
  for (auto& v : a) v = rng.scomplex();
  return normalized(WaveFn(g, a));
}

WaveFn times_i(WaveFn f) {
  vscale(cx(0.0, 1.0), f.amps);
  return f;
}

double offblock_leakage(const FockBasis& b, const CMatrix& M, int from_shift) {
  // max |M(i,j)| over pairs whose sectors do NOT differ by from_shift
  double m = 0.0;
  for (std::size_t i = 0; i < b.dim; ++i)
    for (std::size_t j = 0; j < b.dim; ++j)
      if (b.sector_of(i) - b.sector_of(j) != from_shift) m = std::max(m, std::abs(M(i, j)));
  return m;
}

}  // namespace

TEST_CASE("enumerate_basis: sector dimensions and round trip") {
  FockBasis b = enumerate_basis(2, 2);
  REQUIRE(b.sector_dims == std::vector<std::size_t>{1, 2, 3});
  REQUIRE(b.dim == 6);

  FockBasis b1 = enumerate_basis(1, 4);
  REQUIRE(b1.sector_dims == std::vector<std::size_t>{1, 1, 1, 1, 1});

  FockBasis b3 = enumerate_basis(4, 3);
  REQUIRE(b3.sector_dims == std::vector<std::size_t>{1, 4, 10, 20});
  for (std::size_t i = 0; i < b3.dim; ++i) REQUIRE(b3.index_of(b3.occ(i)) == i);
}

TEST_CASE("enumerate_basis: budget rejection reports bytes") {
  REQUIRE_THROWS_WITH(enumerate_basis(2, 2, 100), Catch::Matchers::ContainsSubstring("576"));
}

TEST_CASE("creation: vacuum action and occupation amplitudes") {
  Grid g(2, 0.5);
  FockBasis b = enumerate_basis(2, 3);
  FullOperator ad = creation(b, site_mode(g, 0));

  CVector v = mul_vec(ad.matrix, vacuum_state(b));
  std::vector<std::uint8_t> one{1, 0};
  REQUIRE(std::abs(v[b.index_of(one.data())] - 1.0) <= 1e-14);
  REQUIRE(vnorm(v) == Catch::Approx(1.0).margin(1e-14));

  // a*(e_0)|1,0⟩ = √2 |2,0⟩
  CVector w = mul_vec(ad.matrix, v);
  std::vector<std::uint8_t> two{2, 0};
  REQUIRE(std::abs(w[b.index_of(two.data())] - std::sqrt(2.0)) <= 1e-14);

  // top sector is annihilated by truncation
  std::vector<std::uint8_t> top{3, 0};
  CVector t(b.dim, cx(0.0));
  t[b.index_of(top.data())] = 1.0;
  REQUIRE(vnorm(mul_vec(ad.matrix, t)) == 0.0);
}

TEST_CASE("creation: sector grading and CCR") {
  Grid g(4, 0.7);
  FockBasis b = enumerate_basis(4, 3);
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    WaveFn f = random_fn(g, rng), h = random_fn(g, rng);
    FullOperator af = creation(b, f), ah = creation(b, h);
    REQUIRE(offblock_leakage(b, af.matrix, 1) <= 1e-14);

    // [a(f), a*(h)] = ⟨f,h⟩·1 on sectors ≤ N_max−1
    CMatrix comm = sub(mul(dagger(af.matrix), ah.matrix), mul(ah.matrix, dagger(af.matrix)));
    const cx ip = inner(f, h);
    for (int n = 0; n <= b.N_max - 1; ++n) {
      CMatrix blk = sector_block(b, comm, n);
      REQUIRE(max_abs(sub(blk, scale(ip, CMatrix::identity(blk.rows)))) <= 1e-12);
    }
  }
}

TEST_CASE("creation: complex linearity in f, antilinearity of annihilation") {
  Grid g(3, 1.0);
  FockBasis b = enumerate_basis(3, 2);
  Rng rng(9);
  WaveFn f = random_fn(g, rng), h = random_fn(g, rng);
  const cx alpha(0.3, -0.8);
  WaveFn combo = f;
  for (int j = 0; j < g.d; ++j) combo.amps[j] = alpha * f.amps[j] + h.amps[j];
  CMatrix lhs = creation(b, combo).matrix;
  CMatrix rhs = add(scale(alpha, creation(b, f).matrix), creation(b, h).matrix);
  REQUIRE(max_abs(sub(lhs, rhs)) <= 1e-13);
  CMatrix alhs = annihilation(b, combo).matrix;
  CMatrix arhs = add(scale(std::conj(alpha), annihilation(b, f).matrix), annihilation(b, h).matrix);
  REQUIRE(max_abs(sub(alhs, arhs)) <= 1e-13);
}

TEST_CASE("field: Hermitian, CCR phase identity, quadratic identity") {
  Grid g(4, 0.5);
  FockBasis b = enumerate_basis(4, 4);
  Rng rng(7);
  WaveFn f = random_fn(g, rng);
  FullOperator ph = field(b, f);
  REQUIRE(hermiticity_defect(ph.matrix) <= 1e-14);

  FullOperator phi = field(b, times_i(f));
  const cx ff = inner(f, f);

  // [φ(f), φ(if)] = 2i⟨f,f⟩·1 on sectors ≤ N_max−2
  CMatrix comm = sub(mul(ph.matrix, phi.matrix), mul(phi.matrix, ph.matrix));
  for (int n = 0; n <= b.N_max - 2; ++n) {
    CMatrix blk = sector_block(b, comm, n);
    REQUIRE(max_abs(sub(blk, scale(2.0 * I * ff, CMatrix::identity(blk.rows)))) <= 1e-12);
  }

  // φ(f)² + φ(if)² = 4 a*(f)a(f) + 2⟨f,f⟩·1 on sectors ≤ N_max−2
  CMatrix lhs = add(mul(ph.matrix, ph.matrix), mul(phi.matrix, phi.matrix));
  FullOperator ad = creation(b, f);
  CMatrix rhs = scale(4.0, mul(ad.matrix, dagger(ad.matrix)));
  for (int n = 0; n <= b.N_max - 2; ++n) {
    CMatrix lb = sector_block(b, lhs, n);
    CMatrix rb = add(sector_block(b, rhs, n), scale(2.0 * ff, CMatrix::identity(lb.rows)));
    REQUIRE(max_abs(sub(lb, rb)) <= 1e-10);
  }
}

TEST_CASE("number operators: mode number, global number, spectral projector") {
  Grid g(2, 1.0);
  FockBasis b = enumerate_basis(2, 2);
  FullOperator nm = number_mode(b, site_mode(g, 0));
  REQUIRE(nm.conserves_N);

  std::vector<std::uint8_t> one{1, 0};
  CVector v(b.dim, cx(0.0));
  v[b.index_of(one.data())] = 1.0;
  CVector w = mul_vec(nm.matrix, v);
  for (std::size_t i = 0; i < b.dim; ++i) REQUIRE(std::abs(w[i] - v[i]) <= 1e-14);

  FullOperator N = number_full(b);
  for (int n = 0; n <= b.N_max; ++n) {
    CMatrix blk = sector_block(b, N.matrix, n);
    REQUIRE(max_abs(sub(blk, scale(static_cast<double>(n), CMatrix::identity(blk.rows)))) == 0.0);
  }

  // spectral projector E_{[0,1]}(N(f)) idempotent and Hermitian
  Rng rng(3);
  FullOperator nf = number_mode(b, random_fn(g, rng));
  CMatrix E = matrix_function(nf.matrix, [](double x) { return cx(x <= 1.0 + 1e-9 ? 1.0 : 0.0); });
  REQUIRE(hermiticity_defect(E) <= 1e-12);
  REQUIRE(max_abs(sub(mul(E, E), E)) <= 1e-12);
}

TEST_CASE("gauge covariance: e^{isN} a*(f) e^{-isN} = a*(e^{is} f)") {
  Grid g(3, 0.4);
  FockBasis b = enumerate_basis(3, 3);
  Rng rng(21);
  WaveFn f = random_fn(g, rng);
  const double s = 0.731;
  FullOperator U = gauge_unitary(b, s);
  CMatrix lhs = mul(U.matrix, mul(creation(b, f).matrix, dagger(U.matrix)));
  WaveFn fr = f;
  vscale(std::exp(I * s), fr.amps);
  CMatrix rhs = creation(b, fr).matrix;
  REQUIRE(max_abs(sub(lhs, rhs)) <= 1e-14);
}

TEST_CASE("matrix-free applications agree with dense operators") {
  Grid g(5, 0.6);
  FockBasis b = enumerate_basis(5, 3);
  Rng rng(17);
  WaveFn f = random_fn(g, rng);
  CVector v(b.dim);
  for (auto& x : v) x = rng.scomplex();

  const CVector u = mode_vector(f);
  FullOperator ad = creation(b, f);
  CVector dense_c = mul_vec(ad.matrix, v);
  CVector free_c = apply_creation_modes(b, u, v);
  CVector dense_a = mul_vec(dagger(ad.matrix), v);
  CVector free_a = apply_annihilation_modes(b, u, v);
  CVector dense_f = mul_vec(field(b, f).matrix, v);
  CVector free_f = apply_field_modes(b, u, v);
  for (std::size_t i = 0; i < b.dim; ++i) {
    REQUIRE(std::abs(dense_c[i] - free_c[i]) <= 1e-13);
    REQUIRE(std::abs(dense_a[i] - free_a[i]) <= 1e-13);
    REQUIRE(std::abs(dense_f[i] - free_f[i]) <= 1e-13);
  }
}

TEST_CASE("symmetrizer: identity at n=1, explicit 2-particle column, isometry") {
  CMatrix S1 = symmetrizer(3, 1);
  REQUIRE(max_abs(sub(S1, CMatrix::identity(3))) == 0.0);

  // d=2, n=2: occupation (1,1) ↔ (e₁⊗e₂ + e₂⊗e₁)/√2
  CMatrix S = symmetrizer(2, 2);
  FockBasis sb = enumerate_basis(2, 2);
  std::vector<std::uint8_t> oo{1, 1};
  const std::size_t col = sb.index_of(oo.data()) - sb.sector_offsets[2];
  const double r = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(S(1, col) - r) <= 1e-14);  // e₀⊗e₁
  REQUIRE(std::abs(S(2, col) - r) <= 1e-14);  // e₁⊗e₀
  REQUIRE(std::abs(S(0, col)) == 0.0);
  REQUIRE(std::abs(S(3, col)) == 0.0);

  for (int d = 2; d <= 4; ++d)
    for (int n = 1; n <= 3; ++n) {
      CMatrix Sn = symmetrizer(d, n);
      REQUIRE(max_abs(sub(mul(dagger(Sn), Sn), CMatrix::identity(Sn.cols))) <= 1e-12);
    }
}

TEST_CASE("symmetrizer columns are permutation invariant") {
  const int d = 3, n = 3;
  CMatrix S = symmetrizer(d, n);
  // transposition of the first two slots: index map
  auto swap01 = [&](std::size_t t) {
    const std::size_t i0 = t / (d * d), i1 = (t / d) % d, i2 = t % d;
    return i1 * d * d + i0 * d + i2;
  };
  for (std::size_t c = 0; c < S.cols; ++c)
    for (std::size_t t = 0; t < S.rows; ++t) REQUIRE(S(t, c) == S(swap01(t), c));
}

TEST_CASE("symmetric_embed: unit, rank-one example, norm contraction") {
  // C = 1 on F_m → 1 on F_n
  CMatrix unit = symmetric_embed_factors(3, 2, {CMatrix::identity(3)});
  REQUIRE(max_abs(sub(unit, CMatrix::identity(unit.rows))) <= 1e-13);

  // C = |e₀⟩⟨e₀|, m=1, n=2 on d=2: diagonal entries 1 at (2,0), 1/2 at (1,1)
  CMatrix P(2, 2);
  P(0, 0) = 1.0;
  CMatrix E = symmetric_embed_factors(2, 2, {P});
  FockBasis sb = enumerate_basis(2, 2);
  std::vector<std::uint8_t> o20{2, 0}, o11{1, 1}, o02{0, 2};
  const std::size_t off = sb.sector_offsets[2];
  REQUIRE(std::abs(E(sb.index_of(o20.data()) - off, sb.index_of(o20.data()) - off) - 1.0) <= 1e-14);
  REQUIRE(std::abs(E(sb.index_of(o11.data()) - off, sb.index_of(o11.data()) - off) - 0.5) <= 1e-14);
  REQUIRE(std::abs(E(sb.index_of(o02.data()) - off, sb.index_of(o02.data()) - off)) <= 1e-14);

  // ‖C ⊗_s 1‖ ≤ ‖C‖ on random one-body factors
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    CMatrix C(3, 3);
    for (auto& v : C.a) v = rng.scomplex();
    CMatrix Em = symmetric_embed_factors(3, 2, {C});
    REQUIRE(operator_norm(Em) <= operator_norm(C) + 1e-10);
  }
}

TEST_CASE("symmetric_embed: fast second-quantized route matches tensor route") {
  Grid g(4, 1.0);
  FockBasis b = enumerate_basis(4, 3);
  Rng rng(13);
  CMatrix B(4, 4), C(4, 4);
  for (auto& v : B.a) v = rng.scomplex();
  for (auto& v : C.a) v = rng.scomplex();

  CMatrix t1 = symmetric_embed_factors(4, 3, {B});
  CMatrix f1 = symmetric_embed_fast(b, 3, {B});
  REQUIRE(max_abs(sub(t1, f1)) <= 1e-12);

  CMatrix t2 = symmetric_embed_factors(4, 3, {B, C});
  CMatrix f2 = symmetric_embed_fast(b, 3, {B, C});
  REQUIRE(max_abs(sub(t2, f2)) <= 1e-12);
}

TEST_CASE("symmetric_embed: block route matches factor route") {
  // lift an F_2 block and embed into F_3
  Rng rng(31);
  CMatrix B(3, 3), C(3, 3);
  for (auto& v : B.a) v = rng.scomplex();
  for (auto& v : C.a) v = rng.scomplex();
  // block of B⊗_sC on F_2
  CMatrix blk = symmetric_embed_factors(3, 2, {B, C});
  CMatrix viaBlock = symmetric_embed_block(3, 3, 2, blk);
  CMatrix viaFactors = symmetric_embed_factors(3, 3, {B, C});
  REQUIRE(max_abs(sub(viaBlock, viaFactors)) <= 1e-12);
}

TEST_CASE("product_state: norms, orthonormal pair, dual-route agreement") {
  Grid g(4, 0.8);
  FockBasis b = enumerate_basis(4, 3);
  Rng rng(2);
  WaveFn f = random_fn(g, rng);
  CVector v1 = product_state(b, {f});
  REQUIRE(vnorm(v1) == Catch::Approx(norm(f)).margin(1e-13));

  WaveFn e0 = site_mode(g, 0), e1 = site_mode(g, 1);
  CVector v2 = product_state(b, {e0, e1});
  REQUIRE(vnorm(v2) * vnorm(v2) == Catch::Approx(0.5).margin(1e-13));

  // permutation-sum (tensor) route: coordinates are S†(u₁⊗u₂⊗u₃)
  WaveFn a = random_fn(g, rng), c = random_fn(g, rng), e = random_fn(g, rng);
  CVector route1 = product_state(b, {a, c, e});
  CMatrix S = symmetrizer(4, 3);
  const CVector ua = mode_vector(a), uc = mode_vector(c), ue = mode_vector(e);
  CVector tens(S.rows);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) tens[(i * 4 + j) * 4 + k] = ua[i] * uc[j] * ue[k];
  CVector route2 = mul_vec(dagger(S), tens);
  const std::size_t off = b.sector_offsets[3];
  for (std::size_t i = 0; i < b.sector_dims[3]; ++i) REQUIRE(std::abs(route1[off + i] - route2[i]) <= 1e-12);

  REQUIRE_THROWS_AS(product_state(b, {f, f, f, f}), std::invalid_argument);
}

TEST_CASE("translate_state: compatible with single-particle translation") {
  Grid g(6, 0.5);
  FockBasis b = enumerate_basis(6, 2);
  Rng rng(8);
  WaveFn f = random_fn(g, rng), h = random_fn(g, rng);
  CVector v = product_state(b, {f, h});
  CVector lhs = translate_state(b, v, 2);
  CVector rhs = product_state(b, {translate(f, 2), translate(h, 2)});
  for (std::size_t i = 0; i < b.dim; ++i) REQUIRE(std::abs(lhs[i] - rhs[i]) <= 1e-13);
}

TEST_CASE("translate_operator: conjugation by the mode permutation") {
  Grid g(5, 1.0);
  FockBasis b = enumerate_basis(5, 2);
  Rng rng(4);
  WaveFn f = random_fn(g, rng);
  FullOperator A = number_mode(b, f);
  FullOperator At = translate_operator(b, A, 3);
  CMatrix expect = number_mode(b, translate(f, 3)).matrix;
  REQUIRE(max_abs(sub(At.matrix, expect)) <= 1e-13);
}
