#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "bosekit/numkit.hpp"

using namespace bosekit;

namespace {
const cx I(0.0, 1.0);
}

TEST_CASE("hermitian_eig: identity and diagonal cases") {
  auto ed = hermitian_eig(CMatrix::identity(3));
  REQUIRE(ed.eigenvalues.size() == 3);
  for (double l : ed.eigenvalues) REQUIRE(l == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(max_abs(sub(mul(dagger(ed.vectors), ed.vectors), CMatrix::identity(3))) <= 1e-10);

  CMatrix D(2, 2);
  D(0, 0) = -1.0;
  D(1, 1) = 2.0;
  auto edd = hermitian_eig(D);
  REQUIRE(edd.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(edd.eigenvalues[1] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("hermitian_eig: 2x2 off-diagonal, hand-solved spectrum") {
  CMatrix M(2, 2);
  M(0, 1) = 1.0;
  M(1, 0) = 1.0;
  auto ed = hermitian_eig(M);
  REQUIRE(ed.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(ed.eigenvalues[1] == Catch::Approx(1.0).margin(1e-12));
  // eigenvectors (1, ∓1)/√2 up to phase
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < 2; ++k) {
    const cx ratio = ed.vectors(1, k) / ed.vectors(0, k);
    const double expected = (k == 0) ? -1.0 : 1.0;
    REQUIRE(std::abs(ratio - expected) <= 1e-10);
    REQUIRE(std::abs(std::abs(ed.vectors(0, k)) - s) <= 1e-10);
  }
}

TEST_CASE("hermitian_eig: rejects non-Hermitian input") {
  CMatrix M(2, 2);
  M(0, 1) = 1.0;
  M(1, 0) = 0.5;
  REQUIRE_THROWS_AS(hermitian_eig(M), std::invalid_argument);
}

TEST_CASE("hermitian_eig: reconstruction and unitarity on random matrices") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 63);
    CMatrix M = random_hermitian(rng, n);
    auto ed = hermitian_eig(M);
    for (std::size_t k = 0; k + 1 < n; ++k) REQUIRE(ed.eigenvalues[k] <= ed.eigenvalues[k + 1]);
    REQUIRE(max_abs(sub(mul(dagger(ed.vectors), ed.vectors), CMatrix::identity(n))) <= 1e-10);
    CMatrix L(n, n);
    for (std::size_t k = 0; k < n; ++k) L(k, k) = ed.eigenvalues[k];
    CMatrix R = mul(ed.vectors, mul(L, dagger(ed.vectors)));
    const double lmax = std::max(std::abs(ed.eigenvalues.front()), std::abs(ed.eigenvalues.back()));
    REQUIRE(max_abs(sub(M, R)) <= 1e-9 * std::max(1.0, lmax));
  }
}

TEST_CASE("matrix_function: identity map and t=0 exponential") {
  Rng rng(7);
  CMatrix M = random_hermitian(rng, 5);
  CMatrix F = matrix_function(M, [](double x) { return cx(x, 0.0); });
  REQUIRE(max_abs(sub(F, M)) <= 1e-10);
  CMatrix E = matrix_function(M, [](double) { return cx(1.0, 0.0); });
  REQUIRE(max_abs(sub(E, CMatrix::identity(5))) <= 1e-10);
}

TEST_CASE("matrix_function: scalar resolvent on a diagonal matrix") {
  CMatrix D(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  CMatrix F = matrix_function(D, [](double x) { return 1.0 / (I + x); });
  REQUIRE(std::abs(F(0, 0) - 1.0 / (I + 1.0)) <= 1e-12);
  REQUIRE(std::abs(F(1, 1) - 1.0 / (I + 2.0)) <= 1e-12);
  REQUIRE(std::abs(F(0, 1)) <= 1e-12);
}

TEST_CASE("matrix_function: real-valued g returns Hermitian result; composition law") {
  Rng rng(11);
  CMatrix M = random_hermitian(rng, 8);
  CMatrix S = matrix_function(M, [](double x) { return cx(x * x, 0.0); });
  REQUIRE(hermiticity_defect(S) <= 1e-10);
  // g∘h with h(x)=x² real: exp(i h(x)) on M equals exp(i x) on h(M)
  CMatrix lhs = matrix_function(M, [](double x) { return std::exp(I * (x * x)); });
  CMatrix rhs = matrix_function(S, [](double x) { return std::exp(I * x); });
  REQUIRE(max_abs(sub(lhs, rhs)) <= 1e-9);
}

TEST_CASE("matrix_function: rejects singular g") {
  CMatrix D(2, 2);
  D(0, 0) = 0.0;
  D(1, 1) = 1.0;
  REQUIRE_THROWS_AS(matrix_function(D, [](double x) { return cx(1.0 / x, 0.0); }), std::domain_error);
}

TEST_CASE("solve_shifted: scalar cases") {
  CMatrix Z(1, 1);
  CMatrix B = CMatrix::identity(1);
  CMatrix X = solve_shifted(Z, 1.0, B);
  REQUIRE(std::abs(X(0, 0) - (-I)) <= 1e-14);

  CMatrix M3(1, 1);
  M3(0, 0) = 3.0;
  X = solve_shifted(M3, 2.0, B);
  REQUIRE(std::abs(X(0, 0) - 1.0 / (2.0 * I + 3.0)) <= 1e-14);
}

TEST_CASE("solve_shifted: rejects lambda = 0") {
  REQUIRE_THROWS_AS(solve_shifted(CMatrix::identity(2), 0.0, CMatrix::identity(2)), std::invalid_argument);
}

TEST_CASE("solve_shifted: residual and agreement with spectral route") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4;
    CMatrix M = random_hermitian(rng, n);
    CMatrix B(n, n);
    for (auto& v : B.a) v = rng.scomplex();
    const double lambda = (trial % 2 == 0) ? 1.3 : -0.7;
    CMatrix X = solve_shifted(M, lambda, B);
    CMatrix A = M;
    for (std::size_t i = 0; i < n; ++i) A(i, i) += cx(0.0, lambda);
    REQUIRE(max_abs(sub(mul(A, X), B)) <= 1e-10 * std::max(1.0, max_abs(B)));
    CMatrix R = matrix_function(M, [&](double x) { return 1.0 / (cx(0.0, lambda) + x); });
    REQUIRE(max_abs(sub(X, mul(R, B))) <= 1e-9);
  }
}

TEST_CASE("operator_norm: identity, diagonal, and full-eig oracle") {
  REQUIRE(operator_norm(CMatrix::identity(7)) == Catch::Approx(1.0).margin(1e-10));

  CMatrix D(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = -5.0;
  REQUIRE(operator_norm(D) == Catch::Approx(5.0).margin(1e-9));

  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix M(3, 3);
    for (auto& v : M.a) v = rng.scomplex();
    const CMatrix G = mul(dagger(M), M);
    auto ed = hermitian_eig(G);
    const double oracle = std::sqrt(std::max(0.0, ed.eigenvalues.back()));
    REQUIRE(operator_norm(M) == Catch::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("operator_norm: submultiplicative on random pairs") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    CMatrix A(4, 4), B(4, 4);
    for (auto& v : A.a) v = rng.scomplex();
    for (auto& v : B.a) v = rng.scomplex();
    REQUIRE(operator_norm(mul(A, B)) <= operator_norm(A) * operator_norm(B) + 1e-8);
  }
}

TEST_CASE("kron and vector helpers") {
  CMatrix A(2, 2), B(2, 2);
  A(0, 0) = 1.0; A(0, 1) = 2.0; A(1, 0) = 3.0; A(1, 1) = 4.0;
  B(0, 0) = 0.0; B(0, 1) = 5.0; B(1, 0) = 6.0; B(1, 1) = 7.0;
  CMatrix K = kron(A, B);
  REQUIRE(K.rows == 4);
  REQUIRE(std::abs(K(0, 1) - 5.0) <= 1e-15);   // A00·B01
  REQUIRE(std::abs(K(2, 1) - 15.0) <= 1e-15);  // A10·B01
  REQUIRE(std::abs(K(3, 3) - 28.0) <= 1e-15);  // A11·B11

  CVector v{1.0, I};
  CVector w = mul_vec(A, v);
  REQUIRE(std::abs(w[0] - (1.0 + 2.0 * I)) <= 1e-15);
  REQUIRE(std::abs(vdot(v, v) - cx(2.0)) <= 1e-15);
}

TEST_CASE("rng determinism") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
  Rng c(42);
  const double first = c.uniform();
  REQUIRE(first >= 0.0);
  REQUIRE(first < 1.0);
}
