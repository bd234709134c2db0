#pragma once

// Krylov-subspace tools for Hermitian applies: Lanczos tridiagonalization with
// full reorthogonalization, extremal eigenvalue estimation, and e^{iτA}v.

#include "bosekit/numkit.hpp"

namespace bosekit {

struct LanczosRun {
  std::vector<double> alpha;    // diagonal, one per basis vector
  std::vector<double> beta;     // off-diagonal, alpha.size()-1 entries unless breakdown
  std::vector<CVector> basis;   // orthonormal Krylov vectors
  bool breakdown = false;       // invariant subspace reached
};

template <typename Apply>
LanczosRun lanczos(Apply&& A, const CVector& v0, int kmax) {
  LanczosRun run;
  const double nv = vnorm(v0);
  if (nv == 0.0) throw std::invalid_argument("lanczos: zero start vector");
  CVector v = v0;
  vscale(1.0 / nv, v);
  run.basis.push_back(std::move(v));
  double scale = 0.0;
  for (int k = 0; k < kmax; ++k) {
    CVector w = A(run.basis[k]);
    const double a = std::real(vdot(run.basis[k], w));
    run.alpha.push_back(a);
    scale = std::max({scale, std::abs(a), k > 0 ? run.beta[k - 1] : 0.0});
    vaxpy(-a, run.basis[k], w);
    if (k > 0) vaxpy(-run.beta[k - 1], run.basis[k - 1], w);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : run.basis) vaxpy(-vdot(u, w), u, w);
    const double b = vnorm(w);
    if (b <= 1e-13 * std::max(1.0, scale)) {
      run.breakdown = true;
      return run;
    }
    if (k + 1 < kmax) {
      run.beta.push_back(b);
      vscale(1.0 / b, w);
      run.basis.push_back(std::move(w));
    }
  }
  return run;
}

inline CMatrix tridiagonal_matrix(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t k = alpha.size();
  CMatrix T(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < k) {
      T(i, i + 1) = beta[i];
      T(i + 1, i) = beta[i];
    }
  }
  return T;
}

// largest algebraic eigenvalue of a Hermitian apply (intended for PSD forms)
template <typename Apply>
double top_eigenvalue(Apply&& A, std::size_t dim, Rng& rng, int kmax = 240, double tol = 1e-13) {
  CVector v0(dim);
  for (auto& x : v0) x = rng.scomplex();
  double theta_prev = -1e300;
  LanczosRun run;
  const double nv = vnorm(v0);
  CVector v = v0;
  vscale(1.0 / nv, v);
  run.basis.push_back(std::move(v));
  double scale = 0.0;
  for (int k = 0; k < kmax && run.basis.size() == std::size_t(k) + 1; ++k) {
    CVector w = A(run.basis[k]);
    const double a = std::real(vdot(run.basis[k], w));
    run.alpha.push_back(a);
    scale = std::max({scale, std::abs(a), k > 0 ? run.beta[k - 1] : 0.0});
    vaxpy(-a, run.basis[k], w);
    if (k > 0) vaxpy(-run.beta[k - 1], run.basis[k - 1], w);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : run.basis) vaxpy(-vdot(u, w), u, w);
    const double b = vnorm(w);
    const bool done = b <= 1e-13 * std::max(1.0, scale) || k + 1 == kmax;
    if (!done) {
      run.beta.push_back(b);
      vscale(1.0 / b, w);
      run.basis.push_back(std::move(w));
    }
    if (done || (k >= 8 && k % 4 == 0)) {
      EigenDecomposition ed = hermitian_eig(tridiagonal_matrix(run.alpha, run.beta));
      const double theta = ed.eigenvalues.back();
      if (done || std::abs(theta - theta_prev) <= tol * std::max(1.0, std::abs(theta))) return theta;
      theta_prev = theta;
    }
  }
  return theta_prev;
}

// spectral norm of a general square matrix via Lanczos on B†B
inline double spectral_norm_iterative(const CMatrix& B, Rng& rng) {
  const CMatrix Bd = dagger(B);
  auto apply = [&](const CVector& x) { return mul_vec(Bd, mul_vec(B, x)); };
  const double lam = top_eigenvalue(apply, B.rows, rng);
  return std::sqrt(std::max(0.0, lam));
}

// e^{iτA} v for a Hermitian apply, adaptive sub-stepping with a truncation probe
template <typename Apply>
CVector expi_apply(Apply&& A, const CVector& v, double tau, double tol = 1e-11, int kdim = 48) {
  if (tau == 0.0) return v;
  CVector cur = v;
  const double vnorm0 = vnorm(v);
  if (vnorm0 == 0.0) return cur;
  double remaining = tau;
  double step = tau;
  int guard = 0;
  while (std::abs(remaining) > 1e-15 * std::abs(tau)) {
    if (++guard > 100000) throw std::runtime_error("expi_apply: step control failed to advance");
    if (std::abs(step) > std::abs(remaining)) step = remaining;
    LanczosRun run = lanczos(A, cur, kdim);
    const std::size_t k = run.alpha.size();
    const double amp = vnorm(cur);
    auto propagate = [&](std::size_t kk) {
      // coefficients of e^{i·step·T_kk} e₁ for the leading kk×kk tridiagonal block
      std::vector<double> a(run.alpha.begin(), run.alpha.begin() + kk);
      std::vector<double> bb(run.beta.begin(), run.beta.begin() + (kk > 0 ? kk - 1 : 0));
      EigenDecomposition ed = hermitian_eig(tridiagonal_matrix(a, bb));
      CVector coef(kk, cx(0.0));
      for (std::size_t j = 0; j < kk; ++j) {
        const cx phase = std::exp(cx(0.0, step * ed.eigenvalues[j]));
        for (std::size_t i = 0; i < kk; ++i)
          coef[i] += ed.vectors(i, j) * phase * std::conj(ed.vectors(0, j));
      }
      return coef;
    };
    CVector full = propagate(k);
    double err = 0.0;
    if (!run.breakdown && k > 8) {
      CVector probe = propagate(k - 6);
      for (std::size_t i = 0; i < k; ++i) {
        const cx p = i < probe.size() ? probe[i] : cx(0.0);
        err += std::norm(full[i] - p);
      }
      err = std::sqrt(err) * amp;
    }
    if (err > tol * vnorm0 && !run.breakdown) {
      step *= 0.5;
      continue;
    }
    CVector next(cur.size(), cx(0.0));
    for (std::size_t i = 0; i < k; ++i) vaxpy(amp * full[i], run.basis[i], next);
    cur = std::move(next);
    remaining -= step;
    if (err < 0.1 * tol * vnorm0) step *= 1.5;
  }
  return cur;
}

}  // namespace bosekit
