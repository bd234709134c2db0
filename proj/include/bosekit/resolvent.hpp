#pragma once

// Resolvents of field operators, ordered monomials, gauge averaging,
// truncated annihilators and matrix units, and the creation-operator isometries.

#include "bosekit/fock.hpp"

namespace bosekit {

struct ResolventFactor {
  double lambda;
  WaveFn f;
};
using ResolventSpec = std::vector<ResolventFactor>;

inline void validate(const ResolventSpec& spec) {
  if (spec.empty()) throw std::invalid_argument("monomial: empty factor list");
  for (const auto& fac : spec) {
    if (fac.lambda == 0.0) throw std::invalid_argument("resolvent: lambda must be nonzero");
    if (norm(fac.f) == 0.0) throw std::invalid_argument("resolvent: zero smearing function");
  }
}

// R(λ,f) = (iλ + φ(f))^{−1}
inline FullOperator resolvent(const FockBasis& b, double lambda, const WaveFn& f) {
  if (lambda == 0.0) throw std::invalid_argument("resolvent: lambda must be nonzero");
  if (norm(f) == 0.0) throw std::invalid_argument("resolvent: zero smearing function");
  FullOperator ph = field(b, f);
  CMatrix R = solve_shifted(ph.matrix, lambda, CMatrix::identity(b.dim));
  return FullOperator{&b, std::move(R), false};
}

// ordered product M = R(λ₁,f₁) R(λ₂,f₂) ···
inline FullOperator monomial(const FockBasis& b, const ResolventSpec& spec) {
  validate(spec);
  CMatrix M = resolvent(b, spec[0].lambda, spec[0].f).matrix;
  for (std::size_t k = 1; k < spec.size(); ++k)
    M = mul(M, resolvent(b, spec[k].lambda, spec[k].f).matrix);
  return FullOperator{&b, std::move(M), false};
}

// U(1) gauge mean = block-diagonal (number-conserving) part Σ_n P_n M P_n
inline FullOperator gauge_average(const FullOperator& M) {
  const FockBasis& b = *M.basis;
  CMatrix A(b.dim, b.dim);
  for (int n = 0; n <= b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    for (std::size_t i = 0; i < sz; ++i)
      for (std::size_t j = 0; j < sz; ++j) A(off + i, off + j) = M.matrix(off + i, off + j);
  }
  return FullOperator{&b, std::move(A), true};
}

// quadrature oracle: equal-weight trapezoid over 4·N_max+1 gauge angles
// (exact: the integrand is a trigonometric polynomial of degree ≤ 2·N_max)
inline FullOperator gauge_average_quadrature(const FullOperator& M) {
  const FockBasis& b = *M.basis;
  const int K = 4 * b.N_max + 1;
  CMatrix A(b.dim, b.dim);
  for (int k = 0; k < K; ++k) {
    const double t = 2.0 * kPi * k / K;
    FullOperator U = gauge_unitary(b, t);
    add_scaled_inplace(A, 1.0 / K, mul(U.matrix, mul(M.matrix, dagger(U.matrix))));
  }
  const bool conserves = scan_conserves_N(b, A);
  return FullOperator{&b, std::move(A), conserves};
}

// --- matrix-free resolvent application ---

// conjugate gradient for a Hermitian positive definite apply
template <typename Apply>
CVector cg_hpd(Apply&& A, const CVector& rhs, double tol = 1e-13, int maxit = 2000) {
  CVector x(rhs.size(), cx(0.0));
  CVector r = rhs, p = rhs;
  const double rhs_norm = vnorm(rhs);
  if (rhs_norm == 0.0) return x;
  double rr = std::real(vdot(r, r));
  for (int it = 0; it < maxit; ++it) {
    if (std::sqrt(rr) <= tol * rhs_norm) return x;
    CVector Ap = A(p);
    const double pAp = std::real(vdot(p, Ap));
    if (pAp <= 0.0) throw std::runtime_error("cg_hpd: operator not positive definite");
    const double alpha = rr / pAp;
    vaxpy(alpha, p, x);
    vaxpy(-alpha, Ap, r);
    const double rr_new = std::real(vdot(r, r));
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  if (std::sqrt(rr) > tol * rhs_norm)
    throw std::runtime_error("cg_hpd: no convergence, residual " + std::to_string(std::sqrt(rr) / rhs_norm));
  return x;
}

// R(λ,f)·v via CG on the normal form (φ² + λ²) x = (φ − iλ) v
inline CVector apply_resolvent_modes(const FockBasis& b, double lambda, const CVector& u, const CVector& v,
                                     double tol = 1e-13) {
  if (lambda == 0.0) throw std::invalid_argument("apply_resolvent: lambda must be nonzero");
  CVector rhs = apply_field_modes(b, u, v);
  vaxpy(cx(0.0, -lambda), v, rhs);
  auto A = [&](const CVector& x) {
    CVector y = apply_field_modes(b, u, apply_field_modes(b, u, x));
    vaxpy(lambda * lambda, x, y);
    return y;
  };
  return cg_hpd(A, rhs, tol);
}

inline CVector apply_monomial_modes(const FockBasis& b, const ResolventSpec& spec, const CVector& v,
                                    double tol = 1e-13) {
  validate(spec);
  CVector w = v;
  for (std::size_t k = spec.size(); k-- > 0;)
    w = apply_resolvent_modes(b, spec[k].lambda, mode_vector(spec[k].f), w, tol);
  return w;
}

// --- truncated annihilators and matrix units ---

namespace detail {

// dense creation operator of a single site mode
inline CMatrix creation_mode(const FockBasis& b, int j) {
  CMatrix M(b.dim, b.dim);
  std::vector<std::uint8_t> tmp(b.d);
  for (int n = 0; n < b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    for (std::size_t i = off; i < off + sz; ++i) {
      const std::uint8_t* o = b.occ(i);
      std::memcpy(tmp.data(), o, b.d);
      tmp[j] = static_cast<std::uint8_t>(o[j] + 1);
      M(b.index_of(tmp.data()), i) = std::sqrt(static_cast<double>(o[j] + 1));
      tmp[j] = o[j];
    }
  }
  return M;
}

// coefficients of the polynomial that is 1 on {0..n} and 0 on {n+1..nmax}
inline std::vector<double> step_poly(int n, int nmax) {
  std::vector<double> coef(1, 0.0);
  for (int m = 0; m <= n; ++m) {
    std::vector<double> term(1, 1.0);  // Π_{k≠m} (x−k)/(m−k)
    for (int k = 0; k <= nmax; ++k) {
      if (k == m) continue;
      std::vector<double> next(term.size() + 1, 0.0);
      const double inv = 1.0 / (m - k);
      for (std::size_t i = 0; i < term.size(); ++i) {
        next[i] += term[i] * (-k) * inv;
        next[i + 1] += term[i] * inv;
      }
      term = std::move(next);
    }
    if (term.size() > coef.size()) coef.resize(term.size(), 0.0);
    for (std::size_t i = 0; i < term.size(); ++i) coef[i] += term[i];
  }
  return coef;
}

// p(M) by Horner's rule
inline CMatrix poly_eval(const CMatrix& M, const std::vector<double>& coef) {
  CMatrix R = scale(coef.back(), CMatrix::identity(M.rows));
  for (std::size_t i = coef.size() - 1; i-- > 0;) {
    R = mul(R, M);
    for (std::size_t k = 0; k < M.rows; ++k) R(k, k) += coef[i];
  }
  return R;
}

inline bool is_diagonal(const CMatrix& M) {
  for (std::size_t i = 0; i < M.rows; ++i)
    for (std::size_t j = 0; j < M.cols; ++j)
      if (i != j && M(i, j) != cx(0.0)) return false;
  return true;
}

}  // namespace detail

// spectral projector E_{[0,n]} of a number-type operator with spectrum in {0..N_max}
inline CMatrix number_window_projector(const CMatrix& Nf, int n, int nmax) {
  if (n >= nmax) return CMatrix::identity(Nf.rows);
  if (detail::is_diagonal(Nf)) {
    CMatrix E(Nf.rows, Nf.cols);
    for (std::size_t i = 0; i < Nf.rows; ++i) E(i, i) = (std::real(Nf(i, i)) <= n + 0.5) ? 1.0 : 0.0;
    return E;
  }
  return detail::poly_eval(Nf, detail::step_poly(n, nmax));
}

// X_n = prefactor · E_{[0,n]}(N(f)) · a(f)
inline FullOperator truncated_annihilator(const FockBasis& b, const WaveFn& f, int n, double prefactor) {
  if (n > b.N_max) throw std::invalid_argument("truncated_annihilator: n beyond cutoff");
  FullOperator nf = number_mode(b, f);
  const CMatrix E = number_window_projector(nf.matrix, n, b.N_max);
  const CMatrix A = dagger(creation(b, normalized(f)).matrix);
  return FullOperator{&b, scale(prefactor, mul(E, A)), false};
}

// W_n(i,k) = X_n(i)† X_n(k) with X_n(j) = n^{−1/2} E_{[0,n]}(n_j) a_j  (site modes)
inline FullOperator matrix_unit(const FockBasis& b, int i, int k, int n) {
  if (i < 0 || i >= b.d || k < 0 || k >= b.d) throw std::invalid_argument("matrix_unit: mode index out of range");
  if (n < 1 || n > b.N_max) throw std::invalid_argument("matrix_unit: need 1 <= n <= N_max");
  auto X = [&](int j) {
    CMatrix A = dagger(detail::creation_mode(b, j));
    CMatrix Nj(b.dim, b.dim);
    for (std::size_t s = 0; s < b.dim; ++s) Nj(s, s) = static_cast<double>(b.occ(s)[j]);
    const CMatrix E = number_window_projector(Nj, n, b.N_max);
    return scale(1.0 / std::sqrt(static_cast<double>(n)), mul(E, A));
  };
  CMatrix W = mul(dagger(X(i)), X(k));
  return FullOperator{&b, std::move(W), true};
}

namespace detail {

struct CompositeCandidates {
  std::vector<std::string> keys;
  std::vector<CMatrix> ops;  // full-space matrices
};

inline void gather_candidates(const FockBasis& b, const std::vector<int>& is, const std::vector<int>& ks, int n,
                              CompositeCandidates& out) {
  std::string key;
  for (std::size_t j = 0; j < is.size(); ++j)
    key += std::to_string(is[j]) + "," + std::to_string(ks[j]) + ";";
  for (const auto& k : out.keys)
    if (k == key) return;
  CMatrix P = matrix_unit(b, is[0], ks[0], n).matrix;
  for (std::size_t j = 1; j < is.size(); ++j) P = mul(P, matrix_unit(b, is[j], ks[j], n).matrix);
  out.keys.push_back(key);
  out.ops.push_back(std::move(P));
  // contractions: merge factor q into factor p when k_p == i_q
  if (is.size() >= 2) {
    for (std::size_t p = 0; p < is.size(); ++p)
      for (std::size_t q = 0; q < is.size(); ++q) {
        if (p == q || ks[p] != is[q]) continue;
        std::vector<int> ris, rks;
        for (std::size_t j = 0; j < is.size(); ++j) {
          if (j == q) continue;
          ris.push_back(is[j]);
          rks.push_back(j == p ? ks[q] : ks[j]);
        }
        gather_candidates(b, ris, rks, n, out);
      }
  }
}

}  // namespace detail

// linear combination of ordered matrix-unit products whose F_n block reproduces
// M_{i₁k₁} ⊗_s ··· ⊗_s M_{i_mk_m} ⊗_s 1^{⊗(n−m)}, solved by Frobenius least squares
inline FullOperator matrix_unit_composite(const FockBasis& b, const std::vector<int>& is,
                                          const std::vector<int>& ks, int n) {
  const int m = static_cast<int>(is.size());
  if (m < 1 || is.size() != ks.size()) throw std::invalid_argument("matrix_unit_composite: bad index lists");
  if (m > n || n > b.N_max) throw std::invalid_argument("matrix_unit_composite: need m <= n <= N_max");
  if (m == 1) return matrix_unit(b, is[0], ks[0], n);

  std::vector<CMatrix> factors;
  for (int j = 0; j < m; ++j) {
    CMatrix M(b.d, b.d);
    M(is[j], ks[j]) = 1.0;
    factors.push_back(std::move(M));
  }
  CMatrix target = (m <= 2) ? symmetric_embed_fast(b, n, factors)
                            : symmetric_embed_factors(b.d, n, factors, b.memory_budget);

  detail::CompositeCandidates cand;
  detail::gather_candidates(b, is, ks, n, cand);
  cand.keys.push_back("unit");
  cand.ops.push_back(CMatrix::identity(b.dim));

  const std::size_t nc = cand.ops.size();
  std::vector<CMatrix> blocks;
  for (const auto& op : cand.ops) blocks.push_back(sector_block(b, op, n));

  auto fdot = [](const CMatrix& A, const CMatrix& B) {
    cx s = 0.0;
    for (std::size_t i = 0; i < A.a.size(); ++i) s += std::conj(A.a[i]) * B.a[i];
    return s;
  };
  CMatrix G(nc, nc);
  CMatrix rhs(nc, 1);
  for (std::size_t a = 0; a < nc; ++a) {
    rhs(a, 0) = fdot(blocks[a], target);
    for (std::size_t c = 0; c < nc; ++c) G(a, c) = fdot(blocks[a], blocks[c]);
  }
  // pseudo-inverse solve (the candidate set may be linearly dependent)
  EigenDecomposition ed = hermitian_eig(G);
  const double rank_tol = 1e-12 * std::max(1.0, ed.eigenvalues.back());
  int rank = 0;
  CVector y(nc, cx(0.0));
  CVector rv(nc);
  for (std::size_t a = 0; a < nc; ++a) rv[a] = rhs(a, 0);
  for (std::size_t k = 0; k < nc; ++k) {
    if (ed.eigenvalues[k] <= rank_tol) continue;
    ++rank;
    cx proj = 0.0;
    for (std::size_t a = 0; a < nc; ++a) proj += std::conj(ed.vectors(a, k)) * rv[a];
    proj /= ed.eigenvalues[k];
    for (std::size_t a = 0; a < nc; ++a) y[a] += proj * ed.vectors(a, k);
  }

  CMatrix result(b.dim, b.dim);
  CMatrix check(blocks[0].rows, blocks[0].cols);
  for (std::size_t a = 0; a < nc; ++a) {
    add_scaled_inplace(result, y[a], cand.ops[a]);
    add_scaled_inplace(check, y[a], blocks[a]);
  }
  const double residual = frobenius(sub(check, target));
  if (residual > 1e-9 * std::max(1.0, frobenius(target)))
    throw std::runtime_error("matrix_unit_composite: recursion system unsolved, residual " +
                             std::to_string(residual) + ", candidate rank " + std::to_string(rank));
  return FullOperator{&b, std::move(result), true};
}

// F_{f,κ} = a*(f) (1 + a*(f)a(f))^{−κ}; κ = 1/2 gives the isometry F_f
inline FullOperator isometry_F(const FockBasis& b, const WaveFn& f, double kappa = 0.5) {
  if (kappa < 0.5) throw std::invalid_argument("isometry_F: kappa must be >= 1/2");
  FullOperator nf = number_mode(b, f);
  const CMatrix reg = matrix_function(nf.matrix, [&](double x) { return cx(std::pow(1.0 + std::max(0.0, x), -kappa)); });
  const CMatrix F = mul(creation(b, normalized(f)).matrix, reg);
  return FullOperator{&b, F, false};
}

}  // namespace bosekit
