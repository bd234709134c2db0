#pragma once

// The inverse-limit grading: sector restrictions and seminorms, graded operators
// and the level-lowering map κ, cluster-limit evaluation, coherence checks, and
// a best-effort grading decomposition on a window of modes.

#include "bosekit/checks.hpp"
#include "bosekit/fock.hpp"
#include "bosekit/krylov.hpp"
#include "bosekit/resolvent.hpp"

namespace bosekit {

inline SectorOperator restrict_sector(const FullOperator& A, int n) {
  if (!A.conserves_N)
    throw std::invalid_argument("restrict_sector: operator does not conserve particle number");
  return SectorOperator{n, sector_block(*A.basis, A.matrix, n)};
}

inline double seminorm(const FullOperator& A, int n) {
  SectorOperator S = restrict_sector(A, n);
  if (S.block.rows == 0) return 0.0;
  if (S.block.rows <= 256) return operator_norm(S.block);
  Rng rng(1234 + std::size_t(n));
  return spectral_norm_iterative(S.block, rng);
}

// --- graded operators and the κ map ---

struct GradedTerm {
  int m = 0;                    // body order
  std::vector<CMatrix> factors;  // m one-body d×d factors, or
  CMatrix block;                 // an m-body block on F_m (used when factors empty and m > 0)
  cx weight = 1.0;
};

struct GradedOperator {
  int n = 0;  // level: materializes on F_n
  std::vector<GradedTerm> terms;
};

inline void validate(const GradedOperator& G) {
  std::vector<bool> seen(G.n + 1, false);
  for (const auto& t : G.terms) {
    if (t.m < 0 || t.m > G.n) throw std::invalid_argument("graded operator: body order out of range");
    if (seen[t.m]) throw std::invalid_argument("graded operator: duplicate body order");
    seen[t.m] = true;
  }
}

inline CMatrix materialize(const FockBasis& b, const GradedOperator& G) {
  validate(G);
  const std::size_t sz = b.sector_dims[G.n];
  CMatrix M(sz, sz);
  for (const auto& t : G.terms) {
    CMatrix part;
    if (t.m == 0) {
      part = CMatrix::identity(sz);
    } else if (!t.factors.empty()) {
      part = (t.m <= 2) ? symmetric_embed_fast(b, G.n, t.factors)
                        : symmetric_embed_factors(b.d, G.n, t.factors, b.memory_budget);
    } else {
      part = symmetric_embed_block(b.d, G.n, t.m, t.block, b.memory_budget);
    }
    add_scaled_inplace(M, t.weight, part);
  }
  return M;
}

// κ_n(Σ_m C_{m,n}) = Σ_{m<n} (n−m)/n · C_{m,n−1}; κ₀ = 0
inline GradedOperator kappa(const GradedOperator& G) {
  validate(G);
  if (G.n == 0) return GradedOperator{0, {}};
  GradedOperator out{G.n - 1, {}};
  for (const auto& t : G.terms) {
    if (t.m >= G.n) continue;
    GradedTerm s = t;
    s.weight *= double(G.n - t.m) / G.n;
    out.terms.push_back(std::move(s));
  }
  return out;
}

// --- cluster limits ---

struct ClusterVectors {
  std::vector<WaveFn> fs;  // f_1..f_n; the last entry is the packet sent far away
  std::vector<WaveFn> gs;  // g_1..g_n, same layout
  int cells = 0;           // translation applied to the far packets
};

inline void validate(const ClusterVectors& cv) {
  if (cv.fs.empty() || cv.fs.size() != cv.gs.size())
    throw std::invalid_argument("cluster vectors: need equally many f's and g's, at least one");
  for (const auto& f : cv.fs)
    if (norm(f) == 0.0) throw std::invalid_argument("cluster vectors: zero-norm f component");
  for (const auto& g : cv.gs)
    if (norm(g) == 0.0) throw std::invalid_argument("cluster vectors: zero-norm g component");
}

namespace detail {

inline std::vector<WaveFn> translated_list(const std::vector<WaveFn>& fns, int cells) {
  std::vector<WaveFn> out = fns;
  out.back() = translate(out.back(), cells);
  return out;
}

}  // namespace detail

// ⟨Ψⁿ(x), A Φⁿ(x)⟩ with the last packets translated by cv.cells
inline cx cluster_element(const FullOperator& A, const ClusterVectors& cv) {
  validate(cv);
  const FockBasis& b = *A.basis;
  const int n = static_cast<int>(cv.fs.size());
  if (n > b.N_max) throw std::invalid_argument("cluster_element: more packets than the cutoff admits");
  CVector phi = product_state(b, detail::translated_list(cv.fs, cv.cells));
  CVector psi = product_state(b, detail::translated_list(cv.gs, cv.cells));
  return vdot(psi, mul_vec(A.matrix, phi));
}

// Both sides of the cluster identity
//   ⟨Ψⁿ(x), A Φⁿ(x)⟩ → n^{−1} ⟨Ψ^{n−1}, A Φ^{n−1}⟩ ⟨g_n, f_n⟩:
// the right-hand side lives one sector lower, where the departed packet still
// occupies one cutoff slot, so the observable is rebuilt on the basis with
// cutoff N_max−1 (exact factorization, not an approximation).
template <typename Builder>
CheckReport cluster_limit_check(const FockBasis& b, const FockBasis& bminus, Builder&& build,
                                const ClusterVectors& cv, double tolerance = 1e-10) {
  Stopwatch watch;
  validate(cv);
  const int n = static_cast<int>(cv.fs.size());
  if (n > b.N_max || n - 1 > bminus.N_max)
    throw std::invalid_argument("cluster_limit_check: cutoffs too small for the packet count");

  FullOperator A = build(b);
  const cx lhs = cluster_element(A, cv);

  cx rhs;
  {
    FullOperator Am = build(bminus);
    std::vector<WaveFn> fs(cv.fs.begin(), cv.fs.end() - 1);
    std::vector<WaveFn> gs(cv.gs.begin(), cv.gs.end() - 1);
    CVector phi = fs.empty() ? vacuum_state(bminus) : product_state(bminus, fs);
    CVector psi = gs.empty() ? vacuum_state(bminus) : product_state(bminus, gs);
    const cx overlap = inner(translate(cv.gs.back(), cv.cells), translate(cv.fs.back(), cv.cells));
    rhs = vdot(psi, mul_vec(Am.matrix, phi)) * overlap / double(n);
  }

  CheckReport r = make_report(
      "cluster_limit", "far-particle factorization of sector matrix elements", std::abs(lhs - rhs),
      0.0, tolerance);
  r.parameters = {{"n", double(n)}, {"cells", double(cv.cells)}, {"lhs_abs", std::abs(lhs)},
                  {"rhs_abs", std::abs(rhs)}};
  r.runtime_ms = watch.ms();
  return r;
}

// Matrix-free variant for resolvent monomials: the observable is applied through
// conjugate-gradient resolvent solves, never materialized. Matrix elements taken
// between vectors of one sector coincide with those of the gauge-averaged
// observable, since the gauge mean is the block projection.
inline CheckReport cluster_limit_check_modes(const FockBasis& b, const FockBasis& bminus,
                                             const ResolventSpec& spec, const ClusterVectors& cv,
                                             double tolerance = 1e-10, double cg_tol = 1e-13) {
  Stopwatch watch;
  validate(cv);
  validate(spec);
  const int n = static_cast<int>(cv.fs.size());
  if (n > b.N_max || n - 1 > bminus.N_max)
    throw std::invalid_argument("cluster_limit_check: cutoffs too small for the packet count");

  CVector phi = product_state(b, detail::translated_list(cv.fs, cv.cells));
  CVector psi = product_state(b, detail::translated_list(cv.gs, cv.cells));
  const cx lhs = vdot(psi, apply_monomial_modes(b, spec, phi, cg_tol));

  std::vector<WaveFn> fs(cv.fs.begin(), cv.fs.end() - 1);
  std::vector<WaveFn> gs(cv.gs.begin(), cv.gs.end() - 1);
  CVector phim = fs.empty() ? vacuum_state(bminus) : product_state(bminus, fs);
  CVector psim = gs.empty() ? vacuum_state(bminus) : product_state(bminus, gs);
  const cx overlap = inner(translate(cv.gs.back(), cv.cells), translate(cv.fs.back(), cv.cells));
  const cx rhs = vdot(psim, apply_monomial_modes(bminus, spec, phim, cg_tol)) * overlap / double(n);

  CheckReport r = make_report(
      "cluster_limit", "far-particle factorization of sector matrix elements", std::abs(lhs - rhs),
      0.0, tolerance);
  r.parameters = {{"n", double(n)}, {"cells", double(cv.cells)}, {"lhs_abs", std::abs(lhs)},
                  {"rhs_abs", std::abs(rhs)}};
  r.runtime_ms = watch.ms();
  return r;
}

// Same factorization for the time-evolved observable α_t(A); evolve(basis, A, t)
// must implement the Heisenberg evolution on the given basis.
template <typename Builder, typename Evolver>
CheckReport coherence_check(const FockBasis& b, const FockBasis& bminus, Builder&& build,
                            Evolver&& evolve, double t, const ClusterVectors& cv,
                            double tolerance = 1e-10) {
  auto evolved = [&](const FockBasis& basis) { return evolve(basis, build(basis), t); };
  CheckReport r = cluster_limit_check(b, bminus, evolved, cv, tolerance);
  r.name = "coherence";
  r.claim = "time evolution commutes with the level-lowering factorization";
  r.parameters.emplace_back("t", t);
  return r;
}

// --- grading decomposition on a window of modes ---

struct GradedDecomposition {
  GradedOperator op;
  double residual = 0.0;
  bool decomposable = false;
};

namespace detail {

inline cx fdot(const CMatrix& A, const CMatrix& B) {
  cx s = 0.0;
  for (std::size_t i = 0; i < A.a.size(); ++i) s += std::conj(A.a[i]) * B.a[i];
  return s;
}

// m-body block basis supported on the window, embedded to level n
struct WindowBasis {
  std::vector<CMatrix> blocks;  // on F_m(d)
  std::vector<CMatrix> embeds;  // on F_n(d)
};

inline WindowBasis window_basis(const FockBasis& b, int n, int m, const std::vector<int>& window) {
  FockBasis bw = enumerate_basis(static_cast<int>(window.size()), m);
  FockBasis bm = enumerate_basis(b.d, m);
  const std::size_t off = bw.sector_offsets[m], sz = bw.sector_dims[m];
  const std::size_t offm = bm.sector_offsets[m], szm = bm.sector_dims[m];
  std::vector<std::size_t> lift(sz);
  std::vector<std::uint8_t> occ(b.d);
  for (std::size_t i = 0; i < sz; ++i) {
    std::fill(occ.begin(), occ.end(), 0);
    const std::uint8_t* ow = bw.occ(off + i);
    for (std::size_t w = 0; w < window.size(); ++w) occ[window[w]] = ow[w];
    lift[i] = bm.index_of(occ.data()) - offm;
  }
  WindowBasis out;
  for (std::size_t r = 0; r < sz; ++r)
    for (std::size_t c = 0; c < sz; ++c) {
      CMatrix B(szm, szm);
      B(lift[r], lift[c]) = 1.0;
      out.embeds.push_back(symmetric_embed_block(b.d, n, m, B, b.memory_budget));
      out.blocks.push_back(std::move(B));
    }
  return out;
}

}  // namespace detail

// Greedy lowest-order-first least squares: each body order absorbs as much of the
// remainder as window-supported factors at that order can represent.
inline GradedDecomposition graded_decompose(const FockBasis& b, const CMatrix& K, int n,
                                            const std::vector<int>& window,
                                            double threshold = 1e-9) {
  for (int w : window)
    if (w < 0 || w >= b.d) throw std::invalid_argument("graded_decompose: window mode out of range");
  if (K.rows != b.sector_dims[n]) throw std::invalid_argument("graded_decompose: block is not an F_n operator");
  const double scale = std::max(1.0, frobenius(K));

  GradedDecomposition out;
  out.op.n = n;
  CMatrix R = K;

  const CMatrix I = CMatrix::identity(K.rows);
  const cx c0 = detail::fdot(I, R) / detail::fdot(I, I);
  if (std::abs(c0) > 1e-12 * scale) {
    out.op.terms.push_back(GradedTerm{0, {}, CMatrix{}, c0});
    add_scaled_inplace(R, -c0, I);
  }

  for (int m = 1; m <= n; ++m) {
    detail::WindowBasis wb = detail::window_basis(b, n, m, window);
    const std::size_t nc = wb.embeds.size();
    CMatrix G(nc, nc);
    CVector rhs(nc);
    for (std::size_t i = 0; i < nc; ++i) {
      rhs[i] = detail::fdot(wb.embeds[i], R);
      for (std::size_t j = 0; j < nc; ++j) G(i, j) = detail::fdot(wb.embeds[i], wb.embeds[j]);
    }
    EigenDecomposition ed = hermitian_eig(G);
    const double rank_tol = 1e-12 * std::max(1.0, ed.eigenvalues.back());
    CVector coef(nc, cx(0.0));
    for (std::size_t k = 0; k < nc; ++k) {
      if (ed.eigenvalues[k] <= rank_tol) continue;
      cx proj = 0.0;
      for (std::size_t i = 0; i < nc; ++i) proj += std::conj(ed.vectors(i, k)) * rhs[i];
      proj /= ed.eigenvalues[k];
      for (std::size_t i = 0; i < nc; ++i) coef[i] += proj * ed.vectors(i, k);
    }
    CMatrix block(wb.blocks[0].rows, wb.blocks[0].cols);
    double weight = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
      add_scaled_inplace(block, coef[i], wb.blocks[i]);
      add_scaled_inplace(R, -coef[i], wb.embeds[i]);
      weight += std::abs(coef[i]);
    }
    if (weight > 1e-12 * scale) out.op.terms.push_back(GradedTerm{m, {}, std::move(block), 1.0});
  }

  out.residual = frobenius(R);
  out.decomposable = out.residual <= threshold * scale;
  return out;
}

}  // namespace bosekit
