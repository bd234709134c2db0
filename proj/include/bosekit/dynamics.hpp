#pragma once

// Interacting dynamics: free/trapped/pair-interacting Hamiltonians (first- and
// second-quantized routes), cached Heisenberg evolution, the Dyson expansion of
// the interaction cocycle with certified tail bounds, interaction-picture pair
// potentials in closed form, the trapped closed-form kernel, trap removal,
// asymptotic commutators, and the free-case asymptotic observable formula.

#include <cstring>
#include <functional>
#include <optional>

#include "bosekit/structure.hpp"

namespace bosekit {

struct HamiltonianSpec {
  Grid grid;
  std::function<double(double)> potential;  // pair potential V(r); empty means V = 0
  std::optional<double> trap_L;             // harmonic trap x²/L⁴; empty means untrapped
  double chemical_shift = 0.0;              // coefficient of the number operator
};

inline void validate(const HamiltonianSpec& spec) {
  if (spec.trap_L && *spec.trap_L <= 0.0)
    throw std::invalid_argument("hamiltonian: trap_L must be positive");
  if (spec.potential) pair_potential_table(spec.grid, spec.potential);  // symmetry check
}

inline CMatrix potential_table(const HamiltonianSpec& spec) {
  return spec.potential ? pair_potential_table(spec.grid, spec.potential)
                        : CMatrix(spec.grid.d, spec.grid.d);
}

// −Δ + x²/L⁴ (chemical shift enters per sector, not here)
inline CMatrix one_particle_hamiltonian(const HamiltonianSpec& spec) {
  CMatrix h = laplacian(spec.grid);
  if (spec.trap_L) {
    const double L4 = std::pow(*spec.trap_L, 4);
    for (int j = 0; j < spec.grid.d; ++j) {
      const double x = spec.grid.x(j);
      h(j, j) += x * x / L4;
    }
  }
  return h;
}

// Σ_i h1_i + Σ_{j≠k} V(Q_j − Q_k) + shift·n on the n-fold tensor space
inline CMatrix tensor_hamiltonian(const HamiltonianSpec& spec, int n,
                                  std::size_t memory_budget = kDefaultBudget) {
  validate(spec);
  const int d = spec.grid.d;
  if (n == 0) return CMatrix(1, 1);
  std::size_t tdim = 1;
  for (int i = 0; i < n; ++i) tdim *= static_cast<std::size_t>(d);
  if (16ull * tdim * tdim > memory_budget)
    throw std::invalid_argument("tensor_hamiltonian: needs " +
                                std::to_string(16ull * tdim * tdim) + " bytes");
  const CMatrix h1 = one_particle_hamiltonian(spec);
  CMatrix H(tdim, tdim);
  // kinetic + trap: 1⊗…⊗h1⊗…⊗1 summed over slots
  for (int slot = 0; slot < n; ++slot) {
    std::size_t lo = 1, hi = 1;
    for (int i = slot + 1; i < n; ++i) lo *= d;  // trailing identity dimension
    for (int i = 0; i < slot; ++i) hi *= d;      // leading identity dimension
    for (std::size_t a = 0; a < hi; ++a)
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          if (h1(r, c) == cx(0.0)) continue;
          for (std::size_t b = 0; b < lo; ++b)
            H((a * d + r) * lo + b, (a * d + c) * lo + b) += h1(r, c);
        }
  }
  // pair potential and chemical shift are diagonal in the position product basis
  const CMatrix T = potential_table(spec);
  std::vector<int> word(n);
  for (std::size_t t = 0; t < tdim; ++t) {
    std::size_t rem = t;
    for (int i = n - 1; i >= 0; --i) {
      word[i] = static_cast<int>(rem % d);
      rem /= d;
    }
    cx v = spec.chemical_shift * static_cast<double>(n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (j != k) v += T(word[j], word[k]);
    H(t, t) += v;
  }
  return H;
}

// first-quantized route: tensor Hamiltonian compressed by the symmetrizer
inline SectorOperator sector_hamiltonian(const HamiltonianSpec& spec, int n,
                                         std::size_t memory_budget = kDefaultBudget) {
  if (n == 0) return SectorOperator{0, tensor_hamiltonian(spec, 0)};
  const CMatrix S = symmetrizer(spec.grid.d, n, memory_budget);
  return SectorOperator{n, mul(dagger(S), mul(tensor_hamiltonian(spec, n, memory_budget), S))};
}

// diagonal of Σ_{j≠k} V(Q_j − Q_k) on sector n: Σ_{r,s} T_rs (m_r m_s − δ_rs m_r)
inline CVector interaction_diagonal(const FockBasis& b, const HamiltonianSpec& spec, int n) {
  const CMatrix T = potential_table(spec);
  const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
  CVector diag(sz, cx(0.0));
  std::vector<int> occupied;
  for (std::size_t i = 0; i < sz; ++i) {
    const std::uint8_t* o = b.occ(off + i);
    occupied.clear();
    for (int j = 0; j < b.d; ++j)
      if (o[j] > 0) occupied.push_back(j);
    cx v = 0.0;
    for (int r : occupied)
      for (int s : occupied)
        v += T(r, s) * (static_cast<double>(o[r]) * o[s] - (r == s ? o[r] : 0.0));
    diag[i] = v;
  }
  return diag;
}

// second-quantized route: dΓ(h1) + interaction diagonal + shift·N, blockwise
inline FullOperator full_hamiltonian(const HamiltonianSpec& spec, const FockBasis& b) {
  validate(spec);
  if (spec.grid.d != b.d) throw std::invalid_argument("full_hamiltonian: mode count mismatch");
  const CMatrix h1 = one_particle_hamiltonian(spec);
  CMatrix H(b.dim, b.dim);
  for (int n = 0; n <= b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    const CMatrix K = dgamma_sector(b, h1, n);
    const CVector W = interaction_diagonal(b, spec, n);
    for (std::size_t i = 0; i < sz; ++i) {
      for (std::size_t j = 0; j < sz; ++j)
        if (K(i, j) != cx(0.0)) H(off + i, off + j) = K(i, j);
      H(off + i, off + i) += W[i] + spec.chemical_shift * static_cast<double>(n);
    }
  }
  FullOperator op{&b, std::move(H), true};
  return op;
}

// --- propagator caches and Heisenberg evolution ---

inline std::uint64_t fingerprint(const HamiltonianSpec& spec) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      hash ^= (bits >> (8 * i)) & 0xff;
      hash *= 1099511628211ull;
    }
  };
  mix(static_cast<double>(spec.grid.d));
  mix(spec.grid.h);
  mix(spec.grid.periodic ? 1.0 : 0.0);
  mix(spec.trap_L ? *spec.trap_L : -1.0);
  mix(spec.chemical_shift);
  const CMatrix T = potential_table(spec);
  for (const auto& v : T.a) mix(std::real(v));
  return hash;
}

struct PropagatorCache {
  const FockBasis* basis = nullptr;
  const HamiltonianSpec* spec = nullptr;       // watched for drift
  std::uint64_t tag = 0;                       // fingerprint at build time
  std::vector<EigenDecomposition> sector_eig;  // of the full-Hamiltonian blocks
};

inline PropagatorCache build_propagator_cache(const FockBasis& b, const HamiltonianSpec& spec) {
  PropagatorCache cache{&b, &spec, fingerprint(spec), {}};
  const FullOperator H = full_hamiltonian(spec, b);
  cache.sector_eig.reserve(b.N_max + 1);
  for (int n = 0; n <= b.N_max; ++n)
    cache.sector_eig.push_back(hermitian_eig(sector_block(b, H.matrix, n)));
  return cache;
}

namespace detail {

inline void check_fresh(const PropagatorCache& cache) {
  if (!cache.basis || !cache.spec || cache.sector_eig.empty())
    throw std::invalid_argument("propagator cache: not built");
  if (fingerprint(*cache.spec) != cache.tag)
    throw std::runtime_error("propagator cache is stale: the spec changed after the build");
}

// e^{itH} B e^{−itH} for one diagonalized block
inline CMatrix phase_conjugate(const EigenDecomposition& ed, const CMatrix& B, double t) {
  CMatrix W = mul(dagger(ed.vectors), mul(B, ed.vectors));
  for (std::size_t r = 0; r < W.rows; ++r)
    for (std::size_t c = 0; c < W.cols; ++c)
      W(r, c) *= std::polar(1.0, t * (ed.eigenvalues[r] - ed.eigenvalues[c]));
  return mul(ed.vectors, mul(W, dagger(ed.vectors)));
}

}  // namespace detail

inline SectorOperator heisenberg_evolve(const PropagatorCache& cache, const SectorOperator& A,
                                        double t) {
  detail::check_fresh(cache);
  if (A.n < 0 || A.n >= static_cast<int>(cache.sector_eig.size()))
    throw std::invalid_argument("heisenberg_evolve: sector out of range");
  return SectorOperator{A.n, detail::phase_conjugate(cache.sector_eig[A.n], A.block, t)};
}

inline FullOperator heisenberg_evolve(const PropagatorCache& cache, const FullOperator& A,
                                      double t) {
  detail::check_fresh(cache);
  const FockBasis& b = *cache.basis;
  if (A.basis != &b) throw std::invalid_argument("heisenberg_evolve: basis mismatch");
  CMatrix U(b.dim, b.dim);
  for (int n = 0; n <= b.N_max; ++n) {
    const EigenDecomposition& ed = cache.sector_eig[n];
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    for (std::size_t i = 0; i < sz; ++i)
      for (std::size_t j = 0; j < sz; ++j) {
        cx s = 0.0;
        for (std::size_t k = 0; k < sz; ++k)
          s += ed.vectors(i, k) * std::polar(1.0, t * ed.eigenvalues[k]) *
               std::conj(ed.vectors(j, k));
        U(off + i, off + j) = s;
      }
  }
  CMatrix out = mul(U, mul(A.matrix, dagger(U)));
  return FullOperator{&b, std::move(out), A.conserves_N};
}

// e^{−itH} v
inline CVector evolve_state(const PropagatorCache& cache, const CVector& v, double t) {
  detail::check_fresh(cache);
  const FockBasis& b = *cache.basis;
  if (v.size() != b.dim) throw std::invalid_argument("evolve_state: dimension mismatch");
  CVector out(b.dim);
  for (int n = 0; n <= b.N_max; ++n) {
    const EigenDecomposition& ed = cache.sector_eig[n];
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    CVector seg(sz), coef(sz);
    for (std::size_t i = 0; i < sz; ++i) seg[i] = v[off + i];
    for (std::size_t k = 0; k < sz; ++k) {
      cx s = 0.0;
      for (std::size_t i = 0; i < sz; ++i) s += std::conj(ed.vectors(i, k)) * seg[i];
      coef[k] = s * std::polar(1.0, -t * ed.eigenvalues[k]);
    }
    for (std::size_t i = 0; i < sz; ++i) {
      cx s = 0.0;
      for (std::size_t k = 0; k < sz; ++k) s += ed.vectors(i, k) * coef[k];
      out[off + i] = s;
    }
  }
  return out;
}

// H·v without materializing H
inline CVector apply_hamiltonian_modes(const FockBasis& b, const HamiltonianSpec& spec,
                                       const CVector& v) {
  if (spec.grid.d != b.d || v.size() != b.dim)
    throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
  const CMatrix h1 = one_particle_hamiltonian(spec);
  CVector out(b.dim, cx(0.0));
  std::vector<std::uint8_t> tmp(b.d);
  for (int n = 0; n <= b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    const CVector W = interaction_diagonal(b, spec, n);
    for (std::size_t i = 0; i < sz; ++i) {
      const cx amp = v[off + i];
      if (amp == cx(0.0)) continue;
      const std::uint8_t* o = b.occ(off + i);
      cx diag = W[i] + spec.chemical_shift * static_cast<double>(n);
      for (int j = 0; j < b.d; ++j)
        if (o[j] > 0) diag += h1(j, j) * static_cast<double>(o[j]);
      out[off + i] += diag * amp;
      std::memcpy(tmp.data(), o, b.d);
      for (int s = 0; s < b.d; ++s) {
        if (o[s] == 0) continue;
        for (int r = 0; r < b.d; ++r) {
          if (r == s || h1(r, s) == cx(0.0)) continue;
          tmp[s] = static_cast<std::uint8_t>(o[s] - 1);
          tmp[r] = static_cast<std::uint8_t>(o[r] + 1);
          out[b.index_of(tmp.data())] +=
              h1(r, s) * std::sqrt(static_cast<double>(o[s]) * (o[r] + 1.0)) * amp;
          tmp[s] = o[s];
          tmp[r] = o[r];
        }
      }
    }
  }
  return out;
}

// e^{−itH} v through the Krylov exponential (no dense eigendecomposition)
inline CVector evolve_state_krylov(const FockBasis& b, const HamiltonianSpec& spec,
                                   const CVector& v, double t, double tol = 1e-11) {
  auto apply = [&](const CVector& x) { return apply_hamiltonian_modes(b, spec, x); };
  return expi_apply(apply, v, -t, tol);
}

// --- Dyson expansion of the interaction cocycle ---

inline constexpr double kDysonQuadTol = 1e-8;   // Cauchy-gap target, relative to ‖C‖
inline constexpr int kDysonMaxNodes = 4096;

struct DysonTerm {
  int order = 0;
  SectorOperator value;
  double step = 0.0;   // quadrature step of the accepted grid
  double bound = 0.0;  // 2^l |t|^l / l! · ‖𝑽_n‖^l · ‖C‖
};

namespace detail {

// interaction picture 𝑽_n(s_j) = e^{is_jH₀}𝑽e^{−is_jH₀} on m+1 uniform nodes
inline std::vector<CMatrix> interaction_nodes(const EigenDecomposition& ed0, const CVector& vdiag,
                                              double t, int m) {
  const std::size_t dim = vdiag.size();
  CMatrix G(dim, dim);  // V₀† diag(v) V₀
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      cx s = 0.0;
      for (std::size_t k = 0; k < dim; ++k)
        s += std::conj(ed0.vectors(k, r)) * vdiag[k] * ed0.vectors(k, c);
      G(r, c) = s;
    }
  std::vector<CMatrix> nodes;
  nodes.reserve(m + 1);
  for (int j = 0; j <= m; ++j) {
    const double s = t * j / m;
    CMatrix W = G;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        W(r, c) *= std::polar(1.0, s * (ed0.eigenvalues[r] - ed0.eigenvalues[c]));
    nodes.push_back(mul(ed0.vectors, mul(W, dagger(ed0.vectors))));
  }
  return nodes;
}

// D_l(t) for l = 1..max_order by cumulative composite Simpson on the shared grid
inline std::vector<CMatrix> dyson_finals(const std::vector<CMatrix>& Vt, const CMatrix& C,
                                         double step, int max_order) {
  const std::size_t m = Vt.size() - 1;
  const std::size_t dim = C.rows;
  std::vector<CMatrix> cur(m + 1, C), F(m + 1), nxt(m + 1), finals;
  finals.reserve(max_order);
  for (int l = 1; l <= max_order; ++l) {
    for (std::size_t j = 0; j <= m; ++j) {
      CMatrix G = sub(mul(cur[j], Vt[j]), mul(Vt[j], cur[j]));
      for (auto& v : G.a) v *= cx(0.0, 1.0);  // δ(s)(B) = i[B, 𝑽(s)]
      F[j] = std::move(G);
    }
    nxt[0] = CMatrix(dim, dim);
    for (std::size_t j = 1; j <= m; ++j) {
      CMatrix I(dim, dim);
      if (j % 2 == 0) {
        I = nxt[j - 2];
        add_scaled_inplace(I, step / 3.0, F[j - 2]);
        add_scaled_inplace(I, 4.0 * step / 3.0, F[j - 1]);
        add_scaled_inplace(I, step / 3.0, F[j]);
      } else if (j == 1) {
        add_scaled_inplace(I, 5.0 * step / 12.0, F[0]);
        add_scaled_inplace(I, 8.0 * step / 12.0, F[1]);
        add_scaled_inplace(I, -step / 12.0, F[2]);
      } else {
        I = nxt[j - 1];
        add_scaled_inplace(I, -step / 12.0, F[j - 2]);
        add_scaled_inplace(I, 8.0 * step / 12.0, F[j - 1]);
        add_scaled_inplace(I, 5.0 * step / 12.0, F[j]);
      }
      nxt[j] = std::move(I);
    }
    std::swap(cur, nxt);
    finals.push_back(cur[m]);
  }
  return finals;
}

inline double factorial(int l) {
  double f = 1.0;
  for (int i = 2; i <= l; ++i) f *= i;
  return f;
}

}  // namespace detail

// all orders 1..max_order at once, with step doubling until the Cauchy gap
// across every order is below kDysonQuadTol·‖C‖ (node cap kDysonMaxNodes)
inline std::vector<DysonTerm> dyson_ladder(const FockBasis& b, const HamiltonianSpec& spec, int n,
                                           const SectorOperator& C, double t, int max_order,
                                           int steps = 64, double quad_tol = kDysonQuadTol) {
  validate(spec);
  if (max_order < 1) throw std::invalid_argument("dyson: order must be at least 1");
  if (steps < 4) throw std::invalid_argument("dyson: need at least 4 quadrature steps");
  if (!(quad_tol > 0.0)) throw std::invalid_argument("dyson: quadrature tolerance must be positive");
  if (C.n != n || C.block.rows != b.sector_dims[n])
    throw std::invalid_argument("dyson: seed operator is not an F_n block");
  HamiltonianSpec free_spec = spec;
  free_spec.potential = nullptr;
  const EigenDecomposition ed0 =
      hermitian_eig(sector_block(b, full_hamiltonian(free_spec, b).matrix, n));
  const CVector vdiag = interaction_diagonal(b, spec, n);
  double vnorm_n = 0.0;
  for (const auto& v : vdiag) vnorm_n = std::max(vnorm_n, std::abs(v));
  const double cnorm = operator_norm(C.block);
  const double tol = quad_tol * cnorm;

  int m = steps + (steps % 2);
  std::vector<CMatrix> finals =
      detail::dyson_finals(detail::interaction_nodes(ed0, vdiag, t, m), C.block, t / m, max_order);
  double gap = 0.0;
  while (true) {
    const int m2 = 2 * m;
    std::vector<CMatrix> refined = detail::dyson_finals(
        detail::interaction_nodes(ed0, vdiag, t, m2), C.block, t / m2, max_order);
    gap = 0.0;
    for (int l = 0; l < max_order; ++l)
      gap = std::max(gap, operator_norm(sub(refined[l], finals[l])));
    finals = std::move(refined);
    m = m2;
    if (gap <= tol) break;
    if (2 * m > kDysonMaxNodes)
      throw std::runtime_error("dyson quadrature did not converge: Cauchy gap " +
                               std::to_string(gap) + " at " + std::to_string(m) + " nodes");
  }

  std::vector<DysonTerm> terms;
  terms.reserve(max_order);
  for (int l = 1; l <= max_order; ++l)
    terms.push_back(DysonTerm{l, SectorOperator{n, std::move(finals[l - 1])}, t / m,
                              std::pow(2.0 * std::abs(t) * vnorm_n, l) / detail::factorial(l) *
                                  cnorm});
  return terms;
}

inline DysonTerm dyson_term(const FockBasis& b, const HamiltonianSpec& spec, int n,
                            const SectorOperator& C, double t, int order, int steps = 64) {
  std::vector<DysonTerm> terms = dyson_ladder(b, spec, n, C, t, order, steps);
  return std::move(terms.back());
}

struct DysonCocycle {
  SectorOperator value;
  double tail_bound = 0.0;  // Σ_{l>order} 2^l|t|^l/l!·‖𝑽_n‖^l·‖C‖
  double step = 0.0;
};

// C + Σ_{1≤l≤order} D_l(t), the order-truncated expansion of Ad(e^{itH₀}e^{−itH})
inline DysonCocycle dyson_cocycle(const FockBasis& b, const HamiltonianSpec& spec, int n,
                                  const SectorOperator& C, double t, int order, int steps = 64,
                                  double quad_tol = kDysonQuadTol) {
  CMatrix sum = C.block;
  double step = std::abs(t);
  double x = 0.0;  // 2|t|·‖𝑽_n‖ recovered from the bound ratio below
  if (order >= 1) {
    std::vector<DysonTerm> terms = dyson_ladder(b, spec, n, C, t, order, steps, quad_tol);
    for (const auto& term : terms) add_scaled_inplace(sum, 1.0, term.value.block);
    step = terms.back().step;
    if (terms[0].bound > 0.0 && operator_norm(C.block) > 0.0)
      x = terms[0].bound / operator_norm(C.block);
  } else {
    validate(spec);
    const CVector vdiag = interaction_diagonal(b, spec, n);
    double vnorm_n = 0.0;
    for (const auto& v : vdiag) vnorm_n = std::max(vnorm_n, std::abs(v));
    x = 2.0 * std::abs(t) * vnorm_n;
  }
  // tail: ‖C‖·Σ_{l>order} x^l/l! = ‖C‖·(e^x − Σ_{l≤order} x^l/l!)
  double partial = 0.0, pw = 1.0;
  for (int l = 0; l <= order; ++l) {
    partial += pw;
    pw *= x / (l + 1);
  }
  const double tail = operator_norm(C.block) * std::max(0.0, std::exp(x) - partial);
  return DysonCocycle{SectorOperator{n, std::move(sum)}, tail, step};
}

// e^{itH₀} e^{−itH} C e^{itH} e^{−itH₀}, the exact object the expansion approximates
inline SectorOperator exact_cocycle(const PropagatorCache& free_cache,
                                    const PropagatorCache& full_cache, const SectorOperator& C,
                                    double t) {
  return heisenberg_evolve(free_cache, heisenberg_evolve(full_cache, C, -t), t);
}

// --- interaction-picture pair potential in closed form ---

// V(c_L(s)·Q_rel + s_L(s)·P_rel) on the two-slot space, with c_L = cos(2s/L²),
// s_L = L²·sin(2s/L²) for finite trap and c = 1, s_∞ = 2s without a trap
inline CMatrix interaction_potential_t(const HamiltonianSpec& spec, double s) {
  validate(spec);
  const int d = spec.grid.d;
  if (!spec.potential) return CMatrix(static_cast<std::size_t>(d) * d, static_cast<std::size_t>(d) * d);
  double c = 1.0, sig = 2.0 * s;
  if (spec.trap_L) {
    const double L2 = *spec.trap_L * *spec.trap_L;
    c = std::cos(2.0 * s / L2);
    sig = L2 * std::sin(2.0 * s / L2);
  }
  const CMatrix Q = position_diag(spec.grid);
  const CMatrix P = momentum_dft(spec.grid);
  const CMatrix I = CMatrix::identity(d);
  CMatrix A = kron(Q, I);
  add_scaled_inplace(A, -1.0, kron(I, Q));
  for (auto& v : A.a) v *= c;
  add_scaled_inplace(A, sig, kron(P, I));
  add_scaled_inplace(A, -sig, kron(I, P));
  const auto& V = spec.potential;
  return matrix_function(A, [&](double x) { return cx(V(x)); });
}

// --- trapped closed-form kernel ---

inline cx mehler_kernel(double L, double tau, double x, double y) {
  if (L <= 0.0) throw std::invalid_argument("mehler_kernel: L must be positive");
  const double L2 = L * L;
  const double phase = 2.0 * tau / L2;
  if (std::abs(phase / kPi - std::round(phase / kPi)) < 1e-9)
    throw std::invalid_argument("mehler_kernel: singular at 2τ/L² = " + std::to_string(phase) +
                                " (multiple of π)");
  const double sn = std::sin(phase), cn = std::cos(phase);
  const cx pref = std::pow(cx(0.0, -2.0 * kPi * L2 * sn), -0.5);
  const double arg = ((x * x + y * y) * cn - 2.0 * x * y) / (2.0 * L2 * sn);
  return pref * std::exp(cx(0.0, -arg));
}

// sandwich comparison W e^{iτH_{1L}} W between the closed-form kernel (×h) and
// the spectral grid propagator; W = diag(w(x_j)) localizes away from the box edge
inline CheckReport mehler_check(const Grid& grid, double L, double tau,
                                const std::function<double(double)>& w, double tolerance = 5e-2) {
  Stopwatch watch;
  HamiltonianSpec spec{grid, nullptr, L, 0.0};
  const CMatrix U =
      matrix_function(one_particle_hamiltonian(spec), [&](double x) { return std::exp(cx(0.0, tau * x)); });
  double gap = 0.0;
  for (int j = 0; j < grid.d; ++j)
    for (int k = 0; k < grid.d; ++k) {
      const double wjk = w(grid.x(j)) * w(grid.x(k));
      if (wjk == 0.0) continue;
      const cx kernel = grid.h * mehler_kernel(L, tau, grid.x(j), grid.x(k));
      gap = std::max(gap, std::abs(wjk * (U(j, k) - kernel)));
    }
  CheckReport r = make_report("mehler", "closed-form trapped kernel matches the spectral propagator",
                              gap, 0.0, tolerance);
  r.parameters = {{"d", double(grid.d)}, {"h", grid.h}, {"L", L}, {"tau", tau}};
  r.runtime_ms = watch.ms();
  return r;
}

// --- trap removal ---

struct TrapRemoval {
  std::vector<double> Ls;
  std::vector<double> gaps;  // ‖α_L(t)(A) − α(t)(A)‖_n
  CheckReport report;
};

inline TrapRemoval trap_removal(const FockBasis& b, const HamiltonianSpec& untrapped,
                                const FullOperator& A, double t, int n,
                                const std::vector<double>& Ls) {
  Stopwatch watch;
  if (untrapped.trap_L) throw std::invalid_argument("trap_removal: reference spec must be untrapped");
  if (Ls.size() < 2) throw std::invalid_argument("trap_removal: need at least two trap lengths");
  PropagatorCache cache = build_propagator_cache(b, untrapped);
  const FullOperator limit = heisenberg_evolve(cache, A, t);
  TrapRemoval out;
  out.Ls = Ls;
  bool decreasing = true;
  for (const double L : Ls) {
    HamiltonianSpec trapped = untrapped;
    trapped.trap_L = L;
    PropagatorCache cl = build_propagator_cache(b, trapped);
    FullOperator evolved = heisenberg_evolve(cl, A, t);
    FullOperator diff = make_full(b, sub(evolved.matrix, limit.matrix));
    const double gap = seminorm(diff, n);
    if (!out.gaps.empty() && gap >= out.gaps.back()) decreasing = false;
    out.gaps.push_back(gap);
  }
  out.report = make_report("trap_removal", "trapped dynamics converges to untrapped dynamics on fixed sectors",
                           out.gaps.back(), 0.0, std::numeric_limits<double>::infinity());
  out.report.pass = decreasing;
  out.report.parameters = {{"t", t}, {"n", double(n)}};
  for (std::size_t i = 0; i < Ls.size(); ++i)
    out.report.parameters.push_back({"gap_L=" + std::to_string(Ls[i]), out.gaps[i]});
  out.report.runtime_ms = watch.ms();
  return out;
}

// --- asymptotic commutators ---

// ‖[α(t)(A translated by x cells), B]‖_n
inline double asymptotic_commutator(const PropagatorCache& cache, const FullOperator& A,
                                    const FullOperator& B, double t, int cells, int n) {
  detail::check_fresh(cache);
  const FockBasis& b = *cache.basis;
  if (std::abs(cells) > b.d / 2)
    throw std::invalid_argument("asymptotic_commutator: translation beyond half the ring");
  const FullOperator At = heisenberg_evolve(cache, translate_operator(b, A, cells), t);
  CMatrix M = sub(mul(At.matrix, B.matrix), mul(B.matrix, At.matrix));
  return seminorm(make_full(b, std::move(M)), n);
}

// --- free asymptotic observable formula ---

struct AsymptoticFormula {
  double lhs = 0.0;  // Σ_x h(x/t) ⟨ψ_t| A₁(x) |ψ_t⟩ · h_grid
  double rhs = 0.0;  // c_s Σ_p h(2p) · sens(p) · |ψ̃(p)|²
  double gap = 0.0;
};

// velocity-profile average of the evolved one-particle observable against the
// momentum-space sensitivity prediction; c_s is the frozen calibration constant
inline AsymptoticFormula free_asymptotic_observable(const FockBasis& b, const FullOperator& A0,
                                                    const std::function<double(double)>& profile,
                                                    double t, const WaveFn& psi,
                                                    double c_s = 2.0 * kPi) {
  if (t == 0.0) throw std::invalid_argument("free_asymptotic: scaling undefined at t = 0");
  if (psi.grid.d != b.d || b.N_max < 1)
    throw std::invalid_argument("free_asymptotic: need a matching basis with at least one particle");
  const int d = b.d;
  const double h = psi.grid.h;
  // vacuum-part subtraction on the one-particle block
  CMatrix A1 = sector_block(b, A0.matrix, 1);
  const cx vac = A0.matrix(0, 0);
  for (int j = 0; j < d; ++j) A1(j, j) -= vac;

  // exact free evolution in the discrete momentum basis; u holds mode coordinates
  CVector u = mode_vector(psi);
  std::vector<double> p(d), eps(d);
  for (int m = 0; m < d; ++m) {
    const int kt = (m < (d + 1) / 2) ? m : m - d;
    p[m] = 2.0 * kPi * kt / (d * h);
    eps[m] = (2.0 - 2.0 * std::cos(p[m] * h)) / (h * h);
  }
  CVector tilde(d), ut(d, cx(0.0));
  const double rd = 1.0 / std::sqrt(static_cast<double>(d));
  for (int m = 0; m < d; ++m) {
    cx s = 0.0;
    for (int j = 0; j < d; ++j) s += std::conj(std::polar(rd, p[m] * psi.grid.x(j))) * u[j];
    tilde[m] = s;
  }
  for (int j = 0; j < d; ++j) {
    cx s = 0.0;
    for (int m = 0; m < d; ++m)
      s += tilde[m] * std::polar(1.0, -t * eps[m]) * std::polar(rd, p[m] * psi.grid.x(j));
    ut[j] = s;
  }

  AsymptoticFormula out;
  for (int c = 0; c < d; ++c) {
    const int ct = (c < (d + 1) / 2) ? c : c - d;  // signed displacement
    const double weight = profile(ct * h / t);
    if (weight == 0.0) continue;
    cx e = 0.0;
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s)
        e += std::conj(ut[(r + c) % d]) * A1(r, s) * ut[(s + c) % d];
    out.lhs += weight * std::real(e) * h;
  }
  for (int m = 0; m < d; ++m) {
    const double weight = profile(2.0 * p[m]);
    if (weight == 0.0) continue;
    cx sens = 0.0;
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s)
        sens += std::conj(std::polar(rd, p[m] * psi.grid.x(r))) * A1(r, s) *
                std::polar(rd, p[m] * psi.grid.x(s));
    out.rhs += weight * (d * h / (2.0 * kPi)) * std::real(sens) * std::norm(tilde[m]) * c_s;
  }
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

// --- time-averaged interaction compactness profile ---

struct PotentialProfile {
  std::vector<double> cutoffs;
  std::vector<double> averaged;   // ‖(∫₀ᵗ V(s) ds) P_{|p_rel|≥p_c}‖
  double instantaneous = 0.0;     // ‖V(0) P‖ at the top cutoff
};

inline PotentialProfile averaged_potential_profile(const HamiltonianSpec& spec, double t,
                                                   const std::vector<double>& cutoffs,
                                                   int steps = 64) {
  validate(spec);
  if (cutoffs.empty()) throw std::invalid_argument("averaged_potential_profile: no cutoffs");
  const int d = spec.grid.d;
  const std::size_t dim = static_cast<std::size_t>(d) * d;
  int m = steps + (steps % 2);
  if (m < 4) m = 4;
  CMatrix avg(dim, dim);
  if (t != 0.0) {
    const double step = t / m;
    for (int j = 0; j <= m; ++j) {
      const double w = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      add_scaled_inplace(avg, w * step / 3.0, interaction_potential_t(spec, step * j));
    }
  }
  const CMatrix P = momentum_dft(spec.grid);
  const CMatrix I = CMatrix::identity(d);
  CMatrix Prel = kron(P, I);
  add_scaled_inplace(Prel, -1.0, kron(I, P));
  const EigenDecomposition ed = hermitian_eig(Prel);
  PotentialProfile out;
  out.cutoffs = cutoffs;
  for (const double pc : cutoffs) {
    CMatrix proj(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        cx s = 0.0;
        for (std::size_t k = 0; k < dim; ++k)
          if (std::abs(ed.eigenvalues[k]) >= pc - 1e-12)
            s += ed.vectors(i, k) * std::conj(ed.vectors(j, k));
        proj(i, j) = s;
      }
    out.averaged.push_back(operator_norm(mul(avg, proj)));
    if (pc == cutoffs.back())
      out.instantaneous = operator_norm(mul(interaction_potential_t(spec, 0.0), proj));
  }
  return out;
}

}  // namespace bosekit
