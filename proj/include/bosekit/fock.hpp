#pragma once

// Truncated bosonic Fock space over d site modes: occupation-number basis,
// creation/annihilation/field/number operators (dense and matrix-free),
// symmetrizer, symmetric tensor embeddings, product states.

#include <cstdint>
#include <cstring>
#include <limits>

#include "bosekit/lattice.hpp"
#include "bosekit/numkit.hpp"

namespace bosekit {

inline constexpr std::size_t kDefaultBudget = 512ull << 20;  // bytes for one dense full-space matrix

struct FockBasis {
  int d = 1;
  int N_max = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> sector_dims;     // n = 0..N_max
  std::vector<std::size_t> sector_offsets;  // start index of each sector
  std::vector<std::uint8_t> occs;           // dim × d occupation vectors, contiguous
  std::size_t memory_budget = kDefaultBudget;

  const std::uint8_t* occ(std::size_t idx) const { return &occs[idx * d]; }

  int sector_of(std::size_t idx) const {
    int n = 0;
    while (n + 1 <= N_max && idx >= sector_offsets[n + 1]) ++n;
    return n;
  }

  // index of an occupation vector (entries sum to some n ≤ N_max)
  std::size_t index_of(const std::uint8_t* o) const {
    int n = 0;
    for (int j = 0; j < d; ++j) n += o[j];
    const std::size_t lo = sector_offsets[n], hi = lo + sector_dims[n];
    // occupations are stored in descending lexicographic (reverse-lex) order
    std::size_t a = lo, b = hi;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (std::memcmp(occ(mid), o, d) > 0)
        a = mid + 1;
      else
        b = mid;
    }
    if (a >= hi || std::memcmp(occ(a), o, d) != 0) throw std::logic_error("index_of: occupation not found");
    return a;
  }
};

namespace detail {
inline void enumerate_sector(std::vector<std::uint8_t>& out, std::vector<std::uint8_t>& cur, int d, int slot, int left) {
  if (slot == d - 1) {
    cur[slot] = static_cast<std::uint8_t>(left);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int k = left; k >= 0; --k) {
    cur[slot] = static_cast<std::uint8_t>(k);
    enumerate_sector(out, cur, d, slot + 1, left - k);
  }
}
}  // namespace detail

inline FockBasis enumerate_basis(int d, int N_max, std::size_t memory_budget = kDefaultBudget) {
  if (d < 1 || N_max < 0) throw std::invalid_argument("enumerate_basis: need d >= 1, N_max >= 0");
  FockBasis b;
  b.d = d;
  b.N_max = N_max;
  b.memory_budget = memory_budget;
  b.sector_offsets.push_back(0);
  std::vector<std::uint8_t> cur(d);
  for (int n = 0; n <= N_max; ++n) {
    const std::size_t before = b.occs.size() / d;
    detail::enumerate_sector(b.occs, cur, d, 0, n);
    const std::size_t dim_n = b.occs.size() / d - before;
    b.sector_dims.push_back(dim_n);
    b.sector_offsets.push_back(before + dim_n);
  }
  b.dim = b.occs.size() / d;
  const std::size_t bytes = 16ull * b.dim * b.dim;
  if (bytes > memory_budget)
    throw std::invalid_argument("enumerate_basis: dense operator needs " + std::to_string(bytes) +
                                " bytes, budget " + std::to_string(memory_budget));
  return b;
}

struct FullOperator {
  const FockBasis* basis = nullptr;
  CMatrix matrix;
  bool conserves_N = false;
};

struct SectorOperator {
  int n = 0;
  CMatrix block;
};

inline bool scan_conserves_N(const FockBasis& b, const CMatrix& M, double tol = 1e-14) {
  for (std::size_t i = 0; i < b.dim; ++i)
    for (std::size_t j = 0; j < b.dim; ++j)
      if (b.sector_of(i) != b.sector_of(j) && std::abs(M(i, j)) > tol) return false;
  return true;
}

inline FullOperator make_full(const FockBasis& b, CMatrix M) {
  if (M.rows != b.dim || M.cols != b.dim) throw std::invalid_argument("make_full: dimension mismatch");
  FullOperator op{&b, std::move(M), false};
  op.conserves_N = scan_conserves_N(b, op.matrix);
  return op;
}

inline CMatrix sector_block(const FockBasis& b, const CMatrix& M, int n) {
  if (n < 0 || n > b.N_max) throw std::invalid_argument("sector_block: sector out of range");
  const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
  CMatrix B(sz, sz);
  for (std::size_t i = 0; i < sz; ++i)
    for (std::size_t j = 0; j < sz; ++j) B(i, j) = M(off + i, off + j);
  return B;
}

// mode amplitudes u_j = √h · f_j, so that Σ conj(u) v = ⟨f, g⟩
inline CVector mode_vector(const WaveFn& f) {
  CVector u = f.amps;
  const double s = std::sqrt(f.grid.h);
  for (auto& v : u) v *= s;
  return u;
}

// --- matrix-free applications ---

inline CVector apply_creation_modes(const FockBasis& b, const CVector& u, const CVector& v) {
  if (u.size() != static_cast<std::size_t>(b.d) || v.size() != b.dim)
    throw std::invalid_argument("apply_creation: dimension mismatch");
  CVector out(b.dim, cx(0.0));
  std::vector<std::uint8_t> tmp(b.d);
  for (int n = 0; n < b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    for (std::size_t i = off; i < off + sz; ++i) {
      if (v[i] == cx(0.0)) continue;
      const std::uint8_t* o = b.occ(i);
      std::memcpy(tmp.data(), o, b.d);
      for (int j = 0; j < b.d; ++j) {
        if (u[j] == cx(0.0)) continue;
        tmp[j] = static_cast<std::uint8_t>(o[j] + 1);
        out[b.index_of(tmp.data())] += u[j] * std::sqrt(static_cast<double>(o[j] + 1)) * v[i];
        tmp[j] = o[j];
      }
    }
  }
  return out;
}

inline CVector apply_annihilation_modes(const FockBasis& b, const CVector& u, const CVector& v) {
  if (u.size() != static_cast<std::size_t>(b.d) || v.size() != b.dim)
    throw std::invalid_argument("apply_annihilation: dimension mismatch");
  CVector out(b.dim, cx(0.0));
  std::vector<std::uint8_t> tmp(b.d);
  for (int n = 1; n <= b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    for (std::size_t i = off; i < off + sz; ++i) {
      if (v[i] == cx(0.0)) continue;
      const std::uint8_t* o = b.occ(i);
      std::memcpy(tmp.data(), o, b.d);
      for (int j = 0; j < b.d; ++j) {
        if (o[j] == 0 || u[j] == cx(0.0)) continue;
        tmp[j] = static_cast<std::uint8_t>(o[j] - 1);
        out[b.index_of(tmp.data())] += std::conj(u[j]) * std::sqrt(static_cast<double>(o[j])) * v[i];
        tmp[j] = o[j];
      }
    }
  }
  return out;
}

inline CVector apply_field_modes(const FockBasis& b, const CVector& u, const CVector& v) {
  CVector out = apply_creation_modes(b, u, v);
  CVector an = apply_annihilation_modes(b, u, v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += an[i];
  return out;
}

// --- dense operators ---

inline FullOperator creation(const FockBasis& b, const WaveFn& f) {
  if (f.grid.d != b.d) throw std::invalid_argument("creation: mode count mismatch");
  const CVector u = mode_vector(f);
  CMatrix M(b.dim, b.dim);
  std::vector<std::uint8_t> tmp(b.d);
  for (int n = 0; n < b.N_max; ++n) {
    const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
    for (std::size_t i = off; i < off + sz; ++i) {
      const std::uint8_t* o = b.occ(i);
      std::memcpy(tmp.data(), o, b.d);
      for (int j = 0; j < b.d; ++j) {
        if (u[j] == cx(0.0)) continue;
        tmp[j] = static_cast<std::uint8_t>(o[j] + 1);
        M(b.index_of(tmp.data()), i) += u[j] * std::sqrt(static_cast<double>(o[j] + 1));
        tmp[j] = o[j];
      }
    }
  }
  return FullOperator{&b, std::move(M), false};
}

inline FullOperator annihilation(const FockBasis& b, const WaveFn& f) {
  FullOperator c = creation(b, f);
  return FullOperator{&b, dagger(c.matrix), false};
}

inline FullOperator field(const FockBasis& b, const WaveFn& f) {
  FullOperator c = creation(b, f);
  return FullOperator{&b, add(c.matrix, dagger(c.matrix)), false};
}

// N(f) = a*(f̂) a(f̂) for the normalized direction f̂ of f
inline FullOperator number_mode(const FockBasis& b, const WaveFn& f) {
  if (norm(f) == 0.0) throw std::invalid_argument("number_mode: zero wave function");
  const WaveFn fn = normalized(f);
  FullOperator c = creation(b, fn);
  return FullOperator{&b, mul(c.matrix, dagger(c.matrix)), true};
}

// global particle-number operator N = Σ_j a*_j a_j
inline FullOperator number_full(const FockBasis& b) {
  CMatrix M(b.dim, b.dim);
  for (std::size_t i = 0; i < b.dim; ++i) M(i, i) = static_cast<double>(b.sector_of(i));
  return FullOperator{&b, std::move(M), true};
}

// e^{isN}, diagonal gauge unitary
inline FullOperator gauge_unitary(const FockBasis& b, double s) {
  CMatrix M(b.dim, b.dim);
  for (std::size_t i = 0; i < b.dim; ++i) M(i, i) = std::exp(cx(0.0, s * b.sector_of(i)));
  return FullOperator{&b, std::move(M), true};
}

inline CVector vacuum_state(const FockBasis& b) {
  CVector v(b.dim, cx(0.0));
  v[0] = 1.0;
  return v;
}

// mode-permutation unitary of a cyclic grid translation: occupations are shifted
inline CVector translate_state(const FockBasis& b, const CVector& v, int cells) {
  CVector out(b.dim, cx(0.0));
  std::vector<std::uint8_t> tmp(b.d);
  for (std::size_t i = 0; i < b.dim; ++i) {
    if (v[i] == cx(0.0)) continue;
    const std::uint8_t* o = b.occ(i);
    for (int j = 0; j < b.d; ++j) tmp[((j + cells) % b.d + b.d) % b.d] = o[j];
    out[b.index_of(tmp.data())] += v[i];
  }
  return out;
}

inline FullOperator translate_operator(const FockBasis& b, const FullOperator& A, int cells) {
  // T_x A T_x† with the permutation unitary T_x: entry (T A T†)(Ti, Tj) = A(i, j)
  std::vector<std::size_t> perm(b.dim);
  std::vector<std::uint8_t> tmp(b.d);
  for (std::size_t i = 0; i < b.dim; ++i) {
    const std::uint8_t* o = b.occ(i);
    for (int j = 0; j < b.d; ++j) tmp[((j + cells) % b.d + b.d) % b.d] = o[j];
    perm[i] = b.index_of(tmp.data());
  }
  CMatrix M(b.dim, b.dim);
  for (std::size_t i = 0; i < b.dim; ++i)
    for (std::size_t j = 0; j < b.dim; ++j) M(perm[i], perm[j]) = A.matrix(i, j);
  return FullOperator{&b, std::move(M), A.conserves_N};
}

// --- symmetrizer and symmetric embeddings ---

// isometry S: F_n → (C^d)^{⊗n}, columns indexed by occupations
inline CMatrix symmetrizer(int d, int n, std::size_t memory_budget = kDefaultBudget) {
  if (n == 0) return CMatrix::identity(1);
  std::size_t tdim = 1;
  for (int i = 0; i < n; ++i) {
    tdim *= static_cast<std::size_t>(d);
    if (tdim > (1u << 24)) throw std::invalid_argument("symmetrizer: tensor space too large");
  }
  const FockBasis sb = enumerate_basis(d, n, std::numeric_limits<std::size_t>::max());
  const std::size_t fdim = sb.sector_dims[n];
  if (16ull * tdim * fdim > memory_budget)
    throw std::invalid_argument("symmetrizer: needs " + std::to_string(16ull * tdim * fdim) + " bytes");
  CMatrix S(tdim, fdim);
  std::vector<std::uint8_t> occv(d);
  std::vector<int> word(n);
  std::vector<double> colnorm(fdim);
  // log-factorials for √(Πν_j! / n!)
  std::vector<double> lf(n + 1, 0.0);
  for (int i = 2; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
  for (std::size_t col = 0; col < fdim; ++col) {
    const std::uint8_t* o = sb.occ(sb.sector_offsets[n] + col);
    double s = -lf[n];
    for (int j = 0; j < d; ++j) s += lf[o[j]];
    colnorm[col] = std::exp(0.5 * s);
  }
  for (std::size_t t = 0; t < tdim; ++t) {
    std::size_t rem = t;
    std::fill(occv.begin(), occv.end(), 0);
    for (int i = n - 1; i >= 0; --i) {
      word[i] = static_cast<int>(rem % d);
      rem /= d;
      ++occv[word[i]];
    }
    const std::size_t col = sb.index_of(occv.data()) - sb.sector_offsets[n];
    S(t, col) = colnorm[col];
  }
  return S;
}

// C ⊗_s 1^{⊗(n−m)} on F_n by symmetrizer compression of factors[0]⊗…⊗factors[m−1]⊗1…
// (the n!-fold permutation average is implied: S† U(π) = S† for every permutation unitary)
inline CMatrix symmetric_embed_factors(int d, int n, const std::vector<CMatrix>& factors,
                                       std::size_t memory_budget = kDefaultBudget) {
  const int m = static_cast<int>(factors.size());
  if (m > n) throw std::invalid_argument("symmetric_embed: more factors than slots");
  for (const auto& F : factors)
    if (F.rows != static_cast<std::size_t>(d) || F.cols != static_cast<std::size_t>(d))
      throw std::invalid_argument("symmetric_embed: factor must be d×d");
  if (n == 0) return CMatrix::identity(1);
  CMatrix X = (m > 0) ? factors[0] : CMatrix::identity(d);
  for (int i = 1; i < n; ++i) X = kron(X, i < m ? factors[i] : CMatrix::identity(d));
  const CMatrix S = symmetrizer(d, n, memory_budget);
  return mul(dagger(S), mul(X, S));
}

inline CMatrix symmetric_embed_block(int d, int n, int m, const CMatrix& C,
                                     std::size_t memory_budget = kDefaultBudget) {
  if (m > n) throw std::invalid_argument("symmetric_embed: m > n");
  if (m == 0) {
    const FockBasis sb = enumerate_basis(d, n, std::numeric_limits<std::size_t>::max());
    return scale(C(0, 0), CMatrix::identity(sb.sector_dims[n]));
  }
  const CMatrix Sm = symmetrizer(d, m, memory_budget);
  CMatrix X = mul(Sm, mul(C, dagger(Sm)));  // lift block to the m-fold tensor space
  for (int i = m; i < n; ++i) X = kron(X, CMatrix::identity(d));
  const CMatrix Sn = symmetrizer(d, n, memory_budget);
  return mul(dagger(Sn), mul(X, Sn));
}

// dΓ(C) restricted to sector n, built from occupation rules (any d)
inline CMatrix dgamma_sector(const FockBasis& b, const CMatrix& C, int n) {
  if (C.rows != static_cast<std::size_t>(b.d)) throw std::invalid_argument("dgamma_sector: C must be d×d");
  const std::size_t off = b.sector_offsets[n], sz = b.sector_dims[n];
  CMatrix M(sz, sz);
  std::vector<std::uint8_t> tmp(b.d);
  for (std::size_t i = 0; i < sz; ++i) {
    const std::uint8_t* o = b.occ(off + i);
    cx diag = 0.0;
    for (int j = 0; j < b.d; ++j)
      if (o[j] > 0) diag += C(j, j) * static_cast<double>(o[j]);
    M(i, i) += diag;
    std::memcpy(tmp.data(), o, b.d);
    for (int s = 0; s < b.d; ++s) {
      if (o[s] == 0) continue;
      for (int r = 0; r < b.d; ++r) {
        if (r == s || C(r, s) == cx(0.0)) continue;
        tmp[s] = static_cast<std::uint8_t>(o[s] - 1);
        tmp[r] = static_cast<std::uint8_t>(o[r] + 1);
        const std::size_t k = b.index_of(tmp.data()) - off;
        M(k, i) += C(r, s) * std::sqrt(static_cast<double>(o[s]) * (o[r] + 1.0));
        tmp[s] = o[s];
        tmp[r] = o[r];
      }
    }
  }
  return M;
}

// fast embeds via second quantization: m=1: dΓ(C)/n ; m=2: (dΓ(B)dΓ(C) − dΓ(BC))/(n(n−1))
inline CMatrix symmetric_embed_fast(const FockBasis& b, int n, const std::vector<CMatrix>& factors) {
  const int m = static_cast<int>(factors.size());
  if (n > b.N_max) throw std::invalid_argument("symmetric_embed_fast: sector out of range");
  if (m > n) throw std::invalid_argument("symmetric_embed_fast: more factors than slots");
  if (m == 0) return CMatrix::identity(b.sector_dims[n]);
  if (m == 1) return scale(1.0 / n, dgamma_sector(b, factors[0], n));
  if (m == 2) {
    const CMatrix dB = dgamma_sector(b, factors[0], n);
    const CMatrix dC = dgamma_sector(b, factors[1], n);
    const CMatrix dBC = dgamma_sector(b, mul(factors[0], factors[1]), n);
    return scale(1.0 / (static_cast<double>(n) * (n - 1)), sub(mul(dB, dC), dBC));
  }
  throw std::invalid_argument("symmetric_embed_fast: only m <= 2 supported");
}

// |f₁⟩ ⊗_s … ⊗_s |f_n⟩ = (1/n!)^{1/2} a*(f₁)…a*(f_n) Ω, as a full-space vector
inline CVector product_state(const FockBasis& b, const std::vector<WaveFn>& fs) {
  const int n = static_cast<int>(fs.size());
  if (n > b.N_max) throw std::invalid_argument("product_state: more factors than the cutoff");
  CVector v = vacuum_state(b);
  for (int i = n - 1; i >= 0; --i) v = apply_creation_modes(b, mode_vector(fs[i]), v);
  double lf = 0.0;
  for (int i = 2; i <= n; ++i) lf += std::log(static_cast<double>(i));
  vscale(std::exp(-0.5 * lf), v);
  return v;
}

}  // namespace bosekit
