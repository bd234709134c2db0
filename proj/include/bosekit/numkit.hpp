#pragma once

// Dense complex linear-algebra kernels: matrices, cyclic Jacobi Hermitian
// eigensolver, spectral functional calculus, shifted linear solves, norms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bosekit {

using cx = std::complex<double>;

struct CMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<cx> a;  // row-major

  CMatrix() = default;
  CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  cx& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const cx& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline CMatrix add(const CMatrix& A, const CMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("add: shape mismatch");
  CMatrix C = A;
  for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
  return C;
}

inline CMatrix sub(const CMatrix& A, const CMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("sub: shape mismatch");
  CMatrix C = A;
  for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
  return C;
}

inline CMatrix scale(cx s, const CMatrix& A) {
  CMatrix C = A;
  for (auto& v : C.a) v *= s;
  return C;
}

inline void add_scaled_inplace(CMatrix& A, cx s, const CMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < A.a.size(); ++i) A.a[i] += s * B.a[i];
}

inline CMatrix mul(const CMatrix& A, const CMatrix& B) {
  if (A.cols != B.rows) throw std::invalid_argument("mul: shape mismatch");
  CMatrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    cx* crow = &C.a[i * C.cols];
    for (std::size_t k = 0; k < A.cols; ++k) {
      const cx aik = A(i, k);
      if (aik == cx(0.0)) continue;
      const cx* brow = &B.a[k * B.cols];
      for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return C;
}

inline CMatrix dagger(const CMatrix& A) {
  CMatrix C(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) C(j, i) = std::conj(A(i, j));
  return C;
}

inline cx trace(const CMatrix& A) {
  cx t = 0.0;
  for (std::size_t i = 0; i < std::min(A.rows, A.cols); ++i) t += A(i, i);
  return t;
}

inline double max_abs(const CMatrix& A) {
  double m = 0.0;
  for (const auto& v : A.a) m = std::max(m, std::abs(v));
  return m;
}

inline double frobenius(const CMatrix& A) {
  double s = 0.0;
  for (const auto& v : A.a) s += std::norm(v);
  return std::sqrt(s);
}

inline CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix C(A.rows * B.rows, A.cols * B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) {
      const cx aij = A(i, j);
      if (aij == cx(0.0)) continue;
      for (std::size_t k = 0; k < B.rows; ++k)
        for (std::size_t l = 0; l < B.cols; ++l)
          C(i * B.rows + k, j * B.cols + l) = aij * B(k, l);
    }
  return C;
}

// --- vectors ---

using CVector = std::vector<cx>;

inline cx vdot(const CVector& x, const CVector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("vdot: length mismatch");
  cx s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

inline double vnorm(const CVector& x) { return std::sqrt(std::real(vdot(x, x))); }

inline void vaxpy(cx a, const CVector& x, CVector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void vscale(cx a, CVector& x) {
  for (auto& v : x) v *= a;
}

inline CVector mul_vec(const CMatrix& A, const CVector& v) {
  if (A.cols != v.size()) throw std::invalid_argument("mul_vec: shape mismatch");
  CVector w(A.rows, cx(0.0));
  for (std::size_t i = 0; i < A.rows; ++i) {
    const cx* row = &A.a[i * A.cols];
    cx s = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) s += row[j] * v[j];
    w[i] = s;
  }
  return w;
}

// --- deterministic RNG (portable across platforms: fixed bit mapping) ---

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  double sym() { return 2.0 * uniform() - 1.0; }
  cx scomplex() { return {sym(), sym()}; }
};

inline CMatrix random_hermitian(Rng& rng, std::size_t n) {
  CMatrix M(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    M(i, i) = rng.sym();
    for (std::size_t j = i + 1; j < n; ++j) {
      M(i, j) = rng.scomplex();
      M(j, i) = std::conj(M(i, j));
    }
  }
  return M;
}

// --- Hermitian eigensolver (cyclic Jacobi) ---

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  CMatrix vectors;                  // columns are eigenvectors
};

inline double hermiticity_defect(const CMatrix& M) {
  double defect = 0.0;
  for (std::size_t i = 0; i < M.rows; ++i)
    for (std::size_t j = 0; j < M.cols; ++j)
      defect = std::max(defect, std::abs(M(i, j) - std::conj(M(j, i))));
  return defect;
}

struct EigOptions {
  double herm_tol = 1e-12;
  double conv_factor = 1e-14;  // off-diagonal Frobenius threshold vs input Frobenius
  int max_sweeps = 100;
};

inline EigenDecomposition hermitian_eig(const CMatrix& M, const EigOptions& opt = {}) {
  if (M.rows != M.cols || M.rows == 0) throw std::invalid_argument("hermitian_eig: need square nonempty matrix");
  const std::size_t n = M.rows;
  const double defect = hermiticity_defect(M);
  if (defect > opt.herm_tol * std::max(1.0, max_abs(M)))
    throw std::invalid_argument("hermitian_eig: input not Hermitian, max asymmetry " + std::to_string(defect));

  CMatrix A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = 0.5 * (M(i, j) + std::conj(M(j, i)));
  CMatrix V = CMatrix::identity(n);

  const double fro = frobenius(A);
  const double target = opt.conv_factor * std::max(fro, 1e-300);

  auto off_mass = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(A(i, j));
    return std::sqrt(s);
  };

  double off = off_mass();
  int sweep = 0;
  while (off > target && sweep < opt.max_sweeps) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cx apq = A(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        const cx phase = apq / r;
        const double app = std::real(A(p, p));
        const double aqq = std::real(A(q, q));
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau == 0.0) ? 1.0 : ((tau > 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau)));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cx se = s * phase;          // s·e^{iφ}
        const cx sec = s * std::conj(phase);

        // rows: new_p = c·row_p − s e^{iφ}·row_q ; new_q = s e^{−iφ}·row_p + c·row_q
        for (std::size_t j = 0; j < n; ++j) {
          const cx xp = A(p, j), xq = A(q, j);
          A(p, j) = c * xp - se * xq;
          A(q, j) = sec * xp + c * xq;
        }
        // cols: new_p = c·col_p − s e^{−iφ}·col_q ; new_q = s e^{iφ}·col_p + c·col_q
        for (std::size_t i = 0; i < n; ++i) {
          const cx xp = A(i, p), xq = A(i, q);
          A(i, p) = c * xp - sec * xq;
          A(i, q) = se * xp + c * xq;
          const cx vp = V(i, p), vq = V(i, q);
          V(i, p) = c * vp - sec * vq;
          V(i, q) = se * vp + c * vq;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        A(p, p) = cx(std::real(A(p, p)), 0.0);
        A(q, q) = cx(std::real(A(q, q)), 0.0);
      }
    }
    off = off_mass();
    ++sweep;
  }
  if (off > target)
    throw std::runtime_error("hermitian_eig: no convergence after " + std::to_string(opt.max_sweeps) +
                             " sweeps, off-diagonal residual " + std::to_string(off));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = std::real(A(i, i));
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });

  EigenDecomposition ed;
  ed.eigenvalues.resize(n);
  ed.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    ed.eigenvalues[k] = diag[idx[k]];
    for (std::size_t i = 0; i < n; ++i) ed.vectors(i, k) = V(i, idx[k]);
  }
  return ed;
}

// U g(Λ) U† for Hermitian input.
inline CMatrix matrix_function(const CMatrix& M, const std::function<cx(double)>& g, const EigOptions& opt = {}) {
  const EigenDecomposition ed = hermitian_eig(M, opt);
  const std::size_t n = M.rows;
  std::vector<cx> gl(n);
  for (std::size_t k = 0; k < n; ++k) {
    gl[k] = g(ed.eigenvalues[k]);
    if (!std::isfinite(std::real(gl[k])) || !std::isfinite(std::imag(gl[k])))
      throw std::domain_error("matrix_function: g singular at eigenvalue " + std::to_string(ed.eigenvalues[k]));
  }
  CMatrix W = ed.vectors;  // W = U·diag(g)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) W(i, k) *= gl[k];
  return mul(W, dagger(ed.vectors));
}

// Solve (iλ·1 + M) X = B by LU with partial pivoting (forward elimination applied to B eagerly).
inline CMatrix solve_shifted(const CMatrix& M, double lambda, const CMatrix& B) {
  if (lambda == 0.0) throw std::invalid_argument("solve_shifted: lambda must be nonzero");
  if (M.rows != M.cols || M.rows != B.rows) throw std::invalid_argument("solve_shifted: shape mismatch");
  const std::size_t n = M.rows;
  CMatrix A = M;
  for (std::size_t i = 0; i < n; ++i) A(i, i) += cx(0.0, lambda);
  CMatrix X = B;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t imax = k;
    double vmax = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(A(i, k));
      if (v > vmax) { vmax = v; imax = i; }
    }
    if (vmax == 0.0) throw std::runtime_error("solve_shifted: singular matrix");
    if (imax != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(imax, j));
      for (std::size_t j = 0; j < X.cols; ++j) std::swap(X(k, j), X(imax, j));
    }
    const cx pivot = A(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const cx m = A(i, k) / pivot;
      if (m == cx(0.0)) continue;
      A(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= m * A(k, j);
      for (std::size_t j = 0; j < X.cols; ++j) X(i, j) -= m * X(k, j);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < X.cols; ++j) {
      cx s = X(k, j);
      for (std::size_t i = k + 1; i < n; ++i) s -= A(k, i) * X(i, j);
      X(k, j) = s / A(k, k);
    }
  }
  return X;
}

// Largest singular value via the top eigenvalue of M†M.
inline double operator_norm(const CMatrix& M, const EigOptions& opt = {}) {
  if (M.rows == 0 || M.cols == 0) return 0.0;
  const CMatrix G = mul(dagger(M), M);
  const EigenDecomposition ed = hermitian_eig(G, opt);
  return std::sqrt(std::max(0.0, ed.eigenvalues.back()));
}

}  // namespace bosekit
