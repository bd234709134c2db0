#pragma once

// One-dimensional grid discretization of the single-particle space:
// position/momentum operators, wave packets, translations, pair-potential tables.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "bosekit/numkit.hpp"

namespace bosekit {

inline constexpr double kPi = 3.14159265358979323846;

struct Grid {
  int d = 2;          // number of points
  double h = 1.0;     // spacing
  bool periodic = true;
  int sdim = 1;       // spatial dimension (fixed to 1; kept as a field for format stability)

  Grid() = default;
  Grid(int d_, double h_, bool periodic_ = true) : d(d_), h(h_), periodic(periodic_) {
    if (d < 2 || h <= 0.0) throw std::invalid_argument("Grid: need d >= 2 and h > 0");
  }
  double x(int j) const { return (j - d / 2) * h; }
  double length() const { return d * h; }
  // signed separation with minimal-image convention on periodic grids
  double separation(double r) const {
    if (!periodic) return r;
    const double L = length();
    r = std::fmod(r, L);
    if (r >= 0.5 * L) r -= L;
    if (r < -0.5 * L) r += L;
    return r;
  }
};

struct WaveFn {
  Grid grid;
  CVector amps;  // length grid.d

  WaveFn() = default;
  WaveFn(const Grid& g, CVector a) : grid(g), amps(std::move(a)) {
    if (static_cast<int>(amps.size()) != grid.d) throw std::invalid_argument("WaveFn: length mismatch");
  }
};

// ⟨f,g⟩ = h·Σ conj(f_j) g_j
inline cx inner(const WaveFn& f, const WaveFn& g) {
  if (f.grid.d != g.grid.d) throw std::invalid_argument("inner: grid mismatch");
  return f.grid.h * vdot(f.amps, g.amps);
}

inline double norm(const WaveFn& f) { return std::sqrt(std::real(inner(f, f))); }

inline WaveFn normalized(WaveFn f) {
  const double n = norm(f);
  if (n == 0.0) throw std::invalid_argument("normalized: zero wave function");
  vscale(1.0 / n, f.amps);
  return f;
}

// 3-point stencil (2f_j − f_{j+1} − f_{j−1})/h², realizing P² = −Δ.
inline CMatrix laplacian(const Grid& grid) {
  const int d = grid.d;
  const double w = 1.0 / (grid.h * grid.h);
  CMatrix L(d, d);
  for (int j = 0; j < d; ++j) {
    L(j, j) = 2.0 * w;
    if (j + 1 < d) { L(j, j + 1) = -w; L(j + 1, j) = -w; }
  }
  if (grid.periodic) { L(0, d - 1) -= w; L(d - 1, 0) -= w; }
  return L;
}

inline CMatrix position_diag(const Grid& grid) {
  CMatrix Q(grid.d, grid.d);
  for (int j = 0; j < grid.d; ++j) Q(j, j) = grid.x(j);
  return Q;
}

// Central-difference momentum −i∂ (Hermitian; used for expectation checks).
inline CMatrix momentum_fd(const Grid& grid) {
  const int d = grid.d;
  const cx w = cx(0.0, -1.0) / (2.0 * grid.h);
  CMatrix P(d, d);
  for (int j = 0; j < d; ++j) {
    const int jp = (j + 1) % d, jm = (j + d - 1) % d;
    if (grid.periodic || j + 1 < d) P(j, jp) += w;
    if (grid.periodic || j > 0) P(j, jm) -= w;
  }
  return P;
}

// Exact periodic momentum: DFT-diagonal with eigenvalues 2π k̃/(d·h), k̃ ∈ [−d/2, d/2).
inline CMatrix momentum_dft(const Grid& grid) {
  if (!grid.periodic) throw std::invalid_argument("momentum_dft: periodic grid required");
  const int d = grid.d;
  CMatrix P(d, d);
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l) {
      cx s = 0.0;
      for (int k = 0; k < d; ++k) {
        const int kt = (k < (d + 1) / 2) ? k : k - d;
        const double p = 2.0 * kPi * kt / (d * grid.h);
        s += p * std::exp(cx(0.0, 2.0 * kPi * kt * (j - l) / d));
      }
      P(j, l) = s / static_cast<double>(d);
    }
  return P;
}

// Normalized Gaussian × plane wave, optionally hard-truncated to compact support.
inline WaveFn wave_packet(const Grid& grid, double center, double width, double momentum,
                          std::optional<double> support_radius = std::nullopt) {
  if (width <= 0.0) throw std::invalid_argument("wave_packet: width must be positive");
  if (support_radius && *support_radius < width)
    throw std::invalid_argument("wave_packet: support_radius must be >= width");
  CVector a(grid.d, cx(0.0));
  for (int j = 0; j < grid.d; ++j) {
    const double r = grid.separation(grid.x(j) - center);
    if (support_radius && std::abs(r) > *support_radius) continue;
    a[j] = std::exp(cx(-r * r / (4.0 * width * width), momentum * r));
  }
  WaveFn f(grid, std::move(a));
  if (norm(f) == 0.0) throw std::invalid_argument("wave_packet: empty after truncation");
  return normalized(std::move(f));
}

inline WaveFn translate(const WaveFn& f, int cells) {
  const int d = f.grid.d;
  if (!f.grid.periodic) {
    for (int j = 0; j < d; ++j) {
      const int t = j + cells;
      if ((t < 0 || t >= d) && std::abs(f.amps[j]) != 0.0)
        throw std::invalid_argument("translate: support leaves open-boundary grid");
    }
  }
  CVector a(d, cx(0.0));
  for (int j = 0; j < d; ++j) {
    const int t = ((j + cells) % d + d) % d;
    if (!f.grid.periodic && (j + cells < 0 || j + cells >= d)) continue;
    a[t] = f.amps[j];
  }
  return WaveFn(f.grid, std::move(a));
}

// T_{jk} = V(x_j − x_k), minimal-image distance on periodic grids.
inline CMatrix pair_potential_table(const Grid& grid, const std::function<double(double)>& V) {
  for (int j = 0; j < grid.d; ++j) {
    const double r = grid.separation(grid.x(j) - grid.x(0));
    if (std::abs(V(r) - V(-r)) > 1e-12)
      throw std::invalid_argument("pair_potential_table: potential not symmetric at r = " + std::to_string(r));
  }
  CMatrix T(grid.d, grid.d);
  for (int j = 0; j < grid.d; ++j)
    for (int k = 0; k < grid.d; ++k) T(j, k) = V(grid.separation(grid.x(j) - grid.x(k)));
  return T;
}

}  // namespace bosekit
