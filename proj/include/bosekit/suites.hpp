#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bosekit/config.hpp"
#include "bosekit/dynamics.hpp"
#include "bosekit/structure.hpp"
#include "bosekit/thermo.hpp"

namespace bosekit {

struct SeriesTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SuiteResult {
  std::string name;
  std::string claim;
  std::vector<CheckReport> reports;
  std::vector<SeriesTable> series;
  bool skipped = false;
  std::string skip_reason;
  double runtime_ms = 0.0;

  bool pass() const {
    if (skipped) return true;
    for (const auto& r : reports)
      if (!r.pass) return false;
    return true;
  }
};

namespace detail {

inline WaveFn suite_random_fn(const Grid& g, Rng& rng) {
  WaveFn f{g, CVector(g.d)};
  for (auto& a : f.amps) a = rng.scomplex();
  return f;
}

// random smearing function supported on three adjacent cells
inline WaveFn suite_window_fn(const Grid& g, int center, Rng& rng) {
  WaveFn f{g, CVector(g.d, cx(0.0))};
  for (int j = -1; j <= 1; ++j) f.amps[(center + j + g.d) % g.d] = rng.scomplex();
  return f;
}

inline ResolventSpec suite_window_spec(const Grid& g, Rng& rng, int center) {
  ResolventSpec spec;
  const int nf = 1 + int(rng.uniform() * 2.999);
  for (int k = 0; k < nf; ++k)
    spec.push_back({(rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.7 + 2.0 * rng.uniform()),
                    suite_window_fn(g, center, rng)});
  return spec;
}

inline double largest_step(const std::vector<double>& xs) {
  double worst = -1e300;
  for (std::size_t i = 1; i < xs.size(); ++i) worst = std::max(worst, xs[i] - xs[i - 1]);
  return worst;
}

}  // namespace detail

// --- far-particle factorization of the evolved observable, matrix-free ---
// lhs = ⟨e^{−itH}Ψⁿ(x), A e^{−itH}Φⁿ(x)⟩ equals the matrix element of α_t(A);
// rhs runs the same evolution one sector lower with the far packet split off.
inline double coherence_gap_modes(const FockBasis& b, const FockBasis& bminus,
                                  const ResolventSpec& rspec, const HamiltonianSpec& hspec,
                                  double t, const ClusterVectors& cv, double krylov_tol = 1e-11,
                                  double cg_tol = 1e-12) {
  validate(cv);
  validate(rspec);
  const int n = static_cast<int>(cv.fs.size());
  if (n > b.N_max || n - 1 > bminus.N_max)
    throw std::invalid_argument("coherence_gap_modes: cutoffs too small for the packet count");

  CVector phi = product_state(b, detail::translated_list(cv.fs, cv.cells));
  CVector psi = product_state(b, detail::translated_list(cv.gs, cv.cells));
  phi = evolve_state_krylov(b, hspec, phi, t, krylov_tol);
  psi = evolve_state_krylov(b, hspec, psi, t, krylov_tol);
  const cx lhs = vdot(psi, apply_monomial_modes(b, rspec, phi, cg_tol));

  std::vector<WaveFn> fs(cv.fs.begin(), cv.fs.end() - 1);
  std::vector<WaveFn> gs(cv.gs.begin(), cv.gs.end() - 1);
  CVector phim = fs.empty() ? vacuum_state(bminus) : product_state(bminus, fs);
  CVector psim = gs.empty() ? vacuum_state(bminus) : product_state(bminus, gs);
  phim = evolve_state_krylov(bminus, hspec, phim, t, krylov_tol);
  psim = evolve_state_krylov(bminus, hspec, psim, t, krylov_tol);
  const cx overlap = inner(translate(cv.gs.back(), cv.cells), translate(cv.fs.back(), cv.cells));
  const cx rhs = vdot(psim, apply_monomial_modes(bminus, rspec, phim, cg_tol)) * overlap / double(n);

  return std::abs(lhs - rhs);
}

// --- suite bodies ---

inline SuiteResult suite_ccr(const RunConfig& cfg) {
  SuiteResult out;
  if (cfg.nmax < 1) throw std::invalid_argument("ccr: needs at least one particle");
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  Rng rng(cfg.seed);
  const WaveFn f = detail::suite_random_fn(g, rng);
  const WaveFn gfn = detail::suite_random_fn(g, rng);

  {
    const CMatrix Cg = creation(b, gfn).matrix;
    const CMatrix Af = annihilation(b, f).matrix;
    const CMatrix comm = sub(mul(Af, Cg), mul(Cg, Af));
    const cx ov = inner(f, gfn);
    double worst = 0.0;
    for (int n = 0; n + 1 <= b.N_max; ++n) {
      CMatrix block = sector_block(b, comm, n);
      for (std::size_t i = 0; i < block.rows; ++i) block(i, i) -= ov;
      worst = std::max(worst, max_abs(block));
    }
    CheckReport r = make_report("ccr_commutator",
                                "the smeared ladder commutator is the overlap below the cutoff",
                                worst, 0.0, 1e-12);
    r.parameters = {{"d", double(b.d)}, {"nmax", double(b.N_max)}};
    out.reports.push_back(std::move(r));
  }
  {
    const CMatrix Af = annihilation(b, f).matrix;
    const CMatrix Ag = annihilation(b, gfn).matrix;
    const double worst = max_abs(sub(mul(Af, Ag), mul(Ag, Af)));
    out.reports.push_back(make_report(
        "ccr_same_kind", "annihilators of different functions commute on every sector", worst, 0.0,
        1e-12));
  }
  {
    WaveFn fi{g, f.amps};
    for (auto& a : fi.amps) a *= cx(0.0, 1.0);
    const CMatrix P = field(b, f).matrix;
    const CMatrix Q = field(b, fi).matrix;
    const CMatrix Cf = creation(b, f).matrix;
    CMatrix lhs = add(mul(P, P), mul(Q, Q));
    CMatrix rhs = scale(4.0, mul(Cf, dagger(Cf)));
    const double two = 2.0 * std::real(inner(f, f));
    double worst = 0.0;
    for (int n = 0; n + 1 <= b.N_max; ++n) {
      CMatrix block = sub(sector_block(b, lhs, n), sector_block(b, rhs, n));
      for (std::size_t i = 0; i < block.rows; ++i) block(i, i) -= two;
      worst = std::max(worst, max_abs(block));
    }
    out.reports.push_back(make_report(
        "field_square_identity",
        "squared field pairs reduce to the mode number plus the overlap below the cutoff", worst,
        0.0, 1e-10));
  }
  return out;
}

inline SuiteResult suite_resolvent(const RunConfig& cfg) {
  SuiteResult out;
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  Rng rng(cfg.seed + 1);
  const WaveFn f = detail::suite_random_fn(g, rng);
  const double lambda = 1.7, mu = -0.8, s = 0.9;

  const FullOperator R = resolvent(b, lambda, f);
  {
    CMatrix shifted = field(b, f).matrix;
    for (std::size_t i = 0; i < b.dim; ++i) shifted(i, i) += cx(0.0, lambda);
    const double worst = std::max(
        max_abs(sub(mul(R.matrix, shifted), CMatrix::identity(b.dim))),
        max_abs(sub(mul(shifted, R.matrix), CMatrix::identity(b.dim))));
    out.reports.push_back(make_report(
        "resolvent_inverse", "the resolvent inverts the shifted field operator", worst, 0.0, 1e-10));
  }
  {
    const FullOperator Rm = resolvent(b, -lambda, f);
    out.reports.push_back(make_report("resolvent_adjoint",
                                      "negating the spectral parameter takes the adjoint",
                                      max_abs(sub(dagger(R.matrix), Rm.matrix)), 0.0, 1e-10));
  }
  {
    const FullOperator Rmu = resolvent(b, mu, f);
    const CMatrix lhs = sub(R.matrix, Rmu.matrix);
    const CMatrix rhs = scale(cx(0.0, mu - lambda), mul(R.matrix, Rmu.matrix));
    out.reports.push_back(make_report("resolvent_identity",
                                      "the difference of two resolvents factors through both",
                                      max_abs(sub(lhs, rhs)), 0.0, 1e-10));
  }
  {
    const FullOperator U = gauge_unitary(b, s);
    const CMatrix conj = mul(U.matrix, mul(R.matrix, dagger(U.matrix)));
    WaveFn rotated = f;
    for (auto& a : rotated.amps) a *= std::exp(cx(0.0, s));
    const FullOperator Rrot = resolvent(b, lambda, rotated);
    out.reports.push_back(make_report("resolvent_gauge",
                                      "gauge conjugation rotates the smearing function",
                                      max_abs(sub(conj, Rrot.matrix)), 0.0, 1e-10));
  }
  return out;
}

inline SuiteResult suite_matrix_units(const RunConfig& cfg) {
  SuiteResult out;
  if (cfg.nmax < 1) throw std::invalid_argument("matrix_units: needs at least one particle");
  const int d = std::min(cfg.grid_d, 4);
  const int nmax = std::min(cfg.nmax, 3);
  const FockBasis b = enumerate_basis(d, nmax, cfg.memory_budget);

  double worst1 = 0.0;
  for (int n = 1; n <= nmax; ++n)
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        const FullOperator W = matrix_unit(b, i, k, n);
        CMatrix unit(d, d);
        unit(i, k) = 1.0;
        for (int m = 1; m <= n; ++m) {
          const CMatrix gap = sub(sector_block(b, W.matrix, m),
                                  scale(double(m) / double(n), symmetric_embed_fast(b, m, {unit})));
          worst1 = std::max(worst1, operator_norm(gap));
        }
      }
  CheckReport r1 = make_report("matrix_unit_restriction",
                               "weighted monomials restrict to symmetrized one-body units", worst1,
                               0.0, 1e-9);
  r1.parameters = {{"d", double(d)}, {"nmax", double(nmax)}};
  out.reports.push_back(std::move(r1));

  if (nmax >= 2) {
    double worst2 = 0.0;
    for (int n = 2; n <= nmax; ++n)
      for (const auto& [i1, k1] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{0, 0}})
        for (const auto& [i2, k2] : {std::pair{1, 2 % d}, std::pair{0, 1}, std::pair{2 % d, 0}}) {
          const FullOperator C = matrix_unit_composite(b, {i1, i2}, {k1, k2}, n);
          CMatrix u1(d, d), u2(d, d);
          u1(i1, k1) = 1.0;
          u2(i2, k2) = 1.0;
          const CMatrix gap =
              sub(sector_block(b, C.matrix, n), symmetric_embed_fast(b, n, {u1, u2}));
          worst2 = std::max(worst2, operator_norm(gap));
        }
    out.reports.push_back(make_report(
        "matrix_unit_composite", "two-body composites restrict to symmetrized pair units", worst2,
        0.0, 1e-9));
  }
  return out;
}

inline SuiteResult suite_cluster_limit(const RunConfig& cfg) {
  SuiteResult out;
  if (!cfg.grid_periodic) throw std::invalid_argument("cluster_limit: needs a periodic grid");
  if (cfg.grid_d < 8) throw std::invalid_argument("cluster_limit: needs at least eight cells");
  if (cfg.nmax < 2) throw std::invalid_argument("cluster_limit: needs at least two particles");
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  const FockBasis bm = enumerate_basis(cfg.grid_d, cfg.nmax - 1, cfg.memory_budget);
  Rng rng(cfg.seed + 3);

  const int center = cfg.grid_d / 2;
  const ResolventSpec spec = detail::suite_window_spec(g, rng, center);
  const WaveFn near1 = detail::suite_window_fn(g, center, rng);
  const WaveFn near2 = detail::suite_window_fn(g, center, rng);
  // hard-support packet three cells wide, launched at the window and pushed away
  const WaveFn far = wave_packet(g, g.x(center), 0.45 * g.h, 0.0, 1.0 * g.h);

  SeriesTable tab{"cluster_gap", {"cells"}, {}};
  std::vector<int> ns{2};
  if (cfg.nmax >= 3) ns.push_back(3);
  for (int n : ns) tab.columns.push_back("gap_n" + std::to_string(n));

  const int steps = std::max(2, cfg.grid_d / 4);
  for (int cells = 0; cells <= cfg.grid_d / 2; cells += std::max(1, cfg.grid_d / (2 * steps))) {
    std::vector<double> row{double(cells)};
    for (int n : ns) {
      std::vector<WaveFn> fs{near1}, gs{near2};
      if (n >= 3) {
        fs.push_back(near2);
        gs.push_back(near1);
      }
      fs.push_back(far);
      gs.push_back(far);
      ClusterVectors cv{fs, gs, cells};
      row.push_back(cluster_limit_check_modes(b, bm, spec, cv, 1e300).value);
    }
    tab.rows.push_back(std::move(row));
  }

  double worst = 0.0;
  for (std::size_t c = 1; c < tab.columns.size(); ++c)
    worst = std::max(worst, tab.rows.back()[c]);
  CheckReport r = make_report("cluster_limit",
                              "far-particle matrix elements factor exactly once supports separate",
                              worst, 0.0, 1e-10);
  r.parameters = {{"d", double(cfg.grid_d)}, {"cells", tab.rows.back()[0]}};
  out.reports.push_back(std::move(r));
  out.series.push_back(std::move(tab));

  // pushing the known grading one sector down matches the actual restriction
  {
    const int n = std::min(cfg.nmax, 3);
    CMatrix full(b.dim, b.dim);
    CMatrix B1(b.d, b.d);
    add_scaled_inplace(full, cx(0.8, 0.0), matrix_unit(b, 0, 1, n).matrix);
    B1(0, 1) += 0.8;
    add_scaled_inplace(full, cx(-0.3, 0.4), matrix_unit(b, 1, 0, n).matrix);
    B1(1, 0) += cx(-0.3, 0.4);
    add_scaled_inplace(full, cx(0.5, 0.0), matrix_unit(b, 0, 0, n).matrix);
    B1(0, 0) += 0.5;
    GradedOperator G{n, {GradedTerm{1, {}, B1, 1.0}}};
    if (n >= 3) {
      add_scaled_inplace(full, cx(0.7, 0.0), matrix_unit_composite(b, {0, 1}, {1, 0}, n).matrix);
      CMatrix u1(b.d, b.d), u2(b.d, b.d);
      u1(0, 1) = 1.0;
      u2(1, 0) = 1.0;
      G.terms.push_back(GradedTerm{2, {}, symmetric_embed_fast(b, 2, {u1, u2}), 0.7});
    }
    const double at_n = max_abs(sub(materialize(b, G), sector_block(b, full, n)));
    const double below = max_abs(sub(materialize(b, kappa(G)), sector_block(b, full, n - 1)));
    CheckReport k = make_report("grading_descent",
                                "reweighting the graded parts reproduces the lower restriction",
                                std::max(at_n, below), 0.0, 1e-9);
    k.parameters = {{"n", double(n)}, {"gap_at_level", at_n}, {"gap_below", below}};
    out.reports.push_back(std::move(k));
  }
  return out;
}

inline SuiteResult suite_seminorm(const RunConfig& cfg) {
  SuiteResult out;
  if (cfg.nmax < 1) throw std::invalid_argument("seminorm: needs at least one particle");
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  const FockBasis bm = enumerate_basis(cfg.grid_d, cfg.nmax - 1, cfg.memory_budget);
  Rng rng(cfg.seed + 4);

  SeriesTable tab{"seminorm_pairs", {"trial", "n", "lower", "upper"}, {}};
  const int trials = 20;
  double worst = -1e300;
  for (int trial = 0; trial < trials; ++trial) {
    const ResolventSpec spec =
        detail::suite_window_spec(g, rng, int(rng.uniform() * cfg.grid_d));
    const FullOperator A = gauge_average(monomial(b, spec));
    const FullOperator Am = gauge_average(monomial(bm, spec));
    for (int n = 1; n <= cfg.nmax; ++n) {
      const double lower = seminorm(Am, n - 1);
      const double upper = seminorm(A, n);
      worst = std::max(worst, lower - upper);
      tab.rows.push_back({double(trial), double(n), lower, upper});
    }
  }
  CheckReport r = make_report("seminorm_monotone",
                              "lower-sector seminorms never exceed the matched upper sector", worst,
                              0.0, 1e-10);
  r.parameters = {{"monomials", double(trials)}};
  out.reports.push_back(std::move(r));
  out.series.push_back(std::move(tab));
  return out;
}

inline SuiteResult suite_dyson(const RunConfig& cfg) {
  SuiteResult out;
  if (cfg.nmax < 2) throw std::invalid_argument("dyson: needs at least two particles");
  const int d = std::min(cfg.grid_d, 10);  // the expansion certificate lives on the pair sector
  const Grid g{d, cfg.grid_h, cfg.grid_periodic};
  const FockBasis b = enumerate_basis(d, 2, cfg.memory_budget);
  const HamiltonianSpec spec{g, cfg.potential_fn(), std::nullopt, 0.0};
  Rng rng(cfg.seed + 5);

  const int n = 2;
  const CVector vdiag = interaction_diagonal(b, spec, n);
  double vnorm = 0.0;
  for (const auto& v : vdiag) vnorm = std::max(vnorm, std::abs(v));
  const double t = vnorm > 0.0 ? std::min(cfg.times.front(), 0.45 / vnorm) : cfg.times.front();

  const std::size_t dim = b.sector_dims[n];
  CMatrix C(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) {
      C(i, j) = rng.scomplex();
      C(j, i) = std::conj(C(i, j));
    }
  const SectorOperator seed{n, C};
  const double cnorm = operator_norm(C);

  const HamiltonianSpec free_spec{g, nullptr, std::nullopt, 0.0};
  const PropagatorCache free_cache = build_propagator_cache(b, free_spec);
  const PropagatorCache full_cache = build_propagator_cache(b, spec);
  const SectorOperator exact = exact_cocycle(free_cache, full_cache, seed, t);

  std::vector<DysonTerm> terms;
  if (cfg.dyson_order >= 1)
    terms = dyson_ladder(b, spec, n, seed, t, cfg.dyson_order, 4, cfg.quad_tolerance);

  SeriesTable tab{"dyson_residuals", {"order", "residual", "certified_bound"}, {}};
  const double x = 2.0 * t * vnorm;
  double partial = 0.0, pw = 1.0;
  CMatrix sum = C;
  double worst = -1e300;
  for (int order = 0; order <= cfg.dyson_order; ++order) {
    if (order >= 1) add_scaled_inplace(sum, 1.0, terms[order - 1].value.block);
    partial += pw;
    pw *= x / (order + 1);
    const double tail = cnorm * std::max(0.0, std::exp(x) - partial);
    const double res = operator_norm(sub(sum, exact.block));
    const double certified = tail + 10.0 * kDysonQuadTol * cnorm;
    worst = std::max(worst, res - certified);
    tab.rows.push_back({double(order), res, certified});
  }
  CheckReport r = make_report("dyson_tail",
                              "expansion residuals stay inside the certified tail bound", worst,
                              0.0, 0.0);
  r.parameters = {{"t", t}, {"interaction_norm", vnorm}, {"max_order", double(cfg.dyson_order)},
                  {"quad_tolerance", cfg.quad_tolerance}};
  out.reports.push_back(std::move(r));
  out.series.push_back(std::move(tab));
  return out;
}

inline SuiteResult suite_coherence(const RunConfig& cfg) {
  SuiteResult out;
  if (!cfg.grid_periodic) throw std::invalid_argument("coherence: needs a periodic grid");
  if (cfg.grid_d < 8) throw std::invalid_argument("coherence: needs at least eight cells");
  if (cfg.nmax < 2) throw std::invalid_argument("coherence: needs at least two particles");
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  const FockBasis bm = enumerate_basis(cfg.grid_d, cfg.nmax - 1, cfg.memory_budget);
  const HamiltonianSpec hspec = cfg.untrapped_spec();
  Rng rng(cfg.seed + 6);

  const int center = cfg.grid_d / 2;
  const ResolventSpec spec = detail::suite_window_spec(g, rng, center);
  const WaveFn near1 = detail::suite_window_fn(g, center, rng);
  const WaveFn near2 = detail::suite_window_fn(g, center, rng);
  const WaveFn far = wave_packet(g, g.x(center), 0.45 * g.h, 0.0, 1.0 * g.h);
  const double t = std::min(cfg.times.front(), 0.5);

  std::vector<int> ladder;
  for (int cells = std::max(2, cfg.grid_d / 8); cells <= cfg.grid_d / 2; cells *= 2)
    ladder.push_back(cells);
  if (ladder.size() < 2) throw std::invalid_argument("coherence: grid too small for a separation ladder");

  std::vector<int> ns{2};
  if (cfg.nmax >= 3) ns.push_back(3);

  SeriesTable tab{"coherence_gap", {"cells"}, {}};
  for (int n : ns) tab.columns.push_back("gap_n" + std::to_string(n));
  std::vector<std::vector<double>> gaps(ns.size());
  for (int cells : ladder) {
    std::vector<double> row{double(cells)};
    for (std::size_t i = 0; i < ns.size(); ++i) {
      std::vector<WaveFn> fs{near1}, gs{near2};
      if (ns[i] >= 3) {
        fs.push_back(near2);
        gs.push_back(near1);
      }
      fs.push_back(far);
      gs.push_back(far);
      ClusterVectors cv{fs, gs, cells};
      const double gap = coherence_gap_modes(b, bm, spec, hspec, t, cv);
      gaps[i].push_back(gap);
      row.push_back(gap);
    }
    tab.rows.push_back(std::move(row));
  }

  double worst_step = -1e300, worst_final = 0.0;
  for (const auto& gn : gaps) {
    worst_step = std::max(worst_step, detail::largest_step(gn));
    worst_final = std::max(worst_final, gn.back());
  }
  CheckReport dec = make_report("coherence_decay",
                                "the evolved factorization gap shrinks at every separation doubling",
                                worst_step, 0.0, 0.0);
  dec.parameters = {{"t", t}, {"max_n", double(ns.back())}};
  out.reports.push_back(std::move(dec));
  out.reports.push_back(make_report("coherence_limit",
                                    "the evolved factorization gap is small at maximal separation",
                                    worst_final, 0.0, 1e-3));
  out.series.push_back(std::move(tab));
  return out;
}

inline SuiteResult suite_asymptotic_commutator(const RunConfig& cfg) {
  SuiteResult out;
  if (!cfg.grid_periodic)
    throw std::invalid_argument("asymptotic_commutator: needs a periodic grid");
  if (cfg.grid_d < 8) throw std::invalid_argument("asymptotic_commutator: needs at least eight cells");
  if (cfg.nmax < 2) throw std::invalid_argument("asymptotic_commutator: needs at least two particles");
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  const HamiltonianSpec spec = cfg.untrapped_spec();
  Rng rng(cfg.seed + 7);

  const ResolventSpec sa = detail::suite_window_spec(g, rng, 0);
  const ResolventSpec sb = detail::suite_window_spec(g, rng, 0);
  const FullOperator A = gauge_average(monomial(b, sa));
  const FullOperator B = gauge_average(monomial(b, sb));
  const PropagatorCache cache = build_propagator_cache(b, spec);
  const double t = std::min(cfg.times.front(), 0.5);

  std::vector<int> ladder;
  for (int cells = std::max(2, cfg.grid_d / 8); cells <= cfg.grid_d / 2; cells *= 2)
    ladder.push_back(cells);
  if (ladder.size() < 2)
    throw std::invalid_argument("asymptotic_commutator: grid too small for a separation ladder");

  SeriesTable tab{"commutator_decay", {"cells", "seminorm"}, {}};
  std::vector<double> vals;
  for (int cells : ladder) {
    const double v = asymptotic_commutator(cache, A, B, t, cells, 2);
    vals.push_back(v);
    tab.rows.push_back({double(cells), v});
  }
  CheckReport r = make_report("commutator_decay",
                              "evolved window observables asymptotically commute with distance",
                              detail::largest_step(vals), 0.0, 0.0);
  r.parameters = {{"t", t}, {"final", vals.back()}};
  out.reports.push_back(std::move(r));
  out.series.push_back(std::move(tab));
  return out;
}

inline SuiteResult suite_mehler(const RunConfig& cfg) {
  (void)cfg;  // calibrated fixed geometry: the comparison floor scales with h
  SuiteResult out;
  auto w = [](double r) { return 0.8 * std::exp(-r * r / 2.0); };
  CheckReport coarse = mehler_check(Grid{64, 0.125}, 2.0, 0.3, w, 5e-2);
  coarse.name = "mehler_kernel";
  CheckReport fine = mehler_check(Grid{256, 0.0625}, 2.0, 0.3, w, 2.5e-2);
  fine.name = "mehler_kernel_refined";

  SeriesTable tab{"mehler_refinement", {"h", "gap"}, {{0.125, coarse.value}, {0.0625, fine.value}}};
  CheckReport halving = make_report("mehler_halving",
                                    "the kernel gap halves when the lattice step halves",
                                    fine.value / coarse.value, 0.5, 0.05);
  out.reports.push_back(std::move(coarse));
  out.reports.push_back(std::move(fine));
  out.reports.push_back(std::move(halving));
  out.series.push_back(std::move(tab));
  return out;
}

inline SuiteResult suite_trap_removal(const RunConfig& cfg) {
  SuiteResult out;
  if (!cfg.trap_L) throw std::invalid_argument("trap_removal: needs a configured trap length");
  if (cfg.nmax < 2) throw std::invalid_argument("trap_removal: needs at least two particles");
  const Grid g = cfg.grid();
  const FockBasis b = cfg.basis();
  const HamiltonianSpec untrapped = cfg.untrapped_spec();
  Rng rng(cfg.seed + 8);

  const ResolventSpec rs{{1.4, wave_packet(g, 0.0, 0.8, 0.0)},
                         {-2.0, wave_packet(g, 1.0, 0.8, 0.3)}};
  const FullOperator A = gauge_average(monomial(b, rs));
  const double t = std::min(cfg.times.front(), 0.5);
  const double L = *cfg.trap_L;
  const std::vector<double> Ls{L / 4.0, L / 2.0, L, 2.0 * L};

  const TrapRemoval tr = trap_removal(b, untrapped, A, t, 2, Ls);
  SeriesTable tab{"trap_removal", {"L", "gap"}, {}};
  for (std::size_t i = 0; i < Ls.size(); ++i) tab.rows.push_back({Ls[i], tr.gaps[i]});

  out.reports.push_back(tr.report);
  out.reports.push_back(make_report("trap_removal_step",
                                    "the widest trap sits strictly below the narrowest",
                                    tr.gaps.back(), tr.gaps.front(), 0.0));
  out.series.push_back(std::move(tab));
  return out;
}

inline SuiteResult suite_thermo(const RunConfig& cfg) {
  SuiteResult out;
  if (!cfg.trap_L) throw std::invalid_argument("thermo: needs a configured trap length");
  const FockBasis b = cfg.basis();
  const HamiltonianSpec spec = cfg.spec();
  Rng rng(cfg.seed + 9);

  const PositiveType pt = positive_type_check(b, spec);
  out.reports.push_back(pt.report);

  {
    const FullOperator Hr = renormalized_hamiltonian(b, spec);
    double worst = std::abs(Hr.matrix(0, 0));
    for (int n = 1; n <= b.N_max; ++n) {
      const EigenDecomposition ed = hermitian_eig(sector_block(b, Hr.matrix, n));
      worst = std::max(worst, -ed.eigenvalues.front());
    }
    out.reports.push_back(make_report("renormalized_floor",
                                      "the renormalized energy is nonnegative with vacuum kernel",
                                      worst, 0.0, 1e-10));
  }

  {
    const double beta = cfg.betas.front();
    const GibbsState gs = gibbs_state(b, spec, beta, cfg.mu);
    double worst = std::abs(trace(gs.rho) - 1.0);
    worst = std::max(worst, hermiticity_defect(gs.rho));
    const EigenDecomposition ed = hermitian_eig(gs.rho);
    worst = std::max(worst, -ed.eigenvalues.front());
    const PropagatorCache cache = build_propagator_cache(b, spec);
    const FullOperator rho_t = heisenberg_evolve(cache, make_full(b, gs.rho), 0.5);
    worst = std::max(worst, max_abs(sub(rho_t.matrix, gs.rho)));
    CheckReport r = make_report("gibbs_state",
                                "the equilibrium state is a stationary unit-trace density matrix",
                                worst, 0.0, 1e-10);
    r.parameters = {{"beta", beta}, {"mu", cfg.mu}};
    out.reports.push_back(std::move(r));

    SeriesTable tab{"gibbs", {"beta", "mu", "log_Z", "energy", "number"}, {}};
    const FullOperator H = full_hamiltonian(spec, b);
    const FullOperator N = number_full(b);
    for (double bb : cfg.betas) {
      const GibbsState state = gibbs_state(b, spec, bb, cfg.mu);
      tab.rows.push_back({bb, cfg.mu, state.log_partition(),
                          gibbs_expectation(state, H.matrix),
                          gibbs_expectation(state, N.matrix)});
    }
    out.series.push_back(std::move(tab));
  }

  {
    // calibrated geometry: the KMS comparison must stay inside the precision
    // envelope β·spread(K) ≲ 20, so the soft ring below is pinned
    const Grid gk{4, 1.4, true};
    const FockBasis bk = enumerate_basis(4, std::min(cfg.nmax, 2), cfg.memory_budget);
    const HamiltonianSpec kspec{gk, spec.potential, 2.0, 0.0};
    const PositiveType ptk = positive_type_check(bk, kspec);
    const double v0 = spec.potential ? spec.potential(0.0) : 0.0;
    const double muk = ptk.accepted ? std::min(cfg.mu, -v0) : cfg.mu;
    GibbsState gs = gibbs_state(bk, kspec, 1.0, muk, true);

    CMatrix A(bk.dim, bk.dim), B(bk.dim, bk.dim);
    for (std::size_t i = 0; i < bk.dim; ++i)
      for (std::size_t j = 0; j < bk.dim; ++j) {
        A(i, j) = rng.scomplex();
        B(i, j) = rng.scomplex();
      }
    const FullOperator Af = make_full(bk, std::move(A));
    const FullOperator Bf = make_full(bk, std::move(B));
    double worst = 0.0;
    for (double tt : {0.0, 0.5}) worst = std::max(worst, kms_residual(gs, Af, Bf, tt));
    CheckReport r = make_report("kms_residual",
                                "the equilibrium state satisfies the boundary-value condition",
                                worst, 0.0, 1e-10);
    r.parameters = {{"beta", gs.beta}, {"mu", muk}};
    out.reports.push_back(std::move(r));

    // a 2% interaction mismatch must be loudly visible in the same functional
    auto base = spec.potential;
    std::function<double(double)> perturbed = [base](double r2) {
      const double add = 0.012 * std::exp(-2.0 * r2 * r2);
      return base ? base(r2) + add : add;
    };
    HamiltonianSpec mspec = kspec;
    mspec.potential = perturbed;
    const GibbsState mixed = gibbs_state(bk, mspec, 1.0, muk, true);
    GibbsState crossed = gs;
    crossed.rho = mixed.rho;
    const double detector = kms_residual(crossed, Af, Bf, 0.5);
    CheckReport det = make_report("kms_detector",
                                  "a mismatched interaction breaks the boundary-value condition",
                                  detector, 1e-3, 0.0);
    det.pass = detector > 1e-3;
    out.reports.push_back(std::move(det));
  }

  {
    double worst = -1e300;
    double last = 0.0;
    for (double bb : cfg.betas) {
      const CheckReport gt = golden_thompson_check(b, spec, bb);
      if (!gt.pass) worst = std::max(worst, 1.0);
      last = gt.value;
      worst = std::max(worst, gt.value - gt.bound);
    }
    CheckReport r = make_report("golden_thompson",
                                "the interacting partition function never exceeds the free one",
                                worst < -1e200 ? 0.0 : std::max(0.0, worst), 0.0, 0.0);
    r.parameters = {{"betas", double(cfg.betas.size())}, {"final_ratio", last}};
    out.reports.push_back(std::move(r));
  }

  {
    // calibrated fine grid: the quartic-scaling law needs room for wide profiles
    auto prof = [](double x) { return std::exp(-x * x); };
    const Grid gc{12, 0.8, true};
    const FockBasis bc = enumerate_basis(12, 3, cfg.memory_budget);
    const CondensateEnergy c1 = condensate_energy(bc, gc, prof, 1.0, 1);
    const CondensateEnergy c3 = condensate_energy(bc, gc, prof, 1.0, 3);
    out.reports.push_back(make_report("condensate_linearity",
                                      "the trial-state energy is linear in the particle count",
                                      std::abs(c3.energy - 3.0 * c1.energy), 0.0, 1e-10));

    const Grid gf{128, 0.5, true};
    const FockBasis bf = enumerate_basis(128, 1, cfg.memory_budget);
    const CondensateEnergy e2 = condensate_energy(bf, gf, prof, 2.0, 1);
    const CondensateEnergy e4 = condensate_energy(bf, gf, prof, 4.0, 1);
    const CondensateEnergy e8 = condensate_energy(bf, gf, prof, 8.0, 1);
    const double dev = std::max(std::abs(e2.energy / e4.energy - 4.0),
                                std::abs(e4.energy / e8.energy - 4.0));
    CheckReport r = make_report("condensate_scaling",
                                "doubling the profile length scale quarters the energy", dev, 0.0,
                                0.2);
    r.parameters = {{"E_L2", e2.energy}, {"E_L4", e4.energy}, {"E_L8", e8.energy}};
    out.reports.push_back(std::move(r));
  }
  return out;
}

inline SuiteResult suite_free_asymptotic(const RunConfig& cfg) {
  SuiteResult out;
  // calibrated fixed geometry: the ballistic regime needs a long ring
  const Grid g{128, 1.0, true};
  const FockBasis b = enumerate_basis(128, 1, cfg.memory_budget);
  const WaveFn xi = wave_packet(g, 0.0, 2.0, 0.4);
  CMatrix A(b.dim, b.dim);
  const CVector u = mode_vector(xi);
  for (int r = 0; r < g.d; ++r)
    for (int s = 0; s < g.d; ++s) A(1 + r, 1 + s) = u[r] * std::conj(u[s]);
  const FullOperator A0 = make_full(b, std::move(A));
  const WaveFn psi = wave_packet(g, 0.0, 4.0, 0.2);
  auto prof = [](double v) { return std::exp(-2.0 * (v - 0.4) * (v - 0.4)); };

  SeriesTable tab{"formula_gap", {"t", "lhs", "rhs", "relative_gap"}, {}};
  std::vector<double> gaps;
  for (double t : {8.0, 16.0, 32.0}) {
    const AsymptoticFormula f = free_asymptotic_observable(b, A0, prof, t, psi);
    const double rel = f.gap / std::abs(f.rhs);
    gaps.push_back(rel);
    tab.rows.push_back({t, f.lhs, f.rhs, rel});
  }
  out.reports.push_back(make_report("formula_decay",
                                    "the velocity-profile gap shrinks at every time doubling",
                                    detail::largest_step(gaps), 0.0, 0.0));
  out.reports.push_back(make_report("formula_limit",
                                    "the velocity-profile average matches the momentum prediction",
                                    gaps.back(), 0.0, 5e-2));
  out.series.push_back(std::move(tab));
  return out;
}

// --- registry ---

struct SuiteEntry {
  std::string name;
  std::string claim;
  SuiteResult (*fn)(const RunConfig&);
};

inline const std::vector<SuiteEntry>& suite_registry() {
  static const std::vector<SuiteEntry> entries{
      {"ccr", "commutation relations and the field-square identity below the cutoff", suite_ccr},
      {"resolvent", "defining inverse, adjoint symmetry, difference identity, gauge covariance",
       suite_resolvent},
      {"matrix_units", "gauge-invariant monomials restrict to symmetrized matrix units",
       suite_matrix_units},
      {"cluster_limit", "far-particle factorization and the graded descent of window observables",
       suite_cluster_limit},
      {"seminorm_monotonicity", "sector seminorms grow with the particle number at matched cutoffs",
       suite_seminorm},
      {"dyson", "certified tail bounds for the interaction-picture expansion", suite_dyson},
      {"coherence", "time evolution preserves the far-particle factorization", suite_coherence},
      {"asymptotic_commutator", "evolved observables commute at large spatial separation",
       suite_asymptotic_commutator},
      {"mehler", "the closed-form trapped kernel matches the spectral propagator", suite_mehler},
      {"trap_removal", "trapped dynamics converge to the free-space limit as the trap widens",
       suite_trap_removal},
      {"thermo", "equilibrium positivity, boundary condition, trace inequality, condensate scaling",
       suite_thermo},
      {"free_asymptotic", "ballistic averages of one-particle observables match the momentum formula",
       suite_free_asymptotic},
  };
  return entries;
}

inline const SuiteEntry* find_suite(const std::string& name) {
  for (const auto& e : suite_registry())
    if (e.name == name) return &e;
  return nullptr;
}

// run one suite; structural impossibilities (budget, geometry) become skips
inline SuiteResult run_suite(const SuiteEntry& entry, const RunConfig& cfg) {
  Stopwatch watch;
  SuiteResult out;
  try {
    out = entry.fn(cfg);
  } catch (const std::invalid_argument& e) {
    out.reports.clear();
    out.series.clear();
    out.skipped = true;
    out.skip_reason = e.what();
  } catch (const std::exception& e) {
    out.reports.clear();
    out.series.clear();
    CheckReport r = make_report(entry.name + "_error", "the suite completed without an internal error",
                                std::numeric_limits<double>::infinity(), 0.0, 0.0);
    r.parameters = {};
    out.reports.push_back(std::move(r));
    out.skip_reason = e.what();
  }
  out.name = entry.name;
  out.claim = entry.claim;
  out.runtime_ms = watch.ms();
  return out;
}

}  // namespace bosekit
