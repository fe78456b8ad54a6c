#include <algorithm>
#include <cmath>
#include <vector>

#include "ddctmc/quantities.hpp"
#include "detail.hpp"

namespace ddctmc {

using detail::floor_payoff;

namespace {

// B and Q share this recursion; k is the killing at each state.
cplx occupation_impl(const Generator &gen, const Vec<cplx> &k, double a, const Vec<cplx> &f, int ix,
                     const SolveOptions &opts)
{
  const Grid &g = gen.grid();
  const int N = gen.last();
  if (ix >= N || ix <= 0) return 0.0;
  if (gen.is_tridiagonal() && !opts.force_generic) {
    PsiPair psi = psi_pair(gen, k);
    cplx V = 0.0; // V at level i + 1, starting from the absorbing top
    for (int i = N - 1; i >= ix; --i) {
      int l = g.window_floor(i, a);
      HittingCoeffs hc = hitting_coeffs(psi, i, l, i + 1);
      V = hc.down * floor_payoff(g, l, i, a, f(l)) + hc.up * V;
    }
    return V;
  }
  TopRowSolver solver(gen, opts.incremental);
  Vec<cplx> kw;
  auto row = [&](int, Window w) -> const Vec<cplx> & {
    kw = k.segment(w.lo + 1, w.size());
    return solver.top_row(w, kw);
  };
  return detail::level_sweep(gen, a, f, ix, row)(ix);
}

// Solves the window (l, i] of a tridiagonal generator with per-state killing and returns the value at i.
cplx window_top_value(const Generator &gen, int l, int i, const Vec<cplx> &kw, cplx below, cplx above)
{
  const int n = i - l;
  std::vector<cplx> b(n), c(n), r(n, 0.0);
  // forward elimination on rows l+1..i
  cplx prev_c = 0.0, prev_r = 0.0;
  for (int p = 0; p < n; ++p) {
    int s = l + 1 + p;
    cplx aa = -gen.down(s), bb = kw(p) + gen.outflow(s), cc = -gen.up(s), rr = 0.0;
    if (p == 0) rr += gen.down(s) * below;
    if (p == n - 1) rr += gen.up(s) * above;
    if (p > 0) {
      cplx m = aa / b[p - 1];
      bb -= m * prev_c;
      rr -= m * prev_r;
    }
    b[p] = bb;
    c[p] = cc;
    r[p] = rr;
    prev_c = cc;
    prev_r = rr;
  }
  return r[n - 1] / b[n - 1];
}

} // namespace

std::string to_string(QuantityKind kind)
{
  switch (kind) {
  case QuantityKind::DrawdownBeforeDrawup_A: return "A";
  case QuantityKind::OccupationUntilDrawdown_B: return "B";
  case QuantityKind::DrawdownOccupation_C: return "C";
  case QuantityKind::NthDrawdownNoRecovery_H: return "Hn";
  case QuantityKind::InsuranceNoRecovery_Hsum: return "H";
  case QuantityKind::NthDrawdownWithRecovery_J: return "Jn";
  case QuantityKind::InsuranceWithRecovery_Jsum: return "J";
  case QuantityKind::DrawdownLaplace_Q: return "Q";
  }
  return "?";
}

QuantityKind parse_quantity_kind(const std::string &name)
{
  if (name == "A") return QuantityKind::DrawdownBeforeDrawup_A;
  if (name == "B") return QuantityKind::OccupationUntilDrawdown_B;
  if (name == "C") return QuantityKind::DrawdownOccupation_C;
  if (name == "Hn") return QuantityKind::NthDrawdownNoRecovery_H;
  if (name == "H") return QuantityKind::InsuranceNoRecovery_Hsum;
  if (name == "Jn") return QuantityKind::NthDrawdownWithRecovery_J;
  if (name == "J") return QuantityKind::InsuranceWithRecovery_Jsum;
  if (name == "Q") return QuantityKind::DrawdownLaplace_Q;
  throw ValidationError("unknown quantity '" + name + "' (expected A, B, C, Hn, H, Jn, J or Q)");
}

cplx q_drawdown(const Generator &gen, cplx q, double a, const Fn1 &f, double x, const SolveOptions &opts)
{
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  int ix = detail::start_index(g, x, "x");
  return occupation_impl(gen, Vec<cplx>::Constant(g.size(), q), a, detail::sample(g, f), ix, opts);
}

cplx occupation_until_drawdown(const Generator &gen, const Fn1 &k, double a, const Fn1 &f, double x,
                               const SolveOptions &opts)
{
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  int ix = detail::start_index(g, x, "x");
  return occupation_impl(gen, detail::sample(g, k, 0.0), a, detail::sample(g, f), ix, opts);
}

cplx drawdown_occupation(const Generator &gen, const Fn2 &k2, double a, const Fn1 &f, double x,
                         const SolveOptions &opts)
{
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  const int N = gen.last();
  int ix = detail::start_index(g, x, "x");
  if (ix >= N || ix <= 0) return 0.0;
  Vec<cplx> fv = detail::sample(g, f);
  // Inside the window (y_i - a, y_i] the running max stays at y_i, so each level is a plain
  // passage problem with killing k2(., y_i).
  Vec<cplx> kw;
  auto killing = [&](Window w) {
    kw.resize(w.size());
    for (int p = 0; p < w.size(); ++p) kw(p) = k2(g[w.lo + 1 + p], g[w.hi]);
  };
  if (gen.is_tridiagonal() && !opts.force_generic) {
    // the top value is linear in the two boundary values; with constant rates and an unchanged
    // killing pattern the two coefficients carry over from the previous level
    cplx V = 0.0, cd = 0.0, cu = 0.0;
    Vec<cplx> last_k;
    for (int i = N - 1; i >= ix; --i) {
      int l = g.window_floor(i, a);
      killing(Window{l, i});
      if (!(gen.is_translation_invariant() && l >= 1 && kw.size() == last_k.size() && kw == last_k)) {
        cd = window_top_value(gen, l, i, kw, 1.0, 0.0);
        cu = window_top_value(gen, l, i, kw, 0.0, 1.0);
        last_k = kw;
      }
      V = cd * floor_payoff(g, l, i, a, fv(l)) + cu * V;
    }
    return V;
  }
  TopRowSolver solver(gen, opts.incremental);
  auto row = [&](int, Window w) -> const Vec<cplx> & {
    killing(w);
    return solver.top_row(w, kw);
  };
  return detail::level_sweep(gen, a, fv, ix, row)(ix);
}

cplx drawdown_before_drawup(const Generator &gen, cplx q, double a, double b, const Fn1 &f, double x, double y,
                            const SolveOptions &opts)
{
  if (b < a) throw UnsupportedRegime("drawdown-before-drawup needs b >= a");
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  const int N = gen.last();
  int ix = detail::start_index(g, x, "x");
  if (y > x + Grid::kTol) throw ValidationError("running minimum y must not exceed x");
  if (ix >= N || ix <= 0) return 0.0;
  // an off-grid minimum is interpolated linearly between its neighbouring levels
  const int iy_hi = g.ceil_index(y);
  const int iy_lo = std::abs(g[iy_hi] - y) <= Grid::kTol ? iy_hi : iy_hi - 1;
  const double wt = iy_lo == iy_hi ? 1.0 : (y - g[iy_lo]) / g.h;
  Vec<cplx> fv = detail::sample(g, f);
  // first min index that has not yet produced a drawup from level i
  auto jlo = [&](int i) { return g.first_above(g[i] - b); };
  auto pick = [&](const std::vector<cplx> &row, int lo, int j) { return j < lo ? cplx(0.0) : row[j - lo]; };
  auto blend = [&](const std::vector<cplx> &row, int lo) {
    return wt * pick(row, lo, iy_hi) + (1.0 - wt) * pick(row, lo, iy_lo);
  };
  if (iy_hi < jlo(ix)) return 0.0;
  auto no_drawup = [&](int z, int m) { return g[z] - g[m] < b - Grid::kTol; };

  if (gen.is_tridiagonal() && !opts.force_generic) {
    PsiPair psi = psi_pair(gen, q);
    std::vector<cplx> next, cur; // A(i+1, j) and A(i, j), indexed j - jlo
    int next_lo = 0;
    std::vector<cplx> phi;
    for (int i = N - 1; i >= ix; --i) {
      const int l = g.window_floor(i, a), lo = jlo(i);
      auto up_value = [&](int m) -> cplx {
        if (i + 1 >= N || !no_drawup(i + 1, m) || m < next_lo) return 0.0;
        return next[m - next_lo];
      };
      // phi(m): at state m with running min m; phi(l) is the down-exit payoff
      phi.assign(i - l + 1, 0.0);
      phi[0] = floor_payoff(g, l, i, a, fv(l));
      for (int m = l + 1; m <= i; ++m) {
        HittingCoeffs hc = hitting_coeffs(psi, m, m - 1, i + 1);
        phi[m - l] = hc.down * phi[m - l - 1] + hc.up * up_value(m);
      }
      cur.assign(i - lo + 1, 0.0);
      HittingCoeffs frozen = hitting_coeffs(psi, i, l, i + 1);
      for (int j = lo; j <= i; ++j) {
        if (j <= l) {
          cur[j - lo] = frozen.down * phi[0] + frozen.up * up_value(j);
        } else {
          HittingCoeffs hc = hitting_coeffs(psi, i, j - 1, i + 1);
          cur[j - lo] = hc.down * phi[j - 1 - l] + hc.up * up_value(j);
        }
      }
      std::swap(next, cur);
      next_lo = lo;
    }
    return blend(next, next_lo);
  }

  // generic: min-augmented passage per level
  std::vector<std::vector<cplx>> A(N + 1);
  std::vector<int> Alo(N + 1, 0);
  for (int i = N - 1; i >= ix; --i) {
    const int l = g.window_floor(i, a), lo = jlo(i);
    Window w{l, i};
    Vec<cplx> down = Vec<cplx>::Zero(g.size());
    for (int z = 0; z <= l; ++z) down(z) = floor_payoff(g, z, i, a, fv(z));
    cplx pdown = solve_passage<cplx>(gen, w, Vec<cplx>::Constant(g.size(), q), down)(i);
    std::function<cplx(int, int)> gfun = [&](int z, int m) -> cplx {
      if (z >= N || !no_drawup(z, m) || m < Alo[z] || A[z].empty()) return 0.0;
      return A[z][m - Alo[z]];
    };
    Mat<cplx> R = solve_R<cplx>(gen, w, q, gfun, lo);
    A[i].resize(i - lo + 1);
    Alo[i] = lo;
    for (int j = lo; j <= i; ++j) A[i][j - lo] = pdown + R(i - l - 1, j - lo);
  }
  return blend(A[ix], Alo[ix]);
}

cplx evaluate(const Generator &gen, const QuantityRequest &r, const SolveOptions &opts)
{
  Fn1 f = r.f ? r.f : Fn1([](double) { return cplx(1.0); });
  switch (r.kind) {
  case QuantityKind::DrawdownLaplace_Q: return q_drawdown(gen, r.q, r.a, f, r.x, opts);
  case QuantityKind::DrawdownBeforeDrawup_A: return drawdown_before_drawup(gen, r.q, r.a, r.b, f, r.x, r.y, opts);
  case QuantityKind::OccupationUntilDrawdown_B: {
    cplx q = r.q;
    Fn1 k = r.k ? r.k : Fn1([q](double) { return q; });
    return occupation_until_drawdown(gen, k, r.a, f, r.x, opts);
  }
  case QuantityKind::DrawdownOccupation_C: {
    cplx q = r.q;
    Fn2 k2 = r.k2 ? r.k2 : Fn2([q](double, double) { return q; });
    return drawdown_occupation(gen, k2, r.a, f, r.x, opts);
  }
  case QuantityKind::NthDrawdownNoRecovery_H: return nth_drawdown_no_recovery(gen, r.q, r.a, f, r.x, r.n, opts);
  case QuantityKind::InsuranceNoRecovery_Hsum: return insurance_no_recovery(gen, r.q, r.a, r.x, opts);
  case QuantityKind::NthDrawdownWithRecovery_J: {
    Fn2 f2 = r.f2 ? r.f2 : Fn2([f](double z, double) { return f(z); });
    return nth_drawdown_with_recovery(gen, r.q, r.a, f2, r.x, r.y, r.n, opts);
  }
  case QuantityKind::InsuranceWithRecovery_Jsum: return insurance_with_recovery(gen, r.q, r.a, r.x, r.y, opts);
  }
  return 0.0;
}

} // namespace ddctmc
