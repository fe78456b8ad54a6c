#pragma once

#include <cmath>
#include <functional>

#include "ddctmc/errors.hpp"
#include "ddctmc/generator.hpp"
#include "ddctmc/linsolve.hpp"

namespace ddctmc::detail {

inline Vec<cplx> sample(const Grid &g, const Fn1 &f, cplx dflt = 1.0)
{
  Vec<cplx> v(g.size());
  for (int j = 0; j < g.size(); ++j) v(j) = f ? f(g[j]) : dflt;
  return v;
}

inline int start_index(const Grid &g, double x, const char *what)
{
  int i = g.index_of(x);
  if (i < 0) throw ValidationError(std::string(what) + " is not a grid point");
  return i;
}

inline void check_level(const Grid &g, double a)
{
  if (!(a > 0.0)) throw ValidationError("drawdown level a must be positive");
  double r = a / g.h;
  if (std::abs(r - std::round(r)) > 1e-6 * std::max(1.0, r))
    throw ValidationError("drawdown level a must be a multiple of the grid step");
}

// Payoff on landing at the window floor l from level i; landing on y_0 without a drawdown is absorption.
inline cplx floor_payoff(const Grid &g, int l, int i, double a, cplx value)
{
  return g.is_drawdown(l, i, a) ? value : cplx(0);
}

// Generic backward recursion over running-max levels i = N-1 .. i_stop:
//   V(i) = w_i . (flux of the window rows into z <= l_i weighted by below(z)
//                 + flux into z > i weighted by V(z)),  V(N) = 0,
// where w_i is the top row of the window resolvent supplied by `row`.
// Flux sums are carried from level to level, so each level costs O(window + N).
inline Vec<cplx> level_sweep(const Generator &gen, double a, const Vec<cplx> &below, int i_stop,
                             const std::function<const Vec<cplx> &(int, Window)> &row)
{
  const Grid &g = gen.grid();
  const int N = gen.last();
  Vec<cplx> V = Vec<cplx>::Zero(N + 1);
  Vec<cplx> b0 = below;
  b0(0) = 0.0;
  Vec<cplx> up = Vec<cplx>::Zero(N + 1), dn = Vec<cplx>::Zero(N + 1);
  int prev_l = -1;
  for (int i = N - 1; i >= i_stop; --i) {
    const int l = g.window_floor(i, a);
    if (prev_l < 0) {
      for (int m = l + 1; m <= i; ++m) {
        up(m) = gen.row_dot(m, i + 1, N, V);
        dn(m) = gen.row_dot(m, 0, l, b0);
      }
    } else {
      for (int m = std::max(l, prev_l) + 1; m <= i; ++m) {
        up(m) += gen.rate(m, i + 1) * V(i + 1);
        if (l < prev_l) dn(m) -= gen.row_dot(m, l + 1, prev_l, b0);
      }
      for (int m = l + 1; m <= std::min(prev_l, i); ++m) {
        up(m) = gen.row_dot(m, i + 1, N, V);
        dn(m) = gen.row_dot(m, 0, l, b0);
      }
    }
    prev_l = l;
    const bool land0 = g.is_drawdown(0, i, a);
    const Vec<cplx> &w = row(i, Window{l, i});
    cplx v = 0.0;
    for (int p = 0; p < i - l; ++p) {
      int m = l + 1 + p;
      cplx r = up(m) + dn(m);
      if (land0) r += gen.rate(m, 0) * below(0);
      v += w(p) * r;
    }
    V(i) = v;
  }
  return V;
}

// Exit distribution of the window (l, i] started at its top: P(z) = sum_m w(m) G(m, z), z outside.
inline Vec<cplx> exit_distribution(const Generator &gen, Window win, const Vec<cplx> &w)
{
  const int N = gen.last();
  Vec<cplx> P = Vec<cplx>::Zero(N + 1);
  for (int p = 0; p < win.size(); ++p) {
    int m = win.lo + 1 + p;
    if (gen.absorbing(m)) continue;
    int z0 = 0, z1 = N;
    if (gen.is_tridiagonal()) {
      z0 = std::max(m - 1, 0);
      z1 = std::min(m + 1, N);
    }
    for (int z = z0; z <= z1; ++z)
      if (!win.contains(z)) P(z) += w(p) * gen.rate(m, z);
  }
  return P;
}

} // namespace ddctmc::detail
