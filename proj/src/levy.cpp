#include "ddctmc/quantities.hpp"
#include "detail.hpp"

namespace ddctmc {

namespace {

struct LevyWindow
{
  int i0 = 0; // state 0
  int l = 0;  // window floor, at or below -a
  Vec<cplx> w;
  cplx p_down = 0.0; // exit at or below -a
  cplx p_up = 0.0;   // exit above 0
};

LevyWindow levy_window(const Generator &lat, double a, const std::function<cplx(double)> &k)
{
  if (lat.structure() != Structure::ToeplitzLevy) throw NotLevy("closed form needs a translation-invariant lattice");
  const Grid &g = lat.grid();
  detail::check_level(g, a);
  LevyWindow lw;
  lw.i0 = g.index_of(0.0);
  if (lw.i0 < 1 || lw.i0 >= lat.last()) throw DegenerateWindow("lattice must hold 0 as an interior state");
  lw.l = g.window_floor(lw.i0, a);
  if (!g.is_drawdown(lw.l, lw.i0, a)) throw DegenerateWindow("lattice must extend down to -a");
  Window win{lw.l, lw.i0};
  Vec<cplx> kw(win.size());
  for (int p = 0; p < win.size(); ++p) kw(p) = k(g[win.lo + 1 + p]);
  TopRowSolver solver(lat);
  lw.w = solver.top_row(win, kw);
  for (int p = 0; p < win.size(); ++p) {
    int m = win.lo + 1 + p;
    lw.p_down += lw.w(p) * lat.mass(m, 0, lw.l);
    lw.p_up += lw.w(p) * lat.mass(m, lw.i0 + 1, lat.last());
  }
  return lw;
}

} // namespace

cplx c_levy_closed_form(const Generator &lattice, cplx q, double a, double xi, cplx shift)
{
  LevyWindow lw = levy_window(lattice, a, [&](double x) { return (-x > xi + Grid::kTol ? q : cplx(0)) + shift; });
  return lw.p_down / (1.0 - lw.p_up);
}

cplx h_levy_closed_form(const Generator &lattice, cplx q, double a)
{
  LevyWindow lw = levy_window(lattice, a, [&](double) { return q; });
  cplx den = 1.0 - lw.p_down - lw.p_up;
  if (std::abs(den) < 1e-14) throw FixedPointSingular("insurance closed form is singular");
  return lw.p_down / den;
}

cplx j_levy_closed_form(const Generator &lattice, cplx q, double a, double x, double y)
{
  if (x > y + Grid::kTol) throw ValidationError("x must not exceed the running max y");
  LevyWindow lw = levy_window(lattice, a, [&](double) { return q; });
  const Grid &g = lattice.grid();
  const int N = lattice.last();
  // passage back up to level 0 from below, killed at the lattice bottom
  Vec<cplx> f = Vec<cplx>::Zero(N + 1);
  for (int z = lw.i0; z <= N; ++z) f(z) = 1.0;
  Vec<cplx> phi = solve_passage<cplx>(lattice, Window{0, lw.i0 - 1}, Vec<cplx>::Constant(N + 1, q), f);
  Vec<cplx> P = detail::exit_distribution(lattice, Window{lw.l, lw.i0}, lw.w);
  cplx back = 0.0;
  for (int z = 0; z <= lw.l; ++z) back += P(z) * phi(z);
  cplx den = 1.0 - lw.p_up - back;
  if (std::abs(den) < 1e-14) throw FixedPointSingular("recovery closed form is singular");
  cplx J00 = lw.p_down / den;
  if (y - x <= Grid::kTol) return J00;
  int iz = g.index_of(x - y);
  if (iz < 0) throw ValidationError("y - x must be a lattice offset");
  return phi(iz) * J00;
}

} // namespace ddctmc
