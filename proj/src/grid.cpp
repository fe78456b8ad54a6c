#include "ddctmc/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ddctmc/errors.hpp"

namespace ddctmc {

int Grid::index_of(double level) const
{
  int j = floor_index(level);
  if (j < 0 || std::abs(y(j) - level) > kTol) return -1;
  return j;
}

int Grid::floor_index(double level) const
{
  // uniform grid: locate by arithmetic, then fix rounding by a local scan
  long k = static_cast<long>(std::floor((level - x0) / h + 0.5)) - k0;
  int j = static_cast<int>(std::clamp<long>(k, 0, last()));
  while (j < last() && y(j + 1) <= level + kTol) ++j;
  while (j >= 0 && y(j) > level + kTol) --j;
  return j;
}

int Grid::ceil_index(double level) const
{
  int j = floor_index(level);
  if (j >= 0 && std::abs(y(j) - level) <= kTol) return j;
  return j + 1;
}

int Grid::first_above(double level) const { return floor_index(level) + 1; }

int Grid::window_floor(int i, double a) const { return std::max(first_above(y(i) - a) - 1, 0); }

Grid uniform_grid(double x0, double h, long kmin, long kmax)
{
  if (!(h > 0.0) || kmax <= kmin) throw BadBounds("uniform_grid needs h > 0 and at least two states");
  Grid g;
  g.x0 = x0;
  g.h = h;
  g.k0 = kmin;
  g.y.resize(kmax - kmin + 1);
  for (long k = kmin; k <= kmax; ++k) g.y(k - kmin) = x0 + static_cast<double>(k) * h;
  g.eta_x = (kmin <= 0 && kmax >= 0) ? static_cast<int>(-kmin) : -1;
  return g;
}

Grid build_grid(double x0, double a, int N_x, double y_min, double y_max)
{
  if (!(a > 0.0)) throw BadBounds("drawdown level a must be positive");
  if (N_x < 1) throw BadBounds("N_x must be at least 1");
  if (!(y_min < x0 - a)) throw BadBounds("y_min must lie below x0 - a");
  if (!(y_max > x0)) throw BadBounds("y_max must lie above x0");
  double h = a / N_x;
  long kmin = static_cast<long>(std::ceil((y_min - x0) / h - 1e-9));
  long kmax = static_cast<long>(std::floor((y_max - x0) / h + 1e-9));
  return uniform_grid(x0, h, kmin, kmax);
}

} // namespace ddctmc
