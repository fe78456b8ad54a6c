#pragma once

#include <Eigen/Dense>

namespace ddctmc {

// Uniform state grid y_j = x0 + (k0 + j) h, j = 0..N. The end states are absorbing.
struct Grid
{
  double x0 = 0.0;
  double h = 0.0;
  long k0 = 0;
  int eta_x = 0;
  Eigen::VectorXd y;

  int size() const { return static_cast<int>(y.size()); }
  int last() const { return size() - 1; }
  double operator[](int j) const { return y(j); }

  // Index of an exact grid level, or -1.
  int index_of(double level) const;
  // sup{j : y_j <= level}, or -1 when level is below the grid.
  int floor_index(double level) const;
  // min{j : y_j >= level}, or size() when level is above the grid.
  int ceil_index(double level) const;
  // min{j : y_j > level}, or size().
  int first_above(double level) const;

  // Lower exit state for the drawdown window (y_i - a, y_i]; clipped at 0.
  int window_floor(int i, double a) const;
  // True when landing on z is a drawdown from running max y_i.
  bool is_drawdown(int z, int i, double a) const { return y(z) <= y(i) - a + kTol; }

  static constexpr double kTol = 1e-10;
};

Grid uniform_grid(double x0, double h, long kmin, long kmax);

// Step a / N_x on (x0 - a, x0], extended with the same step and clipped to [y_min, y_max].
Grid build_grid(double x0, double a, int N_x, double y_min, double y_max);

} // namespace ddctmc
