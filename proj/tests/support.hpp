#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "ddctmc/generator.hpp"
#include "ddctmc/grid.hpp"
#include "ddctmc/quantities.hpp"

namespace ddctmc::fixtures {

inline ModelSpec table_model(ModelSpec m)
{
  m.r_f = 0.05;
  return m;
}

// Random birth-death chain on n states, step h.
inline Generator random_birth_death(std::mt19937_64 &rng, int n, double h, long k0)
{
  std::uniform_real_distribution<double> U(3.0, 30.0);
  Eigen::VectorXd up = Eigen::VectorXd::Zero(n), down = Eigen::VectorXd::Zero(n);
  for (int i = 1; i + 1 < n; ++i) {
    up(i) = U(rng);
    down(i) = U(rng);
  }
  return Generator::birth_death(uniform_grid(0.0, h, k0, k0 + n - 1), up, down);
}

// Random generator with jumps to every state (sparser far away).
inline Generator random_jump(std::mt19937_64 &rng, int n, double h, long k0)
{
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double scale = std::abs(i - j) == 1 ? 25.0 : 8.0 / std::abs(i - j);
      if (U(rng) < 0.8) G(i, j) = scale * U(rng);
    }
  return Generator::from_dense(uniform_grid(0.0, h, k0, k0 + n - 1), G);
}

inline const QuantityKind kAll[] = {
  QuantityKind::DrawdownLaplace_Q,         QuantityKind::DrawdownBeforeDrawup_A,
  QuantityKind::OccupationUntilDrawdown_B, QuantityKind::DrawdownOccupation_C,
  QuantityKind::NthDrawdownNoRecovery_H,   QuantityKind::InsuranceNoRecovery_Hsum,
  QuantityKind::NthDrawdownWithRecovery_J, QuantityKind::InsuranceWithRecovery_Jsum};

// Random request on the grid: a = k_a h, start at an interior state.
inline QuantityRequest random_request(std::mt19937_64 &rng, const Grid &g, QuantityKind kind, int k_a)
{
  std::uniform_real_distribution<double> U(0.0, 1.0);
  QuantityRequest r;
  r.kind = kind;
  r.a = k_a * g.h;
  r.b = r.a + std::floor(U(rng) * 3) * g.h;
  r.xi = std::floor(U(rng) * k_a) * g.h + 0.5 * g.h;
  r.n = 1 + static_cast<int>(U(rng) * 3);
  r.q = 0.5 + 3.5 * U(rng);
  double q = r.q.real(), xi = r.xi, shift = 0.3 * U(rng);
  r.k = [=](double z) { return cplx(z < xi ? q : 0.2 * q); };
  r.k2 = [=](double z, double m) { return cplx((m - z > xi ? q : 0.0) + shift + 0.1); };
  r.f = [](double z) { return cplx(1.0 + 0.5 * std::sin(7.0 * z)); };
  r.f2 = [](double z, double m) { return cplx(1.0 + 0.3 * std::cos(5.0 * z) + 0.2 * m); };
  int ix = 1 + static_cast<int>(U(rng) * (g.size() - 2));
  r.x = g[ix];
  if (kind == QuantityKind::DrawdownBeforeDrawup_A) {
    int lo = std::max(0, ix - static_cast<int>(U(rng) * 3));
    // sometimes off-grid
    r.y = U(rng) < 0.3 && lo > 0 ? g[lo] - 0.37 * g.h : g[lo];
  }
  if (kind == QuantityKind::NthDrawdownWithRecovery_J || kind == QuantityKind::InsuranceWithRecovery_Jsum) {
    int iy = std::min(g.last(), ix + static_cast<int>(U(rng) * 4));
    r.y = g[iy];
  }
  return r;
}

} // namespace ddctmc::fixtures
