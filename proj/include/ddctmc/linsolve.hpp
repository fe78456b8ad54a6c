#pragma once

#include <memory>
#include <utility>

#include "ddctmc/generator.hpp"
#include "ddctmc/types.hpp"

namespace ddctmc {

// States lo < j <= hi (indices into the grid).
struct Window
{
  int lo;
  int hi;
  int size() const { return hi - lo; }
  bool contains(int j) const { return j > lo && j <= hi; }
};

// Solves (k - G) P = 0 on the window with P = f outside. k and f are full-length vectors.
// Absorbing states inside the window are pinned to 0.
template <typename Scalar>
Vec<Scalar> solve_passage(const Generator &gen, Window w, const Vec<Scalar> &k, const Vec<Scalar> &f);

// Log-scaled fundamental solutions of a birth-death chain:
// (k - G) psi = 0 on 1..N-1, psi+(0) = 0, psi+(N) = 1, psi-(0) = 1, psi-(N) = 0.
struct PsiPair
{
  Vec<cplx> log_plus;  // log psi+ ; entry 0 unused (psi+(0) = 0)
  Vec<cplx> log_minus; // log psi- ; entry N unused (psi-(N) = 0)
  int last = 0;

  cplx plus(int i) const { return i == 0 ? cplx(0) : std::exp(log_plus(i)); }
  cplx minus(int i) const { return i == last ? cplx(0) : std::exp(log_minus(i)); }
  // psi+(m) / psi+(r) and psi-(m) / psi-(l), without forming either value.
  cplx plus_ratio(int m, int r) const { return m == 0 ? cplx(0) : std::exp(log_plus(m) - log_plus(r)); }
  cplx minus_ratio(int m, int l) const { return m == last ? cplx(0) : std::exp(log_minus(m) - log_minus(l)); }
};

PsiPair psi_pair(const Generator &gen, const Vec<cplx> &k);
PsiPair psi_pair(const Generator &gen, cplx q);

struct HittingCoeffs
{
  cplx up;   // discounted probability of reaching r before l
  cplx down; // discounted probability of reaching l before r
};

// Exit coefficients from m for the open window (l, r) of a birth-death chain, l <= m <= r.
HittingCoeffs hitting_coeffs(const PsiPair &psi, int m, int l, int r);

// Coefficients for the drawdown window (x - a, x]: up to x+, down to (x - a)^-.
HittingCoeffs hitting_coeffs_diffusion(const PsiPair &psi, const Grid &grid, int x, double a);

// Min-augmented passage R(x, y) for x in the window and running min y in [ylo, x]:
// discounted indicator of leaving through the top, times g(exit state, min at exit).
// Row x - lo - 1, column y - ylo; entries with y > x are zero.
template <typename Scalar>
Mat<Scalar> solve_R(const Generator &gen, Window w, Scalar q, const std::function<Scalar(int, int)> &g, int ylo);

// Max-augmented passage S(x, y) for x in the window and running max y in [x, yhi] with killing
// k(x, y); payoff g at the top exit. Row x - lo - 1, column y - lo - 1; entries with y < x are zero.
template <typename Scalar>
Mat<Scalar> solve_S_occ(const Generator &gen, Window w, const std::function<Scalar(int, int)> &k,
                        const std::function<Scalar(int)> &g, int yhi);

// Inverse of A + U V^T given A^{-1}. Throws UpdateSingular when the capacitance matrix is singular.
template <typename Scalar>
Mat<Scalar> smw_refresh(const Mat<Scalar> &prev_inverse, const Mat<Scalar> &U, const Mat<Scalar> &V);

// First row of the window resolvent, w = e_top^T (diag(k) - G_W)^{-1}, where top is the highest
// window state. Reuses the previous result when the generator is translation invariant and the
// killing pattern is unchanged; optionally slides an explicit inverse with rank-2 updates.
class TopRowSolver
{
public:
  explicit TopRowSolver(const Generator &gen, bool incremental = false);
  ~TopRowSolver();
  TopRowSolver(TopRowSolver &&) noexcept;

  // k_window holds the killing at the window states in ascending order.
  const Vec<cplx> &top_row(Window w, const Vec<cplx> &k_window);

  int factorizations() const;
  int reuses() const;
  int updates() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace ddctmc
