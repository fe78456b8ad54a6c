#include <algorithm>
#include <cmath>
#include <vector>

#include "ddctmc/quantities.hpp"
#include "detail.hpp"

namespace ddctmc {

using detail::floor_payoff;

std::vector<cplx> nth_drawdown_no_recovery_all(const Generator &gen, cplx q, double a, const Fn1 &f, double x, int n,
                                               const SolveOptions &opts)
{
  if (n < 1) throw ValidationError("n must be at least 1");
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  const int N = gen.last();
  int ix = detail::start_index(g, x, "x");
  std::vector<cplx> out;
  Vec<cplx> prev = detail::sample(g, f); // H_{k-1} over all states
  Vec<cplx> cur(N + 1);

  if (gen.is_tridiagonal() && !opts.force_generic) {
    PsiPair psi = psi_pair(gen, q);
    std::vector<HittingCoeffs> hc(N);
    std::vector<int> lfloor(N);
    for (int i = 1; i < N; ++i) {
      lfloor[i] = g.window_floor(i, a);
      hc[i] = hitting_coeffs(psi, i, lfloor[i], i + 1);
    }
    for (int k = 1; k <= n; ++k) {
      cur.setZero();
      for (int i = N - 1; i >= 1; --i) {
        int l = lfloor[i];
        cur(i) = hc[i].down * floor_payoff(g, l, i, a, prev(l)) + hc[i].up * cur(i + 1);
      }
      out.push_back(cur(ix));
      std::swap(prev, cur);
    }
    return out;
  }

  // top rows are shared by every k
  TopRowSolver solver(gen, opts.incremental);
  std::vector<Vec<cplx>> rows(N);
  Vec<cplx> kq;
  for (int i = N - 1; i >= 1; --i) {
    Window w{g.window_floor(i, a), i};
    kq = Vec<cplx>::Constant(w.size(), q);
    rows[i] = solver.top_row(w, kq);
  }
  auto row = [&](int i, Window) -> const Vec<cplx> & { return rows[i]; };
  for (int k = 1; k <= n; ++k) {
    cur = detail::level_sweep(gen, a, prev, 1, row);
    out.push_back(cur(ix));
    std::swap(prev, cur);
  }
  return out;
}

cplx nth_drawdown_no_recovery(const Generator &gen, cplx q, double a, const Fn1 &f, double x, int n,
                              const SolveOptions &opts)
{
  return nth_drawdown_no_recovery_all(gen, q, a, f, x, n, opts).back();
}

cplx insurance_no_recovery(const Generator &gen, cplx q, double a, double x, const SolveOptions &opts)
{
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  const int N = gen.last();
  int ix = detail::start_index(g, x, "x");
  if (ix <= 0 || ix >= N) return 0.0;

  if (gen.is_tridiagonal() && !opts.force_generic) {
    // H(i) = c_i + D_i H(l_i) + U_i H(i+1); eliminate upward as H(m) = alpha_m + beta_m H(m+1)
    PsiPair psi = psi_pair(gen, q);
    std::vector<cplx> alpha(N, 0.0), beta(N, 0.0);
    for (int i = 1; i < N; ++i) {
      int l = g.window_floor(i, a);
      HittingCoeffs hc = hitting_coeffs(psi, i, l, i + 1);
      cplx A = 0.0, B = 1.0; // H(m) = A + B H(i), composed from m = i-1 down to l
      if (l == 0) {
        B = 0.0;
      } else {
        for (int m = i - 1; m >= l; --m) {
          A = alpha[m] + beta[m] * A;
          B = beta[m] * B;
        }
      }
      cplx c = floor_payoff(g, l, i, a, 1.0) * hc.down;
      cplx den = 1.0 - hc.down * B;
      if (std::abs(den) < 1e-14) throw FixedPointSingular("insurance fixed point is singular");
      alpha[i] = (c + hc.down * A) / den;
      beta[i] = hc.up / den;
    }
    cplx H = 0.0;
    for (int i = N - 1; i >= ix; --i) H = alpha[i] + beta[i] * H;
    return H;
  }

  // (I - P) H = P~ on the interior states
  TopRowSolver solver(gen, opts.incremental);
  const int n = N - 1;
  Mat<cplx> M = Mat<cplx>::Identity(n, n);
  Vec<cplx> rhs = Vec<cplx>::Zero(n);
  Vec<cplx> kq;
  for (int i = 1; i < N; ++i) {
    Window w{g.window_floor(i, a), i};
    kq = Vec<cplx>::Constant(w.size(), q);
    Vec<cplx> P = detail::exit_distribution(gen, w, solver.top_row(w, kq));
    for (int z = 0; z <= N; ++z) {
      if (P(z) == cplx(0)) continue;
      if (z <= w.lo) rhs(i - 1) += floor_payoff(g, z, i, a, P(z));
      if (z >= 1 && z < N) M(i - 1, z - 1) -= P(z);
    }
  }
  Eigen::PartialPivLU<Mat<cplx>> lu(M);
  if (!(lu.rcond() > 1e-14)) throw FixedPointSingular("I - P is numerically singular");
  Vec<cplx> H = lu.solve(rhs);
  return H(ix - 1);
}

namespace {

// Per-level data for the generic recovery recursion at running max y_i:
// P(z) exit distribution of the drawdown window, d(w) = sum_{1 <= z <= l} P(z) E_z[e^{-q T}; hit w first above]
// for w >= i, the passage back to the old max running on (y_0, y_i).
struct RecoveryLevel
{
  int l = 0;
  Vec<cplx> P;
  Vec<cplx> d;
};

// (q - G) on the states 1..N-1, with absorbing rows replaced by identity rows. Every level i needs a
// transposed solve with the leading (i-1)-block, so one LU without pivoting of the transpose serves
// all levels: leading blocks of L U are L_i U_i. The matrix is diagonally dominant when rates are
// nonnegative and Re q > 0; otherwise each level falls back to its own pivoted factorization.
class LeadingSolver
{
public:
  LeadingSolver(const Generator &gen, cplx q)
  {
    const int n = gen.last() - 1;
    G_ = gen.dense();
    M_ = -G_.block(1, 1, n, n).cast<cplx>();
    for (int z = 1; z <= n; ++z) {
      if (gen.absorbing(z)) {
        M_.row(z - 1).setZero();
        M_(z - 1, z - 1) = 1.0;
      } else {
        M_(z - 1, z - 1) += q;
      }
    }
    // column dominance of the transpose makes elimination without pivoting stable
    dominant_ = true;
    for (int r = 0; r < n && dominant_; ++r)
      dominant_ = std::abs(M_(r, r)) >= M_.row(r).cwiseAbs().sum() - std::abs(M_(r, r));
    lu_ = M_.transpose();
    const double scale = std::max(1.0, M_.cwiseAbs().maxCoeff());
    for (int k = 0; k < n; ++k) {
      cplx piv = lu_(k, k);
      if (!(std::abs(piv) > 1e-12 * scale)) {
        ok_ = false;
        return;
      }
      const int rem = n - k - 1;
      if (rem == 0) break;
      lu_.col(k).tail(rem) /= piv;
      lu_.bottomRightCorner(rem, rem).noalias() -= lu_.col(k).tail(rem) * lu_.row(k).tail(rem);
    }
  }

  // Solves (leading m-block of M)^T v = p.
  Vec<cplx> solve_transposed(int m, const Vec<cplx> &p) const
  {
    auto Mt = M_.topLeftCorner(m, m).transpose();
    if (ok_) {
      auto B = lu_.topLeftCorner(m, m);
      Vec<cplx> v = B.triangularView<Eigen::UnitLower>().solve(p);
      B.triangularView<Eigen::Upper>().solveInPlace(v);
      if (dominant_ && v.allFinite()) return v;
      double res = (Mt * v - p).cwiseAbs().maxCoeff();
      double tol = 1e-10 * std::max(1.0, p.cwiseAbs().maxCoeff());
      if (v.allFinite() && res <= tol) return v;
    }
    Mat<cplx> A = Mt;
    return A.partialPivLu().solve(p);
  }

  // Dense generator, absorbing rows zero.
  const Eigen::MatrixXd &dense() const { return G_; }

private:
  Eigen::MatrixXd G_;
  Mat<cplx> M_;
  Mat<cplx> lu_;
  bool ok_ = true;
  bool dominant_ = false;
};

RecoveryLevel recovery_level(const Generator &gen, TopRowSolver &solver, const LeadingSolver &lead, cplx q, double a,
                             int i)
{
  const Grid &g = gen.grid();
  const int N = gen.last();
  RecoveryLevel lv;
  lv.l = g.window_floor(i, a);
  Window w{lv.l, i};
  Vec<cplx> kq = Vec<cplx>::Constant(w.size(), q);
  lv.P = detail::exit_distribution(gen, w, solver.top_row(w, kq));
  lv.d = Vec<cplx>::Zero(N + 1);
  if (i < 2 || lv.l < 1) return lv;
  Vec<cplx> p(i - 1);
  for (int z = 1; z <= i - 1; ++z) p(z - 1) = z <= lv.l && !gen.absorbing(z) ? lv.P(z) : cplx(0);
  Vec<cplx> v = lead.solve_transposed(i - 1, p);
  lv.d.tail(N - i + 1).noalias() = lead.dense().block(1, i, i - 1, N - i + 1).transpose().cast<cplx>() * v;
  return lv;
}

// J(x, y) for x < y: discounted passage to the old max on (y_0, y), then the diagonal value.
cplx recover_to(const Generator &gen, cplx q, int ix, int iy, const Vec<cplx> &diag)
{
  if (ix == iy) return diag(iy);
  Vec<cplx> f = Vec<cplx>::Zero(gen.size());
  for (int w = iy; w <= gen.last(); ++w) f(w) = diag(w);
  return solve_passage<cplx>(gen, Window{0, iy - 1}, Vec<cplx>::Constant(gen.size(), q), f)(ix);
}

} // namespace

std::vector<cplx> nth_drawdown_with_recovery_all(const Generator &gen, cplx q, double a, const Fn2 &f2, double x,
                                                 double y, int n, const SolveOptions &opts)
{
  if (n < 1) throw ValidationError("n must be at least 1");
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  const int N = gen.last();
  int ix = detail::start_index(g, x, "x"), iy = detail::start_index(g, y, "y");
  if (ix > iy) throw ValidationError("x must not exceed the running max y");
  std::vector<cplx> out;
  auto fval = [&](int z, int i) -> cplx { return f2 ? f2(g[z], g[i]) : cplx(1.0); };
  Vec<cplx> prev = Vec<cplx>::Zero(N + 1), cur = Vec<cplx>::Zero(N + 1); // diagonal J_k(y_i, y_i)
  if (iy >= N) return std::vector<cplx>(n, 0.0);

  if (gen.is_tridiagonal() && !opts.force_generic) {
    PsiPair psi = psi_pair(gen, q);
    std::vector<HittingCoeffs> hc(N);
    std::vector<int> lfloor(N);
    for (int i = std::max(iy, 1); i < N; ++i) {
      lfloor[i] = g.window_floor(i, a);
      hc[i] = hitting_coeffs(psi, i, lfloor[i], i + 1);
    }
    for (int k = 1; k <= n; ++k) {
      cur.setZero();
      for (int i = N - 1; i >= iy; --i) {
        int l = lfloor[i];
        cplx below = k == 1 ? fval(l, i) : psi.plus_ratio(l, i) * prev(i);
        cur(i) = hc[i].down * floor_payoff(g, l, i, a, below) + hc[i].up * cur(i + 1);
      }
      out.push_back(ix == iy ? cur(iy) : psi.plus_ratio(ix, iy) * cur(iy));
      std::swap(prev, cur);
    }
    return out;
  }

  TopRowSolver solver(gen, opts.incremental);
  LeadingSolver lead(gen, q);
  std::vector<RecoveryLevel> lv(N);
  for (int i = N - 1; i >= iy; --i) lv[i] = recovery_level(gen, solver, lead, q, a, i);
  for (int k = 1; k <= n; ++k) {
    cur.setZero();
    for (int i = N - 1; i >= iy; --i) {
      const RecoveryLevel &L = lv[i];
      cplx s = 0.0;
      if (k == 1) {
        for (int z = 0; z <= L.l; ++z)
          if (L.P(z) != cplx(0)) s += floor_payoff(g, z, i, a, L.P(z) * fval(z, i));
      } else {
        for (int wv = i; wv < N; ++wv) s += L.d(wv) * prev(wv);
      }
      for (int z = i + 1; z < N; ++z) s += L.P(z) * cur(z);
      cur(i) = s;
    }
    out.push_back(recover_to(gen, q, ix, iy, cur));
    std::swap(prev, cur);
  }
  return out;
}

cplx nth_drawdown_with_recovery(const Generator &gen, cplx q, double a, const Fn2 &f2, double x, double y, int n,
                                const SolveOptions &opts)
{
  return nth_drawdown_with_recovery_all(gen, q, a, f2, x, y, n, opts).back();
}

cplx insurance_with_recovery(const Generator &gen, cplx q, double a, double x, double y, const SolveOptions &opts)
{
  const Grid &g = gen.grid();
  detail::check_level(g, a);
  const int N = gen.last();
  int ix = detail::start_index(g, x, "x"), iy = detail::start_index(g, y, "y");
  if (ix > iy) throw ValidationError("x must not exceed the running max y");
  if (iy >= N) return 0.0;
  Vec<cplx> diag = Vec<cplx>::Zero(N + 1);

  if (gen.is_tridiagonal() && !opts.force_generic) {
    // J(y, y) = [D + U J(y+, y+)] / [1 - D psi+(l) / psi+(y)]
    PsiPair psi = psi_pair(gen, q);
    for (int i = N - 1; i >= iy; --i) {
      int l = g.window_floor(i, a);
      HittingCoeffs hc = hitting_coeffs(psi, i, l, i + 1);
      cplx D = floor_payoff(g, l, i, a, hc.down);
      cplx den = 1.0 - D * psi.plus_ratio(l, i);
      if (std::abs(den) < 1e-14) throw FixedPointSingular("recovery fixed point is singular");
      diag(i) = (D + hc.up * diag(i + 1)) / den;
    }
    return ix == iy ? diag(iy) : psi.plus_ratio(ix, iy) * diag(iy);
  }

  // upper-triangular in the diagonal values: back substitution from the top
  TopRowSolver solver(gen, opts.incremental);
  LeadingSolver lead(gen, q);
  for (int i = N - 1; i >= iy; --i) {
    RecoveryLevel L = recovery_level(gen, solver, lead, q, a, i);
    cplx s = 0.0;
    for (int z = 0; z <= L.l; ++z)
      if (L.P(z) != cplx(0)) s += floor_payoff(g, z, i, a, L.P(z));
    for (int wv = i + 1; wv < N; ++wv) s += (L.d(wv) + L.P(wv)) * diag(wv);
    cplx den = 1.0 - L.d(i);
    if (std::abs(den) < 1e-14) throw FixedPointSingular("recovery fixed point is singular");
    diag(i) = s / den;
  }
  return recover_to(gen, q, ix, iy, diag);
}

} // namespace ddctmc
