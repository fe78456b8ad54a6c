#include "ddctmc/linsolve.hpp"

#include <cmath>

#include "ddctmc/errors.hpp"

namespace ddctmc {

namespace {

template <typename Scalar>
void check_residual(const Mat<Scalar> &M, const Vec<Scalar> &x, const Vec<Scalar> &b, const char *what)
{
  if (!x.allFinite()) throw Singular(std::string(what) + ": non-finite solution");
  if (M.rows() == 0) return;
  double res = (M * x - b).cwiseAbs().maxCoeff();
  double scale = M.cwiseAbs().rowwise().sum().maxCoeff() * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
  if (!(res <= kResidualTol * scale)) throw Singular(std::string(what) + ": residual " + std::to_string(res));
}

// diag(k) - G restricted to the window; absorbing rows become identity rows (value pinned to 0).
template <typename Scalar>
Mat<Scalar> window_matrix(const Generator &gen, Window w, const Vec<Scalar> &k_window)
{
  const int n = w.size();
  Mat<Scalar> M = (-gen.block(w.lo + 1, n, w.lo + 1, n)).template cast<Scalar>();
  for (int p = 0; p < n; ++p) {
    int s = w.lo + 1 + p;
    if (gen.absorbing(s)) {
      M.row(p).setZero();
      M(p, p) = Scalar(1);
    } else {
      M(p, p) += k_window(p);
    }
  }
  return M;
}

// Exit flux into the complement of the window for each window row.
template <typename Scalar>
Vec<Scalar> exit_rhs(const Generator &gen, Window w, const Vec<Scalar> &f)
{
  const int n = w.size();
  Vec<Scalar> rhs(n);
  for (int p = 0; p < n; ++p) {
    int m = w.lo + 1 + p;
    rhs(p) = gen.absorbing(m) ? Scalar(0) : gen.row_dot(m, 0, w.lo, f) + gen.row_dot(m, w.hi + 1, gen.last(), f);
  }
  return rhs;
}

template <typename Scalar>
Vec<Scalar> thomas(const Vec<Scalar> &a, Vec<Scalar> b, const Vec<Scalar> &c, Vec<Scalar> r)
{
  const int n = static_cast<int>(b.size());
  for (int i = 1; i < n; ++i) {
    Scalar m = a(i) / b(i - 1);
    b(i) -= m * c(i - 1);
    r(i) -= m * r(i - 1);
  }
  Vec<Scalar> x(n);
  x(n - 1) = r(n - 1) / b(n - 1);
  for (int i = n - 2; i >= 0; --i) x(i) = (r(i) - c(i) * x(i + 1)) / b(i);
  return x;
}

} // namespace

template <typename Scalar>
Vec<Scalar> solve_passage(const Generator &gen, Window w, const Vec<Scalar> &k, const Vec<Scalar> &f)
{
  if (w.lo < -1 || w.hi > gen.last() || k.size() != gen.size() || f.size() != gen.size())
    throw BadBounds("solve_passage: window or vector sizes do not match the grid");
  Vec<Scalar> out = f;
  const int n = w.size();
  if (n <= 0) return out;
  Vec<Scalar> kw = k.segment(w.lo + 1, n);
  Vec<Scalar> rhs = exit_rhs(gen, w, f);
  Vec<Scalar> x;
  if (gen.is_tridiagonal()) {
    Vec<Scalar> a(n), b(n), c(n);
    for (int p = 0; p < n; ++p) {
      int s = w.lo + 1 + p;
      if (gen.absorbing(s)) {
        a(p) = c(p) = Scalar(0);
        b(p) = Scalar(1);
        rhs(p) = Scalar(0);
      } else {
        a(p) = -gen.down(s);
        c(p) = -gen.up(s);
        b(p) = kw(p) + gen.outflow(s);
      }
    }
    x = thomas(a, b, c, rhs);
    if (!x.allFinite()) throw Singular("solve_passage: tridiagonal elimination broke down");
    if (n <= 4096) check_residual(window_matrix(gen, w, kw), x, rhs, "solve_passage");
  } else {
    Mat<Scalar> M = window_matrix(gen, w, kw);
    x = M.partialPivLu().solve(rhs);
    check_residual(M, x, rhs, "solve_passage");
  }
  out.segment(w.lo + 1, n) = x;
  return out;
}

PsiPair psi_pair(const Generator &gen, const Vec<cplx> &k)
{
  if (!gen.is_tridiagonal()) throw NotBirthDeath("psi_pair needs a tridiagonal generator");
  const int N = gen.last();
  PsiPair psi;
  psi.last = N;
  psi.log_plus = Vec<cplx>::Zero(N + 1);
  psi.log_minus = Vec<cplx>::Zero(N + 1);
  Vec<cplx> r(N + 1), s(N + 1);
  r(0) = 0.0;
  for (int i = 1; i < N; ++i) {
    cplx c = k(i) + gen.outflow(i);
    r(i) = gen.up(i) / (c - gen.down(i) * r(i - 1));
  }
  s(N) = 0.0;
  for (int i = N - 1; i >= 1; --i) {
    cplx c = k(i) + gen.outflow(i);
    s(i) = gen.down(i) / (c - gen.up(i) * s(i + 1));
  }
  for (int i = N - 1; i >= 1; --i) {
    if (r(i) == cplx(0) || !std::isfinite(std::abs(r(i)))) throw Singular("psi_pair: zero up rate at state " + std::to_string(i));
    psi.log_plus(i) = psi.log_plus(i + 1) + std::log(r(i));
  }
  for (int i = 1; i < N; ++i) {
    if (s(i) == cplx(0) || !std::isfinite(std::abs(s(i)))) throw Singular("psi_pair: zero down rate at state " + std::to_string(i));
    psi.log_minus(i) = psi.log_minus(i - 1) + std::log(s(i));
  }
  return psi;
}

PsiPair psi_pair(const Generator &gen, cplx q) { return psi_pair(gen, Vec<cplx>::Constant(gen.size(), q)); }

HittingCoeffs hitting_coeffs(const PsiPair &psi, int m, int l, int r)
{
  if (m <= l) return {0.0, 1.0};
  if (m >= r) return {1.0, 0.0};
  // rho(p, q) = psi+(q) psi-(p) / (psi+(p) psi-(q)) for q < p
  auto rho = [&](int p, int q) -> cplx {
    if (q == 0 || p == psi.last) return 0.0;
    return std::exp(psi.log_plus(q) - psi.log_plus(p) + psi.log_minus(p) - psi.log_minus(q));
  };
  cplx den = 1.0 - rho(r, l);
  HittingCoeffs h;
  h.up = psi.plus_ratio(m, r) * (1.0 - rho(m, l)) / den;
  h.down = psi.minus_ratio(m, l) * (1.0 - rho(r, m)) / den;
  return h;
}

HittingCoeffs hitting_coeffs_diffusion(const PsiPair &psi, const Grid &grid, int x, double a)
{
  int l = grid.floor_index(grid[x] - a);
  if (l < 0) throw DegenerateWindow("(x - a) lies below the grid");
  if (x + 1 > grid.last()) throw DegenerateWindow("x has no upper neighbour");
  return hitting_coeffs(psi, x, l, x + 1);
}

template <typename Scalar>
Mat<Scalar> solve_R(const Generator &gen, Window w, Scalar q, const std::function<Scalar(int, int)> &g, int ylo)
{
  const int n = w.size(), lo = w.lo, hi = w.hi, N = gen.last();
  if (n <= 0 || ylo > hi || ylo < 0) throw BadBounds("solve_R: empty window or bad min range");
  Mat<Scalar> M = window_matrix<Scalar>(gen, w, Vec<Scalar>::Constant(n, q));
  auto top_flux = [&](int m, int y) {
    Scalar s(0);
    if (gen.absorbing(m)) return s;
    for (int z = hi + 1; z <= N; ++z) {
      double rate = gen.rate(m, z);
      if (rate != 0.0) s += rate * g(z, y);
    }
    return s;
  };
  // in-window mins, ascending: V(., y) lives on states y..hi
  const int nin = n;
  Mat<Scalar> Vin = Mat<Scalar>::Zero(n, nin); // column y - lo - 1
  for (int y = lo + 1; y <= hi; ++y) {
    int off = y - lo - 1, sz = hi - y + 1;
    Vec<Scalar> rhs(sz);
    for (int p = 0; p < sz; ++p) {
      int m = y + p;
      Scalar s = top_flux(m, y);
      if (!gen.absorbing(m))
        for (int z = lo + 1; z < y; ++z) s += gen.rate(m, z) * Vin(z - lo - 1, z - lo - 1);
      rhs(p) = s;
    }
    Mat<Scalar> sub = M.block(off, off, sz, sz);
    Vec<Scalar> x = sub.partialPivLu().solve(rhs);
    check_residual(sub, x, rhs, "solve_R");
    Vin.col(off).segment(off, sz) = x;
  }
  Mat<Scalar> R = Mat<Scalar>::Zero(n, hi - ylo + 1);
  // frozen mins at or below the window floor share one factorization
  int nfro = std::max(0, std::min(lo, hi) - ylo + 1);
  if (nfro > 0) {
    Mat<Scalar> B(n, nfro);
    for (int c = 0; c < nfro; ++c)
      for (int p = 0; p < n; ++p) B(p, c) = top_flux(lo + 1 + p, ylo + c);
    auto lu = M.partialPivLu();
    Mat<Scalar> X = lu.solve(B);
    for (int c = 0; c < nfro; ++c) check_residual<Scalar>(M, X.col(c), B.col(c), "solve_R");
    R.leftCols(nfro) = X;
  }
  for (int y = std::max(ylo, lo + 1); y <= hi; ++y) R.col(y - ylo) = Vin.col(y - lo - 1);
  return R;
}

template <typename Scalar>
Mat<Scalar> solve_S_occ(const Generator &gen, Window w, const std::function<Scalar(int, int)> &k,
                        const std::function<Scalar(int)> &g, int yhi)
{
  const int n = w.size(), lo = w.lo, hi = w.hi, N = gen.last();
  if (n <= 0 || yhi < hi || yhi > N) throw BadBounds("solve_S_occ: empty window or bad max range");
  Vec<Scalar> top(n);
  for (int p = 0; p < n; ++p) {
    int m = lo + 1 + p;
    Scalar s(0);
    if (!gen.absorbing(m))
      for (int z = hi + 1; z <= N; ++z) {
        double rate = gen.rate(m, z);
        if (rate != 0.0) s += rate * g(z);
      }
    top(p) = s;
  }
  Mat<Scalar> S = Mat<Scalar>::Zero(n, yhi - lo);
  // max at or above the top: frozen, killing k(., y)
  for (int y = hi; y <= yhi; ++y) {
    Vec<Scalar> kw(n);
    for (int p = 0; p < n; ++p) kw(p) = k(lo + 1 + p, y);
    Mat<Scalar> M = window_matrix(gen, w, kw);
    Vec<Scalar> x = M.partialPivLu().solve(top);
    check_residual(M, x, top, "solve_S_occ");
    S.col(y - lo - 1) = x;
  }
  // max inside the window, descending: V(., y) lives on states lo+1..y
  for (int y = hi - 1; y > lo; --y) {
    int sz = y - lo;
    Vec<Scalar> kw(sz);
    for (int p = 0; p < sz; ++p) kw(p) = k(lo + 1 + p, y);
    Mat<Scalar> M = window_matrix(gen, Window{lo, y}, kw);
    Vec<Scalar> rhs(sz);
    for (int p = 0; p < sz; ++p) {
      int m = lo + 1 + p;
      Scalar s = top(p);
      if (!gen.absorbing(m))
        for (int z = y + 1; z <= hi; ++z) s += gen.rate(m, z) * S(z - lo - 1, z - lo - 1);
      rhs(p) = s;
    }
    Vec<Scalar> x = M.partialPivLu().solve(rhs);
    check_residual(M, x, rhs, "solve_S_occ");
    S.col(y - lo - 1).head(sz) = x;
  }
  return S;
}

template <typename Scalar>
Mat<Scalar> smw_refresh(const Mat<Scalar> &prev_inverse, const Mat<Scalar> &U, const Mat<Scalar> &V)
{
  if (U.cols() == 0) return prev_inverse;
  const int r = static_cast<int>(U.cols());
  Mat<Scalar> AU = prev_inverse * U;
  Mat<Scalar> VA = V.transpose() * prev_inverse;
  Mat<Scalar> C = Mat<Scalar>::Identity(r, r) + V.transpose() * AU;
  Eigen::PartialPivLU<Mat<Scalar>> lu(C);
  double rc = lu.rcond();
  if (!(rc > 1e-12)) throw UpdateSingular("capacitance matrix is singular (rcond " + std::to_string(rc) + ")");
  return prev_inverse - AU * lu.solve(VA);
}

struct TopRowSolver::Impl
{
  const Generator &gen;
  bool incremental;
  Vec<cplx> w;
  bool have = false;
  Window last{0, 0};
  Vec<cplx> last_k;
  Mat<cplx> inv; // slot-ordered inverse, slot(s) = s mod n
  bool have_inv = false;
  int since_refresh = 0;
  int n_fact = 0, n_reuse = 0, n_update = 0;

  Impl(const Generator &g, bool inc) : gen(g), incremental(inc) {}

  bool interior(Window x) const { return x.lo >= 0 && x.hi <= gen.last() - 1; }

  int slot(int s, int n) const { return ((s % n) + n) % n; }

  void from_inverse(Window x)
  {
    const int n = x.size();
    w.resize(n);
    int top = slot(x.hi, n);
    for (int p = 0; p < n; ++p) w(p) = inv(top, slot(x.lo + 1 + p, n));
  }

  void fresh(Window x, const Vec<cplx> &kw)
  {
    ++n_fact;
    Mat<cplx> M = window_matrix(gen, x, kw);
    const int n = x.size();
    Eigen::PartialPivLU<Mat<cplx>> lu(M);
    Vec<cplx> e = Vec<cplx>::Zero(n);
    e(n - 1) = 1.0;
    w = lu.transpose().solve(e);
    check_residual<cplx>(M.transpose(), w, e, "TopRowSolver");
    if (incremental) {
      Mat<cplx> Minv = lu.inverse();
      inv.resize(n, n);
      for (int p = 0; p < n; ++p)
        for (int c = 0; c < n; ++c) inv(slot(x.lo + 1 + p, n), slot(x.lo + 1 + c, n)) = Minv(p, c);
      have_inv = true;
      since_refresh = 0;
    }
  }

  // window moved down by one state; replace the old top row/column by the new bottom one
  bool slide(Window x, const Vec<cplx> &kw)
  {
    const int n = x.size();
    const int gone = x.hi + 1, added = x.lo + 1, sig = slot(added, n);
    auto entry = [&](int s, int t, cplx ks) -> cplx {
      if (gen.absorbing(s)) return s == t ? cplx(1) : cplx(0);
      return (s == t ? ks : cplx(0)) - gen.rate(s, t);
    };
    Mat<cplx> U = Mat<cplx>::Zero(n, 2), V = Mat<cplx>::Zero(n, 2);
    U(sig, 0) = 1.0;
    V(sig, 1) = 1.0;
    for (int c = 0; c < n; ++c) {
      int t_new = x.lo + 1 + c;
      int sn = slot(t_new, n);
      // state that occupied slot sn in the old window
      int s_old_at = (sn == sig) ? gone : t_new;
      cplx new_row = entry(added, t_new, kw(0));
      cplx old_row = entry(gone, s_old_at, last_k(n - 1));
      V(sn, 0) = new_row - old_row;
      if (sn != sig) {
        cplx new_col = entry(t_new, added, kw(c));
        cplx old_col = entry(t_new, gone, kw(c));
        U(sn, 1) = new_col - old_col;
      }
    }
    try {
      inv = smw_refresh<cplx>(inv, U, V);
    } catch (const UpdateSingular &) {
      return false;
    }
    ++n_update;
    ++since_refresh;
    from_inverse(x);
    Mat<cplx> M = window_matrix(gen, x, kw);
    Vec<cplx> e = Vec<cplx>::Zero(n);
    e(n - 1) = 1.0;
    double res = (M.transpose() * w - e).cwiseAbs().maxCoeff();
    return res <= 1e-9 * std::max(1.0, M.cwiseAbs().maxCoeff() * w.cwiseAbs().maxCoeff());
  }

  const Vec<cplx> &top_row(Window x, const Vec<cplx> &kw)
  {
    const int n = x.size();
    if (n <= 0) throw BadBounds("TopRowSolver: empty window");
    if (have && gen.is_translation_invariant() && interior(x) && interior(last) && n == last.size() &&
        kw == last_k) {
      ++n_reuse;
      last = x;
      return w;
    }
    bool done = false;
    if (incremental && have_inv && n == last.size() && x.hi == last.hi - 1 && since_refresh < 32 &&
        kw.tail(n - 1) == last_k.head(n - 1))
      done = slide(x, kw);
    if (!done) fresh(x, kw);
    have = true;
    last = x;
    last_k = kw;
    return w;
  }
};

TopRowSolver::TopRowSolver(const Generator &gen, bool incremental)
  : impl_(std::make_unique<Impl>(gen, incremental))
{}
TopRowSolver::~TopRowSolver() = default;
TopRowSolver::TopRowSolver(TopRowSolver &&) noexcept = default;

const Vec<cplx> &TopRowSolver::top_row(Window w, const Vec<cplx> &k_window) { return impl_->top_row(w, k_window); }
int TopRowSolver::factorizations() const { return impl_->n_fact; }
int TopRowSolver::reuses() const { return impl_->n_reuse; }
int TopRowSolver::updates() const { return impl_->n_update; }

template Vec<double> solve_passage(const Generator &, Window, const Vec<double> &, const Vec<double> &);
template Vec<cplx> solve_passage(const Generator &, Window, const Vec<cplx> &, const Vec<cplx> &);
template Mat<double> solve_R(const Generator &, Window, double, const std::function<double(int, int)> &, int);
template Mat<cplx> solve_R(const Generator &, Window, cplx, const std::function<cplx(int, int)> &, int);
template Mat<double> solve_S_occ(const Generator &, Window, const std::function<double(int, int)> &,
                                 const std::function<double(int)> &, int);
template Mat<cplx> solve_S_occ(const Generator &, Window, const std::function<cplx(int, int)> &,
                               const std::function<cplx(int)> &, int);
template Mat<double> smw_refresh(const Mat<double> &, const Mat<double> &, const Mat<double> &);
template Mat<cplx> smw_refresh(const Mat<cplx> &, const Mat<cplx> &, const Mat<cplx> &);

} // namespace ddctmc
