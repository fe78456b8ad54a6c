#include "ddctmc/generator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "ddctmc/errors.hpp"

namespace ddctmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_equal(double a, double b) { return std::abs(a - b) <= 1e-14 * std::max({1.0, std::abs(a), std::abs(b)}); }

void check_neighbours(const Generator &g, const GeneratorOptions &opts)
{
  if (opts.allow_negative_rates) return;
  for (int i = 1; i < g.last(); ++i) {
    if (g.up(i) < 0.0) throw NegativeRate(i, i + 1, g.up(i));
    if (g.down(i) < 0.0) throw NegativeRate(i, i - 1, g.down(i));
    if (g.is_translation_invariant() && i > 2 && i < g.last() - 2) i = g.last() - 3;
  }
}

Generator lattice_generator(const ModelSpec &model, const Grid &grid)
{
  const int N = grid.last();
  const double h = grid.h;
  std::vector<double> pos(N + 2, 0.0), neg(N + 2, 0.0);
  for (int d = 1; d <= N; ++d) {
    pos[d] = levy_bin_mass(model, 0.0, (d - 0.5) * h, (d + 0.5) * h);
    neg[d] = levy_bin_mass(model, 0.0, (-d - 0.5) * h, (-d + 0.5) * h);
  }
  // tails beyond offset D aggregate everything past (D - 1/2) h
  std::vector<double> tail_pos(N + 2, 0.0), tail_neg(N + 2, 0.0);
  tail_pos[N + 1] = levy_bin_mass(model, 0.0, (N + 0.5) * h, kInf);
  tail_neg[N + 1] = levy_bin_mass(model, 0.0, -kInf, -(N + 0.5) * h);
  for (int d = N; d >= 1; --d) {
    tail_pos[d] = tail_pos[d + 1] + pos[d];
    tail_neg[d] = tail_neg[d + 1] + neg[d];
  }
  std::vector<double> bins(2 * N + 1, 0.0), lower(N + 1, 0.0), upper(N + 1, 0.0);
  for (int d = 1; d <= N; ++d) {
    bins[N + d] = pos[d];
    bins[N - d] = neg[d];
  }
  for (int m = 1; m < N; ++m) {
    lower[m] = tail_neg[m];
    upper[m] = tail_pos[N - m];
  }
  const double lo = -0.5 * h, hi = 0.5 * h;
  Compensators c = small_jump_compensators(model, 0.0, lo, hi);
  double b = drift(model, 0.0) + truncation_mean(model, 0.0) - c.b_bar;
  double s2 = diffusion_var(model, 0.0) + c.sigma2_bar;
  double up_diff = b / (2.0 * h) + s2 / (2.0 * h * h);
  double down_diff = -b / (2.0 * h) + s2 / (2.0 * h * h);
  return Generator::toeplitz(grid, std::move(bins), std::move(lower), std::move(upper), up_diff, down_diff);
}

} // namespace

Generator Generator::from_dense(Grid grid, const Eigen::MatrixXd &rates)
{
  const int n = grid.size();
  if (rates.rows() != n || rates.cols() != n) throw ValidationError("rate matrix does not match the grid");
  Generator g;
  g.grid_ = std::move(grid);
  bool tri = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) > 1 && rates(i, j) != 0.0) tri = false;
  if (tri) {
    Eigen::VectorXd up = Eigen::VectorXd::Zero(n), down = Eigen::VectorXd::Zero(n);
    for (int i = 1; i + 1 < n; ++i) {
      up(i) = rates(i, i + 1);
      down(i) = rates(i, i - 1);
    }
    return birth_death(g.grid_, up, down);
  }
  g.dense_ = rates;
  g.dense_.row(0).setZero();
  g.dense_.row(n - 1).setZero();
  for (int i = 1; i + 1 < n; ++i) {
    g.dense_(i, i) = 0.0;
    g.dense_(i, i) = -g.dense_.row(i).sum();
  }
  g.structure_ = Structure::General;
  g.finish();
  return g;
}

Generator Generator::birth_death(Grid grid, const Eigen::VectorXd &up, const Eigen::VectorXd &down)
{
  Generator g;
  const int n = grid.size();
  g.grid_ = std::move(grid);
  g.structure_ = Structure::BirthDeath;
  g.up_ = Eigen::VectorXd::Zero(n);
  g.down_ = Eigen::VectorXd::Zero(n);
  g.diag_ = Eigen::VectorXd::Zero(n);
  for (int i = 1; i + 1 < n; ++i) {
    g.up_(i) = up(i);
    g.down_(i) = down(i);
    g.diag_(i) = -(up(i) + down(i));
  }
  g.finish();
  return g;
}

Generator Generator::toeplitz(Grid grid, std::vector<double> bins, std::vector<double> lower_tail,
                              std::vector<double> upper_tail, double up_diff, double down_diff)
{
  Generator g;
  const int N = grid.last();
  g.grid_ = std::move(grid);
  g.structure_ = Structure::ToeplitzLevy;
  g.bins_ = std::move(bins);
  g.lower_tail_ = std::move(lower_tail);
  g.upper_tail_ = std::move(upper_tail);
  g.up_diff_ = up_diff;
  g.down_diff_ = down_diff;
  // prefix sums of bins give each row's outflow in O(1)
  std::vector<double> prefix(2 * N + 2, 0.0);
  for (int k = 0; k <= 2 * N; ++k) prefix[k + 1] = prefix[k] + (k == N ? 0.0 : g.bins_[k]);
  g.diag_ = Eigen::VectorXd::Zero(N + 1);
  for (int m = 1; m < N; ++m) {
    // offsets -m+1 .. N-m-1 map to bin indices N-m+1 .. 2N-m-1
    double inner = prefix[2 * N - m] - prefix[N - m + 1];
    g.diag_(m) = -(inner + g.lower_tail_[m] + g.upper_tail_[m] + up_diff + down_diff);
  }
  g.finish();
  return g;
}

void Generator::finish()
{
  const int N = last();
  if (structure_ == Structure::BirthDeath) {
    tridiagonal_ = true;
    translation_invariant_ = true;
    for (int i = 2; i < N; ++i)
      if (!near_equal(up_(i), up_(1)) || !near_equal(down_(i), down_(1))) translation_invariant_ = false;
  } else if (structure_ == Structure::ToeplitzLevy) {
    translation_invariant_ = true;
    tridiagonal_ = true;
    for (int k = 0; k <= 2 * N; ++k)
      if (std::abs(k - N) > 1 && bins_[k] != 0.0) tridiagonal_ = false;
    for (int m = 1; m < N; ++m)
      if ((m > 1 && lower_tail_[m] != 0.0) || (m < N - 1 && upper_tail_[m] != 0.0)) tridiagonal_ = false;
  } else {
    tridiagonal_ = false;
    translation_invariant_ = false;
  }
}

double Generator::rate(int i, int j) const
{
  const int N = last();
  if (i <= 0 || i >= N || j < 0 || j > N) return 0.0;
  switch (structure_) {
  case Structure::General: return dense_(i, j);
  case Structure::BirthDeath:
    if (j == i + 1) return up_(i);
    if (j == i - 1) return down_(i);
    if (j == i) return diag_(i);
    return 0.0;
  case Structure::ToeplitzLevy: {
    if (j == i) return diag_(i);
    double r = j == 0 ? lower_tail_[i] : j == N ? upper_tail_[i] : bins_[j - i + N];
    if (j == i + 1) r += up_diff_;
    if (j == i - 1) r += down_diff_;
    return r;
  }
  }
  return 0.0;
}

double Generator::mass(int m, int z0, int z1) const
{
  double s = 0.0;
  if (tridiagonal_) {
    z0 = std::max(z0, m - 1);
    z1 = std::min(z1, m + 1);
  }
  for (int z = z0; z <= z1; ++z)
    if (z != m) s += rate(m, z);
  return s;
}

Eigen::MatrixXd Generator::dense() const { return block(0, size(), 0, size()); }

Eigen::MatrixXd Generator::block(int r0, int nr, int c0, int nc) const
{
  if (structure_ == Structure::General) return dense_.block(r0, c0, nr, nc);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nr, nc);
  for (int r = 0; r < nr; ++r) {
    int i = r0 + r;
    int lo = c0, hi = c0 + nc - 1;
    if (tridiagonal_) {
      lo = std::max(lo, i - 1);
      hi = std::min(hi, i + 1);
    }
    for (int j = lo; j <= hi; ++j) B(r, j - c0) = rate(i, j);
  }
  return B;
}

void Generator::write_csv(std::ostream &os) const
{
  os << "i,j,rate\n";
  os.precision(17);
  for (int i = 0; i < size(); ++i) {
    int lo = tridiagonal_ ? std::max(i - 1, 0) : 0;
    int hi = tridiagonal_ ? std::min(i + 1, last()) : last();
    for (int j = lo; j <= hi; ++j) {
      double r = rate(i, j);
      if (r != 0.0) os << i << ',' << j << ',' << r << '\n';
    }
  }
}

Generator build_generator(const ModelSpec &model, const Grid &grid, const GeneratorOptions &opts)
{
  validate(model);
  if (grid.size() < 3) throw BadBounds("grid needs at least one interior state");
  Generator g;
  if (has_jumps(model)) {
    g = lattice_generator(model, grid);
  } else {
    const int n = grid.size();
    const double h = grid.h;
    Eigen::VectorXd up = Eigen::VectorXd::Zero(n), down = Eigen::VectorXd::Zero(n);
    for (int i = 1; i + 1 < n; ++i) {
      double b = drift(model, grid[i]);
      double s2 = diffusion_var(model, grid[i]);
      up(i) = b / (2.0 * h) + s2 / (2.0 * h * h);
      down(i) = -b / (2.0 * h) + s2 / (2.0 * h * h);
    }
    g = Generator::birth_death(grid, up, down);
  }
  check_neighbours(g, opts);
  return g;
}

Generator build_levy_generator(const ModelSpec &model, double h, double trunc_lo, double trunc_hi,
                               const GeneratorOptions &opts)
{
  validate(model);
  if (!is_levy(model)) throw NotLevy("lattice generator needs constant coefficients (BS, DEJD or VG)");
  if (!(h > 0.0) || !(trunc_lo < trunc_hi)) throw BadBounds("lattice needs h > 0 and trunc_lo < trunc_hi");
  long kmin = static_cast<long>(std::ceil(trunc_lo / h - 1e-9));
  long kmax = static_cast<long>(std::floor(trunc_hi / h + 1e-9));
  Grid grid = uniform_grid(0.0, h, kmin, kmax);
  if (grid.size() < 3) throw BadBounds("lattice needs at least one interior state");
  Generator g = lattice_generator(model, grid);
  check_neighbours(g, opts);
  return g;
}

} // namespace ddctmc
