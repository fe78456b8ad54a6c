#include "ddctmc/pricing.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "ddctmc/errors.hpp"
#include "ddctmc/generator.hpp"
#include "ddctmc/grid.hpp"
#include "ddctmc/parallel.hpp"

namespace ddctmc {

namespace {

bool is_recovery(QuantityKind k)
{
  return k == QuantityKind::NthDrawdownWithRecovery_J || k == QuantityKind::InsuranceWithRecovery_Jsum;
}

double levy_depth(const RunConfig &cfg)
{
  return cfg.grid.levy_truncation > 0.0 ? cfg.grid.levy_truncation : std::max(4.0, 10.0 * cfg.quantity.a);
}

struct Engine
{
  Generator gen;
  bool levy = false;
};

Engine build_engine(const RunConfig &cfg, int n_x)
{
  const QuantitySpec &qs = cfg.quantity;
  GeneratorOptions go;
  go.allow_negative_rates = cfg.grid.allow_negative_rates;
  if (uses_levy_closed_form(cfg)) {
    const double h = qs.a / n_x;
    double lo = qs.kind == QuantityKind::InsuranceWithRecovery_Jsum ? -levy_depth(cfg) : -qs.a;
    return Engine{build_levy_generator(cfg.model, h, lo, h, go), true};
  }
  Grid g = build_grid(qs.x, qs.a, n_x, cfg.grid.y_min, cfg.grid.y_max);
  return Engine{build_generator(cfg.model, g, go), false};
}

// Laplace transform in T of the time-domain price, 1/q factor included.
std::function<cplx(cplx)> price_transform(const RunConfig &cfg, const Engine &e)
{
  const QuantitySpec qs = cfg.quantity;
  const double rf = cfg.model.r_f;
  const double c = qs.payoff;
  const SolveOptions opts = cfg.solve;
  const Generator *g = &e.gen;
  Fn1 f = [c](double) { return cplx(c); };
  Fn2 f2 = [c](double, double) { return cplx(c); };
  switch (qs.kind) {
  case QuantityKind::DrawdownLaplace_Q:
    return [=](cplx q) { return q_drawdown(*g, q, qs.a, f, qs.x, opts) / q; };
  case QuantityKind::DrawdownBeforeDrawup_A:
    return [=](cplx q) { return drawdown_before_drawup(*g, q, qs.a, qs.b, f, qs.x, qs.y, opts) / q; };
  case QuantityKind::OccupationUntilDrawdown_B:
    return [=](cplx q) {
      Fn1 k = [&](double z) { return (z < qs.xi - Grid::kTol ? q : cplx(0.0)) + rf; };
      return occupation_until_drawdown(*g, k, qs.a, f, qs.x, opts) / q;
    };
  case QuantityKind::DrawdownOccupation_C:
    if (e.levy) return [=](cplx q) { return c * c_levy_closed_form(*g, q, qs.a, qs.xi, rf) / q; };
    return [=](cplx q) {
      Fn2 k2 = [&](double z, double m) { return (m - z > qs.xi + Grid::kTol ? q : cplx(0.0)) + rf; };
      return drawdown_occupation(*g, k2, qs.a, f, qs.x, opts) / q;
    };
  case QuantityKind::NthDrawdownNoRecovery_H:
    return [=](cplx q) { return nth_drawdown_no_recovery(*g, q, qs.a, f, qs.x, qs.n, opts) / q; };
  case QuantityKind::InsuranceNoRecovery_Hsum:
    if (e.levy) return [=](cplx q) { return c * h_levy_closed_form(*g, q + rf, qs.a) / q; };
    return [=](cplx q) { return c * insurance_no_recovery(*g, q + rf, qs.a, qs.x, opts) / q; };
  case QuantityKind::NthDrawdownWithRecovery_J:
    return [=](cplx q) { return nth_drawdown_with_recovery(*g, q, qs.a, f2, qs.x, qs.y, qs.n, opts) / q; };
  case QuantityKind::InsuranceWithRecovery_Jsum:
    if (e.levy) return [=](cplx q) { return c * j_levy_closed_form(*g, q + rf, qs.a, qs.x - qs.y, 0.0) / q; };
    return [=](cplx q) { return c * insurance_with_recovery(*g, q + rf, qs.a, qs.x, qs.y, opts) / q; };
  }
  throw ValidationError("unknown quantity");
}

InversionConfig inversion_for(const RunConfig &cfg, int threads)
{
  InversionConfig ic = cfg.laplace;
  ic.threads = threads;
  return ic;
}

std::string describe(const RunConfig &cfg)
{
  const QuantitySpec &q = cfg.quantity;
  std::ostringstream os;
  os.precision(10);
  os << "a=" << q.a;
  if (q.kind == QuantityKind::DrawdownBeforeDrawup_A) os << " b=" << q.b;
  if (q.kind == QuantityKind::OccupationUntilDrawdown_B || q.kind == QuantityKind::DrawdownOccupation_C)
    os << " xi=" << q.xi;
  if (q.kind == QuantityKind::NthDrawdownNoRecovery_H || q.kind == QuantityKind::NthDrawdownWithRecovery_J)
    os << " n=" << q.n;
  os << " T=" << q.T << " x=" << q.x;
  if (q.kind == QuantityKind::DrawdownBeforeDrawup_A || is_recovery(q.kind)) os << " y=" << q.y;
  os << " r_f=" << cfg.model.r_f << " d=" << cfg.model.d << " sigma=" << cfg.model.sigma;
  os << " y_min=" << cfg.grid.y_min << " y_max=" << cfg.grid.y_max;
  if (uses_levy_closed_form(cfg)) os << " levy_lattice=closed_form";
  if (q.kind == QuantityKind::InsuranceWithRecovery_Jsum) os << " recovery_truncation=" << levy_depth(cfg);
  return os.str();
}

void fill_errors(PriceTable &t)
{
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    PriceRow &r = t.rows[i];
    r.extrapolated.reset();
    r.rel_err_extrapolated.reset();
    if (i > 0) {
      const PriceRow &p = t.rows[i - 1];
      double ratio = static_cast<double>(r.n_x) / p.n_x;
      r.extrapolated = r.n_x == 2 * p.n_x ? richardson(p.value, r.value) : (ratio * r.value - p.value) / (ratio - 1.0);
    }
    if (t.benchmark) {
      double b = *t.benchmark;
      r.abs_err = std::abs(r.value - b);
      if (b != 0.0) r.rel_err = *r.abs_err / std::abs(b);
      if (r.extrapolated && b != 0.0) r.rel_err_extrapolated = std::abs(*r.extrapolated - b) / std::abs(b);
    }
  }
}

// Extrapolated price from continued doubling until four decimals repeat.
double self_benchmark(const RunConfig &cfg, const PriceTable &t, std::string &source)
{
  int n = t.rows.back().n_x;
  double prev_value = t.rows.back().value;
  std::optional<double> prev_ex = t.rows.back().extrapolated;
  auto four = [](double v) { return std::round(v * 1e4); };
  while (2 * n <= cfg.grid.benchmark_max_n_x) {
    n *= 2;
    double v = price_at(cfg, n);
    double ex = richardson(prev_value, v);
    if (prev_ex && four(*prev_ex) == four(ex)) {
      source = "self N_x=" + std::to_string(n);
      return ex;
    }
    prev_value = v;
    prev_ex = ex;
  }
  if (!prev_ex) throw NoBenchmark("self benchmark needs at least two resolutions");
  source = "self unconverged N_x=" + std::to_string(n);
  return *prev_ex;
}

} // namespace

void validate(const RunConfig &cfg)
{
  validate(cfg.model);
  const QuantitySpec &q = cfg.quantity;
  if (!(q.a > 0.0)) throw ValidationError("quantity.a must be positive");
  if (!(q.T > 0.0)) throw ValidationError("quantity.T must be positive");
  if (!std::isfinite(q.payoff)) throw ValidationError("quantity.payoff must be finite");
  if (q.kind == QuantityKind::DrawdownBeforeDrawup_A) {
    if (q.b < q.a) throw UnsupportedRegime("quantity.b must be at least quantity.a");
    if (q.y > q.x) throw ValidationError("quantity.y (running min) must not exceed quantity.x");
  }
  if (is_recovery(q.kind) && q.x > q.y) throw ValidationError("quantity.x must not exceed quantity.y (running max)");
  if ((q.kind == QuantityKind::NthDrawdownNoRecovery_H || q.kind == QuantityKind::NthDrawdownWithRecovery_J) &&
      q.n < 1)
    throw ValidationError("quantity.n must be at least 1");
  const GridSpec &g = cfg.grid;
  if (g.n_x.empty()) throw ValidationError("grid.n_x must list at least one resolution");
  for (std::size_t i = 0; i < g.n_x.size(); ++i) {
    if (g.n_x[i] < 1) throw ValidationError("grid.n_x entries must be positive");
    if (i > 0 && (g.n_x[i] <= g.n_x[i - 1] || g.n_x[i] % g.n_x[i - 1] != 0))
      throw ValidationError("grid.n_x must be increasing, each a multiple of the previous");
  }
  if (!(g.y_min < q.x - q.a) || !(g.y_max > q.x))
    throw BadBounds("grid must satisfy y_min < x - a and y_max > x");
  if (g.levy_truncation < 0.0) throw ValidationError("grid.levy_truncation must be nonnegative");
  if (is_recovery(q.kind) && uses_levy_closed_form(cfg) && q.x - q.y < -levy_depth(cfg))
    throw BadBounds("y - x exceeds the recovery truncation");
  if (cfg.output.benchmark && !std::isfinite(*cfg.output.benchmark))
    throw ValidationError("output.benchmark must be finite");
  validate(cfg.laplace, q.T);
}

bool uses_levy_closed_form(const RunConfig &cfg)
{
  if (cfg.solve.force_generic || !has_jumps(cfg.model)) return false;
  QuantityKind k = cfg.quantity.kind;
  return k == QuantityKind::DrawdownOccupation_C || k == QuantityKind::InsuranceNoRecovery_Hsum ||
         k == QuantityKind::InsuranceWithRecovery_Jsum;
}

double price_at(const RunConfig &cfg, int n_x, double *runtime_sec)
{
  Engine e = build_engine(cfg, n_x);
  auto t0 = std::chrono::steady_clock::now();
  double v = invert(price_transform(cfg, e), cfg.quantity.T, inversion_for(cfg, cfg.threads));
  if (runtime_sec) *runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

PriceTable run_table(const RunConfig &cfg)
{
  validate(cfg);
  PriceTable t;
  t.model = to_string(cfg.model.kind);
  t.quantity = to_string(cfg.quantity.kind);
  t.parameters = describe(cfg);
  const int rows = static_cast<int>(cfg.grid.n_x.size());
  t.rows.resize(rows);
  // rows run concurrently when there are enough threads; otherwise the nodes inside a row do
  const int threads = resolve_threads(cfg.threads);
  const bool row_parallel = rows > 1 && threads >= rows;
  RunConfig inner = cfg;
  inner.threads = row_parallel ? 1 : cfg.threads;
  parallel_for(rows, row_parallel ? threads : 1, [&](int i) {
    PriceRow &r = t.rows[i];
    r.n_x = cfg.grid.n_x[i];
    r.value = price_at(inner, r.n_x, &r.runtime_sec);
  });
  fill_errors(t);
  if (cfg.output.benchmark) {
    t.benchmark = cfg.output.benchmark;
    t.benchmark_source = "config";
  } else if (cfg.output.self_benchmark) {
    t.benchmark = self_benchmark(inner, t, t.benchmark_source);
  }
  fill_errors(t);
  return t;
}

PriceTable run_price(const RunConfig &cfg)
{
  if (cfg.grid.n_x.size() != 1) throw ValidationError("price needs exactly one grid.n_x entry");
  RunConfig c = cfg;
  c.output.self_benchmark = false;
  return run_table(c);
}

double fit_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ValidationError("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ValidationError("slope fit needs distinct abscissae");
  return sxy / sxx;
}

Convergence run_convergence(const RunConfig &cfg)
{
  if (!cfg.output.benchmark && !cfg.output.self_benchmark)
    throw NoBenchmark("convergence needs output.benchmark or output.self_benchmark");
  if (cfg.grid.n_x.size() < 2) throw ValidationError("convergence needs at least two grid.n_x entries");
  PriceTable t = run_table(cfg);
  Convergence c;
  c.benchmark = *t.benchmark;
  constexpr double kFloor = 1e-14;
  c.converged = true;
  for (const PriceRow &r : t.rows) {
    c.log10_n_x.push_back(std::log10(static_cast<double>(r.n_x)));
    double err = *r.abs_err;
    if (err > kFloor * std::max(1.0, std::abs(c.benchmark))) c.converged = false;
    c.log10_abs_err.push_back(std::log10(std::max(err, kFloor)));
  }
  c.slope = c.converged ? 0.0 : fit_slope(c.log10_n_x, c.log10_abs_err);
  return c;
}

std::vector<OracleRow> run_oracle(const RunConfig &cfg, const McConfig &mc, double q)
{
  validate(cfg);
  if (!(q > 0.0)) throw ValidationError("oracle q must be positive");
  const QuantitySpec &qs = cfg.quantity;
  const double rf = cfg.model.r_f;
  GeneratorOptions go;
  go.allow_negative_rates = cfg.grid.allow_negative_rates;
  Grid g = build_grid(qs.x, qs.a, cfg.grid.n_x.front(), cfg.grid.y_min, cfg.grid.y_max);
  Generator gen = build_generator(cfg.model, g, go);

  QuantityRequest req;
  req.kind = qs.kind;
  req.a = qs.a;
  req.b = qs.b;
  req.xi = qs.xi;
  req.n = qs.n;
  req.q = q;
  req.x = qs.x;
  req.y = qs.y;
  const double c = qs.payoff, xi = qs.xi;
  req.f = [c](double) { return cplx(c); };
  req.f2 = [c](double, double) { return cplx(c); };
  // same killing shapes as the pricing transforms, evaluated at a real node
  if (qs.kind == QuantityKind::OccupationUntilDrawdown_B)
    req.k = [=](double z) { return cplx((z < xi - Grid::kTol ? q : 0.0) + rf); };
  if (qs.kind == QuantityKind::DrawdownOccupation_C)
    req.k2 = [=](double z, double m) { return cplx((m - z > xi + Grid::kTol ? q : 0.0) + rf); };
  const double scale = qs.kind == QuantityKind::InsuranceNoRecovery_Hsum ||
                               qs.kind == QuantityKind::InsuranceWithRecovery_Jsum
                           ? c
                           : 1.0;

  const double analytic = scale * evaluate(gen, req, cfg.solve).real();
  std::vector<OracleRow> rows;
  McConfig m = mc;
  if (m.threads == 0) m.threads = cfg.threads;
  McResult r = mc_estimate(gen, req, m);
  OracleRow mr{"mc", analytic, scale * r.estimate, std::abs(scale) * r.std_error, std::nullopt};
  if (mr.std_error > 0.0) mr.z = (mr.estimate - analytic) / mr.std_error;
  rows.push_back(mr);
  try {
    double d = scale * dense_product_solve(gen, req).real();
    rows.push_back(OracleRow{"dense", analytic, d, 0.0, std::nullopt});
  } catch (const TooLarge &) {
    // product chain too large for the direct solve: the row is omitted
  }
  return rows;
}

std::string format_number(double v, bool full_precision)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, full_precision ? "%.17g" : "%.6g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double> &v, bool full)
{
  return v ? format_number(*v, full) : std::string();
}

} // namespace

void write_csv(std::ostream &os, const PriceTable &t, const OutputSpec &out)
{
  const bool full = out.full_precision;
  os << "# model=" << t.model << " quantity=" << t.quantity << '\n';
  os << "# " << t.parameters << '\n';
  if (t.benchmark) os << "# benchmark=" << format_number(*t.benchmark, full) << " source=" << t.benchmark_source << '\n';
  if (out.timing) os << "# runtime_sec: wall time of quantity evaluation and inversion, grid and generator assembly excluded\n";
  os << "N_x,value,abs_err,rel_err,extrapolated,rel_err_extrapolated,runtime_sec\n";
  for (const PriceRow &r : t.rows) {
    os << r.n_x << ',' << format_number(r.value, full) << ',' << opt(r.abs_err, full) << ',' << opt(r.rel_err, full)
       << ',' << opt(r.extrapolated, full) << ',' << opt(r.rel_err_extrapolated, full) << ',';
    if (out.timing) os << format_number(r.runtime_sec, false);
    os << '\n';
  }
}

void write_csv(std::ostream &os, const Convergence &c, const OutputSpec &out)
{
  const bool full = out.full_precision;
  os << "# benchmark=" << format_number(c.benchmark, full) << '\n';
  if (c.converged)
    os << "# slope=converged\n";
  else
    os << "# slope=" << format_number(c.slope, full) << '\n';
  os << "log10_N_x,log10_abs_err\n";
  for (std::size_t i = 0; i < c.log10_n_x.size(); ++i)
    os << format_number(c.log10_n_x[i], full) << ',' << format_number(c.log10_abs_err[i], full) << '\n';
}

void write_csv(std::ostream &os, const std::vector<OracleRow> &rows, const OutputSpec &out)
{
  const bool full = out.full_precision;
  os << "check,analytic,estimate,stderr,z\n";
  for (const OracleRow &r : rows)
    os << r.check << ',' << format_number(r.analytic, full) << ',' << format_number(r.estimate, full) << ','
       << format_number(r.std_error, full) << ',' << opt(r.z, full) << '\n';
}

} // namespace ddctmc
