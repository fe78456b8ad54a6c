#include "ddctmc/models.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ddctmc/errors.hpp"

namespace ddctmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quad(const std::function<double(double)> &f, double lo, double hi)
{
  if (!(lo < hi)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 12, 1e-12, &err);
}

// Integral of y^p * density over [lo, hi] for the DEJD exponential jump law.
double dejd_moment(const ModelSpec &m, double lo, double hi, int p)
{
  double total = 0.0;
  // Positive jumps: lambda p+ eta+ exp(-eta+ y).
  double plo = std::max(lo, 0.0), phi = hi;
  if (plo < phi) {
    double e = m.eta_plus;
    auto F = [&](double y) {
      if (std::isinf(y)) return 0.0;
      double ex = std::exp(-e * y);
      if (p == 0) return -ex;
      if (p == 1) return -(y + 1.0 / e) * ex;
      return -(y * y + 2.0 * y / e + 2.0 / (e * e)) * ex;
    };
    total += m.lambda * m.p_plus * (F(phi) - F(plo));
  }
  double nlo = lo, nhi = std::min(hi, 0.0);
  if (nlo < nhi) {
    double e = m.eta_minus;
    auto F = [&](double y) {
      if (std::isinf(y)) return 0.0;
      double ex = std::exp(e * y);
      if (p == 0) return ex;
      if (p == 1) return (y - 1.0 / e) * ex;
      return (y * y - 2.0 * y / e + 2.0 / (e * e)) * ex;
    };
    total += m.lambda * m.p_minus * (F(nhi) - F(nlo));
  }
  return total;
}

// Integral of y^p nu(dy) on [lo, hi] for VG, splitting at zero.
double vg_moment(const ModelSpec &m, double lo, double hi, int p)
{
  auto f = [&](double y) {
    if (y == 0.0) return 0.0;
    // y^p / |y| written without the singular factor for p >= 1
    double s = std::exp(vg_A(m) * y - vg_B(m) * std::abs(y)) / m.nu_vg;
    if (p == 1) return y > 0 ? s : -s;
    if (p == 2) return std::abs(y) * s;
    return s / std::abs(y);
  };
  double total = 0.0;
  if (lo < 0.0) total += quad(f, lo, std::min(hi, 0.0));
  if (hi > 0.0) total += quad(f, std::max(lo, 0.0), hi);
  return total;
}

} // namespace

std::string to_string(ModelKind kind)
{
  switch (kind) {
  case ModelKind::BS: return "BS";
  case ModelKind::CEV: return "CEV";
  case ModelKind::DEJD: return "DEJD";
  case ModelKind::VG: return "VG";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string &name)
{
  if (name == "BS" || name == "bs") return ModelKind::BS;
  if (name == "CEV" || name == "cev") return ModelKind::CEV;
  if (name == "DEJD" || name == "dejd" || name == "Kou" || name == "kou") return ModelKind::DEJD;
  if (name == "VG" || name == "vg") return ModelKind::VG;
  throw ValidationError("unknown model kind '" + name + "'");
}

ModelSpec ModelSpec::bs() { return ModelSpec{}; }

ModelSpec ModelSpec::cev()
{
  ModelSpec m;
  m.kind = ModelKind::CEV;
  return m;
}

ModelSpec ModelSpec::dejd()
{
  ModelSpec m;
  m.kind = ModelKind::DEJD;
  return m;
}

ModelSpec ModelSpec::vg()
{
  ModelSpec m;
  m.kind = ModelKind::VG;
  m.sigma = 0.962;
  return m;
}

void validate(const ModelSpec &m)
{
  if (!std::isfinite(m.r_f) || !std::isfinite(m.d)) throw ValidationError("r_f and d must be finite");
  if (!(m.sigma > 0.0)) throw ValidationError("sigma must be positive");
  if (m.kind == ModelKind::DEJD) {
    if (!(m.lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
    if (m.p_plus < 0.0 || m.p_minus < 0.0 || std::abs(m.p_plus + m.p_minus - 1.0) > 1e-12)
      throw ValidationError("p_plus and p_minus must lie in [0,1] and sum to 1");
    if (!(m.eta_plus > 1.0)) throw ValidationError("eta_plus must exceed 1");
    if (!(m.eta_minus > 0.0)) throw ValidationError("eta_minus must be positive");
  }
  if (m.kind == ModelKind::VG) {
    if (!(m.nu_vg > 0.0)) throw ValidationError("nu_vg must be positive");
    if (!(1.0 - m.theta * m.nu_vg - 0.5 * m.sigma * m.sigma * m.nu_vg > 0.0))
      throw ValidationError("VG martingale correction undefined: 1 - theta nu - sigma^2 nu / 2 <= 0");
  }
}

bool has_jumps(const ModelSpec &m) { return m.kind == ModelKind::DEJD || m.kind == ModelKind::VG; }
bool infinite_activity(const ModelSpec &m) { return m.kind == ModelKind::VG; }
bool is_levy(const ModelSpec &m) { return m.kind != ModelKind::CEV; }

double vg_A(const ModelSpec &m) { return m.theta / (m.sigma * m.sigma); }

double vg_B(const ModelSpec &m)
{
  return std::sqrt(m.theta * m.theta + 2.0 * m.sigma * m.sigma / m.nu_vg) / (m.sigma * m.sigma);
}

double drift(const ModelSpec &m, double x)
{
  double base = m.r_f - m.d;
  switch (m.kind) {
  case ModelKind::BS: return base - 0.5 * m.sigma * m.sigma;
  case ModelKind::CEV: return base - 0.5 * diffusion_var(m, x);
  case ModelKind::DEJD: {
    double zeta = m.p_plus * m.eta_plus / (m.eta_plus - 1.0) + m.p_minus * m.eta_minus / (m.eta_minus + 1.0) - 1.0;
    return base - m.lambda * zeta - 0.5 * m.sigma * m.sigma;
  }
  case ModelKind::VG:
    return base + std::log(1.0 - m.theta * m.nu_vg - 0.5 * m.sigma * m.sigma * m.nu_vg) / m.nu_vg;
  }
  return 0.0;
}

double diffusion_var(const ModelSpec &m, double x)
{
  switch (m.kind) {
  case ModelKind::BS:
  case ModelKind::DEJD: return m.sigma * m.sigma;
  case ModelKind::CEV: return m.sigma * m.sigma * std::exp(2.0 * m.beta * x);
  case ModelKind::VG: return 0.0;
  }
  return 0.0;
}

double levy_bin_mass(const ModelSpec &m, double, double lo, double hi)
{
  if (!(lo < hi)) return 0.0;
  switch (m.kind) {
  case ModelKind::BS:
  case ModelKind::CEV: return 0.0;
  case ModelKind::DEJD: return dejd_moment(m, lo, hi, 0);
  case ModelKind::VG:
    if (lo <= 0.0 && hi >= 0.0) throw UnboundedMass("VG bin [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                                    "] contains 0");
    return vg_moment(m, lo, hi, 0);
  }
  return 0.0;
}

double levy_first_moment(const ModelSpec &m, double, double lo, double hi)
{
  if (!(lo < hi) || !has_jumps(m)) return 0.0;
  return m.kind == ModelKind::DEJD ? dejd_moment(m, lo, hi, 1) : vg_moment(m, lo, hi, 1);
}

double levy_second_moment(const ModelSpec &m, double, double lo, double hi)
{
  if (!(lo < hi) || !has_jumps(m)) return 0.0;
  return m.kind == ModelKind::DEJD ? dejd_moment(m, lo, hi, 2) : vg_moment(m, lo, hi, 2);
}

double truncation_mean(const ModelSpec &m, double x) { return levy_first_moment(m, x, -1.0, 1.0); }

Compensators small_jump_compensators(const ModelSpec &m, double x, double lo, double hi)
{
  Compensators c;
  if (!has_jumps(m)) return c;
  // split at +-1 so the truncation indicator is integrated exactly
  c.b_bar = levy_first_moment(m, x, -1.0, std::min(lo, 1.0)) + levy_first_moment(m, x, std::max(hi, -1.0), 1.0);
  c.sigma2_bar = 0.5 * levy_second_moment(m, x, lo, hi);
  return c;
}

} // namespace ddctmc
