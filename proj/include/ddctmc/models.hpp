#pragma once

#include <string>

namespace ddctmc {

enum class ModelKind
{
  BS,
  CEV,
  DEJD,
  VG
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string &name);

// Log-price models. Defaults are the benchmark settings; sigma is the VG
// Brownian scale when kind == VG.
struct ModelSpec
{
  ModelKind kind = ModelKind::BS;
  double r_f = 0.5;
  double d = 0.02;
  double sigma = 0.3;
  double beta = -0.25;
  double lambda = 3.0;
  double p_plus = 0.5;
  double p_minus = 0.5;
  double eta_plus = 10.0;
  double eta_minus = 10.0;
  double theta = -2.206;
  double nu_vg = 0.00254;

  static ModelSpec bs();
  static ModelSpec cev();
  static ModelSpec dejd();
  static ModelSpec vg();
};

// Throws ValidationError when the parameters violate the model invariants.
void validate(const ModelSpec &m);

bool has_jumps(const ModelSpec &m);
bool infinite_activity(const ModelSpec &m);
// Constant coefficients in log-price (BS, DEJD, VG).
bool is_levy(const ModelSpec &m);

// Drift of the log-price without the small-jump truncation term.
double drift(const ModelSpec &m, double x);
double diffusion_var(const ModelSpec &m, double x);

// nu([lo, hi]); lo may be -inf, hi may be +inf.
double levy_bin_mass(const ModelSpec &m, double x, double lo, double hi);

// Integrals of y nu(dy) and y^2 nu(dy) over [lo, hi].
double levy_first_moment(const ModelSpec &m, double x, double lo, double hi);
double levy_second_moment(const ModelSpec &m, double x, double lo, double hi);

// int y 1{|y| <= 1} nu(dy): converts drift() to the truncated-compensator convention.
double truncation_mean(const ModelSpec &m, double x);

struct Compensators
{
  double b_bar = 0.0;
  double sigma2_bar = 0.0;
};

// b_bar over R \ [lo, hi] with the 1{|y| <= 1} truncation, sigma2_bar = 1/2 int_lo^hi y^2 nu(dy).
Compensators small_jump_compensators(const ModelSpec &m, double x, double lo, double hi);

// VG Levy density exponents: nu(y) = exp(A y - B |y|) / (nu_vg |y|).
double vg_A(const ModelSpec &m);
double vg_B(const ModelSpec &m);

} // namespace ddctmc
