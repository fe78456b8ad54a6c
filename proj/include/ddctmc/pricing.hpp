#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddctmc/laplace.hpp"
#include "ddctmc/models.hpp"
#include "ddctmc/oracle.hpp"
#include "ddctmc/quantities.hpp"

namespace ddctmc {

struct QuantitySpec
{
  QuantityKind kind = QuantityKind::DrawdownBeforeDrawup_A;
  double a = 0.2;
  double b = 0.3;
  double xi = 0.1;
  int n = 1;
  double T = 0.5;
  double x = 0.0; // log of the starting price
  double y = 0.0; // running min (A) or running max (J)
  // Constant payoff, or the amount paid per event for the insurance sums.
  double payoff = 1.0;
};

struct GridSpec
{
  std::vector<int> n_x{20, 40, 80, 160};
  double y_min = -4.0;
  double y_max = 4.0;
  // Left truncation of the recovery window on Levy lattices; 0 means max(4, 10 a).
  double levy_truncation = 0.0;
  bool allow_negative_rates = false;
  // Largest N_x tried when the benchmark is computed by continued doubling.
  int benchmark_max_n_x = 2560;
};

struct OutputSpec
{
  std::string csv_path; // empty: stdout
  std::optional<double> benchmark;
  bool self_benchmark = false;
  bool full_precision = false;
  bool timing = true;
};

struct RunConfig
{
  ModelSpec model;
  QuantitySpec quantity;
  GridSpec grid;
  InversionConfig laplace;
  OutputSpec output;
  SolveOptions solve;
  int threads = 0;
};

void validate(const RunConfig &cfg);

struct PriceRow
{
  int n_x = 0;
  double value = 0.0;
  std::optional<double> abs_err, rel_err;
  std::optional<double> extrapolated, rel_err_extrapolated;
  double runtime_sec = 0.0;
};

struct PriceTable
{
  std::string model;
  std::string quantity;
  std::string parameters;
  std::optional<double> benchmark;
  std::string benchmark_source; // "config", "self" or empty
  std::vector<PriceRow> rows;
};

// Time-domain price at one grid resolution. runtime_sec, when given, receives the wall time of
// quantity evaluation plus inversion (grid and generator assembly excluded).
double price_at(const RunConfig &cfg, int n_x, double *runtime_sec = nullptr);

// True when the request is answered by a closed form on a Levy lattice.
bool uses_levy_closed_form(const RunConfig &cfg);

PriceTable run_price(const RunConfig &cfg);
PriceTable run_table(const RunConfig &cfg);

struct Convergence
{
  std::vector<double> log10_n_x;
  std::vector<double> log10_abs_err;
  double slope = 0.0;
  // Every error is at rounding level; the slope is then undefined and reported as 0.
  bool converged = false;
  double benchmark = 0.0;
};

// Throws NoBenchmark when no benchmark is configured and self_benchmark is off.
Convergence run_convergence(const RunConfig &cfg);

struct OracleRow
{
  std::string check; // "mc" or "dense"
  double analytic = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> z;
};

// Compares the engine against the simulation and the product-chain solve at a real Laplace
// argument q, on the first configured N_x.
std::vector<OracleRow> run_oracle(const RunConfig &cfg, const McConfig &mc, double q = 1.0);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double> &x, const std::vector<double> &y);

std::string format_number(double v, bool full_precision);
void write_csv(std::ostream &os, const PriceTable &table, const OutputSpec &out);
void write_csv(std::ostream &os, const Convergence &conv, const OutputSpec &out);
void write_csv(std::ostream &os, const std::vector<OracleRow> &rows, const OutputSpec &out);

} // namespace ddctmc
