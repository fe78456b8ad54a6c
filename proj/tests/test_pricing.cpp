#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ddctmc/config.hpp"
#include "ddctmc/errors.hpp"
#include "ddctmc/pricing.hpp"

using namespace ddctmc;

namespace {

RunConfig small_config(QuantityKind kind)
{
  RunConfig c;
  c.model = ModelSpec::bs();
  c.model.r_f = 0.05;
  c.quantity.kind = kind;
  c.quantity.T = 0.5;
  c.grid.n_x = {5, 10, 20};
  c.grid.y_min = -1.5;
  c.grid.y_max = 1.5;
  c.threads = 1;
  return c;
}

std::string table_csv(const RunConfig &c)
{
  std::ostringstream os;
  write_csv(os, run_table(c), c.output);
  return os.str();
}

} // namespace

TEST(Config, ParseReal)
{
  EXPECT_DOUBLE_EQ(parse_real("k", "0.25"), 0.25);
  EXPECT_DOUBLE_EQ(parse_real("k", "ln(0.9)"), std::log(0.9));
  EXPECT_DOUBLE_EQ(parse_real("k", "-ln(0.75)"), -std::log(0.75));
  EXPECT_THROW(parse_real("k", "ln(-1)"), ValidationError);
  EXPECT_THROW(parse_real("k", "0.2x"), ValidationError);
  EXPECT_THROW(parse_real("k", ""), ValidationError);
}

TEST(Config, Settings)
{
  Settings s{{"model.kind", "DEJD"}, {"model.r_f", "0.05"}, {"quantity.kind", "H"}, {"quantity.a", "-ln(0.75)"},
             {"grid.n_x", "20,40"}, {"output.precision", "full"}, {"solve.force_generic", "true"}};
  RunConfig c = make_run_config(s);
  EXPECT_EQ(c.model.kind, ModelKind::DEJD);
  EXPECT_EQ(c.model.lambda, ModelSpec::dejd().lambda);
  EXPECT_EQ(c.model.r_f, 0.05);
  EXPECT_EQ(c.quantity.kind, QuantityKind::InsuranceNoRecovery_Hsum);
  EXPECT_DOUBLE_EQ(c.quantity.a, -std::log(0.75));
  EXPECT_EQ(c.grid.n_x, (std::vector<int>{20, 40}));
  EXPECT_TRUE(c.output.full_precision);
  EXPECT_TRUE(c.solve.force_generic);
  EXPECT_FALSE(uses_levy_closed_form(c));
}

TEST(Config, Rejections)
{
  EXPECT_THROW(make_run_config({{"model.volatility", "0.2"}}), ValidationError);
  EXPECT_THROW(make_run_config({{"model.kind", "Heston"}}), ValidationError);
  EXPECT_THROW(make_run_config({{"grid.n_x", "20,abc"}}), ValidationError);
  EXPECT_THROW(make_run_config({{"output.precision", "8"}}), ValidationError);
  EXPECT_THROW(make_run_config({{"solve.incremental", "maybe"}}), ValidationError);
  EXPECT_THROW(make_mc_config({{"oracle.paths", "0"}}), ValidationError);
}

TEST(Config, ShippedConfigsLoad)
{
  for (const char *name : {"table1_bs", "table2_bs", "table2_dejd", "table3_bs", "table3_vg", "table4_bs",
                           "table4_vg", "table5_bs", "table5_cev"}) {
    Settings s = read_ini(std::string(DDCTMC_CONFIG_DIR) + "/" + name + ".ini");
    RunConfig c = make_run_config(s);
    EXPECT_NO_THROW(validate(c)) << name;
    EXPECT_TRUE(c.output.benchmark.has_value()) << name;
    EXPECT_EQ(c.model.r_f, 0.05) << name;
  }
  EXPECT_THROW(read_ini("/nonexistent/x.ini"), ValidationError);
}

TEST(Pricing, ZeroPayoffIsZero)
{
  for (QuantityKind kind : {QuantityKind::DrawdownBeforeDrawup_A, QuantityKind::InsuranceNoRecovery_Hsum,
                            QuantityKind::InsuranceWithRecovery_Jsum}) {
    RunConfig c = small_config(kind);
    c.quantity.payoff = 0.0;
    EXPECT_EQ(price_at(c, 5), 0.0) << to_string(kind);
  }
}

TEST(Pricing, PayoffScalesLinearly)
{
  RunConfig c = small_config(QuantityKind::InsuranceNoRecovery_Hsum);
  double one = price_at(c, 5);
  c.quantity.payoff = 3.0;
  EXPECT_NEAR(price_at(c, 5), 3.0 * one, 1e-13);
  EXPECT_GT(one, 0.0);
}

TEST(Pricing, ExtrapolatedColumnIsRichardson)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  c.output.benchmark = 0.5;
  PriceTable t = run_table(c);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_FALSE(t.rows[0].extrapolated);
  for (int i = 1; i < 3; ++i) {
    EXPECT_EQ(*t.rows[i].extrapolated, richardson(t.rows[i - 1].value, t.rows[i].value));
    EXPECT_EQ(*t.rows[i].abs_err, std::abs(t.rows[i].value - 0.5));
  }
  EXPECT_EQ(t.benchmark_source, "config");
}

TEST(Pricing, NonDoublingResolutionsExtrapolate)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  c.grid.n_x = {5, 15};
  PriceTable t = run_table(c);
  double v1 = t.rows[0].value, v3 = t.rows[1].value;
  EXPECT_NEAR(*t.rows[1].extrapolated, (3.0 * v3 - v1) / 2.0, 1e-15);
}

TEST(Pricing, CsvIsByteIdenticalWithoutTiming)
{
  RunConfig c = small_config(QuantityKind::DrawdownBeforeDrawup_A);
  c.quantity.y = std::log(0.9);
  c.output.timing = false;
  c.output.full_precision = true;
  c.output.benchmark = 0.56;
  std::string a = table_csv(c);
  c.threads = 3;
  std::string b = table_csv(c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("runtime_sec:"), std::string::npos);
  EXPECT_NE(a.find("N_x,value,abs_err,rel_err,extrapolated,rel_err_extrapolated,runtime_sec\n5,"), std::string::npos);
}

TEST(Pricing, PriceNeedsOneResolution)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  EXPECT_THROW(run_price(c), ValidationError);
  c.grid.n_x = {10};
  PriceTable t = run_price(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].value, price_at(c, 10));
}

TEST(Pricing, ConvergenceNeedsBenchmark)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  EXPECT_THROW(run_convergence(c), NoBenchmark);
}

TEST(Pricing, ConvergenceOnExactValues)
{
  RunConfig c = small_config(QuantityKind::InsuranceNoRecovery_Hsum);
  c.quantity.payoff = 0.0;
  c.output.benchmark = 0.0;
  Convergence conv = run_convergence(c);
  EXPECT_TRUE(conv.converged);
  EXPECT_EQ(conv.slope, 0.0);
  std::ostringstream os;
  write_csv(os, conv, c.output);
  EXPECT_NE(os.str().find("# slope=converged"), std::string::npos);
}

TEST(Pricing, ConvergenceSlopeIsNegative)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  c.output.self_benchmark = true;
  c.grid.benchmark_max_n_x = 320;
  Convergence conv = run_convergence(c);
  EXPECT_FALSE(conv.converged);
  EXPECT_LT(conv.slope, -0.5);
}

TEST(Pricing, FitSlope)
{
  EXPECT_NEAR(fit_slope({1.0, 2.0, 3.0}, {5.0, 3.0, 1.0}), -2.0, 1e-15);
  EXPECT_THROW(fit_slope({1.0}, {1.0}), ValidationError);
  EXPECT_THROW(fit_slope({1.0, 1.0}, {1.0, 2.0}), ValidationError);
}

TEST(Pricing, FormatNumber)
{
  EXPECT_EQ(format_number(0.5677386, false), "0.567739");
  EXPECT_EQ(format_number(0.1, true), "0.10000000000000001");
}

TEST(Pricing, Validation)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  c.grid.n_x = {20, 30};
  EXPECT_THROW(validate(c), ValidationError);
  c = small_config(QuantityKind::DrawdownLaplace_Q);
  c.grid.y_min = -0.1;
  EXPECT_THROW(validate(c), BadBounds);
  c = small_config(QuantityKind::DrawdownBeforeDrawup_A);
  c.quantity.b = 0.1;
  EXPECT_THROW(validate(c), UnsupportedRegime);
  c = small_config(QuantityKind::InsuranceWithRecovery_Jsum);
  c.quantity.y = -0.1;
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Pricing, OracleRows)
{
  RunConfig c = small_config(QuantityKind::DrawdownLaplace_Q);
  c.grid.n_x = {4};
  c.grid.y_min = -0.6;
  c.grid.y_max = 0.6;
  McConfig mc;
  mc.n_paths = 20000;
  mc.seed = 7;
  std::vector<OracleRow> rows = run_oracle(c, mc, 1.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].check, "mc");
  EXPECT_LT(std::abs(*rows[0].z), 4.0);
  EXPECT_NEAR(rows[1].estimate, rows[1].analytic, 1e-10);
}
