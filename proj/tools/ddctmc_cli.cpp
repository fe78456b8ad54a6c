#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ddctmc/config.hpp"
#include "ddctmc/errors.hpp"
#include "ddctmc/generator.hpp"
#include "ddctmc/grid.hpp"
#include "ddctmc/pricing.hpp"

using namespace ddctmc;

namespace {

void emit(const RunConfig &cfg, const std::function<void(std::ostream &)> &write)
{
  if (cfg.output.csv_path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(cfg.output.csv_path);
  if (!os) throw ValidationError("cannot open output.csv '" + cfg.output.csv_path + "'");
  write(os);
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Drawdown quantities of CTMC approximations, priced by Laplace inversion"};
  app.require_subcommand(1);

  std::string config_path;
  Settings overrides;
  std::string precision;
  bool force_generic = false, incremental = false, no_timing = false;
  double aw_decay = 0.0;
  int aw_terms = 0, aw_euler = 0, threads = -1;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("-c,--config", config_path, "INI file with model/quantity/grid/laplace/output sections");
    for (const std::string &key : config_keys())
      sub->add_option_function<std::string>("--" + key, [&overrides, key](const std::string &v) { overrides[key] = v; },
                                             "override " + key);
    sub->add_option("--precision", precision, "6 significant digits (default) or full")
        ->check(CLI::IsMember({"6", "full"}));
    sub->add_flag("--force-generic", force_generic, "skip the birth-death and Levy fast paths");
    sub->add_flag("--incremental", incremental, "slide window inverses with rank-2 updates");
    sub->add_flag("--no-timing", no_timing, "leave the runtime column empty");
    sub->add_option("--aw-decay", aw_decay, "Abate-Whitt decay parameter");
    sub->add_option("--aw-terms", aw_terms, "Abate-Whitt base terms");
    sub->add_option("--aw-euler", aw_euler, "Abate-Whitt Euler terms");
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
  };

  CLI::App *price = app.add_subcommand("price", "price at a single N_x");
  CLI::App *table = app.add_subcommand("table", "prices over the N_x list with extrapolation");
  CLI::App *conv = app.add_subcommand("convergence", "log10 error against log10 N_x and the fitted slope");
  CLI::App *oracle = app.add_subcommand("oracle", "compare against Monte Carlo and the product-chain solve");
  CLI::App *dump = app.add_subcommand("dump-generator", "write the generator for the first N_x as i,j,rate");
  for (CLI::App *sub : {price, table, conv, oracle, dump}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Settings s = config_path.empty() ? Settings{} : read_ini(config_path);
    for (const auto &kv : overrides) s[kv.first] = kv.second;
    if (!precision.empty()) s["output.precision"] = precision;
    if (force_generic) s["solve.force_generic"] = "true";
    if (incremental) s["solve.incremental"] = "true";
    if (no_timing) s["output.timing"] = "false";
    if (threads >= 0) s["solve.threads"] = std::to_string(threads);
    RunConfig cfg = make_run_config(s);
    if (aw_decay != 0.0) cfg.laplace.decay_param = aw_decay;
    if (aw_terms != 0) cfg.laplace.base_terms = aw_terms;
    if (aw_euler != 0) cfg.laplace.euler_terms = aw_euler;

    if (price->parsed()) {
      PriceTable t = run_price(cfg);
      emit(cfg, [&](std::ostream &os) { write_csv(os, t, cfg.output); });
    } else if (table->parsed()) {
      PriceTable t = run_table(cfg);
      emit(cfg, [&](std::ostream &os) { write_csv(os, t, cfg.output); });
    } else if (conv->parsed()) {
      Convergence c = run_convergence(cfg);
      emit(cfg, [&](std::ostream &os) { write_csv(os, c, cfg.output); });
      if (!cfg.output.csv_path.empty()) {
        if (c.converged)
          std::cout << "slope: converged\n";
        else
          std::cout << "slope: " << format_number(c.slope, cfg.output.full_precision) << '\n';
      }
    } else if (oracle->parsed()) {
      McConfig mc = make_mc_config(s);
      auto rows = run_oracle(cfg, mc, oracle_q(s));
      emit(cfg, [&](std::ostream &os) { write_csv(os, rows, cfg.output); });
    } else if (dump->parsed()) {
      validate(cfg);
      GeneratorOptions go;
      go.allow_negative_rates = cfg.grid.allow_negative_rates;
      Grid g = build_grid(cfg.quantity.x, cfg.quantity.a, cfg.grid.n_x.front(), cfg.grid.y_min, cfg.grid.y_max);
      Generator gen = build_generator(cfg.model, g, go);
      emit(cfg, [&](std::ostream &os) { gen.write_csv(os); });
    }
  } catch (const ValidationError &e) {
    std::cerr << "ddctmc: validation error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError &e) {
    std::cerr << "ddctmc: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "ddctmc: numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
