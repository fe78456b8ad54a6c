#include "ddctmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ddctmc/errors.hpp"

namespace ddctmc {

const std::vector<std::string> &config_keys()
{
  static const std::vector<std::string> keys{
      "model.kind",          "model.r_f",           "model.d",         "model.sigma",          "model.beta",
      "model.lambda",        "model.p_plus",        "model.p_minus",   "model.eta_plus",       "model.eta_minus",
      "model.theta",         "model.nu",            "quantity.kind",   "quantity.a",           "quantity.b",
      "quantity.xi",         "quantity.n",          "quantity.T",      "quantity.x",           "quantity.y",
      "quantity.payoff",     "grid.n_x",            "grid.y_min",      "grid.y_max",           "grid.levy_truncation",
      "grid.allow_negative_rates", "grid.benchmark_max_n_x", "laplace.decay", "laplace.terms", "laplace.euler",
      "output.csv",          "output.benchmark",    "output.self_benchmark", "output.precision", "output.timing",
      "solve.force_generic", "solve.incremental",   "solve.threads",   "oracle.paths",         "oracle.seed",
      "oracle.horizon_cap",  "oracle.q"};
  return keys;
}

Settings read_ini(const std::string &path)
{
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ValidationError(std::string("cannot read config: ") + e.what());
  }
  Settings s;
  for (const auto &[section, body] : tree) {
    if (body.empty()) throw ValidationError("config key '" + section + "' is outside a section");
    for (const auto &[key, value] : body) s[section + "." + key] = value.get_value<std::string>();
  }
  return s;
}

double parse_real(const std::string &key, const std::string &text)
{
  std::string t = text;
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  double sign = 1.0;
  if (t.rfind("-ln(", 0) == 0) {
    sign = -1.0;
    t.erase(0, 1);
  }
  bool log = t.rfind("ln(", 0) == 0 && t.size() > 4 && t.back() == ')';
  if (log) t = t.substr(3, t.size() - 4);
  std::istringstream is(t);
  double v;
  if (!(is >> v) || !is.eof()) throw ValidationError("config key '" + key + "': cannot parse '" + text + "' as a number");
  if (log) {
    if (!(v > 0.0)) throw ValidationError("config key '" + key + "': ln needs a positive argument");
    v = std::log(v);
  }
  return sign * v;
}

namespace {

long parse_integer(const std::string &key, const std::string &text)
{
  std::istringstream is(text);
  long v;
  if (!(is >> v) || !(is >> std::ws).eof())
    throw ValidationError("config key '" + key + "': cannot parse '" + text + "' as an integer");
  return v;
}

bool parse_bool(const std::string &key, const std::string &text)
{
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ValidationError("config key '" + key + "': expected true or false, got '" + text + "'");
}

std::vector<int> parse_int_list(const std::string &key, const std::string &text)
{
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_integer(key, item)));
  if (out.empty()) throw ValidationError("config key '" + key + "' is empty");
  return out;
}

void check_keys(const Settings &s)
{
  const auto &keys = config_keys();
  for (const auto &kv : s)
    if (std::find(keys.begin(), keys.end(), kv.first) == keys.end())
      throw ValidationError("unknown config key '" + kv.first + "'");
}

} // namespace

RunConfig make_run_config(const Settings &s)
{
  check_keys(s);
  RunConfig c;
  auto get = [&](const std::string &k) -> const std::string * {
    auto it = s.find(k);
    return it == s.end() ? nullptr : &it->second;
  };
  // the model kind picks the defaults the other keys override
  if (auto v = get("model.kind")) {
    switch (parse_model_kind(*v)) {
    case ModelKind::BS: c.model = ModelSpec::bs(); break;
    case ModelKind::CEV: c.model = ModelSpec::cev(); break;
    case ModelKind::DEJD: c.model = ModelSpec::dejd(); break;
    case ModelKind::VG: c.model = ModelSpec::vg(); break;
    }
  }
  auto real = [&](const std::string &k, double &dst) {
    if (auto v = get(k)) dst = parse_real(k, *v);
  };
  auto integer = [&](const std::string &k, int &dst) {
    if (auto v = get(k)) dst = static_cast<int>(parse_integer(k, *v));
  };
  auto flag = [&](const std::string &k, bool &dst) {
    if (auto v = get(k)) dst = parse_bool(k, *v);
  };
  real("model.r_f", c.model.r_f);
  real("model.d", c.model.d);
  real("model.sigma", c.model.sigma);
  real("model.beta", c.model.beta);
  real("model.lambda", c.model.lambda);
  real("model.p_plus", c.model.p_plus);
  real("model.p_minus", c.model.p_minus);
  real("model.eta_plus", c.model.eta_plus);
  real("model.eta_minus", c.model.eta_minus);
  real("model.theta", c.model.theta);
  real("model.nu", c.model.nu_vg);

  if (auto v = get("quantity.kind")) c.quantity.kind = parse_quantity_kind(*v);
  real("quantity.a", c.quantity.a);
  real("quantity.b", c.quantity.b);
  real("quantity.xi", c.quantity.xi);
  integer("quantity.n", c.quantity.n);
  real("quantity.T", c.quantity.T);
  real("quantity.x", c.quantity.x);
  real("quantity.y", c.quantity.y);
  real("quantity.payoff", c.quantity.payoff);

  if (auto v = get("grid.n_x")) c.grid.n_x = parse_int_list("grid.n_x", *v);
  real("grid.y_min", c.grid.y_min);
  real("grid.y_max", c.grid.y_max);
  real("grid.levy_truncation", c.grid.levy_truncation);
  flag("grid.allow_negative_rates", c.grid.allow_negative_rates);
  integer("grid.benchmark_max_n_x", c.grid.benchmark_max_n_x);

  real("laplace.decay", c.laplace.decay_param);
  integer("laplace.terms", c.laplace.base_terms);
  integer("laplace.euler", c.laplace.euler_terms);

  if (auto v = get("output.csv")) c.output.csv_path = *v;
  if (auto v = get("output.benchmark")) c.output.benchmark = parse_real("output.benchmark", *v);
  flag("output.self_benchmark", c.output.self_benchmark);
  if (auto v = get("output.precision")) {
    if (*v == "full")
      c.output.full_precision = true;
    else if (*v == "6")
      c.output.full_precision = false;
    else
      throw ValidationError("output.precision must be 6 or full");
  }
  flag("output.timing", c.output.timing);

  flag("solve.force_generic", c.solve.force_generic);
  flag("solve.incremental", c.solve.incremental);
  integer("solve.threads", c.threads);
  if (c.threads < 0) throw ValidationError("solve.threads must be nonnegative");
  return c;
}

McConfig make_mc_config(const Settings &s)
{
  check_keys(s);
  McConfig m;
  if (auto it = s.find("oracle.paths"); it != s.end()) m.n_paths = parse_integer(it->first, it->second);
  if (auto it = s.find("oracle.seed"); it != s.end()) {
    long v = parse_integer(it->first, it->second);
    if (v < 0) throw ValidationError("oracle.seed must be nonnegative");
    m.seed = static_cast<std::uint64_t>(v);
  }
  if (auto it = s.find("oracle.horizon_cap"); it != s.end()) m.horizon_cap = parse_real(it->first, it->second);
  if (m.n_paths < 1) throw ValidationError("oracle.paths must be at least 1");
  if (!(m.horizon_cap > 0.0)) throw ValidationError("oracle.horizon_cap must be positive");
  return m;
}

double oracle_q(const Settings &s)
{
  auto it = s.find("oracle.q");
  return it == s.end() ? 1.0 : parse_real(it->first, it->second);
}

} // namespace ddctmc
