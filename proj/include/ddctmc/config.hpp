#pragma once

#include <map>
#include <string>
#include <vector>

#include "ddctmc/oracle.hpp"
#include "ddctmc/pricing.hpp"

namespace ddctmc {

// Flat "section.key" -> value settings, as read from an INI file and command-line overrides.
using Settings = std::map<std::string, std::string>;

// Every accepted key, in "section.key" form.
const std::vector<std::string> &config_keys();

Settings read_ini(const std::string &path);

// Numbers also accept ln(v) and -ln(v), e.g. a = -ln(0.75).
double parse_real(const std::string &key, const std::string &text);

// Unknown keys and malformed values raise ValidationError.
RunConfig make_run_config(const Settings &s);
McConfig make_mc_config(const Settings &s);
// Real Laplace argument used by the oracle subcommand (oracle.q, default 1).
double oracle_q(const Settings &s);

} // namespace ddctmc
