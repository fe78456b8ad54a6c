#include "ddctmc/laplace.hpp"

#include <cmath>
#include <numbers>

#include "ddctmc/errors.hpp"
#include "ddctmc/parallel.hpp"

namespace ddctmc {

void validate(const InversionConfig &cfg, double T)
{
  if (!(T > 0.0)) throw ValidationError("maturity T must be positive");
  if (cfg.base_terms < 1 || cfg.euler_terms < 1) throw ValidationError("inversion term counts must be at least 1");
  if (!(cfg.decay_param > 0.0)) throw ValidationError("decay parameter must be positive");
}

std::vector<cplx> inversion_nodes(double T, const InversionConfig &cfg)
{
  validate(cfg, T);
  const int K = cfg.base_terms + cfg.euler_terms;
  std::vector<cplx> nodes(K + 1);
  for (int k = 0; k <= K; ++k) nodes[k] = cplx(cfg.decay_param, 2.0 * std::numbers::pi * k) / (2.0 * T);
  return nodes;
}

double inversion_sum(const std::vector<cplx> &values, double T, const InversionConfig &cfg)
{
  const int n = cfg.base_terms, m = cfg.euler_terms;
  if (static_cast<int>(values.size()) != n + m + 1) throw ValidationError("wrong number of transform values");
  const double scale = std::exp(cfg.decay_param / 2.0) / T;
  // partial sums s_j of the alternating series
  std::vector<double> s(n + m + 1);
  double acc = 0.5 * scale * values[0].real();
  s[0] = acc;
  for (int k = 1; k <= n + m; ++k) {
    acc += (k % 2 ? -1.0 : 1.0) * scale * values[k].real();
    s[k] = acc;
  }
  // binomial average of s_n .. s_{n+m}
  double result = 0.0, binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    result += binom * s[n + k];
    binom = binom * (m - k) / (k + 1);
  }
  return result / std::pow(2.0, m);
}

double invert(const std::function<cplx(cplx)> &transform, double T, const InversionConfig &cfg)
{
  std::vector<cplx> nodes = inversion_nodes(T, cfg);
  std::vector<cplx> values(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), cfg.threads, [&](int k) {
    try {
      values[k] = transform(nodes[k]);
    } catch (const NodeFailure &) {
      throw;
    } catch (const ValidationError &) {
      throw;
    } catch (const std::exception &e) {
      throw NodeFailure(k, nodes[k].real(), nodes[k].imag(), e.what());
    }
  });
  return inversion_sum(values, T, cfg);
}

} // namespace ddctmc
