#pragma once

#include <vector>

#include "ddctmc/types.hpp"

namespace ddctmc {

enum class InversionVariant
{
  EulerSummation
};

struct InversionConfig
{
  InversionVariant variant = InversionVariant::EulerSummation;
  double decay_param = 18.4; // discretization error about exp(-decay_param)
  int base_terms = 15;
  int euler_terms = 11;
  int threads = 0; // 0: hardware concurrency
};

void validate(const InversionConfig &cfg, double T);

// Laplace nodes used by invert() at maturity T, in summation order.
std::vector<cplx> inversion_nodes(double T, const InversionConfig &cfg);

// Combine transform values at inversion_nodes() into the time-domain estimate.
double inversion_sum(const std::vector<cplx> &values, double T, const InversionConfig &cfg);

// Abate-Whitt Euler-summation estimate of F(T) from its transform. Node evaluations may run
// concurrently; the sum is a fixed-order fold. Errors at a node are rethrown as NodeFailure.
double invert(const std::function<cplx(cplx)> &transform, double T, const InversionConfig &cfg = {});

// First-order extrapolation from core resolutions N and 2N.
inline double richardson(double value_N, double value_2N) { return 2.0 * value_2N - value_N; }

} // namespace ddctmc
