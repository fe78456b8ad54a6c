#pragma once

#include <string>
#include <vector>

#include "ddctmc/generator.hpp"
#include "ddctmc/types.hpp"

namespace ddctmc {

enum class QuantityKind
{
  DrawdownBeforeDrawup_A,
  OccupationUntilDrawdown_B,
  DrawdownOccupation_C,
  NthDrawdownNoRecovery_H,
  InsuranceNoRecovery_Hsum,
  NthDrawdownWithRecovery_J,
  InsuranceWithRecovery_Jsum,
  DrawdownLaplace_Q
};

std::string to_string(QuantityKind kind);
QuantityKind parse_quantity_kind(const std::string &name);

// Empty functions default to: k = q, k2 = q, f = 1, f2(x, y) = f(x).
struct QuantityRequest
{
  QuantityKind kind = QuantityKind::DrawdownLaplace_Q;
  double a = 0.2;
  double b = 0.3;
  double xi = 0.1;
  int n = 1;
  cplx q = 1.0;
  Fn1 k;
  Fn2 k2;
  Fn1 f;
  Fn2 f2;
  double x = 0.0;
  double y = 0.0;
};

struct SolveOptions
{
  // Skip the birth-death fast paths.
  bool force_generic = false;
  // Slide window inverses with rank-2 updates instead of refactorizing.
  bool incremental = false;
};

cplx evaluate(const Generator &gen, const QuantityRequest &req, const SolveOptions &opts = {});

// E[e^{-q tau_a} f(Y_{tau_a})] from a running maximum at x.
cplx q_drawdown(const Generator &gen, cplx q, double a, const Fn1 &f, double x, const SolveOptions &opts = {});

// E[e^{-q tau_a} f(Y_{tau_a}); tau_a < drawup time] with running max x and running min y.
// y is rounded up to the grid. Requires b >= a.
cplx drawdown_before_drawup(const Generator &gen, cplx q, double a, double b, const Fn1 &f, double x, double y,
                            const SolveOptions &opts = {});

// E[exp(-int_0^{tau_a} k(Y_s) ds) f(Y_{tau_a})].
cplx occupation_until_drawdown(const Generator &gen, const Fn1 &k, double a, const Fn1 &f, double x,
                               const SolveOptions &opts = {});

// E[exp(-int_0^{tau_a} k2(Y_s, max_s) ds) f(Y_{tau_a})].
cplx drawdown_occupation(const Generator &gen, const Fn2 &k2, double a, const Fn1 &f, double x,
                         const SolveOptions &opts = {});

// n-th drawdown time when the reference maximum restarts at each event; returns H_1..H_n at x.
std::vector<cplx> nth_drawdown_no_recovery_all(const Generator &gen, cplx q, double a, const Fn1 &f, double x, int n,
                                               const SolveOptions &opts = {});
cplx nth_drawdown_no_recovery(const Generator &gen, cplx q, double a, const Fn1 &f, double x, int n,
                              const SolveOptions &opts = {});

// sum_n E[e^{-q tau_n}] for drawdowns without recovery.
cplx insurance_no_recovery(const Generator &gen, cplx q, double a, double x, const SolveOptions &opts = {});

// n-th drawdown when each event must first be followed by a return to the maximum held at that event.
// Payoff f2(Y at the event, running max at the event); x <= y.
std::vector<cplx> nth_drawdown_with_recovery_all(const Generator &gen, cplx q, double a, const Fn2 &f2, double x,
                                                 double y, int n, const SolveOptions &opts = {});
cplx nth_drawdown_with_recovery(const Generator &gen, cplx q, double a, const Fn2 &f2, double x, double y, int n,
                                const SolveOptions &opts = {});

// sum_n E[e^{-q tau_{a,n}}] for drawdowns with recovery. The down window is truncated at the grid bottom.
cplx insurance_with_recovery(const Generator &gen, cplx q, double a, double x, double y,
                             const SolveOptions &opts = {});

// Closed forms on a translation-invariant lattice containing 0 and -a (and -A for the recovery case).
// Killing for C is q 1{-x > xi} + shift on the window (-a, 0].
cplx c_levy_closed_form(const Generator &lattice, cplx q, double a, double xi, cplx shift = 0.0);
cplx h_levy_closed_form(const Generator &lattice, cplx q, double a);
cplx j_levy_closed_form(const Generator &lattice, cplx q, double a, double x = 0.0, double y = 0.0);

} // namespace ddctmc
