#pragma once

#include <stdexcept>
#include <string>

namespace ddctmc {

struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Bad input: the CLI maps these to exit code 2.
struct ValidationError : Error
{
  using Error::Error;
};

// The numerics failed on valid input: exit code 3.
struct NumericalError : Error
{
  using Error::Error;
};

struct BadBounds : ValidationError
{
  using ValidationError::ValidationError;
};
struct UnsupportedRegime : ValidationError
{
  using ValidationError::ValidationError;
};
struct NotBirthDeath : ValidationError
{
  using ValidationError::ValidationError;
};
struct NotLevy : ValidationError
{
  using ValidationError::ValidationError;
};
struct DegenerateWindow : ValidationError
{
  using ValidationError::ValidationError;
};
struct TooLarge : ValidationError
{
  using ValidationError::ValidationError;
};
struct NoBenchmark : ValidationError
{
  using ValidationError::ValidationError;
};

struct UnboundedMass : NumericalError
{
  using NumericalError::NumericalError;
};
struct Singular : NumericalError
{
  using NumericalError::NumericalError;
};
struct UpdateSingular : NumericalError
{
  using NumericalError::NumericalError;
};
struct FixedPointSingular : NumericalError
{
  using NumericalError::NumericalError;
};

struct NegativeRate : NumericalError
{
  NegativeRate(int state, int neighbor, double rate)
    : NumericalError("negative transition rate " + std::to_string(rate) + " from state " + std::to_string(state) +
                     " to " + std::to_string(neighbor) + "; refine the grid step"),
      state(state), neighbor(neighbor)
  {}
  int state;
  int neighbor;
};

struct NodeFailure : NumericalError
{
  NodeFailure(int node, double re, double im, const std::string &what)
    : NumericalError("Laplace node " + std::to_string(node) + " (q = " + std::to_string(re) + " + " +
                     std::to_string(im) + "i): " + what),
      node(node)
  {}
  int node;
};

struct HorizonCapHit : NumericalError
{
  explicit HorizonCapHit(double fraction)
    : NumericalError("horizon cap reached on " + std::to_string(100.0 * fraction) + "% of paths"), fraction(fraction)
  {}
  double fraction;
};

} // namespace ddctmc
