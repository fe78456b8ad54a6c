#pragma once

#include <iosfwd>
#include <vector>

#include "ddctmc/grid.hpp"
#include "ddctmc/models.hpp"
#include "ddctmc/types.hpp"

namespace ddctmc {

enum class Structure
{
  General,
  BirthDeath,
  ToeplitzLevy
};

struct GeneratorOptions
{
  // Keep negative central-difference neighbour rates instead of raising NegativeRate.
  bool allow_negative_rates = false;
};

// Transition-rate matrix on a grid. Rows 0 and N are zero (absorbing).
// Storage is dense, tridiagonal or offset-indexed depending on the structure.
class Generator
{
public:
  static Generator from_dense(Grid grid, const Eigen::MatrixXd &rates);
  static Generator birth_death(Grid grid, const Eigen::VectorXd &up, const Eigen::VectorXd &down);
  // Constant-coefficient lattice: bins(d) is the rate to offset d (|d| >= 1), lower_tail(m) the
  // rate from row m to state 0, upper_tail(m) the rate from row m to state N, plus neighbour terms.
  static Generator toeplitz(Grid grid, std::vector<double> bins, std::vector<double> lower_tail,
                            std::vector<double> upper_tail, double up_diff, double down_diff);

  const Grid &grid() const { return grid_; }
  int size() const { return grid_.size(); }
  int last() const { return grid_.last(); }
  Structure structure() const { return structure_; }

  double rate(int i, int j) const;
  double up(int i) const { return rate(i, i + 1); }
  double down(int i) const { return rate(i, i - 1); }
  double outflow(int i) const { return -rate(i, i); }
  bool absorbing(int i) const { return i == 0 || i == last() || outflow(i) == 0.0; }

  bool is_tridiagonal() const { return tridiagonal_; }
  // Interior rows are identical up to a shift (window matrices can be reused).
  bool is_translation_invariant() const { return translation_invariant_; }

  Eigen::MatrixXd dense() const;
  Eigen::MatrixXd block(int r0, int nr, int c0, int nc) const;

  // sum_{z0 <= z <= z1} G(m, z) v(z)
  template <typename Scalar>
  Scalar row_dot(int m, int z0, int z1, const Vec<Scalar> &v) const
  {
    Scalar s(0);
    if (m <= 0 || m >= last()) return s;
    if (tridiagonal_) {
      z0 = std::max(z0, m - 1);
      z1 = std::min(z1, m + 1);
    }
    for (int z = z0; z <= z1; ++z) s += rate(m, z) * v(z);
    return s;
  }

  // Sum of off-diagonal rates from m into [z0, z1].
  double mass(int m, int z0, int z1) const;

  void write_csv(std::ostream &os) const;

private:
  Grid grid_;
  Structure structure_ = Structure::General;
  bool tridiagonal_ = false;
  bool translation_invariant_ = false;
  Eigen::MatrixXd dense_;
  Eigen::VectorXd up_, down_, diag_;
  std::vector<double> bins_, lower_tail_, upper_tail_;
  double up_diff_ = 0.0, down_diff_ = 0.0;

  void finish();
};

// Central-difference CTMC generator for the model on the grid.
Generator build_generator(const ModelSpec &model, const Grid &grid, const GeneratorOptions &opts = {});

// Lattice h Z intersected with [trunc_lo, trunc_hi], absorbing ends, rates depending on offset only.
Generator build_levy_generator(const ModelSpec &model, double h, double trunc_lo, double trunc_hi,
                               const GeneratorOptions &opts = {});

} // namespace ddctmc
