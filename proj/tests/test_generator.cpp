#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ddctmc/errors.hpp"
#include "ddctmc/generator.hpp"

using namespace ddctmc;

TEST(Grid, BuildGridExample)
{
  Grid g = build_grid(0.0, 0.2, 2, -0.3, 0.1);
  ASSERT_EQ(g.size(), 5);
  const double expect[] = {-0.3, -0.2, -0.1, 0.0, 0.1};
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(g[j], expect[j], 1e-15);
  EXPECT_EQ(g.index_of(0.0), 3);
  EXPECT_EQ(g.index_of(0.05), -1);
  EXPECT_EQ(g.floor_index(-0.15), 1);
  EXPECT_EQ(g.ceil_index(-0.15), 2);
  EXPECT_EQ(g.window_floor(3, 0.2), 1);
}

TEST(Grid, EndpointsOnGrid)
{
  Grid g = build_grid(0.0, -std::log(0.75), 40, -4.0, 4.0);
  EXPECT_GE(g.index_of(0.0), 0);
  EXPECT_GE(g.index_of(std::log(0.75)), 0);
  EXPECT_GE(g[0], -4.0 - 1e-12);
  EXPECT_LE(g[g.last()], 4.0 + 1e-12);
}

TEST(Grid, BadBounds)
{
  EXPECT_THROW(build_grid(0.0, 0.2, 10, -0.2, 1.0), BadBounds);
  EXPECT_THROW(build_grid(0.0, 0.2, 10, -1.0, 0.0), BadBounds);
  EXPECT_THROW(build_grid(0.0, 0.2, 0, -1.0, 1.0), ValidationError);
}

TEST(Generator, BlackScholesRates)
{
  Grid g = build_grid(0.0, 0.2, 20, -1.0, 1.0);
  Generator G = build_generator(ModelSpec::bs(), g);
  EXPECT_EQ(G.structure(), Structure::BirthDeath);
  int i = g.index_of(0.0);
  EXPECT_NEAR(G.up(i), 471.75, 1e-9);
  EXPECT_NEAR(G.down(i), 428.25, 1e-9);
  EXPECT_TRUE(G.is_tridiagonal());
  EXPECT_TRUE(G.is_translation_invariant());
}

TEST(Generator, RowSumsAndBoundaries)
{
  Grid g = build_grid(0.0, 0.2, 10, -1.0, 1.0);
  for (const ModelSpec &m : {ModelSpec::bs(), ModelSpec::cev(), ModelSpec::dejd()}) {
    Generator G = build_generator(m, g);
    Eigen::MatrixXd D = G.dense();
    EXPECT_NEAR(D.rowwise().sum().cwiseAbs().maxCoeff(), 0.0, 1e-9) << to_string(m.kind);
    EXPECT_EQ(D.row(0).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(D.row(G.last()).cwiseAbs().sum(), 0.0);
    for (int r = 0; r < D.rows(); ++r)
      for (int c = 0; c < D.cols(); ++c)
        if (r != c) EXPECT_GE(D(r, c), 0.0);
  }
}

TEST(Generator, CevIsStateDependent)
{
  Generator G = build_generator(ModelSpec::cev(), build_grid(0.0, 0.2, 10, -1.0, 1.0));
  EXPECT_EQ(G.structure(), Structure::BirthDeath);
  EXPECT_FALSE(G.is_translation_invariant());
}

TEST(Generator, DejdToeplitz)
{
  Grid g = build_grid(0.0, 0.2, 10, -1.0, 1.0);
  Generator G = build_generator(ModelSpec::dejd(), g);
  EXPECT_EQ(G.structure(), Structure::ToeplitzLevy);
  EXPECT_FALSE(G.is_tridiagonal());
  const double h = g.h;
  // interior jump rate to offset 3 is the bin mass around 3h
  int i = g.index_of(0.0);
  EXPECT_NEAR(G.rate(i, i + 3), levy_bin_mass(ModelSpec::dejd(), 0.0, 2.5 * h, 3.5 * h), 1e-14);
  EXPECT_NEAR(G.rate(i, i + 3), G.rate(i + 2, i + 5), 1e-14);
  // everything below the grid is lumped into state 0
  EXPECT_NEAR(G.rate(i, 0), levy_bin_mass(ModelSpec::dejd(), 0.0, -INFINITY, g[0] - g[i] + 0.5 * h), 1e-13);
}

TEST(Generator, LevyLattice)
{
  Generator L = build_levy_generator(ModelSpec::dejd(), 0.01, -0.3, 0.01);
  EXPECT_EQ(L.structure(), Structure::ToeplitzLevy);
  EXPECT_EQ(L.size(), 32);
  EXPECT_EQ(L.grid().index_of(0.0), 30);
  EXPECT_THROW(build_levy_generator(ModelSpec::cev(), 0.01, -0.3, 0.01), NotLevy);
  EXPECT_THROW(build_levy_generator(ModelSpec::bs(), 0.01, 0.3, 0.01), BadBounds);
}

TEST(Generator, VgNegativeRates)
{
  ModelSpec vg = ModelSpec::vg();
  EXPECT_THROW(build_levy_generator(vg, 0.5 / 640, -0.5, 0.01), NegativeRate);
  GeneratorOptions o;
  o.allow_negative_rates = true;
  Generator L = build_levy_generator(vg, 0.5 / 640, -0.5, 0.01, o);
  EXPECT_LT(L.down(5), 0.0);
  // coarse steps keep every rate nonnegative
  Generator C = build_levy_generator(vg, 0.5 / 80, -0.5, 0.01);
  EXPECT_GT(C.down(5), 0.0);
}

TEST(Generator, NegativeRateReportsState)
{
  Eigen::VectorXd up = Eigen::VectorXd::Constant(5, 1.0), down = Eigen::VectorXd::Constant(5, 1.0);
  ModelSpec m = ModelSpec::bs();
  m.r_f = 100.0; // drift dominates the diffusion on a coarse grid
  try {
    build_generator(m, build_grid(0.0, 0.2, 2, -1.0, 1.0));
    FAIL() << "expected NegativeRate";
  } catch (const NegativeRate &e) {
    EXPECT_GT(e.state, 0);
    EXPECT_EQ(e.neighbor, e.state - 1);
  }
}

TEST(Generator, FromDenseDetectsTridiagonal)
{
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(4, 4);
  R(1, 0) = 1.0;
  R(1, 2) = 2.0;
  R(2, 1) = 3.0;
  R(2, 3) = 4.0;
  Generator G = Generator::from_dense(uniform_grid(0.0, 0.1, 0, 3), R);
  EXPECT_TRUE(G.is_tridiagonal());
  EXPECT_NEAR(G.outflow(2), 7.0, 1e-15);
  R(1, 3) = 0.5;
  Generator J = Generator::from_dense(uniform_grid(0.0, 0.1, 0, 3), R);
  EXPECT_FALSE(J.is_tridiagonal());
  EXPECT_NEAR(J.outflow(1), 3.5, 1e-15);
}

TEST(Generator, CsvDump)
{
  Generator G = build_generator(ModelSpec::bs(), build_grid(0.0, 0.2, 2, -0.3, 0.1));
  std::ostringstream os;
  G.write_csv(os);
  std::string s = os.str();
  EXPECT_EQ(s.rfind("i,j,rate\n", 0), 0u);
  EXPECT_NE(s.find("\n1,0,"), std::string::npos);
}
