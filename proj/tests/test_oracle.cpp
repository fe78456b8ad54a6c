#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "ddctmc/errors.hpp"
#include "ddctmc/oracle.hpp"
#include "support.hpp"

using namespace ddctmc;

using fixtures::kAll;
using fixtures::random_request;

TEST(Oracle, KeystoneRandomInstances)
{
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  int instances = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const bool jumps = trial % 2 == 1;
    const int n = 8 + static_cast<int>(rng() % 12);
    const double h = 0.05;
    Generator gen = jumps ? fixtures::random_jump(rng, n, h, -(n / 2))
                          : fixtures::random_birth_death(rng, n, h, -(n / 2));
    const int k_a = 2 + static_cast<int>(rng() % 3);
    for (QuantityKind kind : kAll) {
      QuantityRequest r = random_request(rng, gen.grid(), kind, k_a);
      // every third instance also exercises a complex Laplace argument
      if (trial % 3 == 0) r.q += cplx(0.0, 4.0);
      cplx oracle = dense_product_solve(gen, r);
      SolveOptions fast, generic;
      generic.force_generic = true;
      cplx v = evaluate(gen, r, fast);
      cplx w = evaluate(gen, r, generic);
      EXPECT_NEAR(std::abs(v - oracle), 0.0, 1e-9) << to_string(kind) << " trial " << trial;
      EXPECT_NEAR(std::abs(w - oracle), 0.0, 1e-9) << to_string(kind) << " generic, trial " << trial;
    }
    ++instances;
  }
  EXPECT_GE(instances, 20);
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LE(sec, 60.0);
}

TEST(Oracle, HandSolvedFiveStateChain)
{
  // states 0..4, a = 2h, start at 2: the pair chain (y, M) has interior states (2,2), (3,3), (1,2), (2,3)
  // plus (3,2)->(3,3); drawdown at y <= M - 2.
  const double u = 1.5, d = 0.7, q = 1.0;
  Eigen::VectorXd up(5), down(5);
  up << 0, u, u, u, 0;
  down << 0, d, d, d, 0;
  Generator gen = Generator::birth_death(uniform_grid(0.0, 0.1, 0, 4), up, down);
  QuantityRequest r;
  r.kind = QuantityKind::DrawdownLaplace_Q;
  r.a = 0.2;
  r.q = q;
  r.x = 0.2;
  // V(2,2) = [u V(3,3) + d V(1,2)] / (q+u+d); V(1,2) = [u V(2,2) + d] / (q+u+d)
  // V(3,3) = d V(2,3) / (q+u+d) (top is absorbing with value 0); V(2,3) = [u V(3,3) + d] / (q+u+d)
  const double s = q + u + d;
  Eigen::Matrix4d A;
  Eigen::Vector4d b;
  // unknowns: V22, V12, V33, V23
  A << s, -d, -u, 0, -u, s, 0, 0, 0, 0, s, -d, 0, 0, -u, s;
  b << 0, d, 0, d;
  Eigen::Vector4d v = A.lu().solve(b);
  EXPECT_NEAR(dense_product_solve(gen, r).real(), v(0), 1e-13);
  EXPECT_NEAR(evaluate(gen, r).real(), v(0), 1e-13);
}

TEST(Oracle, DrawupUnreachableEqualsQ)
{
  std::mt19937_64 rng(3);
  Generator gen = fixtures::random_birth_death(rng, 12, 0.1, -6);
  QuantityRequest r;
  r.kind = QuantityKind::DrawdownBeforeDrawup_A;
  r.a = 0.2;
  r.b = 5.0;
  r.q = 1.3;
  r.x = 0.0;
  r.y = 0.0;
  QuantityRequest rq = r;
  rq.kind = QuantityKind::DrawdownLaplace_Q;
  EXPECT_NEAR(std::abs(dense_product_solve(gen, r) - dense_product_solve(gen, rq)), 0.0, 1e-13);
}

TEST(Oracle, TooLarge)
{
  ModelSpec m = ModelSpec::bs();
  Generator gen = build_generator(m, build_grid(0.0, 0.2, 40, -1.0, 1.0));
  QuantityRequest r;
  r.kind = QuantityKind::DrawdownBeforeDrawup_A;
  r.a = 0.2;
  r.b = 0.6;
  r.y = -0.1;
  EXPECT_THROW(dense_product_solve(gen, r, 1000), TooLarge);
}

TEST(Oracle, ZeroPayoffIsExactlyZero)
{
  Generator gen = build_generator(ModelSpec::bs(), build_grid(0.0, 0.2, 5, -0.6, 0.6));
  QuantityRequest r;
  r.kind = QuantityKind::DrawdownLaplace_Q;
  r.a = 0.2;
  r.f = [](double) { return cplx(0.0); };
  McConfig cfg;
  cfg.n_paths = 2000;
  McResult res = mc_estimate(gen, r, cfg);
  EXPECT_EQ(res.estimate, 0.0);
  EXPECT_EQ(res.std_error, 0.0);
}

TEST(Oracle, MonteCarloDeterministicAndScaling)
{
  Generator gen = build_generator(ModelSpec::bs(), build_grid(0.0, 0.2, 5, -1.0, 1.0));
  QuantityRequest r;
  r.kind = QuantityKind::DrawdownLaplace_Q;
  r.a = 0.2;
  r.q = 1.0;
  McConfig cfg;
  cfg.n_paths = 10000;
  cfg.seed = 42;
  McResult a = mc_estimate(gen, r, cfg);
  McConfig one = cfg;
  one.threads = 1;
  McResult b = mc_estimate(gen, r, one);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  McConfig big = cfg;
  big.n_paths = 40000;
  McResult c = mc_estimate(gen, r, big);
  double ratio = a.std_error / c.std_error;
  EXPECT_NEAR(ratio, 2.0, 0.4);
  double exact = evaluate(gen, r).real();
  EXPECT_LT(std::abs(c.estimate - exact), 3.0 * c.std_error);
}

TEST(Oracle, HorizonCap)
{
  // slow chain, tiny killing: most paths outlive the cap
  std::mt19937_64 rng(5);
  Generator gen = fixtures::random_birth_death(rng, 20, 0.1, -10);
  QuantityRequest r;
  r.kind = QuantityKind::DrawdownLaplace_Q;
  r.a = 0.5;
  r.q = 1e-6;
  McConfig cfg;
  cfg.n_paths = 500;
  cfg.horizon_cap = 1e-3;
  EXPECT_THROW(mc_estimate(gen, r, cfg), HorizonCapHit);
}

TEST(Oracle, MonteCarloRejectsComplexQ)
{
  Generator gen = build_generator(ModelSpec::bs(), build_grid(0.0, 0.2, 5, -1.0, 1.0));
  QuantityRequest r;
  r.q = cplx(1.0, 1.0);
  EXPECT_THROW(mc_estimate(gen, r, McConfig{}), ValidationError);
}
