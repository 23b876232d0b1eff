#include <doctest.h>

#include <cmath>

#include "lrmc/chain.hpp"
#include "lrmc/matops.hpp"
#include "lrmc/rng.hpp"
#include "lrmc/synth.hpp"

using namespace lrmc;

TEST_CASE("rank-1 generator gives identical rows") {
  SynthConfig cfg;
  cfg.p = 12;
  cfg.r = 1;
  cfg.seed = 5;
  const TransitionMatrix p = random_lowrank(cfg);
  for (int i = 1; i < cfg.p; ++i)
    CHECK((p.entries().row(i) - p.entries().row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("generated matrices are row-stochastic with numerical rank <= r") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SynthConfig cfg;
    cfg.p = 30;
    cfg.r = 4;
    cfg.seed = seed;
    const TransitionMatrix p = random_lowrank(cfg);
    for (int i = 0; i < cfg.p; ++i)
      CHECK(p.entries().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.entries().minCoeff() >= 0.0);
    const SvdResult f = svd(p.entries());
    CHECK(f.sigma(cfg.r) / f.sigma(0) < 1e-10);
  }
}

TEST_CASE("same seed reproduces the matrix") {
  SynthConfig cfg;
  cfg.p = 9;
  cfg.r = 3;
  cfg.seed = 42;
  const TransitionMatrix a = random_lowrank(cfg);
  const TransitionMatrix b = random_lowrank(cfg);
  CHECK((a.entries() - b.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity column scale reproduces the balanced generator") {
  Rng rng(6);
  const int p = 8, r = 2;
  Matrix u0(p, r), v0(p, r);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j) {
      u0(i, j) = rng.normal();
      v0(i, j) = rng.normal();
    }
  const Vector ones = Vector::Ones(p);
  const TransitionMatrix scaled = assemble_lowrank(u0, v0, &ones);
  const TransitionMatrix plain = assemble_lowrank(u0, v0);
  CHECK((scaled.entries() - plain.entries()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("beta-imbalanced generation keeps rank and stochasticity") {
  for (double g1 : {0.3, 0.5, 1.0, 2.0})
    for (double g2 : {0.3, 0.5, 1.0, 2.0}) {
      SynthConfig cfg;
      cfg.p = 20;
      cfg.r = 3;
      cfg.seed = 11;
      cfg.imbalance = {{g1, g2}};
      const TransitionMatrix p = random_lowrank_imbalanced(cfg);
      for (int i = 0; i < cfg.p; ++i)
        CHECK(p.entries().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.entries().minCoeff() >= 0.0);
      const SvdResult f = svd(p.entries());
      CHECK(f.sigma(cfg.r) / f.sigma(0) < 1e-10);
    }
}

TEST_CASE("imbalanced generator spreads the invariant mass") {
  SynthConfig cfg;
  cfg.p = 50;
  cfg.r = 3;
  cfg.seed = 7;
  cfg.imbalance = {{0.5, 0.5}};
  const TransitionMatrix p = random_lowrank_imbalanced(cfg);
  const StationaryDistribution pi = stationary_distribution(p);
  CHECK(pi.pi_max / pi.pi_min > 5.0);
}

TEST_CASE("rank-1 stationary distribution equals the common row") {
  SynthConfig cfg;
  cfg.p = 15;
  cfg.r = 1;
  cfg.seed = 99;
  const TransitionMatrix p = random_lowrank(cfg);
  const StationaryDistribution pi = stationary_distribution(p);
  CHECK((pi.pi.transpose() - p.entries().row(0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("config validation") {
  SynthConfig bad;
  bad.p = 4;
  bad.r = 5;
  CHECK_THROWS_AS(random_lowrank(bad), InvalidInputError);
  SynthConfig no_beta;
  no_beta.p = 4;
  no_beta.r = 2;
  CHECK_THROWS_AS(random_lowrank_imbalanced(no_beta), InvalidInputError);
}
