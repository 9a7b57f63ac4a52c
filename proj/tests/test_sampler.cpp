#include <doctest.h>

#include <cmath>
#include <random>

#include "gsm/error.hpp"
#include "gsm/sampler.hpp"
#include "support/oracles.hpp"
#include "support/stub_priors.hpp"

using namespace gsm;

namespace {

SamplerConfig point_mass_config(double lambda, double sigma, int iterations, int burn_in) {
  SamplerConfig cfg;
  cfg.prior = std::make_shared<testing::PointMassPrior>(lambda);
  cfg.sigma = sigma;
  cfg.num_iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.cg.tol = 1e-12;
  return cfg;
}

}  // namespace

TEST_CASE("default burn-in is a fifth of the chain") {
  CHECK(default_burn_in(100) == 20);
  CHECK(default_burn_in(4) == 0);
}

TEST_CASE("gaussian case: chain mean and variance match the dense posterior") {
  std::mt19937_64 rng(1);
  const int n = 3;
  const ImageGrid v = testing::random_image(n, n, 1, rng, 0.0, 1.0);
  SamplerConfig cfg = point_mass_config(4.0, 0.5, 4000, 10);
  cfg.seed = 17;

  Rng chain_rng(cfg.seed);
  ChainState state = init_chain(cfg, v, chain_rng);
  std::vector<Eigen::VectorXd> draws;
  for (int i = 0; i < cfg.num_iterations; ++i) {
    gibbs_step(state, cfg, v, chain_rng);
    if (state.step > cfg.burn_in) draws.push_back(testing::to_vector(state.u));
  }
  const Eigen::MatrixXd lambda = testing::dense_lambda(cfg.forward, cfg.sigma, EdgeWeightField(n, n, 4.0));
  const Eigen::MatrixXd cov = lambda.inverse();
  const Eigen::VectorXd mean = cov * testing::to_vector(v) / (cfg.sigma * cfg.sigma);

  const double count = static_cast<double>(draws.size());
  Eigen::VectorXd emp_mean = Eigen::VectorXd::Zero(n * n);
  for (const auto& d : draws) emp_mean += d;
  emp_mean /= count;
  CHECK(testing::to_vector(state.mean_u()).isApprox(emp_mean, 1e-12));
  for (int i = 0; i < n * n; ++i) CHECK(std::abs(emp_mean[i] - mean[i]) <= 4.0 * std::sqrt(cov(i, i) / count));

  for (int i = 0; i < n * n; ++i) {
    double s = 0.0;
    for (const auto& d : draws) s += (d[i] - mean[i]) * (d[i] - mean[i]);
    const double var = s / count;
    // Standard error of a Gaussian variance estimate: sqrt(2/N) var.
    CHECK(std::abs(var - cov(i, i)) <= 5.0 * std::sqrt(2.0 / count) * cov(i, i));
  }
}

TEST_CASE("vanishing scales leave only the perturbed data") {
  std::mt19937_64 rng(2);
  const ImageGrid v = testing::random_image(8, 8, 1, rng);
  SamplerConfig cfg = point_mass_config(0.0, 0.2, 1, 0);
  Rng chain_rng(3);
  ChainState state = init_chain(cfg, v, chain_rng);
  gibbs_step(state, cfg, v, chain_rng);
  CHECK(state.z.max() == 0.0);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = state.u.values()[i] - v.values()[i];
    s += d;
    s2 += d * d;
  }
  const double var = s2 / 64.0 - (s / 64.0) * (s / 64.0);
  CHECK(var > 0.01);
  CHECK(var < 0.07);
}

TEST_CASE("two-point scales follow the logistic frequency") {
  // Flat image: t = 0 everywhere on the first sweep.
  SamplerConfig cfg;
  cfg.prior = std::make_shared<TwoPointPrior>(1.0, 0.3);
  cfg.num_iterations = 1;
  cfg.burn_in = 0;
  Rng rng(5);
  const ImageGrid v(40, 40, 1, 0.5);
  const ChainState s = init_chain(cfg, v, rng);
  int upper = 0;
  for (double z : s.z.values()) {
    CHECK((z == 0.0 || z == 1.0));
    upper += z == 1.0;
  }
  const double p = logistic(0.3);
  CHECK(std::abs(upper - 1600 * p) <= 4.0 * std::sqrt(1600 * p * (1 - p)));
}

TEST_CASE("chains are deterministic for a fixed seed") {
  std::mt19937_64 rng(7);
  const ImageGrid v = testing::random_image(10, 9, 2, rng, 0.0, 1.0);
  SamplerConfig cfg;
  cfg.prior = std::make_shared<TwoPointPrior>(800.0, 3.8);
  cfg.num_iterations = 6;
  cfg.burn_in = 2;
  cfg.seed = 99;
  const ChainResult a = run_chain(cfg, v);
  const ChainResult b = run_chain(cfg, v);
  CHECK(a.mean_u == b.mean_u);
  CHECK(a.mean_z == b.mean_z);
  cfg.seed = 100;
  CHECK_FALSE(run_chain(cfg, v).mean_u == a.mean_u);
}

TEST_CASE("burn-in accounting") {
  const ImageGrid v(4, 4, 1, 0.2);
  SamplerConfig cfg = point_mass_config(1.0, 0.1, 10, 3);
  const ChainResult r = run_chain(cfg, v);
  CHECK(r.final_state.step == 10);
  CHECK(r.final_state.accumulated == 7);
  CHECK(r.mean_z.min() == 1.0);
}

TEST_CASE("sampler sanity on a gamma prior") {
  std::mt19937_64 rng(8);
  const ImageGrid v = testing::random_image(12, 12, 1, rng, 0.0, 1.0);
  SamplerConfig cfg;
  cfg.prior = std::make_shared<GammaPrior>(1e3, 1e3);
  cfg.num_iterations = 20;
  cfg.burn_in = 5;
  const ChainResult r = run_chain(cfg, v);
  CHECK(r.mean_u.all_finite());
  CHECK(r.mean_z.min() > 0.0);
  for (double x : r.mean_u.values()) CHECK(std::abs(x) < 2.0);
}

TEST_CASE("sampler rejects bad configurations") {
  const ImageGrid v(4, 4, 1, 0.2);
  SamplerConfig cfg;
  cfg.prior = std::make_shared<ExponentialDiffusivityPrior>();
  try {
    run_chain(cfg, v);
    FAIL("expected CapabilityError");
  } catch (const CapabilityError& e) {
    CHECK(std::string(e.what()).find("no z-sampler") != std::string::npos);
  }
  cfg.prior = std::make_shared<GammaPrior>(1.0, 1.0);
  cfg.burn_in = cfg.num_iterations;
  CHECK_THROWS_AS(run_chain(cfg, v), ConfigError);
  cfg.burn_in = 0;
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(run_chain(cfg, v), ConfigError);
}
