// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsm/error.hpp"
#include "gsm/grid.hpp"
#include "gsm/metrics.hpp"
#include "gsm/presets.hpp"
#include "gsm/priors.hpp"
#include "gsm/restore.hpp"
#include "gsm/sampler.hpp"
#include "gsm/solver.hpp"
#include "support/oracles.hpp"
#include "support/stub_priors.hpp"

using namespace gsm;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ImageGrid noisy_synthetic(int n, int channels, double sigma, std::uint64_t seed) {
  return add_noise(make_synthetic(n, channels).clean, sigma, seed);
}

Outcome adjointness() {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> side(1, 16);
  std::uniform_int_distribution<int> chans(1, 3);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int w = side(rng), h = side(rng), c = chans(rng);
    const ImageGrid u = testing::random_image(w, h, c, rng);
    const GradientField p = testing::random_field(w, h, c, rng);
    const double gap = std::abs(dot(gradient(u), p) + dot(u, divergence(p)));
    worst = std::max(worst, gap / (1.0 + norm(u) * norm(p)));
  }
  return {worst <= 1e-12, "200 pairs, max |<grad u,p> + <u,div p>| / (1 + |u||p|) = " + sci(worst)};
}

Outcome psi_oracle() {
  double worst_gamma = 0.0;
  for (double s : {1.0, 1e3, 4e3}) {
    const GammaPrior g(s, s);
    for (double t : {0.0, 1e-4, 1e-2, 1.0}) {
      const double q = testing::gamma_conditional_mean_quadrature(s, s, t);
      worst_gamma = std::max(worst_gamma, std::abs(g.psi_prime(t) - q) / std::abs(q));
      const double qpsi = testing::gamma_psi_quadrature(s, s, t);
      worst_gamma = std::max(worst_gamma, std::abs(g.psi(t) - qpsi) / std::max(1.0, std::abs(qpsi)));
    }
  }
  double worst_two = 0.0;
  for (auto [lambda, mu] : {std::pair{800.0, 3.8}, std::pair{1.0, 0.0}, std::pair{50.0, -2.0}}) {
    const TwoPointPrior p(lambda, mu);
    for (double t : {0.0, 1e-4, 1e-2, 1.0}) {
      const double s = testing::two_point_conditional_mean_sum(lambda, mu, t);
      const double d = std::abs(p.psi_prime(t) - s);
      worst_two = std::max(worst_two, s > 0.0 ? d / s : d);
    }
  }
  return {worst_gamma <= 1e-6 && worst_two <= 1e-12,
          "gamma max rel err " + sci(worst_gamma) + " (tol 1e-6), two-point " + sci(worst_two) + " (tol 1e-12)"};
}

Outcome em_lagged_equivalence() {
  double worst = 0.0;
  bool same_length = true;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RestoreConfig cfg;
    cfg.prior = std::make_shared<GammaPrior>(1e3, 1e3);
    cfg.sigma = 0.1;
    cfg.max_outer_iters = 20;
    cfg.outer_tol = 0.0;
    cfg.cg.tol = 1e-14;
    const ImageGrid v = noisy_synthetic(32, 1, 0.1, seed);
    std::vector<ImageGrid> a, b;
    cfg.observer = [&](const IterateView& it) { a.push_back(it.u); };
    em_restore(cfg, v);
    cfg.observer = [&](const IterateView& it) { b.push_back(it.u); };
    lagged_diffusivity_restore(cfg, v);
    same_length = same_length && a.size() == 20 && b.size() == 20;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
      for (std::size_t i = 0; i < a[k].size(); ++i)
        worst = std::max(worst, std::abs(a[k].values()[i] - b[k].values()[i]));
  }
  return {same_length && worst <= 1e-10, "3 instances x 20 iterates, max |u_em - u_lagged| = " + sci(worst)};
}

Outcome descent() {
  std::mt19937_64 rng(77);
  double worst_rise = -1e300;
  int total_steps = 0;
  for (int inst = 0; inst < 10; ++inst) {
    RestoreConfig cfg;
    const double s = std::array<double, 3>{10.0, 1e3, 4e3}[inst % 3];
    cfg.prior = std::make_shared<GammaPrior>(s, s * (inst % 2 ? 1.0 : 0.5));
    cfg.sigma = inst % 4 == 3 ? 0.02 : 0.1;
    if (inst % 3 == 1) cfg.forward = ForwardOperator::convolution(gaussian_kernel(1, 1.0));
    cfg.max_outer_iters = 30;
    const int n = 16 + 4 * (inst % 5);
    const int channels = inst % 2 ? 3 : 1;
    const ImageGrid v = inst % 2 ? noisy_synthetic(n, channels, cfg.sigma, inst)
                                 : testing::random_image(n, n, channels, rng, 0.0, 1.0);
    const RestoreResult r = em_restore(cfg, v);
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      worst_rise = std::max(worst_rise, r.objective_trace[k] - r.objective_trace[k - 1]);
      ++total_steps;
    }
  }
  return {worst_rise <= 1e-10,
          "10 instances, " + std::to_string(total_steps) + " steps, max objective change " + sci(worst_rise)};
}

Outcome dense_solver() {
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> side(1, 6);
  std::uniform_real_distribution<double> sig(0.05, 1.0);
  double worst_solve = 0.0, worst_diag = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int w = side(rng), h = side(rng);
    const auto fwd = i % 2 ? ForwardOperator::convolution(gaussian_kernel(1, 0.8)) : ForwardOperator::identity();
    const double sigma = sig(rng);
    const EdgeWeightField xi = testing::random_weights(w, h, rng, 0.0, 100.0);
    const DiffusionOperator op(fwd, sigma, xi);
    const ImageGrid b = testing::random_image(w, h, 1, rng);
    const ImageGrid u = cg_solve(op, b, {1e-12});
    const DenseOracle oracle(op);
    const Eigen::VectorXd exact = oracle.solve(testing::to_vector(b));
    worst_solve = std::max(worst_solve, (testing::to_vector(u) - exact).norm() / exact.norm());
    const EdgeWeightField c = marginal_variances(fwd, sigma, xi);
    const Eigen::MatrixXd dense = testing::dense_lambda(fwd, sigma, xi);
    for (int k = 0; k < w * h; ++k)
      worst_diag = std::max(worst_diag, std::abs(c[k] - 1.0 / dense(k, k)) * dense(k, k));
  }
  return {worst_solve <= 1e-8 && worst_diag <= 1e-12,
          "20 operators, cg vs dense rel err " + sci(worst_solve) + ", c vs 1/diag rel err " + sci(worst_diag)};
}

Outcome mean_field_reductions() {
  // Pinned variances: bit-identical to EM.
  bool pinned_equal = true;
  for (std::uint64_t seed : {1u, 2u}) {
    RestoreConfig cfg;
    cfg.prior = std::make_shared<GammaPrior>(1e3, 1e3);
    cfg.max_outer_iters = 15;
    cfg.propagate_variance = false;
    const ImageGrid v = noisy_synthetic(32, seed == 1 ? 1 : 3, 0.1, seed);
    const RestoreResult mf = mean_field_restore(cfg, v);
    const RestoreResult em = em_restore(cfg, v);
    pinned_equal = pinned_equal && mf.u == em.u && mf.xi0 == em.xi0 && mf.objective_trace == em.objective_trace;
  }

  // Free variances: damping, delta >= 0, c > 0 along the whole path.
  bool damped = true, spread_ok = true, var_ok = true;
  int checked = 0;
  for (auto [prior, fwd] : {std::pair{PriorParams{PriorKind::gamma, 1e3, 1e3, 0}, ForwardOperator::identity()},
                            std::pair{PriorParams{PriorKind::two_point, 800, 1, 3.8}, ForwardOperator::identity()},
                            std::pair{PriorParams{PriorKind::gamma, 4e3, 4e3, 0},
                                      ForwardOperator::convolution(gaussian_kernel(1, 1.0))}}) {
    RestoreConfig cfg;
    cfg.prior = make_prior(prior);
    cfg.forward = fwd;
    cfg.sigma = 0.05;
    cfg.max_outer_iters = 25;
    const ImageGrid v = add_noise(fwd.apply(make_synthetic(32).clean), 0.05, 9);
    std::vector<ImageGrid> us;
    std::vector<EdgeWeightField> xis;
    cfg.observer = [&](const IterateView& it) {
      us.push_back(it.u);
      xis.push_back(it.xi0);
      const EdgeWeightField c = marginal_variances(cfg.forward, cfg.sigma, it.xi0);
      const EdgeWeightField delta = variance_spread(c);
      var_ok = var_ok && c.min() > 0.0;
      spread_ok = spread_ok && delta.min() >= 0.0;
    };
    const RestoreResult r = mean_field_restore(cfg, v);
    for (std::size_t k = 0; k + 1 < xis.size(); ++k) {
      const EdgeWeightField em = em_weights(*cfg.prior, us[k]);
      for (std::size_t i = 0; i < em.size(); ++i) damped = damped && xis[k + 1][i] <= em[i];
      ++checked;
    }
    const EdgeWeightField em_final = em_weights(*cfg.prior, r.u);
    for (std::size_t i = 0; i < em_final.size(); ++i) damped = damped && r.xi0[i] <= em_final[i];
    spread_ok = spread_ok && r.delta.min() >= 0.0;
    var_ok = var_ok && r.c.min() > 0.0;
  }
  std::ostringstream d;
  d << "pinned c == EM " << (pinned_equal ? "yes" : "NO") << ", xi_MF <= xi_EM on " << checked << " iterates "
    << (damped ? "yes" : "NO") << ", delta >= 0 " << (spread_ok ? "yes" : "NO") << ", c > 0 "
    << (var_ok ? "yes" : "NO");
  return {pinned_equal && damped && spread_ok && var_ok, d.str()};
}

Outcome gaussian_sampler() {
  const int n = 4, pixels = n * n, draws = 10000, burn_in = 100;
  std::mt19937_64 rng(404);
  const ImageGrid v = testing::random_image(n, n, 1, rng, 0.0, 1.0);
  SamplerConfig cfg;
  cfg.prior = std::make_shared<testing::PointMassPrior>(2.0);
  cfg.sigma = 0.5;
  cfg.num_iterations = draws + burn_in;
  cfg.burn_in = burn_in;
  cfg.seed = 8;
  cfg.cg.tol = 1e-12;

  Rng chain_rng(cfg.seed);
  ChainState state = init_chain(cfg, v, chain_rng);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(pixels);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(pixels, pixels);
  for (int i = 0; i < cfg.num_iterations; ++i) {
    gibbs_step(state, cfg, v, chain_rng);
    if (state.step <= burn_in) continue;
    const Eigen::VectorXd u = testing::to_vector(state.u);
    sum += u;
    outer += u * u.transpose();
  }
  const DenseOracle oracle(DiffusionOperator(cfg.forward, cfg.sigma, EdgeWeightField(n, n, 2.0)));
  const Eigen::MatrixXd cov = oracle.inverse();
  const Eigen::VectorXd mean = oracle.solve(testing::to_vector(v) / (cfg.sigma * cfg.sigma));
  const double N = state.accumulated;
  const Eigen::VectorXd emp_mean = sum / N;
  const Eigen::MatrixXd emp_cov = outer / N - emp_mean * emp_mean.transpose();

  double worst_mean = 0.0;
  for (int i = 0; i < pixels; ++i)
    worst_mean = std::max(worst_mean, std::abs(emp_mean[i] - mean[i]) / std::sqrt(cov(i, i) / N));
  const std::pair<int, int> spots[] = {{0, 0}, {0, 1}, {0, 4}, {5, 5}, {5, 6}, {5, 10}, {3, 12}, {15, 15}, {10, 11}, {6, 9}};
  double worst_cov = 0.0;
  for (auto [i, j] : spots) {
    // Standard error of a Gaussian sample covariance.
    const double se = std::sqrt((cov(i, j) * cov(i, j) + cov(i, i) * cov(j, j)) / N);
    worst_cov = std::max(worst_cov, std::abs(emp_cov(i, j) - cov(i, j)) / se);
  }
  return {state.accumulated == draws && worst_mean <= 4.0 && worst_cov <= 5.0,
          std::to_string(state.accumulated) + " draws, max mean dev " + fixed(worst_mean) +
              " s.e. (tol 4), max cov dev " + fixed(worst_cov) + " s.e. (tol 5)"};
}

Outcome z_moment_identity() {
  const int draws = 100000;
  double worst = 0.0;
  Rng rng(31337);
  auto check = [&](const ScaleMixturePrior& prior, std::initializer_list<double> ts) {
    for (double t : ts) {
      double s = 0.0, s2 = 0.0;
      for (int i = 0; i < draws; ++i) {
        const double z = prior.sample_z(t, rng);
        s += z;
        s2 += z * z;
      }
      const double mean = s / draws;
      const double se = std::sqrt(std::max(0.0, s2 / draws - mean * mean) / draws);
      worst = std::max(worst, std::abs(mean - prior.psi_prime(t)) / se);
    }
  };
  check(GammaPrior(1e3, 1e3), {0.0, 1e-4, 1e-3, 1e-2, 1e-1});
  check(TwoPointPrior(800.0, 3.8), {0.0, 2e-3, 4.75e-3, 6e-3, 1e-2});
  return {worst <= 3.0, "10 (prior, t) cells x " + std::to_string(draws) + " draws, max deviation " +
                            fixed(worst) + " s.e. (tol 3)"};
}

Outcome preset_reproductions() {
  const SyntheticImage scene = make_synthetic(64);

  auto restore_preset = [&](const ExperimentPreset& p, const ImageGrid& v, const ForwardOperator& fwd) {
    RestoreConfig cfg;
    cfg.prior = make_prior(p.prior);
    cfg.forward = fwd;
    cfg.sigma = p.sigma;
    cfg.method = p.method;
    cfg.max_outer_iters = p.iterations;
    cfg.outer_tol = p.tol;
    return restore(cfg, v).u;
  };

  const ExperimentPreset p2 = *find_preset("fig2-denoise");
  const ImageGrid v2 = add_noise(scene.clean, p2.sigma, 1);
  const double gain2 = psnr(restore_preset(p2, v2, ForwardOperator::identity()), scene.clean) - psnr(v2, scene.clean);

  const ExperimentPreset p3 = *find_preset("fig3-deblur");
  const auto blur = ForwardOperator::convolution(gaussian_kernel(p3.blur_radius, p3.blur_sigma));
  const ImageGrid v3 = add_noise(blur.apply(scene.clean), p3.sigma, 1);
  const double gain3 = psnr(restore_preset(p3, v3, blur), scene.clean) - psnr(v3, scene.clean);

  const ExperimentPreset p4 = *find_preset("fig4-msprior");
  SamplerConfig sc;
  sc.prior = make_prior(p4.prior);
  sc.sigma = p4.sigma;
  sc.num_iterations = p4.iterations;
  sc.burn_in = p4.burn_in;
  sc.seed = 2;
  const ChainResult chain = run_chain(sc, add_noise(scene.clean, p4.sigma, 1));
  double edge_total = 0, edge_low = 0, flat_total = 0, flat_high = 0;
  for (std::size_t i = 0; i < chain.mean_z.size(); ++i) {
    const double m = chain.mean_z[i] / p4.prior.lambda;
    if (scene.step_edges[i] > 0) {
      ++edge_total;
      edge_low += m < 0.5;
    }
    if (scene.flat[i] > 0) {
      ++flat_total;
      flat_high += m > 0.5;
    }
  }
  const double edge_frac = edge_low / edge_total, flat_frac = flat_high / flat_total;
  std::ostringstream d;
  d << "denoise +" << fixed(gain2) << " dB (need 2), deblur +" << fixed(gain3) << " dB (need 1), edge map "
    << fixed(100 * edge_frac, 1) << "% edges < 0.5, " << fixed(100 * flat_frac, 1) << "% flat > 0.5 (need 80%)";
  return {gain2 >= 2.0 && gain3 >= 1.0 && edge_frac >= 0.8 && flat_frac >= 0.8, d.str()};
}

Outcome complete_monotonicity() {
  const std::vector<double> pts = {0.0, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0};
  bool ok = true;
  for (double s : {1.0, 1e3, 4e3}) ok = ok && complete_monotonicity_check(GammaPrior(s, s), 4, pts);
  ok = ok && complete_monotonicity_check(GammaPrior(2.0, 0.5), 4, pts);
  const bool exp_ok = complete_monotonicity_check(ExponentialDiffusivityPrior(), 4, pts);
  const bool stub_rejected = !complete_monotonicity_check(testing::SquarePsi(), 4, pts);
  return {ok && exp_ok && stub_rejected, std::string("gamma ") + (ok ? "true" : "false") + ", exp " +
                                             (exp_ok ? "true" : "false") + ", t^2 stub " +
                                             (stub_rejected ? "false" : "true")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> body;
  };
  const Criterion criteria[] = {
      {1, "adjointness", 1.0, adjointness},
      {2, "psi oracle", 5.0, psi_oracle},
      {3, "em / lagged diffusivity equivalence", 10.0, em_lagged_equivalence},
      {4, "em descent", 10.0, descent},
      {5, "dense solver check", 5.0, dense_solver},
      {6, "mean-field reductions", 10.0, mean_field_reductions},
      {7, "sampler exactness (gaussian)", 60.0, gaussian_sampler},
      {8, "sampler moment identity", 30.0, z_moment_identity},
      {9, "desk-scale reproductions", 120.0, preset_reproductions},
      {10, "complete monotonicity", 1.0, complete_monotonicity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.ok && secs < c.budget_s;
    failed += !pass;
    std::printf("%s [%2d] %-36s %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
