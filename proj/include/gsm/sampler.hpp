#pragma once

#include <cstdint>

#include "gsm/grid.hpp"
#include "gsm/operators.hpp"
#include "gsm/priors.hpp"
#include "gsm/solver.hpp"

namespace gsm {

struct SamplerConfig {
  PriorPtr prior;  // must provide sample_z
  ForwardOperator forward;
  double sigma = 0.1;
  int num_iterations = 100;
  int burn_in = 20;  // iterations discarded before averaging
  std::uint64_t seed = 0;
  CgSettings cg;
};

/// Burn-in used when none is requested: 20% of the iterations.
int default_burn_in(int num_iterations);

struct ChainState {
  ImageGrid u;
  EdgeWeightField z;
  ImageGrid sum_u;
  EdgeWeightField sum_z;
  int accumulated = 0;  // post-burn-in draws in the sums
  int step = 0;         // Gibbs steps taken

  ImageGrid mean_u() const;
  EdgeWeightField mean_z() const;
};

/// u0 = observed, z0 ~ p(z | t(observed)), empty accumulators.
ChainState init_chain(const SamplerConfig& config, const ImageGrid& observed, Rng& rng);

/**
 * One blockwise Gibbs sweep:
 *   z(x) ~ p(z | t(u)(x)) per pixel,
 *   u    = argmin (1/(2 sigma^2)) |Au - v - eps_p|^2 + 1/2 sum_x z(x) |grad u(x) - eps_m(x)|^2
 * with eps_p ~ N(0, sigma^2) per data element and eps_m(x) ~ N(0, I/z(x))
 * where z(x) != 0. The minimizer is an exact draw from p(u | z, v).
 * Accumulates into the running means once state.step exceeds burn_in.
 */
void gibbs_step(ChainState& state, const SamplerConfig& config, const ImageGrid& observed, Rng& rng);

struct ChainResult {
  ImageGrid mean_u;
  EdgeWeightField mean_z;
  ChainState final_state;
};

/// Runs config.num_iterations Gibbs steps from a chain-owned generator seeded with config.seed.
ChainResult run_chain(const SamplerConfig& config, const ImageGrid& observed);

}  // namespace gsm
