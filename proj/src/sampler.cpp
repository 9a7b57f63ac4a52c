#include "gsm/sampler.hpp"

#include <cmath>
#include <random>

#include "gsm/error.hpp"

namespace gsm {

int default_burn_in(int num_iterations) { return num_iterations / 5; }

ImageGrid ChainState::mean_u() const {
  ImageGrid m = sum_u;
  if (accumulated > 0) {
    for (double& v : m.values()) v /= accumulated;
  }
  return m;
}

EdgeWeightField ChainState::mean_z() const {
  EdgeWeightField m = sum_z;
  if (accumulated > 0) {
    for (double& v : m.values()) v /= accumulated;
  }
  return m;
}

namespace {

void validate(const SamplerConfig& config, const ImageGrid& observed) {
  if (!config.prior) throw ConfigError("sampler: no prior configured");
  if (!config.prior->capabilities().has_z_sampler) {
    throw CapabilityError("sampler: prior '" + config.prior->name() +
                          "' has no z-sampler (latent measure unknown)");
  }
  if (!(config.sigma > 0.0)) throw ConfigError("sampler: sigma must be positive");
  if (config.num_iterations < 1) throw ConfigError("sampler: num_iterations must be >= 1");
  if (config.burn_in < 0 || config.burn_in >= config.num_iterations) {
    throw ConfigError("sampler: burn_in must lie in [0, num_iterations)");
  }
  if (observed.empty() || !observed.all_finite()) throw ConfigError("sampler: invalid observation");
}

void sample_scales(const ScaleMixturePrior& prior, const ImageGrid& u, EdgeWeightField& z, Rng& rng) {
  const EdgeWeightField t = edge_statistic(u);
  for (std::size_t i = 0; i < t.size(); ++i) z[i] = prior.sample_z(t[i], rng);
}

}  // namespace

ChainState init_chain(const SamplerConfig& config, const ImageGrid& observed, Rng& rng) {
  validate(config, observed);
  ChainState s;
  s.u = observed;
  s.z = EdgeWeightField(observed.width(), observed.height());
  sample_scales(*config.prior, s.u, s.z, rng);
  s.sum_u = ImageGrid(observed.width(), observed.height(), observed.channels());
  s.sum_z = EdgeWeightField(observed.width(), observed.height());
  return s;
}

void gibbs_step(ChainState& state, const SamplerConfig& config, const ImageGrid& observed, Rng& rng) {
  if (!config.prior || !config.prior->capabilities().has_z_sampler) validate(config, observed);
  if (!state.u.same_shape(observed)) throw DimensionError("gibbs_step: state/observation mismatch");

  const int w = observed.width();
  const int h = observed.height();
  const int channels = observed.channels();

  sample_scales(*config.prior, state.u, state.z, rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  ImageGrid perturbed = observed;  // v + eps_p
  for (double& v : perturbed.values()) v += config.sigma * normal(rng);

  GradientField eps_m(w, h, channels);
  for (int c = 0; c < channels; ++c) {
    auto ex = eps_m.dx().channel(c);
    auto ey = eps_m.dy().channel(c);
    for (std::size_t i = 0; i < state.z.size(); ++i) {
      const double zi = state.z[i];
      if (zi == 0.0) continue;
      const double sd = 1.0 / std::sqrt(zi);
      ex[i] = sd * normal(rng);
      ey[i] = sd * normal(rng);
    }
  }

  // First-order condition: Lambda(z) u = (1/sigma^2) A'(v + eps_p) - div(z eps_m).
  const DiffusionOperator op(config.forward, config.sigma, state.z);
  ImageGrid b = op.rhs(perturbed);
  for (int c = 0; c < channels; ++c) {
    auto ex = eps_m.dx().channel(c);
    auto ey = eps_m.dy().channel(c);
    for (std::size_t i = 0; i < state.z.size(); ++i) {
      ex[i] *= state.z[i];
      ey[i] *= state.z[i];
    }
  }
  const ImageGrid div = divergence(eps_m);
  for (std::size_t i = 0; i < b.size(); ++i) b.values()[i] -= div.values()[i];

  try {
    state.u = cg_solve(op, b, config.cg, &state.u);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("gibbs step " + std::to_string(state.step + 1) + ": " + e.what(),
                           state.step + 1, e.residual());
  }

  ++state.step;
  if (state.step > config.burn_in) {
    for (std::size_t i = 0; i < state.u.size(); ++i) state.sum_u.values()[i] += state.u.values()[i];
    for (std::size_t i = 0; i < state.z.size(); ++i) state.sum_z[i] += state.z[i];
    ++state.accumulated;
  }
}

ChainResult run_chain(const SamplerConfig& config, const ImageGrid& observed) {
  validate(config, observed);
  Rng rng(config.seed);
  ChainState state = init_chain(config, observed, rng);
  for (int i = 0; i < config.num_iterations; ++i) gibbs_step(state, config, observed, rng);
  ChainResult result{state.mean_u(), state.mean_z(), std::move(state)};
  return result;
}

}  // namespace gsm
