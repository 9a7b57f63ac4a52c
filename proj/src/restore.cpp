#include "gsm/restore.hpp"

#include <cmath>
#include <string>

#include "gsm/error.hpp"

namespace gsm {

Method parse_method(std::string_view name) {
  if (name == "em") return Method::em;
  if (name == "lagged" || name == "lagged-diffusivity") return Method::lagged_diffusivity;
  if (name == "gd" || name == "gradient-descent") return Method::gradient_descent;
  if (name == "meanfield" || name == "mean-field") return Method::mean_field;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected em|lagged|gd|meanfield)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::em:
      return "em";
    case Method::lagged_diffusivity:
      return "lagged";
    case Method::gradient_descent:
      return "gd";
    case Method::mean_field:
      return "meanfield";
  }
  return "?";
}

namespace {

void validate(const RestoreConfig& config, const ImageGrid& observed) {
  if (!config.prior) throw ConfigError("restore: no prior configured");
  if (!(config.sigma > 0.0)) throw ConfigError("restore: sigma must be positive");
  if (config.max_outer_iters < 1) throw ConfigError("restore: max_outer_iters must be >= 1");
  if (!(config.outer_tol >= 0.0)) throw ConfigError("restore: outer_tol must be non-negative");
  if (observed.empty()) throw DimensionError("restore: empty observation");
  if (!observed.all_finite()) throw ConfigError("restore: observation contains non-finite values");
}

EdgeWeightField map_prime(const ScaleMixturePrior& prior, const EdgeWeightField& t) {
  EdgeWeightField out(t.width(), t.height());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = prior.psi_prime(t[i]);
  return out;
}

// Relative change test; <= so that an exactly fixed zero image counts as converged.
bool small_change(const ImageGrid& next, const ImageGrid& prev, double tol) {
  double diff = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double d = next.values()[i] - prev.values()[i];
    diff += d * d;
  }
  return std::sqrt(diff) <= tol * norm(prev);
}

RestoreResult start(const ImageGrid& observed) {
  RestoreResult r;
  r.u = observed;
  r.xi0 = EdgeWeightField(observed.width(), observed.height());
  r.delta = EdgeWeightField(observed.width(), observed.height());
  r.c = EdgeWeightField(observed.width(), observed.height());
  return r;
}

std::string at_iteration(int k, const std::string& what) {
  return "outer iteration " + std::to_string(k) + ": " + what;
}

}  // namespace

double objective(const RestoreConfig& config, const ImageGrid& u, const ImageGrid& observed) {
  if (!config.prior || !config.prior->capabilities().has_psi) {
    throw CapabilityError("objective requires a prior with psi");
  }
  if (!u.same_shape(observed)) throw DimensionError("objective: shape mismatch");
  const ImageGrid au = config.forward.apply(u);
  double data = 0.0;
  for (std::size_t i = 0; i < au.size(); ++i) {
    const double r = au.values()[i] - observed.values()[i];
    data += r * r;
  }
  const EdgeWeightField t = edge_statistic(u);
  double prior_term = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) prior_term += config.prior->psi(t[i]);
  return data / (2.0 * config.sigma * config.sigma) + u.channels() * prior_term;
}

ImageGrid objective_gradient(const RestoreConfig& config, const ImageGrid& u,
                             const ImageGrid& observed) {
  const EdgeWeightField xi = em_weights(*config.prior, u);
  const DiffusionOperator op(config.forward, config.sigma, xi);
  ImageGrid g = op.apply(u);
  const ImageGrid m = op.rhs(observed);
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] -= m.values()[i];
  return g;
}

EdgeWeightField em_weights(const ScaleMixturePrior& prior, const ImageGrid& u) {
  return map_prime(prior, edge_statistic(u));
}

EdgeWeightField mean_field_weights(const ScaleMixturePrior& prior, const ImageGrid& u,
                                   const EdgeWeightField& delta) {
  EdgeWeightField t = edge_statistic(u);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += 0.5 * delta[i];
  return map_prime(prior, t);
}

EdgeWeightField marginal_variances(const ForwardOperator& forward, double sigma,
                                   const EdgeWeightField& xi0) {
  EdgeWeightField c = DiffusionOperator(forward, sigma, xi0).diagonal();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.0 / c[i];
  return c;
}

RestoreResult em_restore(const RestoreConfig& config, const ImageGrid& observed) {
  validate(config, observed);
  RestoreResult r = start(observed);
  r.objective_trace.push_back(objective(config, r.u, observed));
  const ImageGrid m = DiffusionOperator(config.forward, config.sigma, r.xi0).rhs(observed);

  for (int k = 1; k <= config.max_outer_iters; ++k) {
    r.xi0 = em_weights(*config.prior, r.u);
    const DiffusionOperator op(config.forward, config.sigma, r.xi0);
    ImageGrid next;
    try {
      next = cg_solve(op, m, config.cg, &r.u);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(at_iteration(k, e.what()), k, e.residual());
    }
    const bool done = small_change(next, r.u, config.outer_tol);
    r.u = std::move(next);
    r.iterations = k;
    r.objective_trace.push_back(objective(config, r.u, observed));
    if (config.observer) config.observer({k, r.u, r.xi0});
    if (done) {
      r.converged = true;
      break;
    }
  }
  return r;
}

RestoreResult lagged_diffusivity_restore(const RestoreConfig& config, const ImageGrid& observed) {
  validate(config, observed);
  RestoreResult r = start(observed);
  r.objective_trace.push_back(objective(config, r.u, observed));
  const double data_weight = 1.0 / (config.sigma * config.sigma);

  for (int k = 1; k <= config.max_outer_iters; ++k) {
    // Dual variable s = -psi'(t); the linear equation in u is
    //   (1/sigma^2) A'(Au - v) + div(s grad u) = 0,
    // solved as one exact Newton correction from the current iterate.
    const EdgeWeightField t = edge_statistic(r.u);
    EdgeWeightField s(t.width(), t.height());
    for (std::size_t i = 0; i < t.size(); ++i) s[i] = -config.prior->psi_prime(t[i]);

    GradientField flux = gradient(r.u);
    for (int c = 0; c < flux.channels(); ++c) {
      auto fx = flux.dx().channel(c);
      auto fy = flux.dy().channel(c);
      for (std::size_t i = 0; i < s.size(); ++i) {
        fx[i] *= s[i];
        fy[i] *= s[i];
      }
    }
    const ImageGrid div_term = divergence(flux);
    ImageGrid misfit = config.forward.apply(r.u);
    for (std::size_t i = 0; i < misfit.size(); ++i) misfit.values()[i] -= observed.values()[i];
    const ImageGrid data_term = config.forward.adjoint_apply(misfit);

    ImageGrid neg_residual(r.u.width(), r.u.height(), r.u.channels());
    for (std::size_t i = 0; i < neg_residual.size(); ++i) {
      neg_residual.values()[i] = -(data_weight * data_term.values()[i] + div_term.values()[i]);
    }

    EdgeWeightField jacobian_weights(s.width(), s.height());
    for (std::size_t i = 0; i < s.size(); ++i) jacobian_weights[i] = -s[i];
    const DiffusionOperator jacobian(config.forward, config.sigma, jacobian_weights);
    ImageGrid step;
    try {
      step = cg_solve(jacobian, neg_residual, config.cg);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(at_iteration(k, e.what()), k, e.residual());
    }
    ImageGrid next = r.u;
    for (std::size_t i = 0; i < next.size(); ++i) next.values()[i] += step.values()[i];

    const bool done = small_change(next, r.u, config.outer_tol);
    r.u = std::move(next);
    r.xi0 = std::move(jacobian_weights);
    r.iterations = k;
    r.objective_trace.push_back(objective(config, r.u, observed));
    if (config.observer) config.observer({k, r.u, r.xi0});
    if (done) {
      r.converged = true;
      break;
    }
  }
  return r;
}

RestoreResult gradient_descent_restore(const RestoreConfig& config, const ImageGrid& observed,
                                       double step) {
  validate(config, observed);
  if (!(step > 0.0)) throw ConfigError("gradient descent step must be positive");
  RestoreResult r = start(observed);
  double f = objective(config, r.u, observed);
  r.objective_trace.push_back(f);

  for (int k = 1; k <= config.max_outer_iters; ++k) {
    const ImageGrid g = objective_gradient(config, r.u, observed);
    double h = step;
    ImageGrid next;
    double f_next = 0.0;
    while (true) {
      next = r.u;
      for (std::size_t i = 0; i < next.size(); ++i) next.values()[i] -= h * g.values()[i];
      f_next = objective(config, next, observed);
      if (f_next <= f) break;
      h *= 0.5;
      if (h < 1e-12) {
        throw ConvergenceError(at_iteration(k, "gradient descent step underflow"), k, norm(g));
      }
    }
    const bool done = small_change(next, r.u, config.outer_tol);
    r.u = std::move(next);
    f = f_next;
    r.xi0 = em_weights(*config.prior, r.u);
    r.iterations = k;
    r.objective_trace.push_back(f);
    if (config.observer) config.observer({k, r.u, r.xi0});
    if (done) {
      r.converged = true;
      break;
    }
  }
  r.xi0 = em_weights(*config.prior, r.u);
  return r;
}

RestoreResult mean_field_restore(const RestoreConfig& config, const ImageGrid& observed) {
  validate(config, observed);
  RestoreResult r = start(observed);
  r.objective_trace.push_back(objective(config, r.u, observed));
  const ImageGrid m = DiffusionOperator(config.forward, config.sigma, r.xi0).rhs(observed);

  for (int k = 1; k <= config.max_outer_iters; ++k) {
    r.delta = variance_spread(r.c);
    r.xi0 = mean_field_weights(*config.prior, r.u, r.delta);
    const DiffusionOperator op(config.forward, config.sigma, r.xi0);
    ImageGrid next;
    try {
      next = cg_solve(op, m, config.cg, &r.u);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(at_iteration(k, e.what()), k, e.residual());
    }
    if (config.propagate_variance) {
      r.c = marginal_variances(config.forward, config.sigma, r.xi0);
    }
    const bool done = small_change(next, r.u, config.outer_tol);
    r.u = std::move(next);
    r.iterations = k;
    r.objective_trace.push_back(objective(config, r.u, observed));
    if (config.observer) config.observer({k, r.u, r.xi0});
    if (done) {
      r.converged = true;
      break;
    }
  }
  return r;
}

RestoreResult restore(const RestoreConfig& config, const ImageGrid& observed) {
  switch (config.method) {
    case Method::em:
      return em_restore(config, observed);
    case Method::lagged_diffusivity:
      return lagged_diffusivity_restore(config, observed);
    case Method::gradient_descent:
      return gradient_descent_restore(config, observed, config.gd_step);
    case Method::mean_field:
      return mean_field_restore(config, observed);
  }
  throw ConfigError("unknown restoration method");
}

}  // namespace gsm
