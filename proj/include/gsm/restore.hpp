#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "gsm/grid.hpp"
#include "gsm/operators.hpp"
#include "gsm/priors.hpp"
#include "gsm/solver.hpp"

namespace gsm {

enum class Method { em, lagged_diffusivity, gradient_descent, mean_field };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

struct IterateView {
  int iteration;  // 1-based outer iteration that produced u
  const ImageGrid& u;
  const EdgeWeightField& xi0;  // weights used to compute u
};

struct RestoreConfig {
  PriorPtr prior;
  ForwardOperator forward;
  double sigma = 0.1;
  int max_outer_iters = 100;
  double outer_tol = 1e-4;  // on |u_{k+1} - u_k| / |u_k|; 0 runs every iteration
  CgSettings cg;
  Method method = Method::em;

  // Mean field only: false pins the marginal variances c to zero, which
  // reduces the mean-field iteration to EM.
  bool propagate_variance = true;
  // Gradient descent only: initial step before backtracking.
  double gd_step = 1e-3;

  std::function<void(const IterateView&)> observer;
};

struct RestoreResult {
  ImageGrid u;
  EdgeWeightField xi0;
  EdgeWeightField delta;  // mean field only, else zero
  EdgeWeightField c;      // mean field only, else zero
  std::vector<double> objective_trace;  // objective at u0, then after every outer iteration
  int iterations = 0;
  bool converged = false;
};

/**
 * MAP objective (1/(2 sigma^2)) |Au - v|^2 + channels * sum_x psi(t(x)),
 * with t the channel-averaged half squared gradient. The channel factor makes
 * the per-channel solves with a shared xi0 the exact minimizers of the EM
 * surrogate; for gray images it is 1.
 */
double objective(const RestoreConfig& config, const ImageGrid& u, const ImageGrid& observed);

/// Gradient of objective with respect to u.
ImageGrid objective_gradient(const RestoreConfig& config, const ImageGrid& u,
                             const ImageGrid& observed);

/// E step: xi0(x) = psi'(t(x)).
EdgeWeightField em_weights(const ScaleMixturePrior& prior, const ImageGrid& u);

/// Mean-field weights: xi0(x) = psi'(t(x) + delta(x) / 2).
EdgeWeightField mean_field_weights(const ScaleMixturePrior& prior, const ImageGrid& u,
                                   const EdgeWeightField& delta);

/// c(x) = 1 / <delta_x, Lambda(xi0) delta_x>, the diagonal covariance relaxation.
EdgeWeightField marginal_variances(const ForwardOperator& forward, double sigma,
                                   const EdgeWeightField& xi0);

RestoreResult em_restore(const RestoreConfig& config, const ImageGrid& observed);
RestoreResult lagged_diffusivity_restore(const RestoreConfig& config, const ImageGrid& observed);
RestoreResult gradient_descent_restore(const RestoreConfig& config, const ImageGrid& observed,
                                       double step);
RestoreResult mean_field_restore(const RestoreConfig& config, const ImageGrid& observed);

/// Dispatches on config.method.
RestoreResult restore(const RestoreConfig& config, const ImageGrid& observed);

}  // namespace gsm
