#include "gsm/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gsm/error.hpp"

namespace gsm {

double ScaleMixturePrior::sample_z(double, Rng&) const {
  throw CapabilityError("prior '" + name() + "' has no z-sampler (latent measure unknown)");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GammaPrior::GammaPrior(double c, double lambda) : c_(c), lambda_(lambda) {
  if (!(c > 0.0) || !(lambda > 0.0)) throw ConfigError("gamma prior needs C > 0 and lambda > 0");
}

double GammaPrior::psi(double t) const { return shape() * std::log1p(lambda_ * t); }

double GammaPrior::psi_prime(double t) const { return c_ / (1.0 + lambda_ * t); }

double GammaPrior::sample_z(double t, Rng& rng) const {
  std::gamma_distribution<double> dist(shape(), 1.0 / rate(t));
  return dist(rng);
}

TwoPointPrior::TwoPointPrior(double lambda, double mu) : lambda_(lambda), mu_(mu) {
  if (!(lambda > 0.0)) throw ConfigError("two-point prior needs lambda > 0");
  if (!std::isfinite(mu)) throw ConfigError("two-point prior needs a finite mu");
}

double TwoPointPrior::psi(double t) const {
  // -log(1 + exp(a)), a = mu - lambda t, evaluated without overflow.
  const double a = mu_ - lambda_ * t;
  if (a > 0.0) return -a - std::log1p(std::exp(-a));
  return -std::log1p(std::exp(a));
}

double TwoPointPrior::upper_probability(double t) const { return logistic(mu_ - lambda_ * t); }

double TwoPointPrior::psi_prime(double t) const { return lambda_ * upper_probability(t); }

double TwoPointPrior::sample_z(double t, Rng& rng) const {
  std::bernoulli_distribution coin(upper_probability(t));
  return coin(rng) ? lambda_ : 0.0;
}

double ExponentialDiffusivityPrior::psi(double t) const { return -std::expm1(-t); }

double ExponentialDiffusivityPrior::psi_prime(double t) const { return std::exp(-t); }

PriorPtr make_prior(const PriorParams& p) {
  switch (p.kind) {
    case PriorKind::gamma:
      return std::make_shared<GammaPrior>(p.c, p.lambda);
    case PriorKind::two_point:
      return std::make_shared<TwoPointPrior>(p.lambda, p.mu);
    case PriorKind::exponential_diffusivity:
      return std::make_shared<ExponentialDiffusivityPrior>();
  }
  throw ConfigError("unknown prior kind");
}

PriorKind parse_prior_kind(std::string_view name) {
  if (name == "gamma") return PriorKind::gamma;
  if (name == "two-point" || name == "two_point") return PriorKind::two_point;
  if (name == "exp" || name == "exponential") return PriorKind::exponential_diffusivity;
  throw ConfigError("unknown prior '" + std::string(name) + "' (expected gamma|two-point|exp)");
}

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::gamma:
      return "gamma";
    case PriorKind::two_point:
      return "two-point";
    case PriorKind::exponential_diffusivity:
      return "exp";
  }
  return "?";
}

bool complete_monotonicity_check(const ScaleMixturePrior& prior, int order,
                                 std::span<const double> points, double h, double tol) {
  if (order < 0 || order > 4) throw ConfigError("complete monotonicity order must be in [0, 4]");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (double t0 : points) {
    for (int k = 0; k <= order; ++k) {
      const double center = std::max(t0, 0.5 * k * h);
      double diff = 0.0;
      double magnitude = 0.0;
      double binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        const double value = std::exp(-prior.psi(center + (0.5 * k - j) * h));
        const double term = (j % 2 == 0 ? 1.0 : -1.0) * binom * value;
        diff += term;
        magnitude += std::abs(term);
        binom = binom * (k - j) / (j + 1);
      }
      const double scale = std::pow(h, k);
      const double signed_derivative = (k % 2 == 0 ? 1.0 : -1.0) * diff / scale;
      const double noise = 8.0 * eps * magnitude / scale;
      if (!(signed_derivative >= -(tol + noise))) return false;
    }
  }
  return true;
}

}  // namespace gsm
