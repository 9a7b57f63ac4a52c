#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace gsm {

using Rng = std::mt19937_64;

struct Capabilities {
  bool has_psi = true;
  bool has_psi_prime = true;
  bool has_z_sampler = false;
};

/**
 * Gaussian scale mixture prior on the gradient magnitude.
 *
 * psi(t) = -log int exp(-t z - v(z)) q(dz), up to an additive constant.
 * psi' is the diffusivity and equals E(z | t); it must be positive and
 * nonincreasing. sample_z draws from p(z | t) ∝ exp(-t z - v(z)) when the
 * latent measure is known.
 */
class ScaleMixturePrior {
 public:
  virtual ~ScaleMixturePrior() = default;

  virtual std::string name() const = 0;
  virtual Capabilities capabilities() const = 0;

  virtual double psi(double t) const = 0;
  virtual double psi_prime(double t) const = 0;
  // Throws CapabilityError unless capabilities().has_z_sampler.
  virtual double sample_z(double t, Rng& rng) const;
};

using PriorPtr = std::shared_ptr<const ScaleMixturePrior>;

/// v(z) = z/lambda - (C/lambda - 1) log z on (0, inf); psi' = C / (1 + lambda t).
class GammaPrior final : public ScaleMixturePrior {
 public:
  GammaPrior(double c, double lambda);

  std::string name() const override { return "gamma"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  double psi(double t) const override;
  double psi_prime(double t) const override;
  double sample_z(double t, Rng& rng) const override;

  double c() const noexcept { return c_; }
  double lambda() const noexcept { return lambda_; }
  double shape() const noexcept { return c_ / lambda_; }
  double rate(double t) const noexcept { return t + 1.0 / lambda_; }

 private:
  double c_;
  double lambda_;
};

/// Counting measure on {0, lambda} with v(z) = -(mu/lambda) z; sigmoid diffusivity.
class TwoPointPrior final : public ScaleMixturePrior {
 public:
  TwoPointPrior(double lambda, double mu);

  std::string name() const override { return "two-point"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  double psi(double t) const override;
  double psi_prime(double t) const override;
  double sample_z(double t, Rng& rng) const override;

  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  /// P(z = lambda | t).
  double upper_probability(double t) const;

 private:
  double lambda_;
  double mu_;
};

/// psi' = exp(-t). Valid mixture, but its latent measure has no closed form.
class ExponentialDiffusivityPrior final : public ScaleMixturePrior {
 public:
  std::string name() const override { return "exp"; }
  Capabilities capabilities() const override { return {true, true, false}; }
  double psi(double t) const override;
  double psi_prime(double t) const override;
};

enum class PriorKind { gamma, two_point, exponential_diffusivity };

struct PriorParams {
  PriorKind kind = PriorKind::gamma;
  double lambda = 1.0;
  double c = 1.0;
  double mu = 0.0;
};

PriorPtr make_prior(const PriorParams& params);
PriorKind parse_prior_kind(std::string_view name);
std::string_view to_string(PriorKind kind);

double logistic(double x);

/**
 * Numerical complete-monotonicity test for Psi = exp(-psi).
 *
 * For k = 0..order checks (-1)^k D^k Psi(t) >= -tol at each point, where D^k
 * is the central k-th difference with step h divided by h^k. The tolerance
 * is widened by the floating-point noise of the difference itself. Stencils
 * that would reach below t = 0 are shifted right.
 */
bool complete_monotonicity_check(const ScaleMixturePrior& prior, int order,
                                 std::span<const double> points, double h = 1e-3,
                                 double tol = 1e-6);

}  // namespace gsm
