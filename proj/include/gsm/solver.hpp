#pragma once

#include <Eigen/Dense>

#include "gsm/grid.hpp"
#include "gsm/operators.hpp"

namespace gsm {

struct CgSettings {
  double tol = 1e-8;       // relative residual |Lu - b| / |b|
  int max_iter = 0;        // 0 means 10 * pixel count
  bool jacobi = false;     // diagonal preconditioner from diag(Lambda)
};

struct CgStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/**
 * Lambda(xi0) u = (1/sigma^2) A'A u - div(xi0 grad u), applied per channel
 * with the channel-shared weights xi0 >= 0.
 *
 * Symmetric, and positive definite whenever A1 != 0.
 */
class DiffusionOperator {
 public:
  DiffusionOperator(ForwardOperator forward, double sigma, EdgeWeightField xi0);

  const ForwardOperator& forward() const noexcept { return forward_; }
  double sigma() const noexcept { return sigma_; }
  double data_weight() const noexcept { return 1.0 / (sigma_ * sigma_); }
  const EdgeWeightField& xi0() const noexcept { return xi0_; }
  int width() const noexcept { return xi0_.width(); }
  int height() const noexcept { return xi0_.height(); }

  ImageGrid apply(const ImageGrid& u) const;
  // Single channel; scratch holds 2 * pixel_count doubles.
  void apply(std::span<const double> u, std::span<double> out, std::span<double> scratch) const;

  /// m = (1/sigma^2) A' v.
  ImageGrid rhs(const ImageGrid& observed) const;

  /// diag(Lambda) = |A delta_x|^2 / sigma^2 + sum_y xi0(y) |grad delta_x(y)|^2.
  EdgeWeightField diagonal() const;

 private:
  ForwardOperator forward_;
  double sigma_;
  EdgeWeightField xi0_;
};

inline ImageGrid apply_lambda(const DiffusionOperator& op, const ImageGrid& u) {
  return op.apply(u);
}

/**
 * Conjugate gradients, channel by channel. Starts from `initial` when given
 * (same shape as b), else from zero. Throws ConvergenceError carrying the
 * final relative residual when max_iter is exhausted.
 */
ImageGrid cg_solve(const DiffusionOperator& op, const ImageGrid& b, const CgSettings& settings = {},
                   const ImageGrid* initial = nullptr, CgStats* stats = nullptr);

/// Dense assembly of a single-channel Lambda for small grids (test oracle).
class DenseOracle {
 public:
  static constexpr int max_pixels = 64;

  explicit DenseOracle(const DiffusionOperator& op);

  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  ImageGrid solve(const ImageGrid& b) const;
  Eigen::VectorXd diagonal() const { return matrix_.diagonal(); }
  double log_det() const;
  Eigen::VectorXd inverse_diagonal() const;
  Eigen::MatrixXd inverse() const;

 private:
  int width_;
  int height_;
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace gsm
