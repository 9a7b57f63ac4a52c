#pragma once

#include <vector>

#include "gsm/grid.hpp"

namespace gsm {

/// Dense 2-D filter with odd extents, stored row-major.
struct Kernel {
  int width = 1;
  int height = 1;
  std::vector<double> values{1.0};

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(j) * width + i]; }
  int radius_x() const noexcept { return width / 2; }
  int radius_y() const noexcept { return height / 2; }
};

/// Normalized samples of exp(-(i^2+j^2)/(2 sigma^2)) on a (2r+1)x(2r+1) window.
Kernel gaussian_kernel(int radius, double sigma_blur);

/**
 * Linear forward model A: identity (denoising) or convolution (deblurring).
 *
 * Convolution uses replicate padding, so A maps constants to constants and
 * A1 != 0 holds for every unit-sum kernel.
 */
class ForwardOperator {
 public:
  enum class Kind { identity, convolution };

  ForwardOperator() = default;
  static ForwardOperator identity() { return {}; }
  static ForwardOperator convolution(Kernel kernel);

  Kind kind() const noexcept { return kind_; }
  const Kernel& kernel() const noexcept { return kernel_; }

  ImageGrid apply(const ImageGrid& u) const;
  ImageGrid adjoint_apply(const ImageGrid& w) const;

  // Single-channel versions; out must not alias in.
  void apply(std::span<const double> in, std::span<double> out, int width, int height) const;
  void adjoint_apply(std::span<const double> in, std::span<double> out, int width, int height) const;

  /// Per-pixel |A delta_x|^2.
  EdgeWeightField column_norms_sq(int width, int height) const;

 private:
  Kind kind_ = Kind::identity;
  Kernel kernel_;
};

}  // namespace gsm
