#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsm {

/**
 * Multi-channel raster of doubles.
 *
 * Storage is planar: channel-major, then rows (x2, vertical), then columns
 * (x1, horizontal). Values are not clamped; intermediate iterates may leave
 * the nominal [0,1] display range.
 */
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int width, int height, int channels = 1, double fill = 0.0);
  ImageGrid(int width, int height, int channels, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(int x, int y, int c = 0) { return values_[index(x, y, c)]; }
  double operator()(int x, int y, int c = 0) const { return values_[index(x, y, c)]; }

  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

/// Per-pixel, per-channel 2-vectors with the same planar layout as ImageGrid.
class GradientField {
 public:
  GradientField() = default;
  GradientField(int width, int height, int channels = 1);

  int width() const noexcept { return dx_.width(); }
  int height() const noexcept { return dx_.height(); }
  int channels() const noexcept { return dx_.channels(); }

  // Horizontal (x1) and vertical (x2) components.
  ImageGrid& dx() noexcept { return dx_; }
  const ImageGrid& dx() const noexcept { return dx_; }
  ImageGrid& dy() noexcept { return dy_; }
  const ImageGrid& dy() const noexcept { return dy_; }

 private:
  ImageGrid dx_;
  ImageGrid dy_;
};

/// One real per pixel, shared across channels (edge weights, latent scales, variances).
class EdgeWeightField {
 public:
  EdgeWeightField() = default;
  EdgeWeightField(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator()(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const;
  double max() const;

  friend bool operator==(const EdgeWeightField&, const EdgeWeightField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Forward differences; the component that would cross the boundary is zero.
GradientField gradient(const ImageGrid& u);

// Exact negative adjoint of gradient: <gradient(u), p> = -<u, divergence(p)>.
ImageGrid divergence(const GradientField& p);

/// y -> |grad(delta_x)(y)|^2 for the indicator image of pixel (x1, x2).
EdgeWeightField stencil_norm_of_x(int x1, int x2, int width, int height);

/// sum_y |grad(delta_x)(y)|^2, the closed form of summing stencil_norm_of_x.
double stencil_sum(int x1, int x2, int width, int height);

/// Channel average of half the squared gradient magnitude.
EdgeWeightField edge_statistic(const ImageGrid& u);

/**
 * x -> sum_y c(y) |grad(delta_y)(x)|^2.
 *
 * Under a diagonal covariance with variances c this is the variance of the
 * discrete gradient at x.
 */
EdgeWeightField variance_spread(const EdgeWeightField& c);

/// x -> sum_y w(y) |grad(delta_x)(y)|^2, the diagonal of -div(w grad .).
EdgeWeightField diffusion_diagonal(const EdgeWeightField& w);

double dot(std::span<const double> a, std::span<const double> b);
double dot(const ImageGrid& a, const ImageGrid& b);
double dot(const GradientField& a, const GradientField& b);
double norm(const ImageGrid& u);
double norm(const GradientField& p);

}  // namespace gsm
