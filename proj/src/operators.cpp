#include "gsm/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "gsm/error.hpp"

namespace gsm {

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

Kernel gaussian_kernel(int radius, double sigma_blur) {
  if (radius < 0) throw ConfigError("blur radius must be non-negative");
  if (!(sigma_blur > 0.0)) throw ConfigError("blur sigma must be positive");
  Kernel k;
  k.width = k.height = 2 * radius + 1;
  k.values.assign(static_cast<std::size_t>(k.width) * k.height, 0.0);
  const double denom = 2.0 * sigma_blur * sigma_blur;
  for (int j = -radius; j <= radius; ++j) {
    for (int i = -radius; i <= radius; ++i) {
      k.values[static_cast<std::size_t>(j + radius) * k.width + (i + radius)] =
          std::exp(-(i * i + j * j) / denom);
    }
  }
  const double sum = std::accumulate(k.values.begin(), k.values.end(), 0.0);
  for (double& v : k.values) v /= sum;
  return k;
}

ForwardOperator ForwardOperator::convolution(Kernel kernel) {
  if (kernel.width % 2 == 0 || kernel.height % 2 == 0 || kernel.width < 1 || kernel.height < 1) {
    throw ConfigError("convolution kernel dimensions must be odd");
  }
  if (kernel.values.size() != static_cast<std::size_t>(kernel.width) * kernel.height) {
    throw ConfigError("kernel value count does not match its dimensions");
  }
  ForwardOperator op;
  op.kind_ = Kind::convolution;
  op.kernel_ = std::move(kernel);
  return op;
}

void ForwardOperator::apply(std::span<const double> in, std::span<double> out, int width,
                            int height) const {
  if (kind_ == Kind::identity) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  const int rx = kernel_.radius_x();
  const int ry = kernel_.radius_y();
  // (Au)(x) = sum_k k(i,j) u(clamp(x - i, y - j)): correlation with the flipped kernel.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int j = -ry; j <= ry; ++j) {
        const int yy = clamp_index(y - j, height);
        for (int i = -rx; i <= rx; ++i) {
          const int xx = clamp_index(x - i, width);
          s += kernel_(i + rx, j + ry) * in[static_cast<std::size_t>(yy) * width + xx];
        }
      }
      out[static_cast<std::size_t>(y) * width + x] = s;
    }
  }
}

void ForwardOperator::adjoint_apply(std::span<const double> in, std::span<double> out, int width,
                                    int height) const {
  if (kind_ == Kind::identity) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  const int rx = kernel_.radius_x();
  const int ry = kernel_.radius_y();
  std::fill(out.begin(), out.end(), 0.0);
  // Scatter form of the transpose; clamped taps accumulate on boundary pixels.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double w = in[static_cast<std::size_t>(y) * width + x];
      for (int j = -ry; j <= ry; ++j) {
        const int yy = clamp_index(y - j, height);
        for (int i = -rx; i <= rx; ++i) {
          const int xx = clamp_index(x - i, width);
          out[static_cast<std::size_t>(yy) * width + xx] += kernel_(i + rx, j + ry) * w;
        }
      }
    }
  }
}

ImageGrid ForwardOperator::apply(const ImageGrid& u) const {
  if (kind_ == Kind::identity) return u;
  ImageGrid out(u.width(), u.height(), u.channels());
  for (int c = 0; c < u.channels(); ++c) apply(u.channel(c), out.channel(c), u.width(), u.height());
  return out;
}

ImageGrid ForwardOperator::adjoint_apply(const ImageGrid& w) const {
  if (kind_ == Kind::identity) return w;
  ImageGrid out(w.width(), w.height(), w.channels());
  for (int c = 0; c < w.channels(); ++c) {
    adjoint_apply(w.channel(c), out.channel(c), w.width(), w.height());
  }
  return out;
}

EdgeWeightField ForwardOperator::column_norms_sq(int width, int height) const {
  if (kind_ == Kind::identity) return EdgeWeightField(width, height, 1.0);
  const int rx = kernel_.radius_x();
  const int ry = kernel_.radius_y();
  EdgeWeightField out(width, height);
  // A delta_x is supported within the kernel radius of x, even on the clamped border.
  const int win_w = 2 * rx + 1;
  const int win_h = 2 * ry + 1;
  std::vector<double> column(static_cast<std::size_t>(win_w) * win_h);
  for (int x2 = 0; x2 < height; ++x2) {
    for (int x1 = 0; x1 < width; ++x1) {
      std::fill(column.begin(), column.end(), 0.0);
      for (int j = -ry; j <= ry; ++j) {
        for (int i = -rx; i <= rx; ++i) {
          const double kv = kernel_(i + rx, j + ry);
          // Output pixels y with clamp(y - (i,j)) == x.
          for (int dy = -ry; dy <= ry; ++dy) {
            const int y2 = x2 + dy;
            if (y2 < 0 || y2 >= height || clamp_index(y2 - j, height) != x2) continue;
            for (int dx = -rx; dx <= rx; ++dx) {
              const int y1 = x1 + dx;
              if (y1 < 0 || y1 >= width || clamp_index(y1 - i, width) != x1) continue;
              column[static_cast<std::size_t>(dy + ry) * win_w + (dx + rx)] += kv;
            }
          }
        }
      }
      double s = 0.0;
      for (double v : column) s += v * v;
      out(x1, x2) = s;
    }
  }
  return out;
}

}  // namespace gsm
