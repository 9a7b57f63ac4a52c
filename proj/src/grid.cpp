#include "gsm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gsm/error.hpp"

namespace gsm {

ImageGrid::ImageGrid(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || channels < 1) {
    throw DimensionError("image dimensions must be positive");
  }
  values_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

ImageGrid::ImageGrid(int width, int height, int channels, std::vector<double> values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
  if (width < 1 || height < 1 || channels < 1) {
    throw DimensionError("image dimensions must be positive");
  }
  if (values_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw DimensionError("value count does not match width * height * channels");
  }
}

std::span<double> ImageGrid::channel(int c) {
  return std::span<double>(values_).subspan(static_cast<std::size_t>(c) * pixel_count(), pixel_count());
}

std::span<const double> ImageGrid::channel(int c) const {
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * pixel_count(),
                                                  pixel_count());
}

bool ImageGrid::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GradientField::GradientField(int width, int height, int channels)
    : dx_(width, height, channels), dy_(width, height, channels) {}

EdgeWeightField::EdgeWeightField(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw DimensionError("field dimensions must be positive");
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

double EdgeWeightField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double EdgeWeightField::max() const { return *std::max_element(values_.begin(), values_.end()); }

GradientField gradient(const ImageGrid& u) {
  const int w = u.width();
  const int h = u.height();
  GradientField g(w, h, u.channels());
  for (int c = 0; c < u.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double center = u(x, y, c);
        g.dx()(x, y, c) = x + 1 < w ? u(x + 1, y, c) - center : 0.0;
        g.dy()(x, y, c) = y + 1 < h ? u(x, y + 1, c) - center : 0.0;
      }
    }
  }
  return g;
}

ImageGrid divergence(const GradientField& p) {
  const int w = p.width();
  const int h = p.height();
  ImageGrid out(w, h, p.channels());
  for (int c = 0; c < p.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        // Components on the last column/row never enter <grad u, p>, so they are ignored here.
        double v = 0.0;
        if (x + 1 < w) v += p.dx()(x, y, c);
        if (x > 0) v -= p.dx()(x - 1, y, c);
        if (y + 1 < h) v += p.dy()(x, y, c);
        if (y > 0) v -= p.dy()(x, y - 1, c);
        out(x, y, c) = v;
      }
    }
  }
  return out;
}

EdgeWeightField stencil_norm_of_x(int x1, int x2, int width, int height) {
  if (x1 < 0 || x2 < 0 || x1 >= width || x2 >= height) {
    throw DimensionError("stencil pixel outside the grid");
  }
  ImageGrid indicator(width, height, 1);
  indicator(x1, x2) = 1.0;
  const GradientField g = gradient(indicator);
  EdgeWeightField out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double a = g.dx()(x, y);
      const double b = g.dy()(x, y);
      out(x, y) = a * a + b * b;
    }
  }
  return out;
}

double stencil_sum(int x1, int x2, int width, int height) {
  int n = 0;
  if (x1 + 1 < width) ++n;   // own horizontal difference
  if (x2 + 1 < height) ++n;  // own vertical difference
  if (x1 > 0) ++n;           // left neighbour's horizontal difference
  if (x2 > 0) ++n;           // upper neighbour's vertical difference
  return n;
}

EdgeWeightField edge_statistic(const ImageGrid& u) {
  const int w = u.width();
  const int h = u.height();
  EdgeWeightField t(w, h);
  const double scale = 0.5 / u.channels();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int c = 0; c < u.channels(); ++c) {
        const double center = u(x, y, c);
        const double a = x + 1 < w ? u(x + 1, y, c) - center : 0.0;
        const double b = y + 1 < h ? u(x, y + 1, c) - center : 0.0;
        sum += a * a + b * b;
      }
      t(x, y) = scale * sum;
    }
  }
  return t;
}

EdgeWeightField variance_spread(const EdgeWeightField& c) {
  const int w = c.width();
  const int h = c.height();
  EdgeWeightField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      if (x + 1 < w) v += c(x, y) + c(x + 1, y);
      if (y + 1 < h) v += c(x, y) + c(x, y + 1);
      out(x, y) = v;
    }
  }
  return out;
}

EdgeWeightField diffusion_diagonal(const EdgeWeightField& wgt) {
  const int w = wgt.width();
  const int h = wgt.height();
  EdgeWeightField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      if (x + 1 < w) v += wgt(x, y);
      if (y + 1 < h) v += wgt(x, y);
      if (x > 0) v += wgt(x - 1, y);
      if (y > 0) v += wgt(x, y - 1);
      out(x, y) = v;
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("dot: image shape mismatch");
  return dot(a.values(), b.values());
}

double dot(const GradientField& a, const GradientField& b) {
  return dot(a.dx(), b.dx()) + dot(a.dy(), b.dy());
}

double norm(const ImageGrid& u) { return std::sqrt(dot(u, u)); }
double norm(const GradientField& p) { return std::sqrt(dot(p, p)); }

}  // namespace gsm
