#include "gsm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

#include "gsm/error.hpp"
#include "gsm/image_io.hpp"
#include "gsm/priors.hpp"

namespace gsm {

double psnr(const ImageGrid& u, const ImageGrid& reference) {
  if (!u.same_shape(reference)) throw DimensionError("psnr: image shapes differ");
  double sse = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u.values()[i] - reference.values()[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(u.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

ImageGrid add_noise(const ImageGrid& u, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  ImageGrid out = u;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.values()) v += normal(rng);
  return out;
}

SyntheticImage make_synthetic(int size, int channels) {
  if (size < 16) throw ConfigError("synthetic image size must be at least 16");
  const int n = size;
  ImageGrid gray(n, n, 1, 0.2);
  EdgeWeightField texture(n, n);

  auto fill = [&](int x0, int y0, int x1, int y1, double value) {
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) gray(x, y) = value;
  };
  fill(n / 8, n / 8, n / 2, 7 * n / 8, 0.8);
  fill(5 * n / 8, 5 * n / 8, 7 * n / 8, 7 * n / 8, 0.5);
  for (int y = n / 8; y < 3 * n / 8; ++y) {
    for (int x = 5 * n / 8; x < 7 * n / 8; ++x) {
      gray(x, y) = 0.5 + 0.15 * std::sin(2.0 * std::numbers::pi * x / 6.0);
      texture(x, y) = 1.0;
    }
  }

  SyntheticImage out;
  out.step_edges = EdgeWeightField(n, n);
  out.flat = EdgeWeightField(n, n);
  EdgeWeightField busy(n, n);  // edge or texture, before dilation
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const bool near_texture = texture(x, y) > 0 || (x + 1 < n && texture(x + 1, y) > 0) ||
                                (y + 1 < n && texture(x, y + 1) > 0);
      const bool jump = (x + 1 < n && gray(x + 1, y) != gray(x, y)) ||
                        (y + 1 < n && gray(x, y + 1) != gray(x, y));
      if (jump && !near_texture) out.step_edges(x, y) = 1.0;
      if (jump || near_texture) busy(x, y) = 1.0;
    }
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      bool clear = true;
      for (int dy = -2; dy <= 2 && clear; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < n && yy < n && busy(xx, yy) > 0) {
            clear = false;
            break;
          }
        }
      }
      out.flat(x, y) = clear ? 1.0 : 0.0;
    }
  }

  out.clean = ImageGrid(n, n, channels);
  for (int c = 0; c < channels; ++c) {
    auto dst = out.clean.channel(c);
    const auto src = gray.channel(0);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

std::filesystem::path edge_map_sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".scale.txt");
}

void export_edge_map(const EdgeWeightField& xi0, const std::filesystem::path& path) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t unbounded = 0;
  for (double v : xi0.values()) {
    if (v > 0.0) {
      lo = std::min(lo, 1.0 / v);
      hi = std::max(hi, 1.0 / v);
    } else {
      ++unbounded;
    }
  }
  ImageGrid img(xi0.width(), xi0.height(), 1);
  for (std::size_t i = 0; i < xi0.size(); ++i) {
    const double v = xi0[i];
    double p = 1.0;
    if (v > 0.0) p = hi > lo ? (1.0 / v - lo) / (hi - lo) : 0.5;
    img.values()[i] = p;
  }
  save_image(img, path);

  std::ofstream side(edge_map_sidecar(path));
  if (!side) throw IoError("cannot write edge-map sidecar for '" + path.string() + "'");
  side << std::setprecision(17);
  side << "# mean edge weight 1/xi0 = lo + pixel * (hi - lo); pixel 1.0 with xi0 <= 0 is unbounded\n";
  side << "lo = " << (unbounded == xi0.size() ? 0.0 : lo) << '\n';
  side << "hi = " << (unbounded == xi0.size() ? 0.0 : hi) << '\n';
  side << "unbounded_pixels = " << unbounded << '\n';
}

}  // namespace gsm
