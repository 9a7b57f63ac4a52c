#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gsm/grid.hpp"

namespace gsm {

/// Peak-1 PSNR in dB; +infinity when the images are identical.
double psnr(const ImageGrid& u, const ImageGrid& reference);

/// u + N(0, sigma^2) per pixel and channel, unclamped, deterministic per seed.
ImageGrid add_noise(const ImageGrid& u, double sigma, std::uint64_t seed);

/// Piecewise-constant test image with a textured patch and its ground-truth masks.
struct SyntheticImage {
  ImageGrid clean;
  EdgeWeightField step_edges;  // 1 where a forward difference crosses a step edge
  EdgeWeightField flat;        // 1 on pixels at least two pixels away from any edge or texture
};

/**
 * size x size image: background 0.2, a 0.8 rectangle, a 0.5 square and a
 * sinusoidal patch (period 6 px, amplitude 0.15 around 0.5). Every channel
 * holds the same values.
 */
SyntheticImage make_synthetic(int size, int channels = 1);

/**
 * Writes 1/xi0 affinely rescaled to [0,1]. Pixels with xi0 <= 0 (infinite
 * edge weight) map to 1.0. A sidecar `<path>.scale.txt` records `lo`, `hi`
 * and the count of such pixels so that 1/xi0 = lo + p * (hi - lo) for the
 * finite pixels; a constant map is written as 0.5.
 */
void export_edge_map(const EdgeWeightField& xi0, const std::filesystem::path& path);

std::filesystem::path edge_map_sidecar(const std::filesystem::path& path);

}  // namespace gsm
