#pragma once

#include <filesystem>

#include "gsm/grid.hpp"

namespace gsm {

/**
 * Reads 8-bit PNG (gray or RGB; alpha is dropped, palettes are expanded)
 * or binary PGM/PPM with maxval 255. Samples s map to s/255. Interleaved
 * RGB samples are de-interleaved into the planar channel layout of
 * ImageGrid (channel 0 = R, 1 = G, 2 = B).
 */
ImageGrid load_image(const std::filesystem::path& path);

/// Clamps to [0,1], rounds to the nearest 8-bit level. Format from the extension (.png/.pgm/.ppm).
void save_image(const ImageGrid& u, const std::filesystem::path& path);

}  // namespace gsm
