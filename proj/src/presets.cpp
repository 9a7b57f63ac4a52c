#include "gsm/presets.hpp"

#include <array>

namespace gsm {

namespace {

// No blur kernel is prescribed for the deconvolution preset; a 3x3 Gaussian
// with sigma 1 is used.
const std::array<ExperimentPreset, 3> kPresets = {{
    {"fig2-denoise", "denoise", Method::mean_field, {PriorKind::gamma, 1e3, 1e3, 0.0}, 0.1, 0, 1.0,
     100, 20, 1e-4, 0},
    {"fig3-deblur", "deblur", Method::mean_field, {PriorKind::gamma, 4e3, 4e3, 0.0}, 0.02, 1, 1.0,
     100, 20, 1e-4, 0},
    {"fig4-msprior", "sample", Method::em, {PriorKind::two_point, 800.0, 1.0, 3.8}, 0.1, 0, 1.0,
     100, 20, 1e-4, 0},
}};

}  // namespace

std::span<const ExperimentPreset> experiment_presets() { return kPresets; }

std::optional<ExperimentPreset> find_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace gsm
