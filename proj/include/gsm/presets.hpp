#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gsm/priors.hpp"
#include "gsm/restore.hpp"

namespace gsm {

/// Hyperparameters of the reference denoising, deblurring and sampling experiments.
struct ExperimentPreset {
  std::string name;
  std::string subcommand;  // denoise | deblur | sample
  Method method = Method::mean_field;  // ignored by sample
  PriorParams prior;
  double sigma = 0.1;
  int blur_radius = 0;  // 0: identity forward operator
  double blur_sigma = 1.0;
  int iterations = 100;  // outer iterations, or Gibbs sweeps for sample
  int burn_in = 20;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

std::span<const ExperimentPreset> experiment_presets();
std::optional<ExperimentPreset> find_preset(std::string_view name);

}  // namespace gsm
