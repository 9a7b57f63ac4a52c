#include "gsm/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "gsm/error.hpp"
#include "gsm/image_io.hpp"
#include "gsm/metrics.hpp"
#include "gsm/presets.hpp"
#include "gsm/restore.hpp"
#include "gsm/sampler.hpp"

namespace gsm::cli {

namespace {

struct Key {
  const char* name;
  const char* help;
};

constexpr Key kKeys[] = {
    {"input", "input image (PNG/PGM/PPM); omitted: built-in synthetic image"},
    {"output", "restored image path"},
    {"edges", "mean edge image path (1/xi0, or 1/E[z] for sample)"},
    {"method", "em | meanfield | gd | lagged"},
    {"prior", "gamma | two-point | exp"},
    {"lambda", "prior scale lambda"},
    {"C", "gamma prior constant C"},
    {"mu", "two-point prior offset mu"},
    {"sigma", "noise standard deviation of the model"},
    {"iters", "outer iterations, or Gibbs sweeps for sample"},
    {"burn-in", "discarded Gibbs sweeps (default 20% of iters)"},
    {"seed", "random seed for noise synthesis and sampling"},
    {"tol", "relative change stopping tolerance"},
    {"preset", "fig2-denoise | fig3-deblur | fig4-msprior"},
    {"add-noise", "synthesize the observation: blur (deblur) then add N(0, s^2) noise"},
    {"metrics", "text file: PSNR vs reference, then the objective trace, one value per line"},
    {"reference", "reference image for PSNR"},
    {"blur-radius", "Gaussian blur radius (deblur; sample when > 0)"},
    {"blur-sigma", "Gaussian blur sigma"},
    {"size", "synthetic image size in pixels"},
    {"save-observed", "also write the (synthesized) observation"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  for (const auto& k : kKeys) {
    if (key == k.name) return true;
  }
  return key == "config";
}

class Resolved {
 public:
  explicit Resolved(Settings s) : s_(std::move(s)) {}

  bool has(const std::string& key) const { return s_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback = {}) const {
    auto it = s_.find(key);
    return it == s_.end() ? fallback : it->second;
  }
  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw ConfigError("--" + key + ": '" + v + "' is not a number");
    }
    return out;
  }
  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ConfigError("--" + key + ": '" + v + "' is not an integer");
    }
    return out;
  }

 private:
  Settings s_;
};

void write_metrics(const std::filesystem::path& path, std::optional<double> psnr_value,
                   const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics file '" + path.string() + "'");
  out << std::setprecision(17);
  if (!psnr_value) {
    out << "nan\n";
  } else if (std::isinf(*psnr_value)) {
    out << "inf\n";
  } else {
    out << *psnr_value << '\n';
  }
  for (double v : trace) out << v << '\n';
}

int execute(const std::string& command, const Resolved& opt, std::ostream& out) {
  if (!opt.has("output")) throw ConfigError("--output is required");
  const std::filesystem::path output = opt.str("output");

  const int size = static_cast<int>(opt.integer("size", 64));
  if (command == "synth") {
    save_image(make_synthetic(size).clean, output);
    out << "wrote " << output.string() << '\n';
    return kExitOk;
  }

  const std::optional<ExperimentPreset> preset =
      opt.has("preset") ? find_preset(opt.str("preset")) : std::nullopt;

  PriorParams prior_params;
  prior_params.kind = parse_prior_kind(opt.str("prior", "gamma"));
  prior_params.lambda = opt.real("lambda", 1e3);
  prior_params.c = opt.real("C", prior_params.lambda);
  prior_params.mu = opt.real("mu", 0.0);
  const double sigma = opt.real("sigma", 0.1);
  if (!(sigma > 0.0)) throw ConfigError("--sigma must be positive");
  if (!(prior_params.lambda > 0.0)) throw ConfigError("--lambda must be positive");
  if (!(prior_params.c > 0.0)) throw ConfigError("--C must be positive");
  const PriorPtr prior = make_prior(prior_params);

  const long long iters = opt.integer("iters", 100);
  if (iters < 1) throw ConfigError("--iters must be at least 1");
  const double tol = opt.real("tol", 1e-4);
  if (!(tol > 0.0)) throw ConfigError("--tol must be positive");
  const auto seed = static_cast<std::uint64_t>(opt.integer("seed", 0));

  int blur_radius = static_cast<int>(opt.integer("blur-radius", command == "deblur" ? 1 : 0));
  const double blur_sigma = opt.real("blur-sigma", 1.0);
  if (blur_radius < 0) throw ConfigError("--blur-radius must be non-negative");
  if (command == "deblur" && blur_radius == 0) throw ConfigError("deblur needs --blur-radius >= 1");
  if (command == "denoise") blur_radius = 0;
  const ForwardOperator forward = blur_radius > 0
                                      ? ForwardOperator::convolution(gaussian_kernel(blur_radius, blur_sigma))
                                      : ForwardOperator::identity();

  if (command == "sample" && !prior->capabilities().has_z_sampler) {
    throw CapabilityError("prior '" + prior->name() +
                          "' has no z-sampler capability; sample needs gamma or two-point");
  }
  std::optional<Method> method;
  if (command != "sample") method = parse_method(opt.str("method", "em"));

  int burn_in = 0;
  if (command == "sample") {
    burn_in = static_cast<int>(opt.integer("burn-in", default_burn_in(static_cast<int>(iters))));
    if (burn_in < 0 || burn_in >= iters) throw ConfigError("--burn-in must lie in [0, iters)");
  }

  double noise = -1.0;
  if (opt.has("add-noise")) {
    noise = opt.real("add-noise", 0.0);
    if (!(noise >= 0.0)) throw ConfigError("--add-noise must be non-negative");
  }

  // Observation and reference.
  ImageGrid clean;
  if (opt.has("input")) {
    clean = load_image(opt.str("input"));
  } else {
    clean = make_synthetic(size).clean;
    if (noise < 0.0) noise = sigma;  // a synthetic scene is always degraded
  }
  ImageGrid observed = clean;
  std::optional<ImageGrid> reference;
  if (noise >= 0.0) {
    observed = add_noise(forward.apply(clean), noise, seed);
    reference = clean;
  }
  if (opt.has("reference")) reference = load_image(opt.str("reference"));
  if (reference && !reference->same_shape(observed)) {
    throw ConfigError("--reference does not match the input dimensions");
  }
  if (opt.has("save-observed")) save_image(observed, opt.str("save-observed"));

  ImageGrid result;
  EdgeWeightField weights;
  std::vector<double> trace;
  if (command == "sample") {
    SamplerConfig cfg;
    cfg.prior = prior;
    cfg.forward = forward;
    cfg.sigma = sigma;
    cfg.num_iterations = static_cast<int>(iters);
    cfg.burn_in = burn_in;
    cfg.seed = seed + 1;
    const ChainResult chain = run_chain(cfg, observed);
    result = chain.mean_u;
    weights = chain.mean_z;
  } else {
    RestoreConfig cfg;
    cfg.prior = prior;
    cfg.forward = forward;
    cfg.sigma = sigma;
    cfg.max_outer_iters = static_cast<int>(iters);
    cfg.outer_tol = tol;
    cfg.method = *method;
    cfg.gd_step = 0.5 * sigma * sigma;
    const RestoreResult r = restore(cfg, observed);
    result = r.u;
    weights = r.xi0;
    trace = r.objective_trace;
    out << to_string(cfg.method) << ": " << r.iterations << " outer iterations"
        << (r.converged ? " (converged)" : "") << '\n';
  }

  save_image(result, output);
  if (opt.has("edges")) export_edge_map(weights, opt.str("edges"));
  std::optional<double> quality;
  if (reference) {
    quality = psnr(result, *reference);
    out << "PSNR observed " << psnr(observed, *reference) << " dB, restored " << *quality << " dB\n";
  }
  if (opt.has("metrics")) write_metrics(opt.str("metrics"), quality, trace);
  if (preset) out << "preset " << preset->name << '\n';
  return kExitOk;
}

Settings preset_settings(const ExperimentPreset& p) {
  std::ostringstream num;
  auto fmt = [&](double v) {
    num.str({});
    num << std::setprecision(17) << v;
    return num.str();
  };
  Settings s;
  s["method"] = std::string(to_string(p.method));
  s["prior"] = std::string(to_string(p.prior.kind));
  s["lambda"] = fmt(p.prior.lambda);
  s["C"] = fmt(p.prior.c);
  s["mu"] = fmt(p.prior.mu);
  s["sigma"] = fmt(p.sigma);
  if (p.blur_radius > 0) {
    s["blur-radius"] = std::to_string(p.blur_radius);
    s["blur-sigma"] = fmt(p.blur_sigma);
  }
  s["iters"] = std::to_string(p.iterations);
  s["burn-in"] = std::to_string(p.burn_in);
  s["tol"] = fmt(p.tol);
  s["seed"] = std::to_string(p.seed);
  return s;
}

}  // namespace

Settings parse_config_text(const std::string& text) {
  Settings s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!known_key(key) || key == "config") {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    s[key] = value;
  }
  return s;
}

Settings read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian scale mixture restoration: denoise, deblur, sample"};
  app.name("gsm_restore");
  app.require_subcommand(1);

  Settings flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  std::string config_path;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"denoise", "MAP or mean-field denoising"},
      {"deblur", "MAP or mean-field deconvolution"},
      {"sample", "Gibbs sampling of the conditional mean"},
      {"synth", "write the built-in synthetic test image"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    for (const auto& k : kKeys) {
      sub->add_option(std::string("--") + k.name, flag_values[k.name], k.help);
    }
    sub->add_option("--config", config_path, "key = value file; flags override it");
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = nullptr;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) active = sub;
  }
  const std::string command = active->get_name();

  try {
    Settings flags;
    for (const auto& k : kKeys) {
      if (active->get_option(std::string("--") + k.name)->count() > 0) flags[k.name] = flag_values[k.name];
    }
    Settings config;
    if (!config_path.empty()) config = read_config_file(config_path);

    Settings merged;
    std::string preset_name = flags.count("preset") ? flags["preset"]
                              : config.count("preset") ? config["preset"]
                                                       : std::string{};
    if (!preset_name.empty()) {
      const auto preset = find_preset(preset_name);
      if (!preset) throw ConfigError("unknown preset '" + preset_name + "'");
      if (preset->subcommand != command) {
        throw ConfigError("preset '" + preset_name + "' belongs to the '" + preset->subcommand +
                          "' subcommand");
      }
      merged = preset_settings(*preset);
    }
    for (const auto& [k, v] : config) merged[k] = v;
    for (const auto& [k, v] : flags) merged[k] = v;
    return execute(command, Resolved(std::move(merged)), out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace gsm::cli
