#pragma once

// Versioned text configuration for the whole pipeline:
//
//   mavsir-config 1
//   # comment
//   key = value
//
// Unknown keys and out-of-range values are rejected with ConfigError.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mavsir/codebook.hpp"
#include "mavsir/error.hpp"
#include "mavsir/evalmetrics.hpp"
#include "mavsir/learnpp.hpp"
#include "mavsir/optflow.hpp"
#include "mavsir/segment.hpp"

namespace mavsir {

inline constexpr std::string_view kConfigHeader = "mavsir-config 1";

struct PipelineConfig {
  HsParams flow;
  double speed_threshold = 0.5;
  double speed_sigma = 1.5;
  ChanVeseParams segment;
  KMeansParams codebook;
  TrainParams train;
  int learnpp_batches = 2;
  NdcrCosts costs;
  int keyframes_per_shot = 3;
  int workers = 1;
  std::uint64_t synth_seed = 2009;

  void validate() const;
};

namespace detail {

struct ConfigKey {
  const char* name;
  const char* range;
  const char* help;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  T out{};
  if (!(ss >> out) || !(ss >> std::ws).eof())
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "'");
  return out;
}

// Shortest text that reads back to the same value.
template <typename T>
std::string show(const T& v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Polynomial: return "polynomial";
  }
  return "?";
}

inline KernelKind parse_kernel(const std::string& s) {
  if (s == "linear") return KernelKind::Linear;
  if (s == "rbf") return KernelKind::Rbf;
  if (s == "polynomial") return KernelKind::Polynomial;
  throw ConfigError("config key 'kernel': expected linear, rbf or polynomial, got '" + s + "'");
}

#define MAVSIR_KEY(NAME, RANGE, HELP, TYPE, FIELD)                                                     \
  ConfigKey {                                                                                          \
    NAME, RANGE, HELP, [](PipelineConfig& c, const std::string& v) { c.FIELD = parse_value<TYPE>(NAME, v); }, \
        [](const PipelineConfig& c) { return show(c.FIELD); }                                          \
  }

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      MAVSIR_KEY("hs_lambda", "> 0", "flow data weight; smoothness alpha^2 = 1/hs_lambda", double, flow.hs_lambda),
      MAVSIR_KEY("pyramid_levels", ">= 1", "flow pyramid levels", int, flow.pyramid_levels),
      MAVSIR_KEY("hs_iterations", ">= 1", "Gauss-Seidel sweeps per pyramid level", int, flow.iterations_per_level),
      MAVSIR_KEY("hs_convergence_eps", ">= 0", "stop a level when the mean update falls below this", double,
                 flow.convergence_eps),
      MAVSIR_KEY("speed_threshold", ">= 0", "flow magnitude below this is zeroed (px/frame)", double, speed_threshold),
      MAVSIR_KEY("speed_sigma", "> 0", "Gaussian smoothing of the speed map", double, speed_sigma),
      MAVSIR_KEY("cv_lambda", "> 0", "segmentation data weight", double, segment.cv_lambda),
      ConfigKey{"mu", "auto or >= 0", "contour length weight; auto = 0.01 * (speed range)^2",
                [](PipelineConfig& c, const std::string& v) {
                  if (v == "auto")
                    c.segment.mu.reset();
                  else
                    c.segment.mu = parse_value<double>("mu", v);
                },
                [](const PipelineConfig& c) { return c.segment.mu ? show(*c.segment.mu) : std::string("auto"); }},
      MAVSIR_KEY("epsilon", "> 0", "Heaviside regularization width", double, segment.epsilon),
      MAVSIR_KEY("dt", "> 0", "initial level-set step", double, segment.dt),
      MAVSIR_KEY("cv_max_iters", ">= 1", "level-set iteration cap", int, segment.max_iters),
      MAVSIR_KEY("stop_tol", ">= 0", "sign-change fraction below which evolution stops", double, segment.stop_tol),
      MAVSIR_KEY("min_area", ">= 1", "smallest kept object (pixels)", int, segment.min_area),
      MAVSIR_KEY("codebook_k", ">= 2", "labels per descriptor channel", int, codebook.k),
      MAVSIR_KEY("codebook_seed", "any u64", "k-means++ seed", std::uint64_t, codebook.seed),
      MAVSIR_KEY("codebook_max_iters", ">= 1", "k-means iteration cap", int, codebook.max_iters),
      MAVSIR_KEY("C", "> 0", "SVM regularization", double, train.C),
      ConfigKey{"kernel", "linear|rbf|polynomial", "SVM kernel",
                [](PipelineConfig& c, const std::string& v) { c.train.kernel.kind = parse_kernel(v); },
                [](const PipelineConfig& c) { return kernel_name(c.train.kernel.kind); }},
      MAVSIR_KEY("gamma", "> 0", "rbf kernel width", double, train.kernel.gamma),
      MAVSIR_KEY("degree", ">= 1", "polynomial kernel degree", int, train.kernel.degree),
      MAVSIR_KEY("coef", "any", "polynomial kernel offset", double, train.kernel.coef),
      MAVSIR_KEY("T_k", ">= 1", "hypotheses per Learn++ batch", int, train.T_k),
      MAVSIR_KEY("train_fraction", "(0, 1)", "share of a batch drawn to train each hypothesis", double,
                 train.train_fraction),
      MAVSIR_KEY("kkt_tol", "> 0", "SMO stopping tolerance on the maximal KKT violation", double, train.kkt_tol),
      MAVSIR_KEY("max_passes", ">= 1", "SMO pair-update cap", long, train.max_passes),
      MAVSIR_KEY("train_seed", "any u64", "Learn++ sampling seed", std::uint64_t, train.seed),
      MAVSIR_KEY("learnpp_batches", ">= 1", "training shots are split into this many incremental batches", int,
                 learnpp_batches),
      MAVSIR_KEY("cost_miss", "> 0", "NDCR miss cost", double, costs.cost_miss),
      MAVSIR_KEY("cost_fa", "> 0", "NDCR false-alarm cost", double, costs.cost_fa),
      MAVSIR_KEY("r_target", "> 0", "NDCR expected events per hour", double, costs.r_target),
      MAVSIR_KEY("keyframes_per_shot", ">= 1", "evenly spaced key-frames per shot", int, keyframes_per_shot),
      MAVSIR_KEY("workers", ">= 1", "worker threads for frame- and shot-level work", int, workers),
      MAVSIR_KEY("synth_seed", "any u64", "synthetic corpus seed", std::uint64_t, synth_seed),
  };
  return keys;
}

#undef MAVSIR_KEY

}  // namespace detail

inline void PipelineConfig::validate() const {
  flow.validate();
  detail::require<ConfigError>(speed_threshold >= 0.0, "speed_threshold must be >= 0");
  detail::require<ConfigError>(speed_sigma > 0.0, "speed_sigma must be > 0");
  segment.validate();
  codebook.validate();
  train.validate();
  costs.validate();
  detail::require<ConfigError>(learnpp_batches >= 1, "learnpp_batches must be >= 1");
  detail::require<ConfigError>(keyframes_per_shot >= 1, "keyframes_per_shot must be >= 1");
  detail::require<ConfigError>(workers >= 1, "workers must be >= 1");
}

inline void set_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
  for (const auto& k : detail::config_keys())
    if (key == k.name) return k.set(c, value);
  throw ConfigError("unknown config key '" + key + "'");
}

inline std::string get_config_value(const PipelineConfig& c, const std::string& key) {
  for (const auto& k : detail::config_keys())
    if (key == k.name) return k.get(c);
  throw ConfigError("unknown config key '" + key + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace detail

/// "key=value" override as given on the command line.
inline void apply_override(PipelineConfig& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
  set_config_value(c, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
}

inline PipelineConfig parse_config(std::istream& in) {
  PipelineConfig c;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != kConfigHeader)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected header '" +
                          std::string(kConfigHeader) + "'");
      header = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      set_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw ConfigError("config: missing header '" + std::string(kConfigHeader) + "'");
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

inline std::string format_config(const PipelineConfig& c) {
  std::string out = std::string(kConfigHeader) + "\n";
  for (const auto& k : detail::config_keys()) out += std::string(k.name) + " = " + k.get(c) + "\n";
  return out;
}

/// One line per key: name, range, default, help.
inline std::string describe_config_keys() {
  const PipelineConfig d;
  std::string out;
  for (const auto& k : detail::config_keys()) {
    std::string line = "  " + std::string(k.name);
    line.resize(22, ' ');
    std::string range = k.range;
    range.resize(22, ' ');
    out += line + range + "default " + k.get(d) + ". " + k.help + "\n";
  }
  return out;
}

}  // namespace mavsir
