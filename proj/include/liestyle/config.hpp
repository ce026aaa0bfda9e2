#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "liestyle/analysis.hpp"
#include "liestyle/liegg.hpp"
#include "liestyle/mlp.hpp"
#include "liestyle/styledist.hpp"

namespace liestyle {

/// Scalar or array value from the flat key = value format.
using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>, std::vector<double>>;

/// Parses the TOML subset used by run configs: `[section]` headers, dotted
/// keys, strings, numbers, booleans and flat arrays. Keys come back as
/// "section.key". Throws ConfigError with the line number.
std::map<std::string, ConfigValue> parse_flat_toml(const std::string& text);

struct RunConfig {
  std::filesystem::path manifest = "corpus/manifest.csv";
  std::filesystem::path work_dir = "work";
  std::uint64_t seed = 0;
  bool strict = false;

  MlpConfig mlp;
  TrainConfig train;

  AlgebraMode algebra = AlgebraMode::Affine2D;
  std::size_t generators = 4;
  std::size_t affine_size = 32;
  std::size_t pixel_size = 12;

  std::string container = "random-fallback";  // path, or random-fallback
  std::vector<std::string> layers{"conv1_1", "conv2_1", "conv3_1", "conv4_1"};
  std::size_t texture_size = 224;

  CombinedConfig combined;

  std::size_t bootstrap_trials = 1000;
  double bootstrap_threshold = 0.95;

  std::size_t mantel_permutations = 1000;
  GroundTruthKind ground_truth = GroundTruthKind::Standard;
  bool mantel_self_test = false;

  double flow_delta = 0.25;
  std::size_t flow_rank = 0;
  std::string flow_artist;            // empty: first artist in the manifest
  std::filesystem::path flow_image;   // empty: that artist's first painting
  std::size_t flow_size = 128;

  /// Throws ConfigError. With `require_inputs`, the manifest and container must exist.
  void validate(bool require_inputs = true) const;

  std::filesystem::path dir(const char* sub) const { return work_dir / sub; }
};

/// Reads a config file; relative paths resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_text(const std::string& text, const std::filesystem::path& base_dir = ".");

}  // namespace liestyle
