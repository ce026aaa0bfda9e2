#include "liestyle/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <set>
#include <sstream>

#include "liestyle/errors.hpp"

namespace liestyle {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string parse_string(const std::string& v, std::size_t line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') fail(line, "malformed string " + v);
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) {
      const char c = v[++i];
      out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
    } else {
      out += v[i];
    }
  }
  return out;
}

std::optional<double> parse_number(const std::string& v) {
  double d = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), d);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) return std::nullopt;
  return d;
}

ConfigValue parse_value(const std::string& v, std::size_t line) {
  if (v.empty()) fail(line, "missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') return parse_string(v, line);
  if (v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated array");
    std::vector<std::string> items;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '"') quoted = !quoted;
      if (v[i] == ',' && !quoted) {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += v[i];
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    if (items.empty()) return std::vector<std::string>{};
    if (items.front().front() == '"') {
      std::vector<std::string> out;
      for (const auto& it : items) out.push_back(parse_string(it, line));
      return out;
    }
    std::vector<double> out;
    for (const auto& it : items) {
      const auto d = parse_number(it);
      if (!d) fail(line, "array element '" + it + "' is not a number");
      out.push_back(*d);
    }
    return out;
  }
  if (v.find_first_of(".eE") == std::string::npos || v.find_first_of("xX") != std::string::npos) {
    std::int64_t i = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), i);
    if (res.ec == std::errc() && res.ptr == v.data() + v.size()) return i;
  }
  if (const auto d = parse_number(v)) return *d;
  fail(line, "cannot parse value '" + v + "'");
}

}  // namespace

std::map<std::string, ConfigValue> parse_flat_toml(const std::string& text) {
  std::map<std::string, ConfigValue> out;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (key.empty()) fail(line, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) fail(line, "duplicate key '" + full + "'");
    out.emplace(full, parse_value(trim(std::string_view(s).substr(eq + 1)), line));
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::map<std::string, ConfigValue> values) : values_(std::move(values)) {}

  template <class Fn>
  void with(const std::string& key, Fn&& fn) {
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    used_.insert(key);
    try {
      fn(it->second);
    } catch (const std::bad_variant_access&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }

  void string(const std::string& key, std::string& dst) {
    with(key, [&](const ConfigValue& v) { dst = std::get<std::string>(v); });
  }
  void flag(const std::string& key, bool& dst) {
    with(key, [&](const ConfigValue& v) { dst = std::get<bool>(v); });
  }
  void real(const std::string& key, double& dst) {
    with(key, [&](const ConfigValue& v) {
      dst = std::holds_alternative<std::int64_t>(v) ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
    });
  }
  template <class T>
  void count(const std::string& key, T& dst) {
    with(key, [&](const ConfigValue& v) {
      const auto i = std::get<std::int64_t>(v);
      if (i < 0) throw ConfigError("config key '" + key + "' must be non-negative");
      dst = static_cast<T>(i);
    });
  }

  void reject_unknown() const {
    for (const auto& [k, _] : values_)
      if (!used_.contains(k)) throw ConfigError("unknown config key '" + k + "'");
  }

 private:
  std::map<std::string, ConfigValue> values_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig run_config_from_text(const std::string& text, const std::filesystem::path& base_dir) {
  Reader r(parse_flat_toml(text));
  RunConfig c;
  std::string s;

  if (s.clear(), r.string("manifest", s), !s.empty()) c.manifest = resolve(base_dir, s);
  else c.manifest = resolve(base_dir, c.manifest);
  if (s.clear(), r.string("work_dir", s), !s.empty()) c.work_dir = resolve(base_dir, s);
  else c.work_dir = resolve(base_dir, c.work_dir);
  r.count("seed", c.seed);
  r.flag("strict", c.strict);

  r.with("mlp.hidden", [&](const ConfigValue& v) {
    c.mlp.hidden.clear();
    for (double d : std::get<std::vector<double>>(v)) {
      if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d)))
        throw ConfigError("mlp.hidden entries must be positive integers");
      c.mlp.hidden.push_back(static_cast<std::size_t>(d));
    }
  });
  if (s.clear(), r.string("mlp.activation", s), !s.empty()) {
    if (s == "tanh") c.mlp.activation = Activation::Tanh;
    else if (s == "relu") c.mlp.activation = Activation::Relu;
    else throw ConfigError("mlp.activation must be tanh or relu, got '" + s + "'");
  }
  r.real("mlp.learning_rate", c.train.learning_rate);
  r.count("mlp.epochs", c.train.epochs);
  r.count("mlp.batch_size", c.train.batch_size);
  r.real("mlp.weight_decay", c.train.weight_decay);

  if (s.clear(), r.string("liegg.algebra", s), !s.empty()) {
    if (s == "affine2d") c.algebra = AlgebraMode::Affine2D;
    else if (s == "pixel_linear") c.algebra = AlgebraMode::PixelLinear;
    else throw ConfigError("liegg.algebra must be affine2d or pixel_linear, got '" + s + "'");
  }
  r.count("liegg.generators", c.generators);
  r.count("liegg.affine_size", c.affine_size);
  r.count("liegg.pixel_size", c.pixel_size);

  if (s.clear(), r.string("texture.container", s), !s.empty())
    c.container = s == "random-fallback" ? s : resolve(base_dir, s).string();
  r.with("texture.layers", [&](const ConfigValue& v) { c.layers = std::get<std::vector<std::string>>(v); });
  r.count("texture.image_size", c.texture_size);

  r.real("combine.lambda", c.combined.lambda);
  if (s.clear(), r.string("combine.normalization", s), !s.empty()) {
    if (s == "max_offdiag") c.combined.normalization = Normalization::MaxOffdiag;
    else if (s == "none") c.combined.normalization = Normalization::None;
    else throw ConfigError("combine.normalization must be max_offdiag or none, got '" + s + "'");
  }

  r.count("bootstrap.b", c.bootstrap_trials);
  r.real("bootstrap.threshold", c.bootstrap_threshold);

  r.count("mantel.permutations", c.mantel_permutations);
  if (s.clear(), r.string("mantel.ground_truth", s), !s.empty()) c.ground_truth = parse_ground_truth_kind(s);
  r.flag("mantel.self_test", c.mantel_self_test);

  r.real("flow.delta", c.flow_delta);
  r.count("flow.rank", c.flow_rank);
  r.string("flow.artist", c.flow_artist);
  if (s.clear(), r.string("flow.image", s), !s.empty()) c.flow_image = resolve(base_dir, s);
  r.count("flow.size", c.flow_size);

  r.reject_unknown();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void RunConfig::validate(bool require_inputs) const {
  if (require_inputs && !std::filesystem::exists(manifest))
    throw ConfigError("manifest '" + manifest.string() + "' does not exist (run `synth` to create a synthetic corpus)");
  if (require_inputs && container != "random-fallback" && !std::filesystem::exists(container))
    throw ConfigError("texture container '" + container + "' does not exist");
  if (work_dir.empty()) throw ConfigError("work_dir must be set");
  if (mlp.hidden.empty()) throw ConfigError("mlp.hidden must list at least one layer");
  train.validate();
  if (generators < 1) throw ConfigError("liegg.generators must be at least 1");
  if (algebra == AlgebraMode::Affine2D && generators > kAffineDim)
    throw ConfigError("liegg.generators cannot exceed " + std::to_string(kAffineDim) + " in affine2d mode");
  if (affine_size < 2) throw ConfigError("liegg.affine_size must be at least 2");
  if (algebra == AlgebraMode::PixelLinear) {
    AlgebraParam::pixel_linear(pixel_size * pixel_size);
    if (generators > pixel_size * pixel_size * pixel_size * pixel_size)
      throw ConfigError("liegg.generators exceeds the algebra dimension");
  }
  if (layers.empty()) throw ConfigError("texture.layers must name at least one layer");
  if (texture_size < 8) throw ConfigError("texture.image_size must be at least 8");
  if (!(combined.lambda >= 0.0 && combined.lambda <= 1.0)) throw ConfigError("combine.lambda must lie in [0, 1]");
  if (bootstrap_trials < 1) throw ConfigError("bootstrap.b must be at least 1");
  if (!(bootstrap_threshold >= 0.0 && bootstrap_threshold <= 1.0))
    throw ConfigError("bootstrap.threshold must lie in [0, 1]");
  if (mantel_permutations < 1) throw ConfigError("mantel.permutations must be at least 1");
  if (!(flow_delta >= 0.0) || !std::isfinite(flow_delta)) throw ConfigError("flow.delta must be a finite value >= 0");
  if (flow_size < 2) throw ConfigError("flow.size must be at least 2");
  if (!flow_image.empty() && require_inputs && !std::filesystem::exists(flow_image))
    throw ConfigError("flow.image '" + flow_image.string() + "' does not exist");
}

}  // namespace liestyle
