#include "liestyle/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "liestyle/errors.hpp"

namespace liestyle {

std::vector<std::string> CorpusManifest::artists() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries)
    if (seen.insert(e.artist).second) out.push_back(e.artist);
  return out;
}

std::vector<std::string> CorpusManifest::paths_for(const std::string& artist) const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.artist == artist) out.push_back(e.path);
  return out;
}

ArtistMovementTable::ArtistMovementTable(std::map<std::string, std::string> assignment)
    : assignment_(std::move(assignment)) {}

const std::string& ArtistMovementTable::movement_of(const std::string& artist) const {
  const auto it = assignment_.find(artist);
  if (it == assignment_.end()) throw DataError("unknown artist '" + artist + "'");
  return it->second;
}

std::size_t ArtistMovementTable::movement_count() const {
  std::set<std::string> m;
  for (const auto& [a, mv] : assignment_) m.insert(mv);
  return m.size();
}

ArtistMovementTable ArtistMovementTable::from_manifest(const CorpusManifest& manifest) {
  std::map<std::string, std::string> table;
  for (const auto& e : manifest.entries) table.emplace(e.artist, e.movement);
  return ArtistMovementTable(std::move(table));
}

const ArtistMovementTable& builtin_movements() {
  // Edvard Munch is listed under both Expressionism and Symbolism in the source
  // table; he is assigned to Expressionism here.
  static const ArtistMovementTable table = [] {
    const std::vector<std::pair<std::string, std::vector<std::string>>> groups = {
        {"Abstract Art", {"Piet Mondrian", "Kazimir Malevich", "Jackson Pollock"}},
        {"Baroque", {"Peter Paul Rubens", "Caravaggio", "Diego Velazquez", "Rembrandt"}},
        {"Byzantine Art", {"Andrei Rublev"}},
        {"Cubism", {"Pablo Picasso"}},
        {"Expressionism", {"Amedeo Modigliani", "Vasiliy Kandinsky", "Edvard Munch", "Paul Klee"}},
        {"Impressionism",
         {"Claude Monet", "Edouard Manet", "Pierre-Auguste Renoir", "Alfred Sisley", "Edgar Degas",
          "Camille Pissarro"}},
        {"Northern Renaissance", {"Hieronymus Bosch", "Albrecht Dürer", "Pieter Bruegel", "Jan van Eyck"}},
        {"Pop Art", {"Andy Warhol"}},
        {"Post-Impressionism",
         {"Vincent van Gogh", "Henri Matisse", "Henri de Toulouse-Lautrec", "Paul Cézanne", "Georges Seurat",
          "Diego Rivera"}},
        {"Primitivism", {"Marc Chagall", "Henri Rousseau", "Paul Gauguin"}},
        {"Renaissance",
         {"Giotto di Bondone", "Sandro Botticelli", "Leonardo da Vinci", "Raphael", "Michelangelo", "Titian",
          "El Greco"}},
        {"Romanticism", {"Francisco Goya", "William Turner", "Eugène Delacroix", "Gustave Courbet"}},
        {"Surrealism", {"René Magritte", "Salvador Dalí", "Frida Kahlo", "Joan Miró"}},
        {"Symbolism", {"Gustav Klimt", "Mikhail Vrubel"}},
    };
    std::map<std::string, std::string> m;
    for (const auto& [movement, artists] : groups)
      for (const auto& a : artists) m.emplace(a, movement);
    return ArtistMovementTable(std::move(m));
  }();
  return table;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

}  // namespace

void validate_manifest(const CorpusManifest& manifest, bool strict) {
  std::set<std::string> paths;
  std::map<std::string, std::string> movement;
  for (const auto& e : manifest.entries) {
    if (!paths.insert(e.path).second) throw DataError("manifest: duplicate path '" + e.path + "'");
    const auto [it, inserted] = movement.emplace(e.artist, e.movement);
    if (!inserted && it->second != e.movement)
      throw DataError("manifest: artist '" + e.artist + "' assigned to two movements ('" + it->second + "' and '" +
                      e.movement + "')");
    if (strict && !builtin_movements().contains(e.artist))
      throw DataError("manifest: unknown artist '" + e.artist + "' (strict mode)");
  }
}

CorpusManifest load_manifest(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest '" + path.string() + "' is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_csv_line(trim(line));
  if (header != std::vector<std::string>{"path", "artist", "movement"})
    throw DataError("manifest '" + path.string() + "': header must be 'path,artist,movement'");

  const auto base = path.parent_path();
  CorpusManifest m;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw DataError("manifest '" + path.string() + "' line " + std::to_string(lineno) + ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    for (auto& f : fields) f = trim(f);
    std::filesystem::path p(fields[0]);
    if (p.is_relative()) p = base / p;
    m.entries.push_back({p.lexically_normal().string(), fields[1], fields[2]});
  }
  validate_manifest(m, strict);
  return m;
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
  out << "path,artist,movement\n";
  for (const auto& e : manifest.entries) out << e.path << ',' << e.artist << ',' << e.movement << '\n';
}

namespace {

double smoothstep_edge(double d, double width) {
  // 0 -> 1 transition across a band of `width` centered on d = 0.
  const double t = std::clamp(d / width + 0.5, 0.0, 1.0);
  return t * t * (3 - 2 * t);
}

// Normalized coordinate of pixel index i on an axis of length n, in (-1, 1).
double norm_coord(std::size_t i, std::size_t n) { return 2.0 * (i + 0.5) / n - 1.0; }

ImageTensor ring_image(std::mt19937_64& rng, std::size_t size) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double base = 0.15 + 0.3 * unit(rng);
  const int rings = 2 + static_cast<int>(unit(rng) * 3);
  std::vector<std::array<double, 3>> params;  // radius, width, amplitude
  for (int k = 0; k < rings; ++k)
    params.push_back({0.1 + 0.8 * unit(rng), 0.06 + 0.1 * unit(rng), 0.2 + 0.4 * unit(rng)});
  ImageTensor img(size, size, 1);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double r = std::hypot(norm_coord(x, size), norm_coord(y, size));
      double v = base;
      for (const auto& [rad, w, amp] : params) v += amp * std::exp(-0.5 * (r - rad) * (r - rad) / (w * w));
      img.at(0, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  return img;
}

ImageTensor bar_image(std::mt19937_64& rng, std::size_t size) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double base = 0.15 + 0.3 * unit(rng);
  const double angle = std::numbers::pi * unit(rng);
  const double offset = 0.6 * (unit(rng) - 0.5);
  const double half_width = 0.08 + 0.15 * unit(rng);
  const double amp = 0.3 + 0.4 * unit(rng);
  const double c = std::cos(angle), s = std::sin(angle);
  const double edge = 2.0 / size;
  ImageTensor img(size, size, 1);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double d = std::abs(c * norm_coord(y, size) - s * norm_coord(x, size) - offset);
      const double v = base + amp * (1.0 - smoothstep_edge(d - half_width, edge));
      img.at(0, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  return img;
}

}  // namespace

std::vector<LabeledImage> synth_rotation_corpus(std::uint64_t seed, std::size_t n_per_class, std::size_t size) {
  if (size < 8) throw DataError("synth_rotation_corpus: size must be at least 8");
  std::mt19937_64 rng(seed);
  std::vector<LabeledImage> out;
  out.reserve(2 * n_per_class);
  for (std::size_t i = 0; i < n_per_class; ++i) out.push_back({ring_image(rng, size), 1});
  for (std::size_t i = 0; i < n_per_class; ++i) out.push_back({bar_image(rng, size), 0});
  return out;
}

namespace {

struct Palette {
  std::array<double, 3> low;
  std::array<double, 3> high;
};

// Structure field s(p) in [0,1] for each movement; palettes map it to RGB.
using Field = std::vector<double>;

Field rectangle_field(std::mt19937_64& rng, std::size_t size) {
  // Full-height rectangles side by side with flat fills.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int cuts = 3 + static_cast<int>(unit(rng) * 4);
  std::vector<double> edges;
  for (int k = 0; k < cuts; ++k) edges.push_back(-0.9 + 1.8 * unit(rng));
  std::sort(edges.begin(), edges.end());
  std::vector<double> levels;
  for (int k = 0; k <= cuts; ++k) levels.push_back(0.15 + 0.6 * unit(rng));
  const double edge = 2.0 / size;
  Field f(size * size);
  for (std::size_t x = 0; x < size; ++x) {
    const double px = norm_coord(x, size);
    double v = levels[0];
    for (int k = 0; k < cuts; ++k) v += (levels[k + 1] - levels[k]) * smoothstep_edge(px - edges[k], edge);
    for (std::size_t y = 0; y < size; ++y) f[y * size + x] = v;
  }
  return f;
}

Field radial_field(std::mt19937_64& rng, std::size_t size) {
  // Concentric ripples under a centered Gaussian envelope: an isotropic blob,
  // exactly rotation symmetric. Structure stays near the center, so linear
  // coordinate fields (scales, shear) barely move it while translations do.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double freq = 2.5 + 1.5 * unit(rng);
  const double phase = 2 * std::numbers::pi * unit(rng);
  const double amp = 0.25 + 0.1 * unit(rng);
  const double sigma = 0.35 + 0.1 * unit(rng);
  Field f(size * size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double r = std::hypot(norm_coord(x, size), norm_coord(y, size));
      f[y * size + x] =
          0.5 + amp * std::exp(-(r * r) / (sigma * sigma)) * std::sin(2 * std::numbers::pi * freq * r + phase);
    }
  return f;
}

Field stripe_field(std::mt19937_64& rng, std::size_t size) {
  // Horizontal stripes: invariant along x.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double freq = 1.5 + 1.5 * unit(rng);
  const double phase = 2 * std::numbers::pi * unit(rng);
  const double amp = 0.2 + 0.1 * unit(rng);
  Field f(size * size);
  for (std::size_t y = 0; y < size; ++y) {
    const double v = 0.55 + amp * std::sin(std::numbers::pi * freq * norm_coord(y, size) + phase);
    for (std::size_t x = 0; x < size; ++x) f[y * size + x] = v;
  }
  return f;
}

ImageTensor paint(const Field& f, const Palette& pal, std::size_t size) {
  ImageTensor img(size, size, 3);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < size * size; ++i) {
      const double v = pal.low[c] + (pal.high[c] - pal.low[c]) * f[i];
      img.pixels[c * size * size + i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  return img;
}

}  // namespace

SynthCorpus synth_style_corpus(std::uint64_t seed, std::size_t size) {
  if (size < 8) throw DataError("synth_style_corpus: size must be at least 8");
  constexpr std::size_t kArtists = 4;
  constexpr std::size_t kImages = 20;
  using FieldFn = Field (*)(std::mt19937_64&, std::size_t);
  const std::array<std::pair<const char*, FieldFn>, 3> movements = {{
      {"Rectangles", rectangle_field},
      {"Radial", radial_field},
      {"Stripes", stripe_field},
  }};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Palette families are shared across movements: artist k of every movement
  // draws from family k, so color statistics alone do not reveal the movement.
  std::array<Palette, kArtists> families;
  for (auto& fam : families)
    for (std::size_t c = 0; c < 3; ++c) {
      fam.low[c] = 0.05 + 0.35 * unit(rng);
      fam.high[c] = 0.6 + 0.4 * unit(rng);
    }

  SynthCorpus corpus;
  for (std::size_t m = 0; m < movements.size(); ++m) {
    for (std::size_t a = 0; a < kArtists; ++a) {
      const std::string artist = std::string(movements[m].first) + "-" + std::to_string(a + 1);
      Palette pal = families[a];
      for (std::size_t c = 0; c < 3; ++c) {
        pal.low[c] = std::clamp(pal.low[c] + 0.05 * (unit(rng) - 0.5), 0.0, 1.0);
        pal.high[c] = std::clamp(pal.high[c] + 0.05 * (unit(rng) - 0.5), 0.0, 1.0);
      }
      for (std::size_t i = 0; i < kImages; ++i) {
        std::mt19937_64 img_rng(seed ^ (0x9E3779B97F4A7C15ull * (m * 1000 + a * 100 + i + 1)));
        corpus.images.push_back(paint(movements[m].second(img_rng, size), pal, size));
        corpus.manifest.entries.push_back(
            {artist + "/" + std::to_string(i) + ".ppm", artist, movements[m].first});
      }
    }
  }
  return corpus;
}

std::filesystem::path write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < corpus.images.size(); ++i) {
    const auto p = dir / corpus.manifest.entries[i].path;
    std::filesystem::create_directories(p.parent_path());
    save_pnm(corpus.images[i], p);
  }
  const auto manifest_path = dir / "manifest.csv";
  save_manifest(corpus.manifest, manifest_path);
  return manifest_path;
}

}  // namespace liestyle
