#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "liestyle/image.hpp"

namespace liestyle {

struct ManifestEntry {
  std::string path;
  std::string artist;
  std::string movement;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  /// Distinct artists in first-appearance order.
  std::vector<std::string> artists() const;
  std::vector<std::string> paths_for(const std::string& artist) const;
};

/// Artist -> movement. Each artist belongs to exactly one movement.
class ArtistMovementTable {
 public:
  ArtistMovementTable() = default;
  explicit ArtistMovementTable(std::map<std::string, std::string> assignment);

  const std::string& movement_of(const std::string& artist) const;  // throws DataError
  bool contains(const std::string& artist) const { return assignment_.contains(artist); }
  std::size_t artist_count() const { return assignment_.size(); }
  std::size_t movement_count() const;
  const std::map<std::string, std::string>& entries() const { return assignment_; }

  static ArtistMovementTable from_manifest(const CorpusManifest& manifest);

 private:
  std::map<std::string, std::string> assignment_;
};

/// The fifty-artist, fourteen-movement reference assignment.
const ArtistMovementTable& builtin_movements();

/// Parses `path,artist,movement` CSV. Relative image paths are resolved against
/// the manifest's directory. With `strict`, artists must appear in builtin_movements().
CorpusManifest load_manifest(const std::filesystem::path& path, bool strict = false);
void validate_manifest(const CorpusManifest& manifest, bool strict);
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

struct LabeledImage {
  ImageTensor image;
  int label = 0;
};

/// Positives: concentric ring images centered on the frame (rotation invariant).
/// Negatives: oriented bars. Positives come first, then negatives.
std::vector<LabeledImage> synth_rotation_corpus(std::uint64_t seed, std::size_t n_per_class, std::size_t size);

struct SynthCorpus {
  CorpusManifest manifest;  // paths are "<artist>/<index>.ppm" style names
  std::vector<ImageTensor> images;  // parallel to manifest.entries, RGB
};

/// Three movements x four artists x twenty images. Movements differ in symmetry
/// and texture scale; artists within a movement differ only by palette.
SynthCorpus synth_style_corpus(std::uint64_t seed, std::size_t size = 64);

/// Writes images as PPM plus manifest.csv into dir; returns the manifest path.
std::filesystem::path write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace liestyle
