#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "liestyle/config.hpp"
#include "liestyle/corpus.hpp"

namespace liestyle {

/// Writes the synthetic style corpus (seeded by cfg.seed) to the manifest's directory.
void cmd_synth(const RunConfig& cfg);
/// One checkpoint per artist plus reports/train_metrics.csv.
void cmd_train(const RunConfig& cfg);
/// Polarization rows, k generators per artist and generators/spectrum.json.
void cmd_generators(const RunConfig& cfg);
/// Per-painting and artist-averaged Gram signatures.
void cmd_gram(const RunConfig& cfg);
/// distances/{texture,global,combined}.csv.
void cmd_distances(const RunConfig& cfg);
/// reports/dendrogram.nwk, renders/dendrogram.svg and reports/purity.json.
void cmd_cluster(const RunConfig& cfg);
void cmd_bootstrap(const RunConfig& cfg);
void cmd_mantel(const RunConfig& cfg);
/// 1x5 strip for t in {-2d, -d, 0, d, 2d}; returns the written path.
std::filesystem::path cmd_flow(const RunConfig& cfg);

/// Stable file stem for an artist: manifest index plus a sanitized name.
std::string artist_stem(std::size_t index, const std::string& artist);

/// MLP-path preprocessing: grayscale, square resize per algebra mode.
ImageTensor preprocess_for_mlp(const ImageTensor& img, const RunConfig& cfg);
/// Texture-path preprocessing: three channels, square resize.
ImageTensor preprocess_for_texture(const ImageTensor& img, std::size_t size);

void save_generator_csv(const std::string& artist, const GeneratorSet& set, const std::filesystem::path& path);
GeneratorSet load_generator_csv(const std::filesystem::path& path, AlgebraMode mode, std::string* artist = nullptr);

}  // namespace liestyle
