#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "liestyle/image.hpp"
#include "liestyle/numerics.hpp"

namespace liestyle {

enum class LayerKind { Conv, Relu, MaxPool };

struct ConvLayer {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  // Conv only.
  std::size_t out_channels = 0, in_channels = 0, kernel_h = 0, kernel_w = 0;
  std::size_t stride = 1, padding = 0;
  std::vector<float> weights;  // out x in x kh x kw
  std::vector<float> bias;     // out
};

/// Forward-only convolutional feature extractor (conv / relu / 2x2 max-pool).
struct ConvExtractor {
  std::vector<ConvLayer> layers;
  std::vector<float> input_mean;  // optional per-channel normalization applied to the input
  std::vector<float> input_std;

  std::size_t input_channels() const;
  void validate() const;  // throws DataError
};

/// Channel-major activations: channels x height x width.
struct FeatureMap {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<float> data;
};

inline const std::vector<std::string> kDefaultGramLayers = {"conv1_1", "conv2_1", "conv3_1", "conv4_1"};

/// Deterministic stand-in extractor: four conv stages with 8/16/32/64 channels,
/// VGG-style layer names, seeded He-normal weights.
ConvExtractor random_extractor(std::uint64_t seed = 0);

/// Runs the network up to the last selected layer and captures the selected outputs.
std::map<std::string, FeatureMap> forward_features(const ConvExtractor& ex, const ImageTensor& img,
                                                   std::span<const std::string> selection);

/// G_ij = sum_hw F_ihw F_jhw / (N H W).
Matrix gram(const FeatureMap& f);
/// Without the 1/(N H W) factor.
Matrix gram_unnormalized(const FeatureMap& f);

struct GramSignature {
  std::vector<std::string> layers;
  std::vector<Matrix> grams;  // parallel to layers

  friend bool operator==(const GramSignature&, const GramSignature&) = default;
};

GramSignature gram_signature(const ConvExtractor& ex, const ImageTensor& img, std::span<const std::string> selection);

/// Element-wise mean of the signatures, layer by layer.
GramSignature artist_average_gram(std::span<const GramSignature> signatures);

/// Sum over layers of the squared Frobenius distance.
double gram_distance(const GramSignature& a, const GramSignature& b);

void save_signatures(std::span<const GramSignature> sigs, const std::filesystem::path& path);
std::vector<GramSignature> load_signatures(const std::filesystem::path& path);

// Weights container. See docs/weights_container.md for the byte layout.

/// Loads either a directory holding header.json + weights.bin or a single
/// concatenated file. The string "random-fallback" selects random_extractor(0).
ConvExtractor load_extractor(const std::filesystem::path& container);
void save_extractor_dir(const ConvExtractor& ex, const std::filesystem::path& dir);
void save_extractor_file(const ConvExtractor& ex, const std::filesystem::path& file);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace liestyle
