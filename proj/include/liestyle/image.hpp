#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace liestyle {

/// Float raster in [0,1], channel-major planes (all of channel 0, then channel 1, ...).
struct ImageTensor {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<float> pixels;

  ImageTensor() = default;
  ImageTensor(std::size_t w, std::size_t h, std::size_t c, float fill = 0.0f)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  float& at(std::size_t c, std::size_t y, std::size_t x) { return pixels[(c * height + y) * width + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return pixels[(c * height + y) * width + x]; }
  std::size_t plane_size() const { return width * height; }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

/// Decodes PGM (P5), PPM (P6) or 8-bit non-interlaced PNG. Throws DataError.
ImageTensor load_image(const std::filesystem::path& path);

/// Writes P5 for one channel, P6 for three. Values are quantized with rounding.
void save_pnm(const ImageTensor& img, const std::filesystem::path& path);
void save_png(const ImageTensor& img, const std::filesystem::path& path);

/// Luma 0.299 R + 0.587 G + 0.114 B; single-channel input is returned as is.
ImageTensor to_grayscale(const ImageTensor& img);

/// Bilinear resampling with half-pixel centers and edge clamping.
ImageTensor resize_bilinear(const ImageTensor& img, std::size_t width, std::size_t height);

/// Flattened pixels as doubles, the MLP input layout.
std::vector<double> flatten(const ImageTensor& img);

}  // namespace liestyle
