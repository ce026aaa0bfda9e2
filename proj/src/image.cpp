#include "liestyle/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "liestyle/errors.hpp"

namespace liestyle {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Minimal cursor over a PNM header.
struct PnmReader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;
  std::string name;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint() {
    skip_space_and_comments();
    if (pos >= bytes.size()) throw DataError(name + ": truncated PNM header");
    if (!std::isdigit(bytes[pos])) throw DataError(name + ": malformed PNM header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1u << 24)) throw DataError(name + ": PNM dimension out of range");
      ++pos;
    }
    return v;
  }
};

ImageTensor decode_pnm(const std::vector<std::uint8_t>& bytes, std::size_t channels, const std::string& name) {
  PnmReader rd{bytes, 2, name};
  const std::size_t w = rd.read_uint();
  const std::size_t h = rd.read_uint();
  const std::size_t maxval = rd.read_uint();
  if (w == 0 || h == 0) throw DataError(name + ": zero image dimension");
  if (maxval != 255)
    throw DataError(name + ": unsupported bit depth (maxval " + std::to_string(maxval) + ", expected 255)");
  if (rd.pos >= bytes.size() || !std::isspace(bytes[rd.pos])) throw DataError(name + ": truncated PNM header");
  ++rd.pos;
  const std::size_t need = w * h * channels;
  if (bytes.size() - rd.pos < need)
    throw DataError(name + ": truncated pixel data (" + std::to_string(bytes.size() - rd.pos) + " of " +
                    std::to_string(need) + " bytes)");
  ImageTensor img(w, h, channels);
  const std::uint8_t* p = bytes.data() + rd.pos;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c) img.at(c, y, x) = static_cast<float>(*p++) / 255.0f;
  return img;
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

ImageTensor decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  // Signature (8) + IHDR length/type (8) + IHDR body (13).
  if (bytes.size() < 8 + 8 + 13) throw DataError(name + ": truncated PNG header");
  if (std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) throw DataError(name + ": PNG missing IHDR chunk");
  const std::uint8_t bit_depth = bytes[24];
  const std::uint8_t color_type = bytes[25];
  const std::uint8_t interlace = bytes[28];
  if (bit_depth != 8) throw DataError(name + ": unsupported bit depth " + std::to_string(bit_depth) + " (expected 8)");
  if (interlace != 0) throw DataError(name + ": interlaced PNG not supported");
  if (be32(bytes.data() + 16) == 0 || be32(bytes.data() + 20) == 0) throw DataError(name + ": zero image dimension");

  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size()))
    throw DataError(name + ": PNG decode failed: " + pi.message);
  const bool gray = color_type == 0 || color_type == 4;
  pi.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = pi.message;
    png_image_free(&pi);
    throw DataError(name + ": truncated or corrupt PNG data: " + msg);
  }
  const std::size_t channels = gray ? 1 : 3;
  ImageTensor img(pi.width, pi.height, channels);
  const std::uint8_t* p = buf.data();
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < channels; ++c) img.at(c, y, x) = static_cast<float>(*p++) / 255.0f;
  return img;
}

std::vector<std::uint8_t> interleave_u8(const ImageTensor& img) {
  std::vector<std::uint8_t> out(img.pixels.size());
  std::size_t i = 0;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) {
        const float v = std::clamp(img.at(c, y, x), 0.0f, 1.0f);
        out[i++] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  return out;
}

void check_writable(const ImageTensor& img) {
  if (img.channels != 1 && img.channels != 3)
    throw DataError("image writer: unsupported channel count " + std::to_string(img.channels));
  if (img.pixels.size() != img.width * img.height * img.channels) throw DataError("image writer: inconsistent tensor");
}

}  // namespace

ImageTensor load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  const std::string name = path.string();
  if (bytes.size() < 2) throw DataError(name + ": truncated file (" + std::to_string(bytes.size()) + " bytes)");
  if (bytes[0] == 'P' && bytes[1] == '5') return decode_pnm(bytes, 1, name);
  if (bytes[0] == 'P' && bytes[1] == '6') return decode_pnm(bytes, 3, name);
  static constexpr std::array<std::uint8_t, 8> kPngSig{0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) return decode_png(bytes, name);
  throw DataError(name + ": unsupported image format (expected P5, P6 or PNG)");
}

void save_pnm(const ImageTensor& img, const std::filesystem::path& path) {
  check_writable(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  const auto bytes = interleave_u8(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void save_png(const ImageTensor& img, const std::filesystem::path& path) {
  check_writable(img);
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const auto bytes = interleave_u8(img);
  if (!png_image_write_to_file(&pi, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    throw DataError("cannot write '" + path.string() + "': " + pi.message);
}

ImageTensor to_grayscale(const ImageTensor& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw DataError("to_grayscale: expected 1 or 3 channels, got " + std::to_string(img.channels));
  ImageTensor out(img.width, img.height, 1);
  const std::size_t n = img.plane_size();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = 0.299 * img.pixels[i] + 0.587 * img.pixels[n + i] + 0.114 * img.pixels[2 * n + i];
    out.pixels[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

ImageTensor resize_bilinear(const ImageTensor& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw DataError("resize_bilinear: target size must be at least 1x1");
  if (width == img.width && height == img.height) return img;
  ImageTensor out(width, height, img.channels);
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (std::size_t c = 0; c < img.channels; ++c) {
        const double top = (1 - wx) * img.at(c, y0, x0) + wx * img.at(c, y0, x1);
        const double bot = (1 - wx) * img.at(c, y1, x0) + wx * img.at(c, y1, x1);
        out.at(c, y, x) = static_cast<float>(std::clamp((1 - wy) * top + wy * bot, 0.0, 1.0));
      }
    }
  }
  return out;
}

std::vector<double> flatten(const ImageTensor& img) { return {img.pixels.begin(), img.pixels.end()}; }

}  // namespace liestyle
