// Portable weights container: JSON header + raw little-endian float32 blob.

#include <openssl/evp.h>
#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "liestyle/errors.hpp"
#include "liestyle/texture.hpp"

namespace liestyle {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw DataError("sha256: digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = crc32(crc, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

using json = nlohmann::ordered_json;

constexpr char kFileMagic[8] = {'L', 'S', 'W', 'C', 'O', 'N', 'T', '1'};
constexpr const char* kFormat = "liestyle-weights";

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv:
      return "conv";
    case LayerKind::Relu:
      return "relu";
    case LayerKind::MaxPool:
      return "maxpool";
  }
  return "?";
}

void append_f32(std::vector<std::uint8_t>& blob, std::span<const float> values) {
  for (float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) blob.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

std::vector<float> read_f32(std::span<const std::uint8_t> bytes) {
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::pair<json, std::vector<std::uint8_t>> encode(const ConvExtractor& ex) {
  ex.validate();
  json header;
  header["format"] = kFormat;
  header["version"] = 1;
  if (!ex.input_mean.empty() || !ex.input_std.empty())
    header["preprocess"] = {{"mean", ex.input_mean}, {"std", ex.input_std}};
  std::vector<std::uint8_t> blob;
  json layers = json::array();
  for (const auto& l : ex.layers) {
    json entry;
    entry["name"] = l.name;
    entry["kind"] = kind_name(l.kind);
    if (l.kind == LayerKind::Conv) {
      const std::size_t offset = blob.size();
      append_f32(blob, l.weights);
      append_f32(blob, l.bias);
      entry["shape"] = {l.out_channels, l.in_channels, l.kernel_h, l.kernel_w};
      entry["stride"] = l.stride;
      entry["padding"] = l.padding;
      entry["dtype"] = "f32";
      entry["byte_offset"] = offset;
      entry["byte_len"] = blob.size() - offset;
      entry["sha256"] = sha256_hex(std::span(blob).subspan(offset));
    }
    layers.push_back(std::move(entry));
  }
  header["layers"] = std::move(layers);
  header["crc32"] = crc32_of(blob);
  return {std::move(header), std::move(blob)};
}

template <class T>
T field(const json& j, const char* key, const std::string& layer) {
  if (!j.contains(key)) throw DataError("container: layer '" + layer + "' missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError("container: layer '" + layer + "' has malformed field '" + key + "'");
  }
}

ConvExtractor decode(const json& header, std::span<const std::uint8_t> blob) {
  if (header.value("format", std::string()) != kFormat) throw DataError("container: unrecognized header format");
  if (!header.contains("layers") || !header["layers"].is_array()) throw DataError("container: header has no layers");
  ConvExtractor ex;
  if (header.contains("preprocess")) {
    ex.input_mean = header["preprocess"].value("mean", std::vector<float>{});
    ex.input_std = header["preprocess"].value("std", std::vector<float>{});
  }
  for (const auto& entry : header["layers"]) {
    ConvLayer l;
    l.name = field<std::string>(entry, "name", "?");
    const auto kind = field<std::string>(entry, "kind", l.name);
    if (kind == "relu") {
      l.kind = LayerKind::Relu;
    } else if (kind == "maxpool") {
      l.kind = LayerKind::MaxPool;
    } else if (kind == "conv") {
      l.kind = LayerKind::Conv;
      const auto shape = field<std::vector<std::size_t>>(entry, "shape", l.name);
      if (shape.size() != 4) throw DataError("container: layer '" + l.name + "' shape must have 4 entries");
      if (field<std::string>(entry, "dtype", l.name) != "f32")
        throw DataError("container: layer '" + l.name + "' dtype must be f32");
      l.out_channels = shape[0];
      l.in_channels = shape[1];
      l.kernel_h = shape[2];
      l.kernel_w = shape[3];
      l.stride = entry.value("stride", std::size_t{1});
      l.padding = entry.value("padding", std::size_t{0});
      const auto offset = field<std::size_t>(entry, "byte_offset", l.name);
      const auto len = field<std::size_t>(entry, "byte_len", l.name);
      const std::size_t nweights = l.out_channels * l.in_channels * l.kernel_h * l.kernel_w;
      const std::size_t expected = 4 * (nweights + l.out_channels);
      if (len != expected)
        throw DataError("container: layer '" + l.name + "' declares " + std::to_string(len) + " bytes but shape needs " +
                        std::to_string(expected));
      if (offset > blob.size() || blob.size() - offset < len)
        throw DataError("container: layer '" + l.name + "' byte range exceeds blob (" + std::to_string(blob.size()) +
                        " bytes available)");
      const auto region = blob.subspan(offset, len);
      if (entry.contains("sha256") && entry["sha256"].get<std::string>() != sha256_hex(region))
        throw DataError("container: checksum mismatch (sha256) for layer '" + l.name + "'");
      auto values = read_f32(region);
      l.weights.assign(values.begin(), values.begin() + static_cast<long>(nweights));
      l.bias.assign(values.begin() + static_cast<long>(nweights), values.end());
    } else {
      throw DataError("container: layer '" + l.name + "' has unknown type '" + kind + "'");
    }
    ex.layers.push_back(std::move(l));
  }
  if (header.contains("crc32") && header["crc32"].get<std::uint32_t>() != crc32_of(blob))
    throw DataError("container: checksum mismatch (crc32 of weight blob)");
  ex.validate();
  return ex;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& p, std::span<const std::uint8_t> bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

json parse_header(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("container: header is not valid JSON: ") + e.what());
  }
}

}  // namespace

ConvExtractor load_extractor(const std::filesystem::path& container) {
  if (container == "random-fallback") return random_extractor(0);
  if (std::filesystem::is_directory(container)) {
    const auto header_bytes = slurp(container / "header.json");
    const auto blob = slurp(container / "weights.bin");
    return decode(parse_header({reinterpret_cast<const char*>(header_bytes.data()), header_bytes.size()}), blob);
  }
  const auto bytes = slurp(container);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFileMagic, 8) != 0)
    throw DataError("container '" + container.string() + "': not a weights container");
  std::uint64_t header_len = 0;
  for (int i = 0; i < 8; ++i) header_len |= std::uint64_t(bytes[8 + i]) << (8 * i);
  if (header_len > bytes.size() - 16) throw DataError("container '" + container.string() + "': truncated header");
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()) + 16, header_len);
  return decode(parse_header(text), std::span(bytes).subspan(16 + header_len));
}

void save_extractor_dir(const ConvExtractor& ex, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto [header, blob] = encode(ex);
  const std::string text = header.dump(2) + "\n";
  dump(dir / "header.json", {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  dump(dir / "weights.bin", blob);
}

void save_extractor_file(const ConvExtractor& ex, const std::filesystem::path& file) {
  const auto [header, blob] = encode(ex);
  const std::string text = header.dump();
  std::vector<std::uint8_t> bytes(kFileMagic, kFileMagic + 8);
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(std::uint64_t(text.size()) >> (8 * i)));
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.insert(bytes.end(), blob.begin(), blob.end());
  dump(file, bytes);
}

}  // namespace liestyle
