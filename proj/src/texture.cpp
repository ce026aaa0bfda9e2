#include "liestyle/texture.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "liestyle/errors.hpp"

namespace liestyle {

std::size_t ConvExtractor::input_channels() const {
  for (const auto& l : layers)
    if (l.kind == LayerKind::Conv) return l.in_channels;
  return 0;
}

void ConvExtractor::validate() const {
  std::size_t channels = 0;
  std::set<std::string> names;
  for (const auto& l : layers) {
    if (!names.insert(l.name).second) throw DataError("extractor: duplicate layer name '" + l.name + "'");
    if (l.kind != LayerKind::Conv) continue;
    if (l.out_channels == 0 || l.in_channels == 0 || l.kernel_h == 0 || l.kernel_w == 0 || l.stride == 0)
      throw DataError("extractor: layer '" + l.name + "' has a zero dimension");
    if (channels != 0 && l.in_channels != channels)
      throw DataError("extractor: layer '" + l.name + "' expects " + std::to_string(l.in_channels) +
                      " input channels but receives " + std::to_string(channels));
    if (l.weights.size() != l.out_channels * l.in_channels * l.kernel_h * l.kernel_w || l.bias.size() != l.out_channels)
      throw DataError("extractor: layer '" + l.name + "' parameter count does not match its shape");
    for (float v : l.weights)
      if (!std::isfinite(v)) throw DataError("extractor: layer '" + l.name + "' has non-finite weights");
    channels = l.out_channels;
  }
  if (channels == 0) throw DataError("extractor: no convolution layers");
  const std::size_t in = input_channels();
  if ((!input_mean.empty() && input_mean.size() != in) || (!input_std.empty() && input_std.size() != in))
    throw DataError("extractor: input normalization length does not match input channels");
}

ConvExtractor random_extractor(std::uint64_t seed) {
  ConvExtractor ex;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const std::size_t widths[] = {3, 8, 16, 32, 64};
  for (std::size_t stage = 1; stage <= 4; ++stage) {
    ConvLayer conv;
    conv.name = "conv" + std::to_string(stage) + "_1";
    conv.in_channels = widths[stage - 1];
    conv.out_channels = widths[stage];
    conv.kernel_h = conv.kernel_w = 3;
    conv.padding = 1;
    const float scale = std::sqrt(2.0f / static_cast<float>(conv.in_channels * 9));
    conv.weights.resize(conv.out_channels * conv.in_channels * 9);
    for (float& w : conv.weights) w = scale * normal(rng);
    conv.bias.assign(conv.out_channels, 0.0f);
    ex.layers.push_back(std::move(conv));
    ex.layers.push_back({.name = "relu" + std::to_string(stage) + "_1", .kind = LayerKind::Relu});
    if (stage < 4) ex.layers.push_back({.name = "pool" + std::to_string(stage), .kind = LayerKind::MaxPool});
  }
  return ex;
}

namespace {

using RowMatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

FeatureMap conv_forward(const ConvLayer& l, const FeatureMap& in) {
  if (in.channels != l.in_channels)
    throw DataError("forward_features: layer '" + l.name + "' expects " + std::to_string(l.in_channels) +
                    " channels, got " + std::to_string(in.channels));
  const long H = static_cast<long>(in.height), W = static_cast<long>(in.width);
  const long kh = static_cast<long>(l.kernel_h), kw = static_cast<long>(l.kernel_w);
  const long pad = static_cast<long>(l.padding), stride = static_cast<long>(l.stride);
  const long oh = (H + 2 * pad - kh) / stride + 1;
  const long ow = (W + 2 * pad - kw) / stride + 1;
  if (oh <= 0 || ow <= 0) throw DataError("forward_features: input too small for layer '" + l.name + "'");

  // Unrolled patches: (in*kh*kw) x (oh*ow), then one matrix product.
  const long K = static_cast<long>(l.in_channels) * kh * kw;
  RowMatF cols(K, oh * ow);
  for (long c = 0; c < static_cast<long>(l.in_channels); ++c)
    for (long i = 0; i < kh; ++i)
      for (long j = 0; j < kw; ++j) {
        float* dst = cols.data() + ((c * kh + i) * kw + j) * oh * ow;
        const float* src = in.data.data() + c * H * W;
        for (long y = 0; y < oh; ++y) {
          const long sy = y * stride + i - pad;
          for (long x = 0; x < ow; ++x) {
            const long sx = x * stride + j - pad;
            *dst++ = (sy < 0 || sy >= H || sx < 0 || sx >= W) ? 0.0f : src[sy * W + sx];
          }
        }
      }
  Eigen::Map<const RowMatF> weights(l.weights.data(), static_cast<long>(l.out_channels), K);
  FeatureMap out{l.out_channels, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow), {}};
  out.data.resize(l.out_channels * oh * ow);
  Eigen::Map<RowMatF> result(out.data.data(), static_cast<long>(l.out_channels), oh * ow);
  result.noalias() = weights * cols;
  for (std::size_t o = 0; o < l.out_channels; ++o) result.row(static_cast<long>(o)).array() += l.bias[o];
  return out;
}

FeatureMap maxpool_forward(const FeatureMap& in) {
  FeatureMap out{in.channels, in.height / 2, in.width / 2, {}};
  if (out.height == 0 || out.width == 0) throw DataError("forward_features: feature map too small to pool");
  out.data.resize(out.channels * out.height * out.width);
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t y = 0; y < out.height; ++y)
      for (std::size_t x = 0; x < out.width; ++x) {
        const float* p = in.data.data() + (c * in.height + 2 * y) * in.width + 2 * x;
        out.data[(c * out.height + y) * out.width + x] = std::max({p[0], p[1], p[in.width], p[in.width + 1]});
      }
  return out;
}

}  // namespace

std::map<std::string, FeatureMap> forward_features(const ConvExtractor& ex, const ImageTensor& img,
                                                   std::span<const std::string> selection) {
  std::set<std::string> wanted(selection.begin(), selection.end());
  std::size_t last = 0;
  bool found_any = false;
  for (const auto& name : wanted) {
    const auto it = std::find_if(ex.layers.begin(), ex.layers.end(), [&](const ConvLayer& l) { return l.name == name; });
    if (it == ex.layers.end()) throw DataError("forward_features: unknown layer '" + name + "'");
    last = std::max(last, static_cast<std::size_t>(it - ex.layers.begin()));
    found_any = true;
  }
  if (img.channels != ex.input_channels())
    throw DataError("forward_features: image has " + std::to_string(img.channels) + " channels, extractor expects " +
                    std::to_string(ex.input_channels()));

  FeatureMap cur{img.channels, img.height, img.width, img.pixels};
  if (!ex.input_mean.empty() || !ex.input_std.empty()) {
    const std::size_t plane = img.plane_size();
    for (std::size_t c = 0; c < img.channels; ++c) {
      const float mean = ex.input_mean.empty() ? 0.0f : ex.input_mean[c];
      const float sd = ex.input_std.empty() ? 1.0f : ex.input_std[c];
      for (std::size_t i = 0; i < plane; ++i) cur.data[c * plane + i] = (cur.data[c * plane + i] - mean) / sd;
    }
  }

  std::map<std::string, FeatureMap> captured;
  if (!found_any) return captured;
  for (std::size_t i = 0; i <= last; ++i) {
    const ConvLayer& l = ex.layers[i];
    switch (l.kind) {
      case LayerKind::Conv:
        cur = conv_forward(l, cur);
        break;
      case LayerKind::Relu:
        for (float& v : cur.data) v = std::max(v, 0.0f);
        break;
      case LayerKind::MaxPool:
        cur = maxpool_forward(cur);
        break;
    }
    if (wanted.contains(l.name)) captured[l.name] = cur;
  }
  return captured;
}

Matrix gram_unnormalized(const FeatureMap& f) {
  if (f.channels == 0) throw DataError("gram: feature map has no channels");
  const auto N = static_cast<Eigen::Index>(f.channels);
  const auto P = static_cast<Eigen::Index>(f.height * f.width);
  // Columns are summed in a canonical (lexicographic) order so the result is
  // bit-identical under any spatial permutation of the feature maps.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(P));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto at = [&](Eigen::Index c, Eigen::Index p) { return f.data[static_cast<std::size_t>(c * P + p)]; };
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < N; ++c)
      if (at(c, a) != at(c, b)) return at(c, a) < at(c, b);
    return false;
  });
  Eigen::MatrixXd F(N, P);
  for (Eigen::Index p = 0; p < P; ++p)
    for (Eigen::Index c = 0; c < N; ++c) F(c, p) = at(c, order[static_cast<std::size_t>(p)]);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
  G.selfadjointView<Eigen::Lower>().rankUpdate(F);
  Matrix out(f.channels, f.channels);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) out(i, j) = out(j, i) = G(i, j);
  return out;
}

Matrix gram(const FeatureMap& f) {
  Matrix g = gram_unnormalized(f);
  const double scale = static_cast<double>(f.channels * f.height * f.width);
  return scale > 0 ? (1.0 / scale) * g : g;
}

GramSignature gram_signature(const ConvExtractor& ex, const ImageTensor& img, std::span<const std::string> selection) {
  const auto maps = forward_features(ex, img, selection);
  GramSignature sig;
  for (const auto& name : selection) {
    sig.layers.push_back(name);
    sig.grams.push_back(gram(maps.at(name)));
  }
  return sig;
}

namespace {

void check_compatible(const GramSignature& a, const GramSignature& b, const char* what) {
  if (a.layers != b.layers) throw DataError(std::string(what) + ": layer selections differ");
  for (std::size_t l = 0; l < a.grams.size(); ++l)
    if (a.grams[l].rows() != b.grams[l].rows() || a.grams[l].cols() != b.grams[l].cols())
      throw DataError(std::string(what) + ": shape mismatch at layer '" + a.layers[l] + "'");
}

}  // namespace

GramSignature artist_average_gram(std::span<const GramSignature> signatures) {
  if (signatures.empty()) throw DataError("artist_average_gram: empty artist group");
  GramSignature avg = signatures.front();
  for (std::size_t i = 1; i < signatures.size(); ++i) {
    check_compatible(avg, signatures[i], "artist_average_gram");
    for (std::size_t l = 0; l < avg.grams.size(); ++l) avg.grams[l] = avg.grams[l] + signatures[i].grams[l];
  }
  const double inv = 1.0 / static_cast<double>(signatures.size());
  for (auto& g : avg.grams) g = inv * g;
  return avg;
}

double gram_distance(const GramSignature& a, const GramSignature& b) {
  check_compatible(a, b, "gram_distance");
  double d = 0.0;
  for (std::size_t l = 0; l < a.grams.size(); ++l) {
    const auto& x = a.grams[l].data();
    const auto& y = b.grams[l].data();
    for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  }
  return d;
}

namespace {

constexpr char kSigMagic[8] = {'L', 'S', 'G', 'R', 'A', 'M', '0', '1'};

void put_u64(std::ostream& o, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) o.put(static_cast<char>(v >> (8 * i)));
}

std::uint64_t get_u64(std::istream& in, const std::string& name) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError(name + ": truncated signature file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_signatures(std::span<const GramSignature> sigs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(kSigMagic, 8);
  put_u64(out, sigs.size());
  for (const auto& s : sigs) {
    put_u64(out, s.layers.size());
    for (std::size_t l = 0; l < s.layers.size(); ++l) {
      put_u64(out, s.layers[l].size());
      out.write(s.layers[l].data(), static_cast<std::streamsize>(s.layers[l].size()));
      put_u64(out, s.grams[l].rows());
      for (double v : s.grams[l].data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
}

std::vector<GramSignature> load_signatures(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + name + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kSigMagic, 8) != 0) throw DataError(name + ": not a signature file");
  const auto count = get_u64(in, name);
  std::vector<GramSignature> sigs;
  for (std::uint64_t i = 0; i < count; ++i) {
    GramSignature s;
    const auto layers = get_u64(in, name);
    for (std::uint64_t l = 0; l < layers; ++l) {
      const auto len = get_u64(in, name);
      if (len > 4096) throw DataError(name + ": corrupt layer name");
      std::string layer(len, '\0');
      if (!in.read(layer.data(), static_cast<std::streamsize>(len))) throw DataError(name + ": truncated");
      const auto n = get_u64(in, name);
      if (n > 65536) throw DataError(name + ": corrupt gram size");
      Matrix g(n, n);
      for (double& v : g.data()) v = std::bit_cast<double>(get_u64(in, name));
      s.layers.push_back(std::move(layer));
      s.grams.push_back(std::move(g));
    }
    sigs.push_back(std::move(s));
  }
  return sigs;
}

}  // namespace liestyle
