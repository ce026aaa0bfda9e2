#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "liestyle/corpus.hpp"
#include "liestyle/errors.hpp"
#include "liestyle/image.hpp"
#include "test_util.hpp"

using namespace liestyle;
using liestyle::testing::ScratchDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

ImageTensor rotate90(const ImageTensor& img) {
  ImageTensor out(img.height, img.width, img.channels);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) out.at(c, x, img.height - 1 - y) = img.at(c, y, x);
  return out;
}

double mean_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
  return s / a.pixels.size();
}

std::string expect_data_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected DataError";
  return {};
}

}  // namespace

TEST(LoadImage, P5Arithmetic) {
  ScratchDir dir("img");
  write_bytes(dir.path() / "a.pgm", std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4));
  const ImageTensor img = load_image(dir.path() / "a.pgm");
  ASSERT_EQ(img.width, 2u);
  ASSERT_EQ(img.channels, 1u);
  EXPECT_FLOAT_EQ(img.pixels[0], 0.0f);
  EXPECT_FLOAT_EQ(img.pixels[1], 1.0f);
  EXPECT_FLOAT_EQ(img.pixels[2], 128.0f / 255.0f);
  EXPECT_FLOAT_EQ(img.pixels[3], 64.0f / 255.0f);
}

TEST(LoadImage, P6HasThreeChannels) {
  ScratchDir dir("img");
  write_bytes(dir.path() / "a.ppm", std::string("P6 1 1 255 ") + std::string("\x0a\x14\x1e", 3));
  const ImageTensor img = load_image(dir.path() / "a.ppm");
  EXPECT_EQ(img.channels, 3u);
  EXPECT_FLOAT_EQ(img.at(2, 0, 0), 30.0f / 255.0f);
}

TEST(LoadImage, DistinctDiagnostics) {
  ScratchDir dir("img");
  write_bytes(dir.path() / "empty.pgm", "");
  write_bytes(dir.path() / "short.pgm", "P5\n2 2\n255\n\x01");
  write_bytes(dir.path() / "deep.pgm", "P5\n1 1\n65535\n\x01\x02");
  write_bytes(dir.path() / "what.bmp", "BM......");
  const auto empty = expect_data_error([&] { load_image(dir.path() / "empty.pgm"); });
  const auto shorter = expect_data_error([&] { load_image(dir.path() / "short.pgm"); });
  const auto deep = expect_data_error([&] { load_image(dir.path() / "deep.pgm"); });
  const auto unknown = expect_data_error([&] { load_image(dir.path() / "what.bmp"); });
  EXPECT_NE(empty.find("truncated"), std::string::npos);
  EXPECT_NE(shorter.find("truncated"), std::string::npos);
  EXPECT_NE(deep.find("bit depth"), std::string::npos);
  EXPECT_NE(unknown.find("unsupported image format"), std::string::npos);
  EXPECT_THROW(load_image(dir.path() / "missing.pgm"), DataError);
}

TEST(LoadImage, PnmRoundTripBitExact) {
  ScratchDir dir("img");
  ImageTensor img(5, 3, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>((i * 37) % 256) / 255.0f;
  save_pnm(img, dir.path() / "a.ppm");
  const ImageTensor once = load_image(dir.path() / "a.ppm");
  EXPECT_EQ(once, img);
  save_pnm(once, dir.path() / "b.ppm");
  EXPECT_EQ(load_image(dir.path() / "b.ppm"), once);
}

TEST(LoadImage, PngRoundTrip) {
  ScratchDir dir("img");
  for (std::size_t channels : {1u, 3u}) {
    ImageTensor img(7, 4, channels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>((i * 53) % 256) / 255.0f;
    save_png(img, dir.path() / "a.png");
    EXPECT_EQ(load_image(dir.path() / "a.png"), img);
  }
}

TEST(LoadImage, TruncatedPng) {
  ScratchDir dir("img");
  ImageTensor img(16, 16, 3, 0.5f);
  save_png(img, dir.path() / "a.png");
  std::ifstream in(dir.path() / "a.png", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  write_bytes(dir.path() / "b.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_image(dir.path() / "b.png"), DataError);
}

TEST(Grayscale, Coefficients) {
  ImageTensor white(1, 1, 3, 1.0f);
  EXPECT_NEAR(to_grayscale(white).pixels[0], 1.0f, 1e-6);
  ImageTensor red(1, 1, 3, 0.0f);
  red.at(0, 0, 0) = 1.0f;
  EXPECT_NEAR(to_grayscale(red).pixels[0], 0.299f, 1e-6);
  ImageTensor gray(3, 2, 1, 0.25f);
  EXPECT_EQ(to_grayscale(gray), gray);
}

TEST(Grayscale, RangeProperty) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ImageTensor img(32, 32, 3);
  for (int trial = 0; trial < 20; ++trial) {
    for (float& p : img.pixels) p = trial % 2 ? u(rng) : std::round(u(rng));
    for (float v : to_grayscale(img).pixels) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Resize, SameSizeUnchanged) {
  ImageTensor img(4, 3, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>(i) / img.pixels.size();
  const ImageTensor r = resize_bilinear(img, 4, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(r.pixels[i], img.pixels[i], 1e-7);
}

TEST(Resize, ConstantStaysConstant) {
  const ImageTensor img(5, 7, 1, 0.3f);
  for (auto [w, h] : {std::pair{1, 1}, {3, 9}, {17, 2}})
    for (float v : resize_bilinear(img, w, h).pixels) EXPECT_NEAR(v, 0.3f, 1e-7);
}

TEST(Resize, MatchesHalfPixelFormula) {
  ImageTensor img(2, 1, 1);
  img.pixels = {0.0f, 1.0f};
  const ImageTensor r = resize_bilinear(img, 4, 1);
  // Source coordinate (x + 0.5) * 2 / 4 - 0.5, clamped into [0, 1].
  const float expect[] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.pixels[i], expect[i], 1e-6);
  EXPECT_TRUE(std::is_sorted(r.pixels.begin(), r.pixels.end()));
}

TEST(Movements, BuiltinTable) {
  const auto& t = builtin_movements();
  EXPECT_EQ(t.artist_count(), 50u);
  EXPECT_EQ(t.movement_count(), 14u);
  EXPECT_EQ(t.movement_of("Claude Monet"), "Impressionism");
  EXPECT_EQ(t.movement_of("Andy Warhol"), "Pop Art");
  EXPECT_EQ(t.movement_of("Vincent van Gogh"), "Post-Impressionism");
  EXPECT_EQ(t.movement_of("Caravaggio"), "Baroque");
  EXPECT_EQ(t.movement_of("Raphael"), "Renaissance");
  EXPECT_EQ(t.movement_of("Edvard Munch"), "Expressionism");
  EXPECT_THROW(t.movement_of("Nobody"), DataError);
}

TEST(Manifest, LoadsAndResolvesPaths) {
  ScratchDir dir("manifest");
  write_bytes(dir.path() / "m.csv", "path,artist,movement\na.pgm,Claude Monet,Impressionism\nb.pgm,Claude Monet,Impressionism\n");
  const auto m = load_manifest(dir.path() / "m.csv", true);
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.artists(), std::vector<std::string>{"Claude Monet"});
  EXPECT_EQ(std::filesystem::path(m.entries[0].path), dir.path() / "a.pgm");
}

TEST(Manifest, Errors) {
  ScratchDir dir("manifest");
  write_bytes(dir.path() / "two.csv", "path,artist,movement\na.pgm,X,Impressionism\nb.pgm,X,Baroque\n");
  write_bytes(dir.path() / "dup.csv", "path,artist,movement\na.pgm,X,Impressionism\na.pgm,X,Impressionism\n");
  write_bytes(dir.path() / "unknown.csv", "path,artist,movement\na.pgm,Somebody Else,Impressionism\n");
  write_bytes(dir.path() / "header.csv", "file,who,what\na.pgm,X,Y\n");
  EXPECT_NE(expect_data_error([&] { load_manifest(dir.path() / "two.csv"); }).find("two movements"), std::string::npos);
  EXPECT_NE(expect_data_error([&] { load_manifest(dir.path() / "dup.csv"); }).find("duplicate path"), std::string::npos);
  EXPECT_NO_THROW(load_manifest(dir.path() / "unknown.csv", false));
  EXPECT_NE(expect_data_error([&] { load_manifest(dir.path() / "unknown.csv", true); }).find("Somebody Else"),
            std::string::npos);
  EXPECT_THROW(load_manifest(dir.path() / "header.csv"), DataError);
  EXPECT_THROW(load_manifest(dir.path() / "nope.csv"), DataError);
}

TEST(Manifest, SaveLoadRoundTrip) {
  ScratchDir dir("manifest");
  CorpusManifest m;
  m.entries = {{"x/1.ppm", "A", "M1"}, {"x/2.ppm", "B", "M2"}};
  save_manifest(m, dir.path() / "m.csv");
  const auto back = load_manifest(dir.path() / "m.csv");
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].artist, "B");
  EXPECT_EQ(back.entries[1].movement, "M2");
}

TEST(RotationCorpus, DeterministicAndLabeled) {
  const auto a = synth_rotation_corpus(3, 10, 24);
  const auto b = synth_rotation_corpus(3, 10, 24);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].label, i < 10 ? 1 : 0);
  }
  EXPECT_TRUE(synth_rotation_corpus(3, 0, 24).empty());
  EXPECT_THROW(synth_rotation_corpus(3, 1, 7), DataError);
}

TEST(RotationCorpus, PositivesAreRotationInvariant) {
  for (const auto& s : synth_rotation_corpus(9, 25, 24))
    if (s.label == 1) EXPECT_LT(mean_abs_diff(rotate90(s.image), s.image), 2e-2);
}

TEST(StyleCorpus, Shape) {
  const auto c = synth_style_corpus(1);
  EXPECT_EQ(c.images.size(), 240u);
  EXPECT_EQ(c.manifest.artists().size(), 12u);
  std::set<std::string> movements;
  for (const auto& e : c.manifest.entries) movements.insert(e.movement);
  EXPECT_EQ(movements.size(), 3u);
  for (const auto& img : c.images) {
    EXPECT_EQ(img.channels, 3u);
    for (float p : img.pixels) ASSERT_TRUE(p >= 0.0f && p <= 1.0f);
  }
}

TEST(StyleCorpus, Deterministic) {
  const auto a = synth_style_corpus(5);
  const auto b = synth_style_corpus(5);
  EXPECT_EQ(a.images, b.images);
  EXPECT_NE(synth_style_corpus(6).images, a.images);
}

TEST(StyleCorpus, MovementMeansDiffer) {
  const auto c = synth_style_corpus(2);
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    auto& [sum, n] = acc[c.manifest.entries[i].movement];
    for (float p : to_grayscale(c.images[i]).pixels) sum += p;
    n += c.images[i].plane_size();
  }
  std::vector<double> means;
  for (const auto& [m, sn] : acc) means.push_back(sn.first / sn.second);
  ASSERT_EQ(means.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) EXPECT_GT(std::abs(means[i] - means[j]), 5e-3);
}

TEST(StyleCorpus, SymmetriesHoldExactly) {
  const auto c = synth_style_corpus(4);
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    const auto& img = c.images[i];
    const auto& mv = c.manifest.entries[i].movement;
    if (mv == "Rectangles") {
      for (std::size_t y = 1; y < img.height; ++y) ASSERT_EQ(img.at(0, y, 5), img.at(0, 0, 5));
    } else if (mv == "Stripes") {
      for (std::size_t x = 1; x < img.width; ++x) ASSERT_EQ(img.at(1, 7, x), img.at(1, 7, 0));
    } else {
      EXPECT_LT(mean_abs_diff(rotate90(img), img), 1e-6);
    }
  }
}

TEST(StyleCorpus, WriteCorpus) {
  ScratchDir dir("corpus");
  const auto c = synth_style_corpus(1, 16);
  const auto manifest = write_corpus(c, dir.path());
  const auto m = load_manifest(manifest);
  ASSERT_EQ(m.entries.size(), c.images.size());
  const ImageTensor back = load_image(m.entries[17].path);
  ASSERT_EQ(back.pixels.size(), c.images[17].pixels.size());
  for (std::size_t i = 0; i < back.pixels.size(); ++i) EXPECT_NEAR(back.pixels[i], c.images[17].pixels[i], 0.5 / 255 + 1e-6);
}
