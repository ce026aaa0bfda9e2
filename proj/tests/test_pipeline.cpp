#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "liestyle/analysis.hpp"
#include "liestyle/config.hpp"
#include "liestyle/corpus.hpp"
#include "liestyle/dendrogram.hpp"
#include "liestyle/errors.hpp"
#include "liestyle/pipeline.hpp"
#include "test_util.hpp"

using namespace liestyle;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(
seed = 3
[mlp]
hidden = [8]
epochs = 3
learning_rate = 0.01
[liegg]
affine_size = 16
[texture]
image_size = 32
[bootstrap]
b = 2
[mantel]
permutations = 19
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config(const fs::path& root, const std::string& work) {
  RunConfig c = run_config_from_text(kSmallConfig, root);
  c.work_dir = root / work;
  return c;
}

void run_all(const RunConfig& c) {
  cmd_train(c);
  cmd_generators(c);
  cmd_gram(c);
  cmd_distances(c);
  cmd_cluster(c);
  cmd_bootstrap(c);
  cmd_mantel(c);
}

// One synthetic corpus and two independent full runs shared by the suite.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() / ("liestyle_pipeline_" + std::to_string(::getpid())));
    fs::remove_all(*root_);
    fs::create_directories(*root_);
    const RunConfig a = small_config(*root_, "work_a");
    cmd_synth(a);
    run_all(a);
    run_all(small_config(*root_, "work_b"));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }
  static fs::path work(const char* which) { return *root_ / which; }
  static fs::path* root_;
};

fs::path* Pipeline::root_ = nullptr;

}  // namespace

TEST_F(Pipeline, WritesEveryArtifact) {
  const fs::path w = work("work_a");
  for (const char* f : {"distances/texture.csv", "distances/global.csv", "distances/combined.csv",
                        "reports/dendrogram.nwk", "renders/dendrogram.svg", "reports/purity.json",
                        "reports/bootstrap.json", "reports/mantel_standard.json", "reports/train_metrics.csv",
                        "generators/spectrum.json"})
    EXPECT_TRUE(fs::exists(w / f)) << f;
  const auto manifest = load_manifest(*root_ / "corpus" / "manifest.csv");
  EXPECT_EQ(manifest.entries.size(), 240u);
  std::size_t checkpoints = 0;
  for (const auto& e : fs::directory_iterator(w / "checkpoints")) checkpoints += e.path().extension() == ".ckpt";
  EXPECT_EQ(checkpoints, 12u);
}

TEST_F(Pipeline, ReportsAreWellFormed) {
  const fs::path w = work("work_a");
  const auto purity = nlohmann::json::parse(slurp(w / "reports/purity.json"));
  for (const char* k : {"combined", "texture", "global"}) {
    EXPECT_GE(purity[k].get<double>(), 0.0);
    EXPECT_LE(purity[k].get<double>(), 1.0);
  }
  const auto boot = nlohmann::json::parse(slurp(w / "reports/bootstrap.json"));
  EXPECT_EQ(boot["b"], 2);
  for (const auto& c : boot["clades"]) {
    const double p = c["proportion"];
    EXPECT_TRUE(p == 0.0 || p == 0.5 || p == 1.0);
  }
  const auto m = nlohmann::json::parse(slurp(w / "reports/mantel_standard.json"));
  EXPECT_GE(m["p"].get<double>(), 1.0 / 20);
  EXPECT_LE(m["p"].get<double>(), 1.0);
  const auto combined = load_distance_matrix(w / "distances/combined.csv");
  EXPECT_NO_THROW(combined.validate());
  EXPECT_EQ(combined.size(), 12u);
  EXPECT_LE(combined.max_offdiag(), 1.0 + 1e-12);
  const auto tree = parse_newick(slurp(w / "reports/dendrogram.nwk"));
  const auto expect = average_linkage(combined).clades();
  EXPECT_EQ(newick_clades(tree), std::set<Clade>(expect.begin(), expect.end()));
}

TEST_F(Pipeline, RerunIsByteIdentical) {
  for (const char* f : {"distances/texture.csv", "distances/global.csv", "distances/combined.csv",
                        "reports/dendrogram.nwk", "reports/purity.json", "reports/bootstrap.json",
                        "reports/mantel_standard.json", "generators/spectrum.json", "reports/train_metrics.csv"})
    EXPECT_EQ(slurp(work("work_a") / f), slurp(work("work_b") / f)) << f;
  for (const auto& e : fs::directory_iterator(work("work_a") / "checkpoints"))
    EXPECT_EQ(slurp(e.path()), slurp(work("work_b") / "checkpoints" / e.path().filename()));
}

TEST_F(Pipeline, LambdaZeroIsTextureOnly) {
  RunConfig c = small_config(*root_, "work_a");
  c.work_dir = work("work_a");
  c.combined.lambda = 0.0;
  cmd_distances(c);
  const auto combined = load_distance_matrix(c.dir("distances") / "combined.csv");
  const auto texture = normalize_offdiag(load_distance_matrix(c.dir("distances") / "texture.csv"));
  EXPECT_EQ(combined.values, texture.values);
  // Restore the λ = 0.5 table for the other tests.
  cmd_distances(small_config(*root_, "work_a"));
}

TEST_F(Pipeline, MantelSelfTestGivesOne) {
  RunConfig c = small_config(*root_, "work_a");
  c.mantel_self_test = true;
  cmd_mantel(c);
  const auto m = nlohmann::json::parse(slurp(c.dir("reports") / "mantel_self.json"));
  EXPECT_EQ(m["r"].get<double>(), 1.0);
}

TEST_F(Pipeline, FlowStripCenterIsTheInput) {
  RunConfig c = small_config(*root_, "work_a");
  c.flow_size = 24;
  const fs::path out = cmd_flow(c);
  const ImageTensor strip = load_image(out);
  ASSERT_EQ(strip.width, 5u * 24);
  const auto manifest = load_manifest(c.manifest);
  const ImageTensor src = resize_bilinear(load_image(manifest.entries.front().path), 24, 24);
  ASSERT_EQ(strip.channels, src.channels);
  for (std::size_t ch = 0; ch < src.channels; ++ch)
    for (std::size_t y = 0; y < 24; ++y)
      for (std::size_t x = 0; x < 24; ++x) EXPECT_NEAR(strip.at(ch, y, 48 + x), src.at(ch, y, x), 0.5 / 255 + 1e-6);
  c.flow_rank = 9;
  EXPECT_THROW(cmd_flow(c), ConfigError);
}

TEST_F(Pipeline, GeneratorCsvRoundTrip) {
  const auto manifest = load_manifest(*root_ / "corpus" / "manifest.csv");
  const std::string artist = manifest.artists().front();
  std::string stored;
  const GeneratorSet set =
      load_generator_csv(work("work_a") / "generators" / (artist_stem(0, artist) + ".csv"), AlgebraMode::Affine2D, &stored);
  EXPECT_EQ(stored, artist);
  EXPECT_EQ(set.k(), 4u);
  EXPECT_EQ(set.dim, 6u);
}

TEST(PipelineErrors, MissingUpstreamArtifactNamesTheCommand) {
  liestyle::testing::ScratchDir dir("pipe");
  RunConfig c = small_config(dir.path(), "work");
  write_corpus(synth_style_corpus(1, 16), dir.path() / "corpus");
  try {
    cmd_distances(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("liestyle gram"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cmd_cluster(c), DataError);
  EXPECT_THROW(cmd_generators(c), DataError);
}

TEST(PipelineHelpers, ArtistStem) {
  EXPECT_EQ(artist_stem(3, "Vincent van Gogh"), "03_Vincent_van_Gogh");
  EXPECT_EQ(artist_stem(12, "a/b"), "12_a_b");
}

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LIESTYLE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Cli, ExitCodes) {
  liestyle::testing::ScratchDir dir("cli");
  const fs::path cfg = dir.path() / "run.toml";
  std::ofstream(cfg) << kSmallConfig;
  EXPECT_EQ(run_cli("--config " + (dir.path() / "none.toml").string() + " train"), 2);
  EXPECT_EQ(run_cli("--config " + cfg.string() + " train"), 2);  // manifest missing
  EXPECT_EQ(run_cli("--config " + cfg.string() + " frobnicate"), 2);
  EXPECT_EQ(run_cli("--config " + cfg.string()), 2);
  EXPECT_EQ(run_cli("--config " + cfg.string() + " synth"), 0);
  EXPECT_EQ(run_cli("synth --config " + cfg.string()), 0);
  EXPECT_EQ(run_cli("--config " + cfg.string() + " distances"), 3);
  std::ofstream(dir.path() / "bad.toml") << "[combine]\nlambda = 2\n";
  EXPECT_EQ(run_cli("--config " + (dir.path() / "bad.toml").string() + " synth"), 2);
}
