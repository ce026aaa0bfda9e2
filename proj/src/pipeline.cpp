#include "liestyle/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "liestyle/analysis.hpp"
#include "liestyle/errors.hpp"
#include "liestyle/mlp.hpp"
#include "liestyle/parallel.hpp"
#include "liestyle/texture.hpp"

namespace liestyle {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const fs::path& file) {
  double d = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("'" + file.string() + "': cannot parse number '" + s + "'");
  return d;
}

// Missing upstream artifacts name the command that produces them.
void require(const fs::path& p, const char* producer) {
  if (!fs::exists(p))
    throw DataError("missing '" + p.string() + "'; run `liestyle " + producer + "` first");
}

// Re-throws module errors with the artist prepended, keeping the error class.
template <class Fn>
void with_artist(const std::string& artist, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError("artist '" + artist + "': " + e.what());
  } catch (const DataError& e) {
    throw DataError("artist '" + artist + "': " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("artist '" + artist + "': " + e.what());
  }
}

struct Corpus {
  CorpusManifest manifest;
  std::vector<std::string> artists;
  ArtistMovementTable table;
};

Corpus open_corpus(const RunConfig& cfg) {
  Corpus c;
  c.manifest = load_manifest(cfg.manifest, cfg.strict);
  c.artists = c.manifest.artists();
  if (c.artists.size() < 2) throw DataError("manifest '" + cfg.manifest.string() + "' lists fewer than 2 artists");
  c.table = ArtistMovementTable::from_manifest(c.manifest);
  return c;
}

fs::path checkpoint_path(const RunConfig& cfg, std::size_t i, const std::string& a) {
  return cfg.dir("checkpoints") / (artist_stem(i, a) + ".ckpt");
}
fs::path generator_path(const RunConfig& cfg, std::size_t i, const std::string& a) {
  return cfg.dir("generators") / (artist_stem(i, a) + ".csv");
}
fs::path polarization_path(const RunConfig& cfg, std::size_t i, const std::string& a) {
  return cfg.dir("generators") / (artist_stem(i, a) + ".polarization.csv");
}
fs::path painting_grams_path(const RunConfig& cfg, std::size_t i, const std::string& a) {
  return cfg.dir("grams") / (artist_stem(i, a) + ".paintings.grams");
}
fs::path mean_gram_path(const RunConfig& cfg, std::size_t i, const std::string& a) {
  return cfg.dir("grams") / (artist_stem(i, a) + ".mean.grams");
}

AlgebraParam algebra_param(const RunConfig& cfg) {
  return cfg.algebra == AlgebraMode::Affine2D ? AlgebraParam::affine2d()
                                              : AlgebraParam::pixel_linear(cfg.pixel_size * cfg.pixel_size);
}

void save_matrix_csv(const Matrix& m, const fs::path& path) {
  std::string text;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) text += (c ? "," : "") + num(m(r, c));
    text += "\n";
  }
  write_text(path, text);
}

Matrix load_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split_csv(line)) row.push_back(parse_double(f, path));
    if (!rows.empty() && row.size() != rows.front().size()) throw DataError("'" + path.string() + "': ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("'" + path.string() + "' is empty");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  return m;
}

std::vector<ImageTensor> load_mlp_inputs(const std::vector<std::string>& paths, const RunConfig& cfg) {
  std::vector<ImageTensor> out(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) { out[i] = preprocess_for_mlp(load_image(paths[i]), cfg); });
  return out;
}

}  // namespace

std::string artist_stem(std::size_t index, const std::string& artist) {
  std::string s = (index < 10 ? "0" : "") + std::to_string(index) + "_";
  for (unsigned char c : artist) s += std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '_';
  return s;
}

ImageTensor preprocess_for_mlp(const ImageTensor& img, const RunConfig& cfg) {
  const std::size_t s = cfg.algebra == AlgebraMode::Affine2D ? cfg.affine_size : cfg.pixel_size;
  return resize_bilinear(to_grayscale(img), s, s);
}

ImageTensor preprocess_for_texture(const ImageTensor& img, std::size_t size) {
  ImageTensor rgb = img;
  if (img.channels == 1) {
    rgb = ImageTensor(img.width, img.height, 3);
    for (std::size_t c = 0; c < 3; ++c)
      std::copy(img.pixels.begin(), img.pixels.end(), rgb.pixels.begin() + static_cast<long>(c * img.pixels.size()));
  } else if (img.channels != 3) {
    throw DataError("texture input must have 1 or 3 channels, got " + std::to_string(img.channels));
  }
  return resize_bilinear(rgb, size, size);
}

void save_generator_csv(const std::string& artist, const GeneratorSet& set, const fs::path& path) {
  std::string text = "artist,rank,singular_value";
  for (std::size_t d = 0; d < set.dim; ++d) text += ",c_" + std::to_string(d);
  text += "\n";
  for (std::size_t r = 0; r < set.k(); ++r) {
    text += artist + "," + std::to_string(r) + "," + num(set.singular_values[r]);
    for (double c : set.generators[r]) text += "," + num(c);
    text += "\n";
  }
  write_text(path, text);
}

GeneratorSet load_generator_csv(const fs::path& path, AlgebraMode mode, std::string* artist) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "artist" || header[1] != "rank" || header[2] != "singular_value")
    throw DataError("'" + path.string() + "': bad generator header");
  GeneratorSet set;
  set.mode = mode;
  set.dim = header.size() - 3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw DataError("'" + path.string() + "': row has the wrong column count");
    if (artist) *artist = f[0];
    set.singular_values.push_back(parse_double(f[2], path));
    std::vector<double> g;
    for (std::size_t i = 3; i < f.size(); ++i) g.push_back(parse_double(f[i], path));
    set.generators.push_back(std::move(g));
  }
  if (set.generators.empty()) throw DataError("'" + path.string() + "' has no generators");
  return set;
}

void cmd_synth(const RunConfig& cfg) {
  const auto corpus = synth_style_corpus(cfg.seed);
  const fs::path dir = cfg.manifest.parent_path().empty() ? fs::path(".") : cfg.manifest.parent_path();
  const auto written = write_corpus(corpus, dir);
  if (fs::absolute(written) != fs::absolute(cfg.manifest)) fs::rename(written, cfg.manifest);
}

void cmd_train(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  // Preprocess every painting once; negatives are drawn from this pool.
  std::vector<std::string> paths;
  std::vector<std::size_t> owner;
  for (std::size_t a = 0; a < corpus.artists.size(); ++a)
    for (const auto& p : corpus.manifest.paths_for(corpus.artists[a])) {
      paths.push_back(p);
      owner.push_back(a);
    }
  const auto inputs = load_mlp_inputs(paths, cfg);

  std::vector<EpochStats> final(corpus.artists.size());
  parallel_for(corpus.artists.size(), [&](std::size_t a) {
    const std::string& artist = corpus.artists[a];
    with_artist(artist, [&] {
      std::vector<std::size_t> pos, others;
      for (std::size_t i = 0; i < paths.size(); ++i) (owner[i] == a ? pos : others).push_back(i);
      std::mt19937_64 rng(cfg.seed + a);
      std::shuffle(others.begin(), others.end(), rng);
      others.resize(std::min(others.size(), pos.size()));
      std::sort(others.begin(), others.end());

      std::vector<std::vector<double>> samples;
      std::vector<int> labels;
      for (std::size_t i : pos) {
        samples.push_back(flatten(inputs[i]));
        labels.push_back(1);
      }
      for (std::size_t i : others) {
        samples.push_back(flatten(inputs[i]));
        labels.push_back(0);
      }
      TrainConfig tc = cfg.train;
      tc.seed = cfg.seed + a;
      auto result = train_binary(init_mlp(samples.front().size(), cfg.mlp, cfg.seed + a), samples, labels, tc);
      fs::create_directories(cfg.dir("checkpoints"));
      save_checkpoint(result.model, checkpoint_path(cfg, a, artist));
      final[a] = result.history.back();
    });
  });

  std::string csv = "artist,final_loss,accuracy\n";
  for (std::size_t a = 0; a < corpus.artists.size(); ++a)
    csv += corpus.artists[a] + "," + num(final[a].loss) + "," + num(final[a].accuracy) + "\n";
  write_text(cfg.dir("reports") / "train_metrics.csv", csv);
}

void cmd_generators(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  const AlgebraParam param = algebra_param(cfg);
  std::vector<GeneratorSet> sets(corpus.artists.size());
  for (std::size_t a = 0; a < corpus.artists.size(); ++a) require(checkpoint_path(cfg, a, corpus.artists[a]), "train");

  parallel_for(corpus.artists.size(), [&](std::size_t a) {
    const std::string& artist = corpus.artists[a];
    with_artist(artist, [&] {
      const MlpModel model = load_checkpoint(checkpoint_path(cfg, a, artist));
      const auto inputs = load_mlp_inputs(corpus.manifest.paths_for(artist), cfg);
      if (model.input_dim() != inputs.front().pixels.size())
        throw DataError("checkpoint input size " + std::to_string(model.input_dim()) +
                        " does not match the preprocessed image size " + std::to_string(inputs.front().pixels.size()) +
                        "; retrain after changing the algebra or image size");
      const GradientProvider scorer = [&](std::span<const double> x) { return input_gradient(model, x); };
      const Matrix e = polarization(scorer, inputs, param);
      save_matrix_csv(e, polarization_path(cfg, a, artist));
      sets[a] = extract_generators(e, cfg.generators, cfg.algebra);
      save_generator_csv(artist, sets[a], generator_path(cfg, a, artist));
    });
  });

  nlohmann::ordered_json spectrum;
  for (std::size_t a = 0; a < corpus.artists.size(); ++a) spectrum[corpus.artists[a]] = sets[a].spectrum;
  write_text(cfg.dir("generators") / "spectrum.json", spectrum.dump(2) + "\n");
}

void cmd_gram(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  const ConvExtractor ex = load_extractor(cfg.container);
  for (std::size_t a = 0; a < corpus.artists.size(); ++a) {
    const std::string& artist = corpus.artists[a];
    with_artist(artist, [&] {
      const auto paths = corpus.manifest.paths_for(artist);
      std::vector<GramSignature> sigs(paths.size());
      parallel_for(paths.size(), [&](std::size_t i) {
        sigs[i] = gram_signature(ex, preprocess_for_texture(load_image(paths[i]), cfg.texture_size), cfg.layers);
      });
      fs::create_directories(cfg.dir("grams"));
      save_signatures(sigs, painting_grams_path(cfg, a, artist));
      const GramSignature mean = artist_average_gram(sigs);
      save_signatures(std::span(&mean, 1), mean_gram_path(cfg, a, artist));
    });
  }
}

void cmd_distances(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  std::vector<GramSignature> grams;
  std::vector<GeneratorSet> gens;
  for (std::size_t a = 0; a < corpus.artists.size(); ++a) {
    const std::string& artist = corpus.artists[a];
    const auto gp = mean_gram_path(cfg, a, artist);
    const auto vp = generator_path(cfg, a, artist);
    require(gp, "gram");
    require(vp, "generators");
    grams.push_back(load_signatures(gp).at(0));
    std::string owner;
    gens.push_back(load_generator_csv(vp, cfg.algebra, &owner));
    if (owner != artist)
      throw DataError("generator file '" + vp.string() + "' belongs to '" + owner + "'; rerun `liestyle generators`");
  }
  const auto& labels = corpus.artists;
  auto texture = pairwise_distances(labels, [&](std::size_t i, std::size_t j) { return gram_distance(grams[i], grams[j]); });
  auto global = pairwise_distances(labels, [&](std::size_t i, std::size_t j) { return grassmann_distance(gens[i], gens[j]); });
  const auto combined = combine(texture, global, cfg.combined);
  if (cfg.combined.normalization == Normalization::MaxOffdiag) {
    texture = normalize_offdiag(texture);
    global = normalize_offdiag(global);
  }
  fs::create_directories(cfg.dir("distances"));
  save_distance_matrix(texture, cfg.dir("distances") / "texture.csv");
  save_distance_matrix(global, cfg.dir("distances") / "global.csv");
  save_distance_matrix(combined, cfg.dir("distances") / "combined.csv");
}

namespace {

DistanceMatrix load_matching(const fs::path& path, const Corpus& corpus) {
  require(path, "distances");
  auto d = load_distance_matrix(path);
  if (d.labels != corpus.artists)
    throw DataError("'" + path.string() + "' does not match the manifest's artists; rerun `liestyle distances`");
  return d;
}

}  // namespace

void cmd_cluster(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  const auto combined = load_matching(cfg.dir("distances") / "combined.csv", corpus);
  const Dendrogram dend = average_linkage(combined);
  std::vector<std::string> groups;
  for (const auto& a : dend.leaves) groups.push_back(corpus.table.movement_of(a));
  write_text(cfg.dir("reports") / "dendrogram.nwk", export_newick(dend) + "\n");
  write_text(cfg.dir("renders") / "dendrogram.svg", render_svg(dend, groups));

  nlohmann::ordered_json purity;
  for (const char* name : {"combined", "texture", "global"})
    purity[name] = nn_purity(load_matching(cfg.dir("distances") / (std::string(name) + ".csv"), corpus), corpus.table);
  write_text(cfg.dir("reports") / "purity.json", purity.dump(2) + "\n");
}

void cmd_bootstrap(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  std::vector<ArtistFeatures> features;
  for (std::size_t a = 0; a < corpus.artists.size(); ++a) {
    const std::string& artist = corpus.artists[a];
    const auto gp = painting_grams_path(cfg, a, artist);
    const auto pp = polarization_path(cfg, a, artist);
    require(gp, "gram");
    require(pp, "generators");
    ArtistFeatures f;
    f.name = artist;
    f.grams = load_signatures(gp);
    f.polarization = load_matrix_csv(pp);
    features.push_back(std::move(f));
  }
  BootstrapConfig bc;
  bc.trials = cfg.bootstrap_trials;
  bc.seed = cfg.seed;
  bc.threshold = cfg.bootstrap_threshold;
  bc.generators = cfg.generators;
  bc.combined = cfg.combined;
  bc.mode = cfg.algebra;
  write_text(cfg.dir("reports") / "bootstrap.json", bootstrap_report_json(bootstrap_confidence(features, bc)));
}

void cmd_mantel(const RunConfig& cfg) {
  const Corpus corpus = open_corpus(cfg);
  const auto combined = load_matching(cfg.dir("distances") / "combined.csv", corpus);
  const DistanceMatrix truth =
      cfg.mantel_self_test ? combined : ground_truth_distance(cfg.ground_truth, corpus.artists, corpus.table);
  const MantelResult res = mantel(combined, truth, cfg.mantel_permutations, cfg.seed);
  const std::string name = cfg.mantel_self_test ? "self" : ground_truth_name(cfg.ground_truth);
  write_text(cfg.dir("reports") / ("mantel_" + name + ".json"), mantel_report_json(res, cfg.ground_truth));
}

fs::path cmd_flow(const RunConfig& cfg) {
  if (cfg.algebra != AlgebraMode::Affine2D)
    throw ConfigError("flow rendering needs liegg.algebra = \"affine2d\"");
  const Corpus corpus = open_corpus(cfg);
  const std::string artist = cfg.flow_artist.empty() ? corpus.artists.front() : cfg.flow_artist;
  const auto it = std::find(corpus.artists.begin(), corpus.artists.end(), artist);
  if (it == corpus.artists.end()) throw ConfigError("flow.artist '" + artist + "' is not in the manifest");
  const std::size_t a = static_cast<std::size_t>(it - corpus.artists.begin());
  const auto gp = generator_path(cfg, a, artist);
  require(gp, "generators");
  const GeneratorSet set = load_generator_csv(gp, AlgebraMode::Affine2D);
  if (cfg.flow_rank >= set.k())
    throw ConfigError("flow.rank " + std::to_string(cfg.flow_rank) + " exceeds the " + std::to_string(set.k()) +
                      " stored generators");
  const fs::path image = cfg.flow_image.empty() ? fs::path(corpus.manifest.paths_for(artist).front()) : cfg.flow_image;
  const ImageTensor img = resize_bilinear(load_image(image), cfg.flow_size, cfg.flow_size);
  const ImageTensor strip = flow_strip(img, set.generators[cfg.flow_rank], cfg.flow_delta);
  const fs::path out = cfg.dir("renders") / ("flow_" + artist_stem(a, artist) + "_g" + std::to_string(cfg.flow_rank) + ".png");
  fs::create_directories(out.parent_path());
  save_png(strip, out);
  return out;
}

}  // namespace liestyle
