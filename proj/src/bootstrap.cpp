#include <algorithm>
#include <map>
#include <random>

#include "liestyle/analysis.hpp"
#include "liestyle/errors.hpp"
#include "liestyle/parallel.hpp"

namespace liestyle {

namespace {

void check_artists(const std::vector<ArtistFeatures>& artists, const BootstrapConfig& cfg) {
  if (artists.size() < 2) throw DataError("bootstrap: need at least 2 artists");
  for (const auto& a : artists) {
    if (a.grams.empty()) throw DataError("bootstrap: artist '" + a.name + "' has no paintings");
    if (!cfg.texture_only && a.polarization.rows() != a.grams.size())
      throw DataError("bootstrap: artist '" + a.name + "' has " + std::to_string(a.grams.size()) + " Gram signatures but " +
                      std::to_string(a.polarization.rows()) + " polarization rows");
  }
}

}  // namespace

DistanceMatrix feature_distances(const std::vector<ArtistFeatures>& artists, const BootstrapConfig& cfg,
                                 const std::vector<std::vector<std::size_t>>* selection) {
  check_artists(artists, cfg);
  std::vector<std::string> labels;
  std::vector<GramSignature> grams;
  std::vector<GeneratorSet> gens;
  for (std::size_t a = 0; a < artists.size(); ++a) {
    const ArtistFeatures& art = artists[a];
    labels.push_back(art.name);
    std::vector<std::size_t> idx;
    if (selection) {
      idx = (*selection)[a];
    } else {
      idx.resize(art.grams.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    }
    std::vector<GramSignature> picked;
    for (std::size_t i : idx) picked.push_back(art.grams[i]);
    grams.push_back(artist_average_gram(picked));
    if (!cfg.texture_only) {
      Matrix e(idx.size(), art.polarization.cols());
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = art.polarization.row(idx[r]);
        std::copy(src.begin(), src.end(), e.row(r).begin());
      }
      gens.push_back(extract_generators(e, cfg.generators, cfg.mode));
    }
  }
  const auto texture = pairwise_distances(labels, [&](std::size_t i, std::size_t j) { return gram_distance(grams[i], grams[j]); });
  if (cfg.texture_only)
    return cfg.combined.normalization == Normalization::MaxOffdiag ? normalize_offdiag(texture) : texture;
  const auto global = pairwise_distances(labels, [&](std::size_t i, std::size_t j) { return grassmann_distance(gens[i], gens[j]); });
  return combine(texture, global, cfg.combined);
}

BootstrapReport bootstrap_confidence(const std::vector<ArtistFeatures>& artists, const BootstrapConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("bootstrap: trials must be at least 1");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) throw ConfigError("bootstrap: threshold must lie in [0, 1]");
  check_artists(artists, cfg);

  const auto reference = average_linkage(feature_distances(artists, cfg)).clades();
  std::map<Clade, std::size_t> index;
  for (std::size_t c = 0; c < reference.size(); ++c) index.emplace(reference[c], c);

  std::vector<std::vector<char>> seen(cfg.trials, std::vector<char>(reference.size(), 0));
  parallel_for(cfg.trials, [&](std::size_t t) {
    std::mt19937_64 rng(cfg.seed + t);
    std::vector<std::vector<std::size_t>> selection;
    for (const auto& art : artists) {
      std::uniform_int_distribution<std::size_t> pick(0, art.grams.size() - 1);
      std::vector<std::size_t> idx(art.grams.size());
      for (auto& i : idx) i = pick(rng);
      selection.push_back(std::move(idx));
    }
    for (const auto& clade : average_linkage(feature_distances(artists, cfg, &selection)).clades()) {
      const auto it = index.find(clade);
      if (it != index.end()) seen[t][it->second] = 1;
    }
  });

  BootstrapReport report;
  report.threshold = cfg.threshold;
  report.trials = cfg.trials;
  report.seed = cfg.seed;
  for (std::size_t c = 0; c < reference.size(); ++c) {
    std::size_t hits = 0;
    for (const auto& s : seen) hits += s[c];
    CladeSupport cs;
    cs.leaves = reference[c];
    cs.proportion = static_cast<double>(hits) / static_cast<double>(cfg.trials);
    cs.confident = cs.proportion >= cfg.threshold;
    report.clades.push_back(std::move(cs));
  }
  return report;
}

}  // namespace liestyle
