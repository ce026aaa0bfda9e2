#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liestyle/corpus.hpp"
#include "liestyle/dendrogram.hpp"
#include "liestyle/numerics.hpp"
#include "liestyle/styledist.hpp"
#include "liestyle/texture.hpp"

namespace liestyle {

/// Fraction of items whose nearest neighbor (ties: any tied neighbor) shares their movement.
double nn_purity(const DistanceMatrix& d, const ArtistMovementTable& table);

enum class GroundTruthKind { Basic, Standard, Detailed };

GroundTruthKind parse_ground_truth_kind(const std::string& name);  // throws ConfigError
const char* ground_truth_name(GroundTruthKind kind);

/// Art-historical similarity over `labels`.
///  Basic: 1 for the same movement, else 0.
///  Standard: 1 on the diagonal, 0.75 for the same movement, 0.5 for
///    Renaissance/Northern Renaissance and Impressionism/Post-Impressionism pairs.
///  Detailed: Standard plus 0.25 for Baroque/Renaissance, Abstract Art/Expressionism
///    and Pop Art/Abstract Art pairs.
Matrix ground_truth_similarity(GroundTruthKind kind, const std::vector<std::string>& labels,
                               const ArtistMovementTable& table);
/// D = 1 - S.
DistanceMatrix ground_truth_distance(GroundTruthKind kind, const std::vector<std::string>& labels,
                                     const ArtistMovementTable& table);

struct MantelResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::size_t exceed_count = 0;
};

/// Pearson correlation of the strict upper triangles.
double upper_triangle_correlation(const Matrix& a, const Matrix& b);

/// One-sided Mantel test with simultaneous row/column permutations of d2.
MantelResult mantel(const DistanceMatrix& d1, const DistanceMatrix& d2, std::size_t permutations = 1000,
                    std::uint64_t seed = 0);

/// Painting-level features of one artist, the unit of bootstrap resampling.
struct ArtistFeatures {
  std::string name;
  std::vector<GramSignature> grams;  // one per painting
  Matrix polarization;               // one row per painting
};

struct BootstrapConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double threshold = 0.95;
  std::size_t generators = 4;
  AlgebraMode mode = AlgebraMode::Affine2D;
  CombinedConfig combined;
  /// Use texture only (lambda is ignored and no generators are extracted).
  bool texture_only = false;
};

struct CladeSupport {
  Clade leaves;
  double proportion = 0.0;
  bool confident = false;  // proportion >= threshold
};

struct BootstrapReport {
  std::vector<CladeSupport> clades;  // reference clades in merge order, the full leaf set last
  double threshold = 0.95;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

/// The distance matrix the bootstrap re-derives per trial, built from the
/// given per-painting selection (nullptr selects every painting once).
DistanceMatrix feature_distances(const std::vector<ArtistFeatures>& artists, const BootstrapConfig& cfg,
                                 const std::vector<std::vector<std::size_t>>* selection = nullptr);

/// Resamples paintings with replacement within each artist, recomputes both
/// distance matrices and the dendrogram, and reports how often each reference clade recurs.
BootstrapReport bootstrap_confidence(const std::vector<ArtistFeatures>& artists, const BootstrapConfig& cfg);

std::string bootstrap_report_json(const BootstrapReport& report);
std::string mantel_report_json(const MantelResult& result, GroundTruthKind kind);

}  // namespace liestyle
