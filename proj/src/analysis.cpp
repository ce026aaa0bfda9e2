#include "liestyle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>

#include "liestyle/errors.hpp"

namespace liestyle {

double nn_purity(const DistanceMatrix& d, const ArtistMovementTable& table) {
  const std::size_t n = d.size();
  if (n < 2) throw DataError("nn_purity: need at least 2 items");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& mine = table.movement_of(d.labels[i]);
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) best = std::min(best, d(i, j));
    bool hit = false;
    for (std::size_t j = 0; j < n && !hit; ++j)
      if (j != i && d(i, j) == best && table.movement_of(d.labels[j]) == mine) hit = true;
    hits += hit;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

GroundTruthKind parse_ground_truth_kind(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "basic") return GroundTruthKind::Basic;
  if (lower == "standard") return GroundTruthKind::Standard;
  if (lower == "detailed") return GroundTruthKind::Detailed;
  throw ConfigError("unknown ground truth '" + name + "' (expected basic, standard or detailed)");
}

const char* ground_truth_name(GroundTruthKind kind) {
  switch (kind) {
    case GroundTruthKind::Basic:
      return "basic";
    case GroundTruthKind::Standard:
      return "standard";
    case GroundTruthKind::Detailed:
      return "detailed";
  }
  return "?";
}

namespace {

bool is_pair(const std::string& a, const std::string& b, const char* x, const char* y) {
  return (a == x && b == y) || (a == y && b == x);
}

double movement_similarity(GroundTruthKind kind, const std::string& a, const std::string& b) {
  if (kind == GroundTruthKind::Basic) return a == b ? 1.0 : 0.0;
  if (a == b) return 0.75;
  if (is_pair(a, b, "Renaissance", "Northern Renaissance") || is_pair(a, b, "Impressionism", "Post-Impressionism"))
    return 0.5;
  if (kind == GroundTruthKind::Detailed &&
      (is_pair(a, b, "Baroque", "Renaissance") || is_pair(a, b, "Abstract Art", "Expressionism") ||
       is_pair(a, b, "Pop Art", "Abstract Art")))
    return 0.25;
  return 0.0;
}

}  // namespace

Matrix ground_truth_similarity(GroundTruthKind kind, const std::vector<std::string>& labels,
                               const ArtistMovementTable& table) {
  const std::size_t n = labels.size();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      s(i, j) = i == j ? 1.0 : movement_similarity(kind, table.movement_of(labels[i]), table.movement_of(labels[j]));
  return s;
}

DistanceMatrix ground_truth_distance(GroundTruthKind kind, const std::vector<std::string>& labels,
                                     const ArtistMovementTable& table) {
  const Matrix s = ground_truth_similarity(kind, labels, table);
  Matrix d(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) d(i, j) = 1.0 - s(i, j);
  return {labels, std::move(d)};
}

namespace {

struct Centered {
  std::vector<double> values;
  double ss = 0.0;
};

Centered center_upper(const Matrix& m) {
  Centered c;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) c.values.push_back(m(i, j));
  const double mean = std::accumulate(c.values.begin(), c.values.end(), 0.0) / static_cast<double>(c.values.size());
  for (double& v : c.values) {
    v -= mean;
    c.ss += v * v;
  }
  return c;
}

// Correlation of a (already centered, upper triangle) with the permuted
// centered matrix b; the permutation leaves b's mean and variance unchanged.
double permuted_r(const Centered& a, const Matrix& bc, double denom, const std::vector<std::size_t>& perm) {
  double sxy = 0.0;
  std::size_t k = 0;
  const std::size_t n = perm.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sxy += a.values[k++] * bc(perm[i], perm[j]);
  return std::clamp(sxy / denom, -1.0, 1.0);
}

}  // namespace

double upper_triangle_correlation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DataError("correlation: matrices must be square and the same size");
  if (a.rows() < 3) throw DataError("correlation: need at least 3 items");
  const Centered ca = center_upper(a), cb = center_upper(b);
  if (!(ca.ss > 0.0) || !(cb.ss > 0.0)) throw NumericError("correlation: zero variance in upper triangle");
  double sxy = 0.0;
  for (std::size_t k = 0; k < ca.values.size(); ++k) sxy += ca.values[k] * cb.values[k];
  return std::clamp(sxy / std::sqrt(ca.ss * cb.ss), -1.0, 1.0);
}

MantelResult mantel(const DistanceMatrix& d1, const DistanceMatrix& d2, std::size_t permutations, std::uint64_t seed) {
  if (d1.labels != d2.labels) throw DataError("mantel: label sets or orders differ");
  const std::size_t n = d1.size();
  if (n < 3) throw DataError("mantel: need at least 3 items");
  if (permutations < 1) throw ConfigError("mantel: need at least one permutation");

  const Centered a = center_upper(d1.values);
  const Centered b = center_upper(d2.values);
  if (!(a.ss > 0.0) || !(b.ss > 0.0)) throw NumericError("mantel: zero variance in upper triangle");
  const double mean_b = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += d2(i, j);
    return s / static_cast<double>(n * (n - 1) / 2);
  }();
  Matrix bc(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) bc(i, j) = d2(i, j) - mean_b;
  const double denom = std::sqrt(a.ss * b.ss);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  MantelResult res;
  res.r = permuted_r(a, bc, denom, perm);
  res.permutations = permutations;
  res.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t p = 0; p < permutations; ++p) {
    std::shuffle(perm.begin(), perm.end(), rng);
    if (permuted_r(a, bc, denom, perm) >= res.r) ++res.exceed_count;
  }
  res.p_value = static_cast<double>(res.exceed_count + 1) / static_cast<double>(permutations + 1);
  return res;
}

std::string mantel_report_json(const MantelResult& result, GroundTruthKind kind) {
  nlohmann::ordered_json j;
  j["r"] = result.r;
  j["p"] = result.p_value;
  j["permutations"] = result.permutations;
  j["exceed_count"] = result.exceed_count;
  j["seed"] = result.seed;
  j["ground_truth_kind"] = ground_truth_name(kind);
  return j.dump(2) + "\n";
}

std::string bootstrap_report_json(const BootstrapReport& report) {
  nlohmann::ordered_json j;
  auto clades = nlohmann::ordered_json::array();
  for (const auto& c : report.clades)
    clades.push_back({{"leaves", c.leaves}, {"proportion", c.proportion}, {"confident", c.confident}});
  j["clades"] = std::move(clades);
  j["threshold"] = report.threshold;
  j["b"] = report.trials;
  j["seed"] = report.seed;
  return j.dump(2) + "\n";
}

}  // namespace liestyle
