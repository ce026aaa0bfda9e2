#include "liestyle/styledist.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "liestyle/errors.hpp"
#include "liestyle/parallel.hpp"

namespace liestyle {

DistanceMatrix::DistanceMatrix(std::vector<std::string> l, Matrix v) : labels(std::move(l)), values(std::move(v)) {
  if (values.rows() != labels.size() || values.cols() != labels.size())
    throw NumericError("DistanceMatrix: " + std::to_string(labels.size()) + " labels for a " +
                       std::to_string(values.rows()) + "x" + std::to_string(values.cols()) + " matrix");
}

double DistanceMatrix::max_offdiag() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j)
      if (i != j) m = std::max(m, values(i, j));
  return m;
}

void DistanceMatrix::validate(double tol) const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (values(i, i) != 0.0) throw NumericError("distance matrix: non-zero diagonal at '" + labels[i] + "'");
    for (std::size_t j = 0; j < size(); ++j) {
      const double v = values(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw NumericError("distance matrix: invalid entry for ('" + labels[i] + "', '" + labels[j] + "')");
      if (std::abs(v - values(j, i)) > tol)
        throw NumericError("distance matrix: asymmetric at ('" + labels[i] + "', '" + labels[j] + "')");
    }
  }
}

double grassmann_distance(const GeneratorSet& a, const GeneratorSet& b) {
  if (a.dim != b.dim)
    throw NumericError("grassmann_distance: ambient dimensions " + std::to_string(a.dim) + " and " +
                       std::to_string(b.dim) + " differ");
  if (a.k() != b.k())
    throw NumericError("grassmann_distance: subspace dimensions " + std::to_string(a.k()) + " and " +
                       std::to_string(b.k()) + " differ");
  // Evaluate in a fixed argument order so d(a, b) and d(b, a) agree bit for bit.
  const bool swap = b.generators < a.generators;
  const GeneratorSet& first = swap ? b : a;
  const GeneratorSet& second = swap ? a : b;
  double s = 0.0;
  for (double theta : principal_angles(first.basis(), second.basis())) s += theta * theta;
  return std::sqrt(s);
}

DistanceMatrix pairwise_distances(const std::vector<std::string>& labels,
                                  const std::function<double(std::size_t, std::size_t)>& metric) {
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("pairwise_distances: need at least 2 items");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) { out[p] = metric(pairs[p].first, pairs[p].second); });
  Matrix m(n, n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    if (std::isnan(out[p]))
      throw NumericError("pairwise_distances: metric returned NaN for ('" + labels[i] + "', '" + labels[j] + "')");
    m(i, j) = m(j, i) = out[p];
  }
  return {labels, std::move(m)};
}

DistanceMatrix normalize_offdiag(const DistanceMatrix& d) {
  const double m = d.max_offdiag();
  if (!(m > 0.0)) throw NumericError("normalize_offdiag: all off-diagonal entries are zero");
  return {d.labels, (1.0 / m) * d.values};
}

DistanceMatrix combine(const DistanceMatrix& d_texture, const DistanceMatrix& d_global, const CombinedConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw ConfigError("combine: lambda must lie in [0, 1]");
  if (d_texture.labels != d_global.labels) throw DataError("combine: label sets or orders differ");
  const bool norm = cfg.normalization == Normalization::MaxOffdiag;
  const DistanceMatrix t = norm ? normalize_offdiag(d_texture) : d_texture;
  const DistanceMatrix g = norm ? normalize_offdiag(d_global) : d_global;
  if (cfg.lambda == 0.0) return t;
  if (cfg.lambda == 1.0) return g;
  return {t.labels, (1.0 - cfg.lambda) * t.values + cfg.lambda * g.values};
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string f;
  std::istringstream ss(line);
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void save_distance_matrix(const DistanceMatrix& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  out << "artist";
  for (const auto& l : d.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.labels[i];
    for (std::size_t j = 0; j < d.size(); ++j) out << ',' << d(i, j);
    out << '\n';
  }
}

DistanceMatrix load_distance_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open distance matrix '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  auto header = split(line);
  if (header.empty()) throw DataError("'" + path.string() + "': missing header");
  std::vector<std::string> labels(header.begin() + 1, header.end());
  Matrix m(labels.size(), labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "': truncated");
    const auto fields = split(line);
    if (fields.size() != labels.size() + 1 || fields[0] != labels[i])
      throw DataError("'" + path.string() + "': row " + std::to_string(i + 1) + " does not match the header");
    for (std::size_t j = 0; j < labels.size(); ++j) {
      try {
        m(i, j) = std::stod(fields[j + 1]);
      } catch (const std::exception&) {
        throw DataError("'" + path.string() + "': bad number '" + fields[j + 1] + "'");
      }
    }
  }
  DistanceMatrix d(std::move(labels), std::move(m));
  d.validate();
  return d;
}

}  // namespace liestyle
