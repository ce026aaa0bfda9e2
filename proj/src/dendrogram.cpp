#include "liestyle/dendrogram.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "liestyle/errors.hpp"

namespace liestyle {

std::vector<std::size_t> Dendrogram::members(std::size_t node) const {
  const std::size_t n = leaves.size();
  if (node < n) return {node};
  if (node - n >= merges.size()) throw DataError("dendrogram: node id out of range");
  auto out = members(merges[node - n].left);
  auto right = members(merges[node - n].right);
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

std::vector<Clade> Dendrogram::clades() const {
  // Bottom-up so each clade is built once.
  const std::size_t n = leaves.size();
  std::vector<Clade> sets(n + merges.size());
  for (std::size_t i = 0; i < n; ++i) sets[i] = {leaves[i]};
  std::vector<Clade> out;
  for (std::size_t m = 0; m < merges.size(); ++m) {
    Clade c = sets[merges[m].left];
    c.insert(c.end(), sets[merges[m].right].begin(), sets[merges[m].right].end());
    std::sort(c.begin(), c.end());
    sets[n + m] = c;
    out.push_back(std::move(c));
  }
  return out;
}

Dendrogram average_linkage(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw DataError("average_linkage: need at least 2 items");
  d.validate();

  struct Cluster {
    std::size_t node;
    std::size_t size;
    std::string key;  // smallest leaf label
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, 1, d.labels[i]});
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = d(i, j);

  Dendrogram out;
  out.leaves = d.labels;
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    auto pair_key = [&](std::size_t i, std::size_t j) { return std::minmax(active[i].key, active[j].key); };
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        if (dist[i][j] < dist[bi][bj] || (dist[i][j] == dist[bi][bj] && pair_key(i, j) < pair_key(bi, bj))) {
          bi = i;
          bj = j;
        }
      }
    if (active[bj].key < active[bi].key) std::swap(bi, bj);
    const Cluster a = active[bi], b = active[bj];
    const double h = dist[bi][bj];
    out.merges.push_back({a.node, b.node, h});

    // Size-weighted average; clamping into [min, max] only absorbs rounding
    // and keeps heights monotone.
    std::vector<double> row(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double x = dist[bi][k], y = dist[bj][k];
      const double avg = (static_cast<double>(a.size) * x + static_cast<double>(b.size) * y) /
                         static_cast<double>(a.size + b.size);
      row[k] = std::clamp(avg, std::min(x, y), std::max(x, y));
    }
    const std::size_t lo = std::min(bi, bj), hi = std::max(bi, bj);
    active[lo] = {n + out.merges.size() - 1, a.size + b.size, std::min(a.key, b.key)};
    for (std::size_t k = 0; k < active.size(); ++k) {
      dist[lo][k] = dist[k][lo] = row[k];
    }
    dist[lo][lo] = 0.0;
    active.erase(active.begin() + static_cast<long>(hi));
    dist.erase(dist.begin() + static_cast<long>(hi));
    for (auto& r : dist) r.erase(r.begin() + static_cast<long>(hi));
  }
  return out;
}

namespace {

std::string format_length(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string newick_label(const std::string& s) {
  if (s.find_first_of(" \t()[]':;,") == std::string::npos && !s.empty()) return s;
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += '\'';
    q += c;
  }
  return q + "'";
}

}  // namespace

std::string export_newick(const Dendrogram& dend) {
  const std::size_t n = dend.leaf_count();
  if (n == 0) throw DataError("export_newick: empty dendrogram");
  if (n == 1) return newick_label(dend.leaves[0]) + ";";
  auto height = [&](std::size_t node) { return node < n ? 0.0 : dend.merges[node - n].height; };
  std::function<std::string(std::size_t)> rec = [&](std::size_t node) -> std::string {
    if (node < n) return newick_label(dend.leaves[node]);
    const Merge& m = dend.merges[node - n];
    return "(" + rec(m.left) + ":" + format_length(m.height - height(m.left)) + "," + rec(m.right) + ":" +
           format_length(m.height - height(m.right)) + ")";
  };
  return rec(n + dend.merges.size() - 1) + ";";
}

namespace {

class NewickReader {
 public:
  explicit NewickReader(const std::string& text) : s_(text) {}

  NewickNode parse() {
    NewickNode root = node();
    skip_ws();
    if (!eat(';')) fail("expected ';'");
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return root;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("newick: " + what + " at offset " + std::to_string(pos_));
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string label() {
    skip_ws();
    std::string out;
    if (pos_ < s_.size() && s_[pos_] == '\'') {
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) fail("unterminated quoted label");
        if (s_[pos_] == '\'') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        out += s_[pos_++];
      }
      return out;
    }
    while (pos_ < s_.size() && std::string_view("():;,").find(s_[pos_]) == std::string_view::npos) out += s_[pos_++];
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
  }

  NewickNode node() {
    NewickNode nd;
    if (eat('(')) {
      do {
        nd.children.push_back(node());
      } while (eat(','));
      if (!eat(')')) fail("expected ')'");
    }
    nd.label = label();
    if (eat(':')) {
      skip_ws();
      const char* begin = s_.data() + pos_;
      const auto res = std::from_chars(begin, s_.data() + s_.size(), nd.length);
      if (res.ec != std::errc()) fail("bad branch length");
      pos_ += static_cast<std::size_t>(res.ptr - begin);
    }
    return nd;
  }
};

void collect(const NewickNode& nd, std::set<Clade>& out, Clade& leaves) {
  if (nd.children.empty()) {
    leaves.push_back(nd.label);
    return;
  }
  Clade mine;
  for (const auto& c : nd.children) collect(c, out, mine);
  std::sort(mine.begin(), mine.end());
  out.insert(mine);
  leaves.insert(leaves.end(), mine.begin(), mine.end());
}

}  // namespace

NewickNode parse_newick(const std::string& text) { return NewickReader(text).parse(); }

std::set<Clade> newick_clades(const NewickNode& root) {
  std::set<Clade> out;
  Clade all;
  collect(root, out, all);
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Dendrogram& dend, const std::vector<std::string>& groups) {
  const std::size_t n = dend.leaf_count();
  if (n == 0) throw DataError("render_svg: empty dendrogram");
  if (!groups.empty() && groups.size() != n) throw DataError("render_svg: group list does not match leaves");

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
                                   "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#843c39", "#7b4173"};
  std::map<std::string, std::size_t> group_index;
  for (const auto& g : groups) group_index.emplace(g, group_index.size());

  const double step = 18.0, top = 20.0, plot_h = 300.0, label_h = 160.0, left = 40.0;
  const double width = left * 2 + step * static_cast<double>(n);
  const double max_h = dend.merges.empty() ? 1.0 : std::max(dend.merges.back().height, 1e-12);
  auto y_of = [&](double h) { return top + plot_h * (1.0 - h / max_h); };

  // Leaf order from a depth-first walk so branches never cross.
  std::vector<double> x(n + dend.merges.size()), h(n + dend.merges.size(), 0.0);
  std::size_t slot = 0;
  std::function<void(std::size_t)> place = [&](std::size_t node) {
    if (node < n) {
      x[node] = left + step * (static_cast<double>(slot++) + 0.5);
      return;
    }
    const Merge& m = dend.merges[node - n];
    place(m.left);
    place(m.right);
    x[node] = 0.5 * (x[m.left] + x[m.right]);
    h[node] = m.height;
  };
  if (n > 1) place(n + dend.merges.size() - 1); else x[0] = left + step * 0.5;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << top + plot_h + label_h << "\">\n";
  for (std::size_t m = 0; m < dend.merges.size(); ++m) {
    const Merge& mg = dend.merges[m];
    const double y = y_of(mg.height);
    svg << "<path d=\"M" << x[mg.left] << ',' << y_of(h[mg.left]) << " V" << y << " H" << x[mg.right] << " V"
        << y_of(h[mg.right]) << "\" fill=\"none\" stroke=\"black\"/>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string color = groups.empty() ? "black" : kPalette[group_index[groups[i]] % std::size(kPalette)];
    const double y = top + plot_h + 6.0;
    svg << "<text x=\"" << x[i] << "\" y=\"" << y << "\" transform=\"rotate(90 " << x[i] << ',' << y
        << ")\" font-size=\"11\" fill=\"" << color << "\">" << xml_escape(dend.leaves[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace liestyle
