#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "liestyle/styledist.hpp"

namespace liestyle {

/// Sorted leaf-label set under one internal node.
using Clade = std::vector<std::string>;

struct Merge {
  std::size_t left = 0;   // node id: leaves are 0..n-1, merge i creates node n+i
  std::size_t right = 0;
  double height = 0.0;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;  // n - 1 merges, heights non-decreasing

  std::size_t leaf_count() const { return leaves.size(); }
  /// Leaf indices under a node id.
  std::vector<std::size_t> members(std::size_t node) const;
  /// Leaf set of every internal node in merge order; the last one is the full set.
  std::vector<Clade> clades() const;
};

/// UPGMA. Ties are broken by the lexicographically smallest pair of cluster
/// keys, where a cluster's key is its smallest leaf label.
Dendrogram average_linkage(const DistanceMatrix& d);

/// Newick with branch length = parent height - child height, quoted labels
/// where needed and a trailing semicolon.
std::string export_newick(const Dendrogram& dend);

struct NewickNode {
  std::string label;
  double length = 0.0;
  std::vector<NewickNode> children;
};

NewickNode parse_newick(const std::string& text);  // throws DataError
/// Leaf sets of every internal node of a parsed tree.
std::set<Clade> newick_clades(const NewickNode& root);

/// Vertical dendrogram, heights to scale; leaf labels colored by group when
/// `groups` is non-empty (parallel to dend.leaves).
std::string render_svg(const Dendrogram& dend, const std::vector<std::string>& groups = {});

}  // namespace liestyle
