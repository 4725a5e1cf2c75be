#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace fogplace {

/// Simple undirected graph over vertices 0..n-1. Adjacency lists are sorted
/// and hold each edge in both endpoints' lists.
struct UndirectedGraph {
  std::vector<std::vector<std::size_t>> adj;

  std::size_t vertex_count() const { return adj.size(); }
  std::size_t edge_count() const;
  bool has_edge(std::size_t a, std::size_t b) const;
};

/// Weighted undirected graph. Edges (i, j), i != j, appear in both lists;
/// a self-loop appears once and carries the weight of ordered pairs it
/// stands for, so the weighted degree of i is the plain sum of its list.
struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;

  static WeightedGraph from(const UndirectedGraph& g);
  std::size_t vertex_count() const { return adj.size(); }
  double total_weight() const;  // 2m
};

/// Community label per vertex, canonically numbered 0..k-1 in order of first
/// appearance.
using Partition = std::vector<std::size_t>;

std::size_t community_count(const Partition& p);
Partition canonicalize(const Partition& p);

/// Newman modularity. Zero for a graph without edges.
double modularity(const WeightedGraph& g, const Partition& p);

/// Multi-level Louvain. Vertex visiting order is shuffled from `seed`;
/// the result is deterministic for a fixed seed.
Partition louvain(const WeightedGraph& g, std::uint64_t seed);
Partition detect_communities(const UndirectedGraph& g, std::uint64_t seed);

/// Greedy agglomerative modularity merging from singletons. Among the
/// dendrogram levels with `min_k <= k <= max_k` communities, returns the one
/// of highest modularity.
Partition agglomerative_best(const WeightedGraph& g, std::size_t min_k, std::size_t max_k);

}  // namespace fogplace
