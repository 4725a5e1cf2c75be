#include "fogplace/community.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "fogplace/rng.hpp"

namespace fogplace {

std::size_t UndirectedGraph::edge_count() const {
  std::size_t deg = 0;
  for (const auto& a : adj) deg += a.size();
  return deg / 2;
}

bool UndirectedGraph::has_edge(std::size_t a, std::size_t b) const {
  if (a >= adj.size()) return false;
  return std::binary_search(adj[a].begin(), adj[a].end(), b);
}

WeightedGraph WeightedGraph::from(const UndirectedGraph& g) {
  WeightedGraph w;
  w.adj.resize(g.vertex_count());
  for (std::size_t i = 0; i < g.vertex_count(); ++i)
    for (auto j : g.adj[i]) w.adj[i].emplace_back(j, 1.0);
  return w;
}

double WeightedGraph::total_weight() const {
  double s = 0.0;
  for (const auto& a : adj)
    for (const auto& [j, w] : a) s += w;
  return s;
}

std::size_t community_count(const Partition& p) {
  if (p.empty()) return 0;
  return *std::max_element(p.begin(), p.end()) + 1;
}

Partition canonicalize(const Partition& p) {
  std::map<std::size_t, std::size_t> relabel;
  Partition out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto [it, inserted] = relabel.emplace(p[i], relabel.size());
    out[i] = it->second;
  }
  return out;
}

double modularity(const WeightedGraph& g, const Partition& p) {
  const double m2 = g.total_weight();
  if (m2 <= 0.0) return 0.0;
  const std::size_t k = community_count(p);
  std::vector<double> in(k, 0.0), tot(k, 0.0);
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    for (const auto& [j, w] : g.adj[i]) {
      tot[p[i]] += w;
      if (p[i] == p[j]) in[p[i]] += w;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) q += in[c] / m2 - (tot[c] / m2) * (tot[c] / m2);
  return q;
}

namespace {

struct LevelResult {
  Partition comm;
  bool moved = false;
};

// One Louvain local-moving phase over `g`.
LevelResult local_moving(const WeightedGraph& g, double m2, Rng& rng) {
  const std::size_t n = g.vertex_count();
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : g.adj[i]) degree[i] += w;

  LevelResult r;
  r.comm.resize(n);
  std::iota(r.comm.begin(), r.comm.end(), 0);
  std::vector<double> tot = degree;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  constexpr double kEps = 1e-12;
  for (int pass = 0; pass < 1000; ++pass) {
    std::size_t moves = 0;
    for (auto i : order) {
      const std::size_t own = r.comm[i];
      touched.clear();
      for (const auto& [j, w] : g.adj[i]) {
        if (j == i) continue;
        const auto c = r.comm[j];
        if (link[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end())
          touched.push_back(c);
        link[c] += w;
      }
      tot[own] -= degree[i];
      std::size_t best = own;
      double best_gain = link[own] - tot[own] * degree[i] / m2;
      for (auto c : touched) {
        const double gain = link[c] - tot[c] * degree[i] / m2;
        if (gain > best_gain + kEps) {
          best_gain = gain;
          best = c;
        }
      }
      tot[best] += degree[i];
      r.comm[i] = best;
      if (best != own) ++moves;
      for (auto c : touched) link[c] = 0.0;
      link[own] = 0.0;
    }
    if (moves == 0) break;
    r.moved = true;
  }
  r.comm = canonicalize(r.comm);
  return r;
}

WeightedGraph aggregate(const WeightedGraph& g, const Partition& comm) {
  const std::size_t k = community_count(comm);
  std::vector<std::map<std::size_t, double>> acc(k);
  for (std::size_t i = 0; i < g.vertex_count(); ++i)
    for (const auto& [j, w] : g.adj[i]) acc[comm[i]][comm[j]] += w;
  WeightedGraph out;
  out.adj.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    for (const auto& [d, w] : acc[c]) out.adj[c].emplace_back(d, w);
  return out;
}

}  // namespace

Partition louvain(const WeightedGraph& g, std::uint64_t seed) {
  const std::size_t n = g.vertex_count();
  Partition membership(n);
  std::iota(membership.begin(), membership.end(), 0);
  const double m2 = g.total_weight();
  if (n == 0 || m2 <= 0.0) return membership;

  Rng rng(seed);
  WeightedGraph level = g;
  while (true) {
    auto step = local_moving(level, m2, rng);
    if (!step.moved) break;
    for (auto& c : membership) c = step.comm[c];
    const std::size_t k = community_count(step.comm);
    if (k == level.vertex_count()) break;
    level = aggregate(level, step.comm);
  }
  return canonicalize(membership);
}

Partition detect_communities(const UndirectedGraph& g, std::uint64_t seed) {
  return louvain(WeightedGraph::from(g), seed);
}

Partition agglomerative_best(const WeightedGraph& g, std::size_t min_k, std::size_t max_k) {
  const std::size_t n = g.vertex_count();
  Partition label(n);
  std::iota(label.begin(), label.end(), 0);
  if (n == 0) return label;

  const double m2 = g.total_weight();
  const double norm = m2 > 0.0 ? m2 : 1.0;
  // between[i][j]: weight from community i to j (one direction); self[i]: internal.
  std::vector<std::vector<double>> between(n, std::vector<double>(n, 0.0));
  std::vector<double> tot(n, 0.0), self(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : g.adj[i]) {
      tot[i] += w;
      if (i == j)
        self[i] += w;
      else
        between[i][j] += w;
    }

  std::vector<bool> active(n, true);
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) q += self[i] / norm - (tot[i] / norm) * (tot[i] / norm);

  Partition best;
  double best_q = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t k) {
    if (k >= min_k && k <= max_k && q > best_q) {
      best_q = q;
      best = label;
    }
  };
  consider(n);

  for (std::size_t k = n; k > 1; --k) {
    std::size_t bi = 0, bj = 0;
    double best_dq = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double dq = 2.0 * (between[i][j] / norm - (tot[i] / norm) * (tot[j] / norm));
        if (dq > best_dq) {
          best_dq = dq;
          bi = i;
          bj = j;
        }
      }
    }
    // merge bj into bi
    q += best_dq;
    self[bi] += self[bj] + 2.0 * between[bi][bj];
    tot[bi] += tot[bj];
    for (std::size_t x = 0; x < n; ++x) {
      if (!active[x] || x == bi || x == bj) continue;
      between[bi][x] += between[bj][x];
      between[x][bi] += between[x][bj];
    }
    active[bj] = false;
    for (auto& l : label)
      if (l == bj) l = bi;
    consider(k - 1);
  }
  return canonicalize(best);
}

}  // namespace fogplace
