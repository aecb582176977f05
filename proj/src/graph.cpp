#include "ugmae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace ugmae {

const Graph& validate_graph(const Graph& g) {
  if (g.num_nodes < 0) throw Error(ErrorKind::kShapeMismatch, "negative node count");
  if (g.features.rows() != g.num_nodes)
    throw Error(ErrorKind::kShapeMismatch, "features have " + std::to_string(g.features.rows()) + " rows for " +
                                               std::to_string(g.num_nodes) + " nodes");
  if (g.features.cols() < 1) throw Error(ErrorKind::kShapeMismatch, "feature_dim must be at least 1");
  std::set<Edge> seen;
  for (const Edge& e : g.edges) {
    if (e.src < 0 || e.src >= g.num_nodes || e.dst < 0 || e.dst >= g.num_nodes)
      throw Error(ErrorKind::kInvalidEdge,
                  "edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ") outside [0," +
                      std::to_string(g.num_nodes) + ")");
    if (!seen.insert(e).second)
      throw Error(ErrorKind::kDuplicateEdge, "edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
  }
  if (g.undirected) {
    for (const Edge& e : g.edges)
      if (!seen.contains(Edge{e.dst, e.src}))
        throw Error(ErrorKind::kInvalidEdge, "undirected graph lacks reverse of (" + std::to_string(e.src) + "," +
                                                 std::to_string(e.dst) + ")");
  }
  if (g.labels && g.labels->size() != static_cast<std::size_t>(g.num_nodes))
    throw Error(ErrorKind::kShapeMismatch, "label count differs from node count");
  return g;
}

int mask_count(int num_nodes, double p_f) {
  if (p_f <= 0.0) return 0;
  const int k = static_cast<int>(std::floor(static_cast<double>(num_nodes) * p_f + 1e-9));
  return std::clamp(k, 1, std::max(num_nodes, 1));
}

Mat apply_feature_mask(const Graph& g, const MaskPlan& plan, const Eigen::Ref<const Eigen::RowVectorXd>& token) {
  if (token.size() != g.feature_dim())
    throw Error(ErrorKind::kShapeMismatch, "mask token length differs from feature_dim");
  Mat out = g.features;
  for (int v : plan.masked_nodes) {
    if (v < 0 || v >= g.num_nodes) throw Error(ErrorKind::kInvalidNodeId, "masked node " + std::to_string(v));
    out.row(v) = token;
  }
  return out;
}

std::vector<Edge> apply_structure_mask(const Graph& g, const MaskPlan& plan) {
  std::vector<char> masked(g.edges.size(), 0);
  for (int e : plan.masked_edges) {
    if (e < 0 || static_cast<std::size_t>(e) >= g.edges.size())
      throw Error(ErrorKind::kInvalidEdge, "masked arc index " + std::to_string(e));
    masked[static_cast<std::size_t>(e)] = 1;
  }
  std::vector<Edge> visible;
  visible.reserve(g.edges.size() - plan.masked_edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (!masked[e]) visible.push_back(g.edges[e]);
  return visible;
}

std::vector<int> reverse_arcs(const Graph& g) {
  std::map<Edge, int> position;
  for (std::size_t e = 0; e < g.edges.size(); ++e) position.emplace(g.edges[e], static_cast<int>(e));
  std::vector<int> reverse(g.edges.size(), -1);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Edge& arc = g.edges[e];
    if (arc.src == arc.dst) continue;
    if (auto it = position.find(Edge{arc.dst, arc.src}); it != position.end()) reverse[e] = it->second;
  }
  return reverse;
}

std::shared_ptr<const EdgeIndex> make_edge_index(int num_nodes, std::span<const Edge> edges, bool self_loops) {
  auto index = std::make_shared<EdgeIndex>();
  index->num_nodes = num_nodes;
  const std::size_t total = edges.size() + (self_loops ? static_cast<std::size_t>(num_nodes) : 0);
  index->src.reserve(total);
  index->dst.reserve(total);
  for (const Edge& e : edges) {
    if (self_loops && e.src == e.dst) continue;  // added once below
    index->src.push_back(e.src);
    index->dst.push_back(e.dst);
  }
  if (self_loops) {
    for (int v = 0; v < num_nodes; ++v) {
      index->src.push_back(v);
      index->dst.push_back(v);
    }
  }
  return index;
}

Graph disjoint_union(std::span<const Graph> graphs, std::vector<int>* node_offsets) {
  Graph out;
  if (graphs.empty()) throw Error(ErrorKind::kInsufficientData, "disjoint_union of no graphs");
  const Index dim = graphs.front().feature_dim();
  int total = 0;
  std::vector<int> offsets;
  bool any_labels = true;
  for (const Graph& g : graphs) {
    if (g.feature_dim() != dim) throw Error(ErrorKind::kShapeMismatch, "graphs disagree on feature_dim");
    offsets.push_back(total);
    total += g.num_nodes;
    any_labels = any_labels && g.labels.has_value();
  }
  offsets.push_back(total);
  out.num_nodes = total;
  out.features.resize(total, dim);
  out.undirected = true;
  std::vector<int> labels;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = graphs[i];
    out.features.middleRows(offsets[i], g.num_nodes) = g.features;
    for (const Edge& e : g.edges) out.edges.push_back(Edge{e.src + offsets[i], e.dst + offsets[i]});
    out.undirected = out.undirected && g.undirected;
    if (any_labels) labels.insert(labels.end(), g.labels->begin(), g.labels->end());
  }
  if (any_labels) out.labels = std::move(labels);
  if (node_offsets != nullptr) *node_offsets = std::move(offsets);
  return out;
}

Graph make_undirected(int num_nodes, std::span<const Edge> edges, Mat features) {
  std::set<Edge> arcs;
  for (const Edge& e : edges) {
    arcs.insert(e);
    arcs.insert(Edge{e.dst, e.src});
  }
  Graph g;
  g.num_nodes = num_nodes;
  g.edges.assign(arcs.begin(), arcs.end());
  g.features = std::move(features);
  g.undirected = true;
  return g;
}

Graph permute_nodes(const Graph& g, std::span<const int> perm) {
  if (perm.size() != static_cast<std::size_t>(g.num_nodes))
    throw Error(ErrorKind::kShapeMismatch, "permutation length differs from node count");
  Graph out;
  out.num_nodes = g.num_nodes;
  out.undirected = g.undirected;
  out.features.resize(g.features.rows(), g.features.cols());
  for (int v = 0; v < g.num_nodes; ++v) out.features.row(perm[static_cast<std::size_t>(v)]) = g.features.row(v);
  for (const Edge& e : g.edges)
    out.edges.push_back(Edge{perm[static_cast<std::size_t>(e.src)], perm[static_cast<std::size_t>(e.dst)]});
  if (g.labels) {
    std::vector<int> labels(g.labels->size());
    for (int v = 0; v < g.num_nodes; ++v)
      labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] = (*g.labels)[static_cast<std::size_t>(v)];
    out.labels = std::move(labels);
  }
  return out;
}

}  // namespace ugmae
