#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ugmae/parameters.hpp"

namespace ugmae {

struct Edge {
  int src = 0;
  int dst = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Node count, directed arc list and dense features. An undirected graph stores
/// every non-loop edge as two arcs.
struct Graph {
  int num_nodes = 0;
  std::vector<Edge> edges;
  Mat features;
  std::optional<std::vector<int>> labels;
  bool undirected = true;

  Index feature_dim() const { return features.cols(); }
};

/// Masked node set and masked arc indices for one training step.
struct MaskPlan {
  std::vector<int> masked_nodes;  // sorted, distinct
  std::vector<int> masked_edges;  // sorted arc indices into Graph::edges
  double p_f = 0.0;
  double p_s = 0.0;
};

/// Checks every Graph invariant and returns g unchanged.
const Graph& validate_graph(const Graph& g);

/// floor(num_nodes * p_f), at least 1 when p_f > 0. A 1e-9 slack absorbs
/// products such as 0.29 * 100 that land just below an integer.
int mask_count(int num_nodes, double p_f);

/// Rows in plan.masked_nodes replaced by token; g is untouched.
Mat apply_feature_mask(const Graph& g, const MaskPlan& plan, const Eigen::Ref<const Eigen::RowVectorXd>& token);

/// E minus the masked arcs, surviving arcs in their original order.
std::vector<Edge> apply_structure_mask(const Graph& g, const MaskPlan& plan);

/// For arc e, the index of its reverse arc; -1 for self-loops and for arcs
/// without a stored reverse.
std::vector<int> reverse_arcs(const Graph& g);

/// Connectivity for message passing, optionally with one self-loop per node.
std::shared_ptr<const EdgeIndex> make_edge_index(int num_nodes, std::span<const Edge> edges, bool self_loops);

/// Block-diagonal union. node_offsets receives the first node id of each
/// input graph plus a final entry equal to the total node count.
Graph disjoint_union(std::span<const Graph> graphs, std::vector<int>* node_offsets = nullptr);

/// Sorted, deduplicated undirected graph from an edge list (both directions
/// stored, self-loops kept once).
Graph make_undirected(int num_nodes, std::span<const Edge> edges, Mat features);

/// Node relabelling: node v becomes perm[v]. Arcs keep their order.
Graph permute_nodes(const Graph& g, std::span<const int> perm);

}  // namespace ugmae
