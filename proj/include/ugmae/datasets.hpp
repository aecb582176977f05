#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ugmae/graph.hpp"

namespace ugmae {

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

/// Parameters of the planted-partition generator. Block b occupies node ids
/// [b * nodes_per_block, (b + 1) * nodes_per_block) and carries label b.
struct SbmParams {
  int blocks = 3;
  int nodes_per_block = 100;
  double p_in = 0.10;
  double p_out = 0.01;
  int feature_dim = 16;
  double class_mean_separation = 1.0;  // Euclidean distance between any two class means
  double feature_noise_std = 1.0;
  std::uint64_t seed = 0;
};

enum class DatasetSource { kFiles, kSynthetic };

struct DatasetSpec {
  std::string name;
  DatasetSource source = DatasetSource::kSynthetic;
  std::filesystem::path directory;  // kFiles
  std::optional<SbmParams> sbm;     // kSynthetic
  Split split;
};

struct Dataset {
  Graph graph;
  DatasetSpec spec;
};

/// Planted-partition graph with Gaussian class features.
///
/// Edges: for every pair u < v in lexicographic order one uniform() draw,
/// kept when below p_in (same block) or p_out. Features: class b has mean
/// (separation / sqrt 2) * e_(b mod feature_dim); entries are then drawn
/// node by node, dimension by dimension, as mean + std * normal(). All draws
/// come from one Rng(seed), so output is identical on every platform.
Graph generate_sbm(const SbmParams& params);

/// Per class, the first train_per_class nodes of a seeded shuffle form the
/// training set; the next num_val shuffled nodes validate; the rest test.
Split make_split(const std::vector<int>& labels, int train_per_class, int num_val, std::uint64_t seed);

/// The SBM fixture with 20 training nodes per class (fewer for blocks under
/// 40 nodes), a quarter of the rest for validation and the remainder for test.
Dataset sbm_dataset(const SbmParams& params);

/// Newman modularity of a node partition.
double modularity(const Graph& g, const std::vector<int>& communities);

/// On-disk layout of one graph (see README for the formats).
struct GraphFiles {
  std::filesystem::path edges;     // "src<TAB>dst" per line, sorted, undirected edges once with src <= dst
  std::filesystem::path features;  // CSV, row v = node v, no header
  std::filesystem::path labels;    // one integer per line (optional file)
  std::filesystem::path split;     // "train:", "val:", "test:" lines of comma-separated ids (optional file)

  static GraphFiles in_directory(const std::filesystem::path& dir);
};

enum class FeatureMode { kFile, kDegreeOneHot };

struct LoadOptions {
  bool directed = false;
  FeatureMode features = FeatureMode::kFile;
  int max_degree = 64;  // degree one-hot cap
};

Dataset load_graph_files(const GraphFiles& files, const LoadOptions& options = {});
void write_graph_files(const Graph& g, const std::optional<Split>& split, const GraphFiles& files);

/// One-hot encoding of min(degree, max_degree); width max_degree + 1.
Mat degree_onehot_features(const Graph& g, int max_degree);

/// Resolves "sbm" (default fixture, optionally "sbm:<seed>") or a directory.
Dataset resolve_dataset(const std::string& name_or_path, const LoadOptions& options = {});

/// Planetoid raw citation files (<id> <features...> <label> and
/// "<cited> <citing>") converted to a Dataset. Ids follow the content-file
/// order and labels the sorted class names. Split: 20 per class train,
/// 500 validation, 1000 test, drawn in content-file order.
Dataset convert_citation_network(const std::filesystem::path& content, const std::filesystem::path& cites,
                                 const std::string& name);

/// Labelled collection of small graphs for graph-level tasks: label 0 graphs
/// are two-community planted partitions, label 1 graphs are Erdos-Renyi with
/// matched expected edge count. Features are degree one-hot.
std::vector<Graph> generate_graph_classification_set(int graphs_per_class, int nodes_per_graph, int max_degree,
                                                     std::uint64_t seed, std::vector<int>* labels);

}  // namespace ugmae
