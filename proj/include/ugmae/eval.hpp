#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ugmae/backbone.hpp"
#include "ugmae/datasets.hpp"

namespace ugmae {

enum class Protocol { kTransductive, kInductive };
std::string_view to_string(Protocol protocol);

/// Accuracies are percentages; accuracy_std is the sample standard deviation
/// of per_seed (0 for a single run).
struct ProbeResult {
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  std::vector<double> per_seed;
  Protocol protocol = Protocol::kTransductive;
};

ProbeResult summarize(std::vector<double> per_seed, Protocol protocol = Protocol::kTransductive);

/// Unmasked full-graph embeddings through the encoder.
Mat embed_nodes(const Backbone& backbone, const Graph& graph);

struct ProbeConfig {
  int steps = 1000;
  double l2 = 1e-4;
  int seeds = 5;
  std::uint64_t seed = 0;
};

/// Softmax regression on standardised train embeddings, fitted by full-batch
/// gradient descent with step 1/L (L the curvature bound of the objective).
/// Seeds perturb the initial weights.
struct SoftmaxClassifier {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  Mat weight;  // (d + 1) x classes, last row is the bias
  int num_classes = 0;

  std::vector<int> predict(const Mat& x) const;
};

SoftmaxClassifier fit_softmax(const Mat& x, std::span<const int> labels, const ProbeConfig& cfg, std::uint64_t seed);

/// Test accuracy of a probe trained on split.train, once per seed.
ProbeResult linear_probe(const Mat& h, const std::vector<int>& labels, const Split& split, const ProbeConfig& cfg = {},
                         Protocol protocol = Protocol::kTransductive);

/// Test accuracy (%) of the majority class of split.train.
double majority_accuracy(const std::vector<int>& labels, const Split& split);

enum class Readout { kSum, kMean, kMax };
Readout parse_readout(std::string_view name);

Eigen::RowVectorXd graph_readout(const Mat& h, Readout mode = Readout::kSum);

/// One readout row per graph.
Mat graph_embeddings(const Backbone& backbone, std::span<const Graph> graphs, Readout mode = Readout::kSum);

/// Linear max-margin classifier minimising lambda/2 |w|^2 + mean hinge loss
/// (bias folded into w through a constant feature), one-vs-rest for more than
/// two classes, solved by dual coordinate descent.
struct SvmConfig {
  double lambda = 1e-3;
  int max_epochs = 2000;
  double tolerance = 1e-8;
};

struct LinearSvm {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  std::vector<int> classes;
  Mat weight;  // (d + 1) x (number of one-vs-rest problems)

  std::vector<int> predict(const Mat& x) const;
};

LinearSvm fit_svm(const Mat& x, std::span<const int> labels, const SvmConfig& cfg = {});

/// Mean fold accuracy (%) for an explicit assignment of samples to folds.
double cross_validate(const Mat& x, const std::vector<int>& labels, const std::vector<int>& fold_of,
                      const SvmConfig& cfg = {});

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

struct ClassifyConfig {
  int folds = 10;
  int repetitions = 5;
  std::uint64_t seed = 0;
  SvmConfig svm;
};

/// 10-fold cross-validated accuracy, repeated with fresh folds.
ProbeResult graph_classify(const Mat& x, const std::vector<int>& labels, const ClassifyConfig& cfg = {});

/// CSV rows {dataset, protocol, seed, accuracy} and a {mean, std} JSON summary.
void write_probe_csv(const std::filesystem::path& path, const std::string& dataset, const ProbeResult& result);
void write_probe_summary(const std::filesystem::path& path, const std::string& dataset, const ProbeResult& result);

}  // namespace ugmae
