#include "ugmae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "ugmae/error.hpp"
#include "ugmae/rng.hpp"

namespace ugmae {

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::kTransductive ? "transductive" : "inductive";
}

ProbeResult summarize(std::vector<double> per_seed, Protocol protocol) {
  ProbeResult r;
  r.protocol = protocol;
  r.per_seed = std::move(per_seed);
  const auto n = static_cast<double>(r.per_seed.size());
  if (r.per_seed.empty()) return r;
  r.accuracy_mean = std::accumulate(r.per_seed.begin(), r.per_seed.end(), 0.0) / n;
  if (r.per_seed.size() > 1) {
    double ss = 0;
    for (double a : r.per_seed) ss += (a - r.accuracy_mean) * (a - r.accuracy_mean);
    r.accuracy_std = std::sqrt(ss / (n - 1));
  }
  return r;
}

Mat embed_nodes(const Backbone& backbone, const Graph& graph) {
  return encode(backbone, graph.num_nodes, graph.edges, graph.features);
}

namespace {

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
};

Standardizer fit_standardizer(const Mat& x) {
  Standardizer s;
  s.mean = x.colwise().mean();
  const Mat centered = x.rowwise() - s.mean;
  s.scale = (centered.array().square().colwise().sum() / std::max<Index>(x.rows(), 1)).sqrt().matrix();
  for (Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
  return s;
}

/// Standardised rows with a trailing constant column.
Mat augment(const Mat& x, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& scale) {
  Mat out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  out.col(x.cols()).setOnes();
  return out;
}

/// Largest eigenvalue of the PSD matrix a by power iteration.
double top_eigenvalue(const Mat& a) {
  Vec v = Vec::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  double lambda = 0;
  for (int it = 0; it < 200; ++it) {
    const Vec w = a * v;
    const double norm = w.norm();
    if (norm == 0) return 0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

Mat gather(const Mat& x, std::span<const int> rows) {
  Mat out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

std::vector<int> gather(const std::vector<int>& v, std::span<const int> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(v[static_cast<std::size_t>(r)]);
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace

std::vector<int> SoftmaxClassifier::predict(const Mat& x) const {
  const Mat logits = augment(x, mean, scale) * weight;
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

SoftmaxClassifier fit_softmax(const Mat& x, std::span<const int> labels, const ProbeConfig& cfg, std::uint64_t seed) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() || labels.empty())
    throw Error(ErrorKind::kShapeMismatch, "one label per training row required");
  SoftmaxClassifier model;
  model.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  const Standardizer s = fit_standardizer(x);
  model.mean = s.mean;
  model.scale = s.scale;
  const Mat a = augment(x, s.mean, s.scale);
  const auto n = static_cast<double>(a.rows());

  Mat y = Mat::Zero(a.rows(), model.num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Index>(i), labels[i]) = 1.0;

  // Softmax cross-entropy has logit Hessian bounded by I/2.
  const double curvature = 0.5 * top_eigenvalue(a.transpose() * a / n) + cfg.l2;
  const double step = curvature > 0 ? 1.0 / curvature : 1.0;

  Rng rng(seed);
  model.weight.resize(a.cols(), model.num_classes);
  for (Index i = 0; i < model.weight.rows(); ++i)
    for (Index j = 0; j < model.weight.cols(); ++j) model.weight(i, j) = 0.01 * rng.normal();
  model.weight.row(a.cols() - 1).setZero();

  for (int it = 0; it < cfg.steps; ++it) {
    Mat p = a * model.weight;
    p = (p.colwise() - p.rowwise().maxCoeff()).array().exp().matrix();
    p = (p.array().colwise() / p.rowwise().sum().array()).matrix();
    Mat grad = a.transpose() * (p - y) / n;
    grad.topRows(a.cols() - 1) += cfg.l2 * model.weight.topRows(a.cols() - 1);
    model.weight -= step * grad;
  }
  return model;
}

double majority_accuracy(const std::vector<int>& labels, const Split& split) {
  std::map<int, int> counts;
  for (int v : split.train) ++counts[labels[static_cast<std::size_t>(v)]];
  if (counts.empty()) throw Error(ErrorKind::kDegenerateSplit, "empty training split");
  int best = counts.begin()->first;
  for (const auto& [label, count] : counts)
    if (count > counts[best]) best = label;
  const std::vector<int> truth = gather(labels, split.test);
  return accuracy(std::vector<int>(truth.size(), best), truth);
}

ProbeResult linear_probe(const Mat& h, const std::vector<int>& labels, const Split& split, const ProbeConfig& cfg,
                         Protocol protocol) {
  if (static_cast<std::size_t>(h.rows()) != labels.size())
    throw Error(ErrorKind::kShapeMismatch, "one label per embedding row required");
  if (split.test.empty()) throw Error(ErrorKind::kDegenerateSplit, "empty test split");
  const std::set<int> train(split.train.begin(), split.train.end());
  for (int v : split.test)
    if (train.contains(v)) throw Error(ErrorKind::kDegenerateSplit, "node " + std::to_string(v) + " in train and test");
  for (int v : split.train)
    if (v < 0 || v >= h.rows()) throw Error(ErrorKind::kInvalidNodeId, "split id " + std::to_string(v));
  for (int v : split.test)
    if (v < 0 || v >= h.rows()) throw Error(ErrorKind::kInvalidNodeId, "split id " + std::to_string(v));

  const std::vector<int> train_labels = gather(labels, split.train);
  if (std::set<int>(train_labels.begin(), train_labels.end()).size() < 2)
    throw Error(ErrorKind::kDegenerateSplit, "training split holds a single class");

  const Mat train_x = gather(h, split.train);
  const Mat test_x = gather(h, split.test);
  const std::vector<int> test_labels = gather(labels, split.test);
  std::vector<double> per_seed;
  for (int s = 0; s < cfg.seeds; ++s) {
    const SoftmaxClassifier model = fit_softmax(train_x, train_labels, cfg, cfg.seed + static_cast<std::uint64_t>(s));
    per_seed.push_back(accuracy(model.predict(test_x), test_labels));
  }
  return summarize(std::move(per_seed), protocol);
}

Readout parse_readout(std::string_view name) {
  if (name == "sum") return Readout::kSum;
  if (name == "mean") return Readout::kMean;
  if (name == "max") return Readout::kMax;
  throw Error(ErrorKind::kConfigError, "unknown readout '" + std::string(name) + "'");
}

Eigen::RowVectorXd graph_readout(const Mat& h, Readout mode) {
  if (h.rows() == 0) throw Error(ErrorKind::kShapeMismatch, "readout of an empty graph");
  switch (mode) {
    case Readout::kSum: return h.colwise().sum();
    case Readout::kMean: return h.colwise().mean();
    case Readout::kMax: return h.colwise().maxCoeff();
  }
  return {};
}

Mat graph_embeddings(const Backbone& backbone, std::span<const Graph> graphs, Readout mode) {
  Mat out(static_cast<Index>(graphs.size()), backbone.config.hidden_dim);
  for (std::size_t i = 0; i < graphs.size(); ++i)
    out.row(static_cast<Index>(i)) = graph_readout(embed_nodes(backbone, graphs[i]), mode);
  return out;
}

namespace {

/// Binary hinge SVM on augmented rows, y in {-1, +1}.
Vec solve_binary_svm(const Mat& a, const std::vector<double>& y, const SvmConfig& cfg) {
  const Index n = a.rows();
  const double c = 1.0 / (cfg.lambda * static_cast<double>(n));
  Vec w = Vec::Zero(a.cols());
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  const Vec q = a.rowwise().squaredNorm();
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double worst = 0;
    for (Index i = 0; i < n; ++i) {
      if (q(i) == 0) continue;
      auto& ai = alpha[static_cast<std::size_t>(i)];
      const double yi = y[static_cast<std::size_t>(i)];
      const double g = yi * a.row(i).dot(w) - 1.0;
      double pg = g;
      if (ai <= 0) pg = std::min(g, 0.0);
      if (ai >= c) pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg == 0) continue;
      const double next = std::clamp(ai - g / q(i), 0.0, c);
      w += (next - ai) * yi * a.row(i).transpose();
      ai = next;
    }
    if (worst < cfg.tolerance) break;
  }
  return w;
}

}  // namespace

std::vector<int> LinearSvm::predict(const Mat& x) const {
  std::vector<int> out(static_cast<std::size_t>(x.rows()), classes.empty() ? 0 : classes.front());
  if (classes.size() < 2) return out;
  const Mat scores = augment(x, mean, scale) * weight;
  for (Index i = 0; i < x.rows(); ++i) {
    if (classes.size() == 2) {
      out[static_cast<std::size_t>(i)] = scores(i, 0) >= 0 ? classes[1] : classes[0];
    } else {
      Index best = 0;
      scores.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
    }
  }
  return out;
}

LinearSvm fit_svm(const Mat& x, std::span<const int> labels, const SvmConfig& cfg) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() || labels.empty())
    throw Error(ErrorKind::kShapeMismatch, "one label per training row required");
  LinearSvm svm;
  svm.classes.assign(labels.begin(), labels.end());
  std::sort(svm.classes.begin(), svm.classes.end());
  svm.classes.erase(std::unique(svm.classes.begin(), svm.classes.end()), svm.classes.end());
  const Standardizer s = fit_standardizer(x);
  svm.mean = s.mean;
  svm.scale = s.scale;
  if (svm.classes.size() < 2) return svm;

  const Mat a = augment(x, s.mean, s.scale);
  const std::size_t problems = svm.classes.size() == 2 ? 1 : svm.classes.size();
  svm.weight.resize(a.cols(), static_cast<Index>(problems));
  for (std::size_t p = 0; p < problems; ++p) {
    const int positive = svm.classes.size() == 2 ? svm.classes[1] : svm.classes[p];
    std::vector<double> y;
    for (int label : labels) y.push_back(label == positive ? 1.0 : -1.0);
    svm.weight.col(static_cast<Index>(p)) = solve_binary_svm(a, y, cfg);
  }
  return svm;
}

double cross_validate(const Mat& x, const std::vector<int>& labels, const std::vector<int>& fold_of,
                      const SvmConfig& cfg) {
  if (fold_of.size() != labels.size() || static_cast<std::size_t>(x.rows()) != labels.size())
    throw Error(ErrorKind::kShapeMismatch, "one label and one fold per row required");
  const std::set<int> folds(fold_of.begin(), fold_of.end());
  double total = 0;
  int counted = 0;
  for (int f : folds) {
    std::vector<int> train, test;
    for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == f ? test : train).push_back(static_cast<int>(i));
    if (train.empty() || test.empty()) continue;
    const LinearSvm svm = fit_svm(gather(x, train), gather(labels, train), cfg);
    total += accuracy(svm.predict(gather(x, test)), gather(labels, test));
    ++counted;
  }
  if (counted == 0) throw Error(ErrorKind::kInsufficientData, "no usable cross-validation fold");
  return total / counted;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  Rng rng(seed);
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  std::vector<int> fold_of(labels.size(), 0);
  int next = 0;
  for (auto& [label, members] : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.index(i)]);
    for (int m : members) {
      fold_of[static_cast<std::size_t>(m)] = next;
      next = (next + 1) % folds;
    }
  }
  return fold_of;
}

ProbeResult graph_classify(const Mat& x, const std::vector<int>& labels, const ClassifyConfig& cfg) {
  if (cfg.folds < 2) throw Error(ErrorKind::kConfigError, "at least two folds required");
  if (static_cast<int>(labels.size()) < cfg.folds)
    throw Error(ErrorKind::kInsufficientData,
                std::to_string(labels.size()) + " graphs for " + std::to_string(cfg.folds) + "-fold cross-validation");
  std::vector<double> runs;
  for (int r = 0; r < cfg.repetitions; ++r)
    runs.push_back(cross_validate(x, labels, stratified_folds(labels, cfg.folds, cfg.seed + static_cast<std::uint64_t>(r)),
                                  cfg.svm));
  return summarize(std::move(runs), Protocol::kInductive);
}

void write_probe_csv(const std::filesystem::path& path, const std::string& dataset, const ProbeResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << "dataset,protocol,seed,accuracy\n";
  char buf[64];
  for (std::size_t s = 0; s < result.per_seed.size(); ++s) {
    std::snprintf(buf, sizeof(buf), "%.17g", result.per_seed[s]);
    out << dataset << ',' << to_string(result.protocol) << ',' << s << ',' << buf << '\n';
  }
}

void write_probe_summary(const std::filesystem::path& path, const std::string& dataset, const ProbeResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  const nlohmann::json summary{{"dataset", dataset},
                               {"protocol", std::string(to_string(result.protocol))},
                               {"mean", result.accuracy_mean},
                               {"std", result.accuracy_std},
                               {"runs", result.per_seed.size()}};
  out << summary.dump(2) << '\n';
}

}  // namespace ugmae
