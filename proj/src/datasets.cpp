#include "ugmae/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ugmae/error.hpp"
#include "ugmae/rng.hpp"

namespace ugmae {

namespace fs = std::filesystem;

Graph generate_sbm(const SbmParams& params) {
  if (params.blocks < 1 || params.nodes_per_block < 1 || params.feature_dim < 1)
    throw Error(ErrorKind::kShapeMismatch, "SBM needs positive blocks, block size and feature width");
  if (!(params.p_in >= 0 && params.p_in <= 1) || !(params.p_out >= 0 && params.p_out <= 1))
    throw Error(ErrorKind::kInvalidRate, "SBM edge probabilities must lie in [0, 1]");
  if (params.p_out > params.p_in) throw Error(ErrorKind::kInvalidRate, "SBM needs p_out <= p_in");
  Rng rng(params.seed);
  const int n = params.blocks * params.nodes_per_block;
  std::vector<int> labels(n);
  for (int v = 0; v < n; ++v) labels[v] = v / params.nodes_per_block;

  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? params.p_in : params.p_out;
      if (rng.uniform() < p) edges.push_back({u, v});
    }
  }

  const double scale = params.class_mean_separation / std::sqrt(2.0);
  Mat features(n, params.feature_dim);
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < params.feature_dim; ++j) {
      const double mean = (labels[v] % params.feature_dim == j) ? scale : 0.0;
      features(v, j) = mean + params.feature_noise_std * rng.normal();
    }
  }
  Graph g = make_undirected(n, edges, std::move(features));
  g.labels = std::move(labels);
  return g;
}

Split make_split(const std::vector<int>& labels, int train_per_class, int num_val, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates on our own stream so the split is identical everywhere.
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  Split split;
  std::map<int, int> taken;
  std::vector<int> rest;
  for (int v : order) {
    if (taken[labels[v]] < train_per_class) {
      ++taken[labels[v]];
      split.train.push_back(v);
    } else {
      rest.push_back(v);
    }
  }
  const auto val_count = std::min<std::size_t>(rest.size(), static_cast<std::size_t>(std::max(num_val, 0)));
  split.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(val_count));
  split.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(val_count), rest.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Dataset sbm_dataset(const SbmParams& params) {
  Dataset ds;
  ds.graph = generate_sbm(params);
  ds.spec.name = "sbm";
  ds.spec.source = DatasetSource::kSynthetic;
  ds.spec.sbm = params;
  const int n = ds.graph.num_nodes;
  // Small blocks keep half their nodes out of training.
  const int per_class = std::min(20, std::max(1, params.nodes_per_block / 2));
  ds.spec.split =
      make_split(*ds.graph.labels, per_class, std::max(0, (n - per_class * params.blocks) / 4), params.seed + 1);
  return ds;
}

double modularity(const Graph& g, const std::vector<int>& communities) {
  if (static_cast<int>(communities.size()) != g.num_nodes)
    throw Error(ErrorKind::kShapeMismatch, "one community per node required");
  // Arc-based form: Q = sum_c (e_cc - a_c^2) with e_cc the fraction of arcs
  // inside c and a_c the fraction of arc endpoints in c.
  std::map<int, double> inside;
  std::map<int, double> ends;
  double arcs = 0;
  for (const Edge& e : g.edges) {
    if (e.src == e.dst) continue;
    arcs += 1;
    ends[communities[e.src]] += 1;
    if (communities[e.src] == communities[e.dst]) inside[communities[e.src]] += 1;
  }
  if (arcs == 0) return 0.0;
  double q = 0;
  for (const auto& [c, a] : ends) q += inside[c] / arcs - (a / arcs) * (a / arcs);
  return q;
}

GraphFiles GraphFiles::in_directory(const fs::path& dir) {
  return {dir / "edges.tsv", dir / "features.csv", dir / "labels.txt", dir / "split.txt"};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void format_error(const fs::path& file, int line, const std::string& what) {
  throw Error(ErrorKind::kFormatError, file.string() + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, const fs::path& file, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
    format_error(file, line, "cannot parse '" + std::string(token) + "'");
  return value;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(value));
  (void)ec;
  return std::string(buf, ptr);
}

void check_id(int id, int n, const fs::path& file, int line) {
  if (id < 0 || id >= n)
    throw Error(ErrorKind::kInvalidNodeId,
                file.string() + ":" + std::to_string(line) + ": node id " + std::to_string(id) + " outside [0, " +
                    std::to_string(n) + ")");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path.string());
}

std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(ids[i]);
  }
  return s;
}

}  // namespace

Mat degree_onehot_features(const Graph& g, int max_degree) {
  if (max_degree < 0) throw Error(ErrorKind::kShapeMismatch, "max_degree must be non-negative");
  std::vector<int> degree(g.num_nodes, 0);
  for (const Edge& e : g.edges)
    if (e.src != e.dst) ++degree[e.src];
  Mat x = Mat::Zero(g.num_nodes, max_degree + 1);
  for (int v = 0; v < g.num_nodes; ++v) x(v, std::min(degree[v], max_degree)) = 1.0;
  return x;
}

Dataset load_graph_files(const GraphFiles& files, const LoadOptions& options) {
  // Features define the node count.
  const auto feature_lines = read_lines(files.features);
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  for (const auto& raw : feature_lines) {
    ++line_no;
    if (trim(raw).empty()) continue;
    std::vector<double> row;
    for (auto token : split_on(raw, ',')) row.push_back(parse_number<float>(token, files.features, line_no));  // fp32 on disk
    if (!rows.empty() && row.size() != rows.front().size())
      format_error(files.features, line_no, "expected " + std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  Mat features(n, n ? static_cast<Index>(rows.front().size()) : 0);
  for (int v = 0; v < n; ++v)
    for (Index j = 0; j < features.cols(); ++j) features(v, j) = rows[v][j];

  std::vector<Edge> edges;
  line_no = 0;
  for (const auto& raw : read_lines(files.edges)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto tokens = split_on(line, '\t');
    if (tokens.size() == 1) tokens = split_on(line, ' ');
    if (tokens.size() != 2) format_error(files.edges, line_no, "expected two node ids");
    const int src = parse_number<int>(tokens[0], files.edges, line_no);
    const int dst = parse_number<int>(tokens[1], files.edges, line_no);
    check_id(src, n, files.edges, line_no);
    check_id(dst, n, files.edges, line_no);
    edges.push_back({src, dst});
  }

  Dataset ds;
  ds.spec.name = files.features.parent_path().filename().string();
  ds.spec.source = DatasetSource::kFiles;
  ds.spec.directory = files.features.parent_path();
  if (options.directed) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    ds.graph.num_nodes = n;
    ds.graph.edges = std::move(edges);
    ds.graph.features = std::move(features);
    ds.graph.undirected = false;
  } else {
    ds.graph = make_undirected(n, edges, std::move(features));
  }

  if (fs::exists(files.labels)) {
    std::vector<int> labels;
    line_no = 0;
    for (const auto& raw : read_lines(files.labels)) {
      ++line_no;
      if (trim(raw).empty()) continue;
      labels.push_back(parse_number<int>(trim(raw), files.labels, line_no));
    }
    if (static_cast<int>(labels.size()) != n)
      throw Error(ErrorKind::kFormatError, files.labels.string() + ": " + std::to_string(labels.size()) +
                                               " labels for " + std::to_string(n) + " nodes");
    ds.graph.labels = std::move(labels);
  }

  if (fs::exists(files.split)) {
    line_no = 0;
    for (const auto& raw : read_lines(files.split)) {
      ++line_no;
      const std::string_view line = trim(raw);
      if (line.empty()) continue;
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) format_error(files.split, line_no, "expected 'name: ids'");
      const std::string_view key = trim(line.substr(0, colon));
      std::vector<int>* target = key == "train" ? &ds.spec.split.train
                                 : key == "val" ? &ds.spec.split.val
                                 : key == "test" ? &ds.spec.split.test
                                                 : nullptr;
      if (!target) format_error(files.split, line_no, "unknown split '" + std::string(key) + "'");
      const std::string_view ids = trim(line.substr(colon + 1));
      if (ids.empty()) continue;
      for (auto token : split_on(ids, ',')) {
        const int id = parse_number<int>(token, files.split, line_no);
        check_id(id, n, files.split, line_no);
        target->push_back(id);
      }
    }
  }

  if (options.features == FeatureMode::kDegreeOneHot)
    ds.graph.features = degree_onehot_features(ds.graph, options.max_degree);
  validate_graph(ds.graph);
  return ds;
}

void write_graph_files(const Graph& g, const std::optional<Split>& split, const GraphFiles& files) {
  validate_graph(g);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges)
    if (!g.undirected || e.src <= e.dst) edges.push_back(e);
  std::sort(edges.begin(), edges.end());
  std::string text;
  for (const Edge& e : edges) text += std::to_string(e.src) + '\t' + std::to_string(e.dst) + '\n';
  write_text(files.edges, text);

  text.clear();
  for (int v = 0; v < g.num_nodes; ++v) {
    for (Index j = 0; j < g.features.cols(); ++j) {
      if (j) text += ',';
      text += shortest(g.features(v, j));
    }
    text += '\n';
  }
  write_text(files.features, text);

  if (g.labels) {
    text.clear();
    for (int label : *g.labels) text += std::to_string(label) + '\n';
    write_text(files.labels, text);
  }
  if (split) {
    write_text(files.split, "train:" + join_ids(split->train) + "\nval:" + join_ids(split->val) +
                                "\ntest:" + join_ids(split->test) + "\n");
  }
}

Dataset resolve_dataset(const std::string& name_or_path, const LoadOptions& options) {
  if (name_or_path == "sbm" || name_or_path.starts_with("sbm:")) {
    SbmParams params;
    if (name_or_path.size() > 4) {
      const std::string_view seed = std::string_view(name_or_path).substr(4);
      const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), params.seed);
      if (ec != std::errc() || ptr != seed.data() + seed.size())
        throw Error(ErrorKind::kConfigError, "bad SBM seed in '" + name_or_path + "'");
    }
    Dataset ds = sbm_dataset(params);
    if (options.features == FeatureMode::kDegreeOneHot)
      ds.graph.features = degree_onehot_features(ds.graph, options.max_degree);
    return ds;
  }
  const fs::path dir(name_or_path);
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIoError, "dataset directory not found: " + name_or_path);
  return load_graph_files(GraphFiles::in_directory(dir), options);
}

Dataset convert_citation_network(const fs::path& content, const fs::path& cites, const std::string& name) {
  std::map<std::string, int> ids;
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  for (const auto& raw : read_lines(content)) {
    ++line_no;
    std::istringstream tokens(raw);
    std::vector<std::string> parts;
    for (std::string t; tokens >> t;) parts.push_back(t);
    if (parts.empty()) continue;
    if (parts.size() < 3) format_error(content, line_no, "expected id, features and label");
    if (!ids.emplace(parts.front(), static_cast<int>(rows.size())).second)
      format_error(content, line_no, "duplicate paper id " + parts.front());
    std::vector<double> row;
    for (std::size_t i = 1; i + 1 < parts.size(); ++i) row.push_back(parse_number<double>(parts[i], content, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) format_error(content, line_no, "feature width changed");
    rows.push_back(std::move(row));
    class_names.push_back(parts.back());
  }
  std::vector<std::string> sorted = class_names;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> labels;
  for (const auto& c : class_names)
    labels.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin()));

  std::vector<Edge> edges;
  line_no = 0;
  for (const auto& raw : read_lines(cites)) {
    ++line_no;
    std::istringstream tokens(raw);
    std::string a, b;
    if (!(tokens >> a)) continue;
    if (!(tokens >> b)) format_error(cites, line_no, "expected two paper ids");
    const auto ia = ids.find(a), ib = ids.find(b);
    if (ia == ids.end() || ib == ids.end()) continue;  // citations to papers outside the corpus
    if (ia->second != ib->second) edges.push_back({ia->second, ib->second});
  }

  const int n = static_cast<int>(rows.size());
  Mat features(n, n ? static_cast<Index>(rows.front().size()) : 0);
  for (int v = 0; v < n; ++v)
    for (Index j = 0; j < features.cols(); ++j) features(v, j) = rows[v][j];
  // Row-normalised bag of words.
  for (int v = 0; v < n; ++v) {
    const double s = features.row(v).sum();
    if (s > 0) features.row(v) /= s;
  }

  Dataset ds;
  ds.graph = make_undirected(n, edges, std::move(features));
  ds.graph.labels = labels;
  ds.spec.name = name;
  ds.spec.source = DatasetSource::kFiles;
  ds.spec.directory = content.parent_path();
  std::map<int, int> per_class;
  std::vector<int> rest;
  for (int v = 0; v < n; ++v) {
    if (per_class[labels[v]] < 20) {
      ++per_class[labels[v]];
      ds.spec.split.train.push_back(v);
    } else {
      rest.push_back(v);
    }
  }
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (i < 500)
      ds.spec.split.val.push_back(rest[i]);
    else if (i < 1500)
      ds.spec.split.test.push_back(rest[i]);
  }
  return ds;
}

std::vector<Graph> generate_graph_classification_set(int graphs_per_class, int nodes_per_graph, int max_degree,
                                                     std::uint64_t seed, std::vector<int>* labels) {
  if (nodes_per_graph < 4) throw Error(ErrorKind::kShapeMismatch, "graphs need at least 4 nodes");
  Rng rng(seed);
  const double p_in = 0.5, p_out = 0.05;
  const int half = nodes_per_graph / 2;
  const int other = nodes_per_graph - half;
  const double pairs_in = half * (half - 1) / 2.0 + other * (other - 1) / 2.0;
  const double pairs_total = nodes_per_graph * (nodes_per_graph - 1) / 2.0;
  const double p_er = (p_in * pairs_in + p_out * (pairs_total - pairs_in)) / pairs_total;

  std::vector<Graph> graphs;
  if (labels) labels->clear();
  for (int i = 0; i < 2 * graphs_per_class; ++i) {
    const int label = i % 2;
    std::vector<Edge> edges;
    for (int u = 0; u < nodes_per_graph; ++u) {
      for (int v = u + 1; v < nodes_per_graph; ++v) {
        const double p = label == 1 ? p_er : ((u < half) == (v < half) ? p_in : p_out);
        if (rng.uniform() < p) edges.push_back({u, v});
      }
    }
    Graph g = make_undirected(nodes_per_graph, edges, Mat());
    g.features = degree_onehot_features(g, max_degree);
    graphs.push_back(std::move(g));
    if (labels) labels->push_back(label);
  }
  return graphs;
}

}  // namespace ugmae
