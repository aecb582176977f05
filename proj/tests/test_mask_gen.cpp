#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "ugmae/mask_gen.hpp"

using namespace ugmae;
using testing::inclusion_probabilities;
using testing::random_matrix;
using testing::thrown_kind;

namespace {

std::vector<double> frequencies(const Vec& p, double p_f, int draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> freq(static_cast<std::size_t>(p.size()), 0.0);
  for (int i = 0; i < draws; ++i)
    for (int v : sample_feature_mask(p, p_f, rng)) freq[static_cast<std::size_t>(v)] += 1.0 / draws;
  return freq;
}

std::vector<double> as_vector(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("a single node gets all the probability") {
  Rng rng(1);
  const AdaptiveSampler s(3, {}, rng);
  const Vec p = score_nodes(s, Mat::Ones(1, 3));
  REQUIRE(p.size() == 1);
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scores form a strictly positive distribution") {
  Rng rng(2);
  const AdaptiveSampler s(4, {}, rng);
  for (int n : {2, 7, 40}) {
    const Vec p = score_nodes(s, random_matrix(n, 4, rng, 3.0));
    CHECK(std::abs(p.sum() - 1.0) < 1e-6);
    CHECK((p.array() > 0.0).all());
  }
}

TEST_CASE("permuting node rows permutes the scores") {
  Rng rng(3);
  const AdaptiveSampler s(4, {}, rng);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat x = random_matrix(9, 4, rng);
    const std::vector<int> perm = testing::random_permutation(9, rng);
    Mat px(9, 4);
    for (int v = 0; v < 9; ++v) px.row(perm[static_cast<std::size_t>(v)]) = x.row(v);
    const Vec p = score_nodes(s, x), pp = score_nodes(s, px);
    for (int v = 0; v < 9; ++v) CHECK(std::abs(pp(perm[static_cast<std::size_t>(v)]) - p(v)) < 1e-14);
  }
}

TEST_CASE("log-score gradients match central differences") {
  Rng rng(4);
  const AdaptiveSampler s(5, {8, 2}, rng);
  Parameters params = s.params;
  for (auto& [name, value] : params)
    if (name.find("bias") != std::string::npos) value = random_matrix(value.rows(), value.cols(), rng, 0.3);
  // Fresh weights give nearly uniform scores and a flat sum of logs; sharpen
  // them so the differences are not swamped by roundoff.
  params.at("sampler/ffn/weight1") *= 20.0;
  const Mat x = random_matrix(6, 5, rng);
  const Mat w = random_matrix(6, 1, rng);
  const auto sum_log = testing::check_gradients(params, [&](Tape<Real>& t, Binding<Real>& b) {
    return sum(log_scores(s, b, t.constant(x)));
  });
  // The output bias has an exactly zero gradient here (shift invariance).
  CHECK(sum_log.fraction_tight() >= 0.99);
  CHECK(sum_log.worst < 1e-2);
  const auto weighted = testing::check_gradients(params, [&](Tape<Real>& t, Binding<Real>& b) {
    return sum(hadamard(log_scores(s, b, t.constant(x)), t.constant(w)));
  });
  CHECK(weighted.worst < 1e-4);
}

TEST_CASE("non-finite features are rejected") {
  Rng rng(5);
  const AdaptiveSampler s(2, {}, rng);
  Mat x = Mat::Ones(3, 2);
  x(1, 1) = std::nan("");
  CHECK(thrown_kind([&] { score_nodes(s, x); }) == ErrorKind::kNonFiniteInput);
  x(1, 1) = INFINITY;
  CHECK(thrown_kind([&] { score_nodes(s, x); }) == ErrorKind::kNonFiniteInput);
}

TEST_CASE("feature masks have the right size and are distinct") {
  Rng rng(6);
  const Vec p = Vec::Constant(10, 0.1);
  for (double rate : {0.05, 0.3, 0.5, 0.99, 1.0}) {
    const auto m = sample_feature_mask(p, rate, rng);
    CHECK(static_cast<int>(m.size()) == mask_count(10, rate));
    CHECK(std::set<int>(m.begin(), m.end()).size() == m.size());
    CHECK(std::is_sorted(m.begin(), m.end()));
  }
  CHECK(thrown_kind([&] { sample_feature_mask(p, 0.0, rng); }) == ErrorKind::kInvalidRate);
  CHECK(thrown_kind([&] { sample_feature_mask(p, 1.5, rng); }) == ErrorKind::kInvalidRate);
  CHECK(thrown_kind([&] { sample_uniform_mask(10, -0.1, rng); }) == ErrorKind::kInvalidRate);
}

TEST_CASE("uniform scores with k=2 of 4 include each node half the time") {
  const auto f = frequencies(Vec::Constant(4, 0.25), 0.5, 50000, 7);
  for (double x : f) CHECK(std::abs(x - 0.5) < 0.01);
}

TEST_CASE("k=1 inclusion equals the scores") {
  Vec p(4);
  p << 0.55, 0.25, 0.15, 0.05;
  const auto f = frequencies(p, 0.25, 50000, 8);
  for (int v = 0; v < 4; ++v) CHECK(std::abs(f[static_cast<std::size_t>(v)] - p(v)) < 0.01);
}

TEST_CASE("skewed scores with k=2 follow the enumeration oracle") {
  Vec p(4);
  p << 0.7, 0.1, 0.1, 0.1;
  const auto oracle = inclusion_probabilities(as_vector(p), 2);
  // Hand value for the heavy node: 0.7 + 3 * 0.1 * 0.7 / 0.9.
  CHECK(oracle[0] == doctest::Approx(0.7 + 0.21 / 0.9));
  const auto f = frequencies(p, 0.5, 50000, 9);
  for (std::size_t v = 0; v < 4; ++v) CHECK(std::abs(f[v] - oracle[v]) < 0.01);
}

TEST_CASE("uniform masks are uniform") {
  Rng rng(10);
  std::vector<double> f(5, 0.0);
  for (int i = 0; i < 50000; ++i)
    for (int v : sample_uniform_mask(5, 0.4, rng)) f[static_cast<std::size_t>(v)] += 1.0 / 50000;
  for (double x : f) CHECK(std::abs(x - 0.4) < 0.01);
}

TEST_CASE("structure masks over an index range") {
  Rng rng(11);
  CHECK(sample_structure_mask(std::size_t{100}, 0.0, rng).empty());
  const auto m = sample_structure_mask(std::size_t{10000}, 0.3, rng);
  const double frac = static_cast<double>(m.size()) / 10000;
  CHECK(frac >= 0.28);
  CHECK(frac <= 0.32);
  Rng a(12), b(12);
  CHECK(sample_structure_mask(std::size_t{500}, 0.3, a) == sample_structure_mask(std::size_t{500}, 0.3, b));
  CHECK(thrown_kind([&] { sample_structure_mask(std::size_t{5}, 1.0, rng); }) == ErrorKind::kInvalidRate);
  CHECK(thrown_kind([&] { sample_structure_mask(std::size_t{5}, -0.01, rng); }) == ErrorKind::kInvalidRate);
}

TEST_CASE("undirected edges are masked in both directions and self-loops never") {
  Rng rng(13);
  std::vector<Edge> edges;
  for (int u = 0; u < 30; ++u) {
    edges.push_back({u, u});
    for (int v = u + 1; v < 30; v += 3) edges.push_back({u, v});
  }
  const Graph g = make_undirected(30, edges, Mat::Zero(30, 1));
  const auto rev = reverse_arcs(g);
  std::size_t total_pairs = 0, masked_pairs = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = sample_structure_mask(g, 0.3, rng);
    const std::set<int> masked(m.begin(), m.end());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const bool hit = masked.count(static_cast<int>(e)) > 0;
      if (g.edges[e].src == g.edges[e].dst) {
        CHECK_FALSE(hit);
        continue;
      }
      CHECK(hit == (masked.count(rev[e]) > 0));
      if (g.edges[e].src < g.edges[e].dst) {
        ++total_pairs;
        masked_pairs += hit;
      }
    }
  }
  CHECK(std::abs(static_cast<double>(masked_pairs) / total_pairs - 0.3) < 0.03);
}

TEST_CASE("sampling loss hand values") {
  const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
  Vec p(3);
  p << e1, e2, 1.0 - e1 - e2;
  const std::vector<int> one{0}, two{0, 1};
  CHECK(sampling_loss(p, one, Vec::Constant(1, 2.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sampling_loss(p, two, Vec::Zero(2)) == 0.0);
  CHECK(sampling_loss(p, two, Vec::Ones(2)) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sampling loss refuses zero-probability nodes and mismatched rewards") {
  Vec p(3);
  p << 0.5, 0.5, 0.0;
  const std::vector<int> masked{2};
  CHECK(thrown_kind([&] { sampling_loss(p, masked, Vec::Ones(1)); }) == ErrorKind::kNumericalUnderflow);
  CHECK(thrown_kind([&] { sampling_loss(p, masked, Vec::Ones(2)); }) == ErrorKind::kShapeMismatch);
}

TEST_CASE("rewards enter the sampling loss as constants") {
  Tape<Real> tape;
  Mat g_log = Mat::Zero(3, 1);
  const Variable log_p = tape.leaf((Mat(3, 1) << -1, -2, -0.5).finished(), &g_log);
  const std::vector<int> masked{0, 2};
  Vec rewards(2);
  rewards << 4, 5;
  tape.backward(sampling_loss(log_p, masked, rewards));
  CHECK(g_log == (Mat(3, 1) << -4, 0, -5).finished());
}

TEST_CASE("sampling is reproducible from the seed") {
  Rng a(14), b(14);
  Vec p = Vec::LinSpaced(8, 1, 8);
  p /= p.sum();
  for (int i = 0; i < 50; ++i) CHECK(sample_feature_mask(p, 0.5, a) == sample_feature_mask(p, 0.5, b));
}
