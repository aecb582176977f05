#pragma once

// Oracles shared by the test binaries. Nothing here calls into the code under
// test except to build inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "ugmae/error.hpp"
#include "ugmae/graph.hpp"
#include "ugmae/parameters.hpp"
#include "ugmae/rng.hpp"

namespace ugmae::testing {

/// |a - n| / max(|a|, |n|, floor).
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradientReport {
  std::size_t checked = 0;
  std::size_t within_tight = 0;  // rel. error < 1e-4
  double worst = 0.0;
  double max_abs_analytic = 0.0;

  double fraction_tight() const { return checked ? static_cast<double>(within_tight) / checked : 1.0; }
};

/// Builds a scalar loss on a fresh tape from a binding of `params`.
using LossBuilder = std::function<Var<Real>(Tape<Real>&, Binding<Real>&)>;

/// Analytic gradient (reverse mode) against central differences with step h,
/// for every scalar of every parameter.
inline GradientReport check_gradients(Parameters params, const LossBuilder& build, double h = 1e-5) {
  Parameters grads = params.zeros_like();
  {
    Tape<Real> tape;
    Binding<Real> binding(tape, params, &grads);
    tape.backward(build(tape, binding));
  }
  auto evaluate = [&](const Parameters& p) {
    Tape<Real> tape;
    Binding<Real> binding(tape, p);
    return build(tape, binding).scalar();
  };
  GradientReport report;
  for (auto& [name, value] : params) {
    for (Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + h;
      const double up = evaluate(params);
      value.data()[i] = saved - h;
      const double down = evaluate(params);
      value.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads.at(name).data()[i];
      const double err = relative_error(analytic, numeric);
      ++report.checked;
      if (err < 1e-4) ++report.within_tight;
      report.worst = std::max(report.worst, err);
      report.max_abs_analytic = std::max(report.max_abs_analytic, std::abs(analytic));
    }
  }
  return report;
}

/// Inclusion probability of each item when k items are drawn one at a time
/// without replacement, each draw proportional to p among the remaining items.
/// Exhaustive over all ordered k-sequences.
inline std::vector<double> inclusion_probabilities(const std::vector<double>& p, int k) {
  const int n = static_cast<int>(p.size());
  std::vector<double> incl(p.size(), 0.0);
  std::vector<int> sequence;
  std::vector<bool> used(p.size(), false);
  std::function<void(double, double)> walk = [&](double prob, double remaining) {
    if (static_cast<int>(sequence.size()) == k) {
      for (int v : sequence) incl[static_cast<std::size_t>(v)] += prob;
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = true;
      sequence.push_back(v);
      walk(prob * p[static_cast<std::size_t>(v)] / remaining, remaining - p[static_cast<std::size_t>(v)]);
      sequence.pop_back();
      used[static_cast<std::size_t>(v)] = false;
    }
  };
  walk(1.0, std::accumulate(p.begin(), p.end(), 0.0));
  return incl;
}

/// Kind of the Error thrown by f, or nothing if f returns normally.
template <typename F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline Mat random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

/// Undirected random graph, every pair kept with probability p.
inline Graph random_graph(int n, int feature_dim, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.push_back({u, v});
  Graph g = make_undirected(n, edges, random_matrix(n, feature_dim, rng));
  return g;
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  return perm;
}

}  // namespace ugmae::testing
