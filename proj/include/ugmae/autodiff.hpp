#pragma once

// Reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation of one forward pass. Each node owns its value
// and, after backward(), its adjoint. Parameters enter through leaf() with a
// gradient sink; backward() adds the leaf adjoint into that sink. Constants and
// detached values never receive adjoints, which is how stop-gradient routing is
// expressed throughout the library.

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ugmae/error.hpp"

namespace ugmae {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Message-passing connectivity: arc e carries src[e] -> dst[e].
struct EdgeIndex {
  int num_nodes = 0;
  std::vector<int> src;
  std::vector<int> dst;

  std::size_t size() const { return src.size(); }
};

template <typename Scalar>
class Tape;

/// Handle to a tape node. Cheap to copy; valid while its tape lives.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, int id) : tape_(tape), id_(id) {}

  Tape<Scalar>& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const { return tape_->requires_grad(id_); }
  /// Value of a 1x1 node.
  Scalar scalar() const { return value()(0, 0); }

 private:
  Tape<Scalar>* tape_ = nullptr;
  int id_ = -1;
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(Mat value) {
    nodes_.push_back(Node{std::move(value), Mat(), false, nullptr, {}});
    return Var<Scalar>(this, static_cast<int>(nodes_.size()) - 1);
  }

  /// Trainable leaf. backward() adds this node's adjoint into *sink, which must
  /// already have the value's shape.
  Var<Scalar> leaf(Mat value, Mat* sink) {
    if (sink == nullptr) return constant(std::move(value));
    if (sink->rows() != value.rows() || sink->cols() != value.cols())
      throw Error(ErrorKind::kShapeMismatch, "gradient sink shape differs from leaf");
    nodes_.push_back(Node{std::move(value), Mat(), true, sink, {}});
    return Var<Scalar>(this, static_cast<int>(nodes_.size()) - 1);
  }

  Var<Scalar> record(Mat value, std::initializer_list<Var<Scalar>> inputs, BackwardFn fn) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || requires_grad(in.id());
    nodes_.push_back(Node{std::move(value), Mat(), needs, nullptr, needs ? std::move(fn) : nullptr});
    return Var<Scalar>(this, static_cast<int>(nodes_.size()) - 1);
  }

  Var<Scalar> record(Mat value, const std::vector<Var<Scalar>>& inputs, BackwardFn fn) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || requires_grad(in.id());
    nodes_.push_back(Node{std::move(value), Mat(), needs, nullptr, needs ? std::move(fn) : nullptr});
    return Var<Scalar>(this, static_cast<int>(nodes_.size()) - 1);
  }

  const Mat& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Adjoint buffer, zero-initialised on first touch.
  Mat& grad(int id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.grad.size() == 0) node.grad = Mat::Zero(node.value.rows(), node.value.cols());
    return node.grad;
  }
  bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() != 0; }

  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    if (!requires_grad(id)) return;
    grad(id) += g;
  }

  /// Propagates d(root)/d(node) to every node and adds leaf adjoints into
  /// their sinks. Root must be 1x1. May be called repeatedly; sinks accumulate.
  void backward(const Var<Scalar>& root) {
    if (root.rows() != 1 || root.cols() != 1)
      throw Error(ErrorKind::kShapeMismatch, "backward() needs a scalar root");
    for (auto& node : nodes_) node.grad.resize(0, 0);
    if (!requires_grad(root.id())) return;
    grad(root.id())(0, 0) = Scalar(1);
    for (int id = root.id(); id >= 0; --id) {
      Node& node = nodes_[static_cast<std::size_t>(id)];
      if (node.grad.size() == 0) continue;
      if (node.backward) node.backward(*this, id);
      if (node.sink != nullptr) *node.sink += node.grad;
    }
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad;
    Mat* sink;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

namespace detail {

template <typename Scalar>
void require_same_tape(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (&a.tape() != &b.tape()) throw Error(ErrorKind::kShapeMismatch, "operands live on different tapes");
}

template <typename Scalar>
void require_same_shape(const Var<Scalar>& a, const Var<Scalar>& b, const char* op) {
  require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": operand shapes differ");
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> detach(const Var<Scalar>& a) {
  return a.tape().constant(a.value());
}

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  if (a.cols() != b.rows()) throw Error(ErrorKind::kShapeMismatch, "matmul: inner dimensions differ");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() * b.value(), {a, b}, [ia, ib](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

/// a * b^T
template <typename Scalar>
Var<Scalar> matmul_nt(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  if (a.cols() != b.cols()) throw Error(ErrorKind::kShapeMismatch, "matmul_nt: column counts differ");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() * b.value().transpose(), {a, b}, [ia, ib](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib));
    if (t.requires_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
  });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() + b.value(), {a, b}, [ia, ib](Tape<Scalar>& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() - b.value(), {a, b}, [ia, ib](Tape<Scalar>& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

/// scale * a + shift, elementwise.
template <typename Scalar>
Var<Scalar> affine(const Var<Scalar>& a, Scalar scale, Scalar shift = Scalar(0)) {
  const int ia = a.id();
  Matrix<Scalar> out = (scale * a.value().array() + shift).matrix();
  return a.tape().record(std::move(out), {a}, [ia, scale](Tape<Scalar>& t, int self) {
    t.accumulate(ia, scale * t.grad(self));
  });
}

template <typename Scalar>
Var<Scalar> operator*(Scalar s, const Var<Scalar>& a) {
  return affine(a, s);
}

template <typename Scalar>
Var<Scalar> hadamard(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "hadamard");
  const int ia = a.id(), ib = b.id();
  return a.tape().record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

/// Adds a 1 x cols row vector to every row of a.
template <typename Scalar>
Var<Scalar> add_row(const Var<Scalar>& a, const Var<Scalar>& row) {
  detail::require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols())
    throw Error(ErrorKind::kShapeMismatch, "add_row: bias must be 1 x cols");
  const int ia = a.id(), ib = row.id();
  Matrix<Scalar> out = a.value().rowwise() + row.value().row(0);
  return a.tape().record(std::move(out), {a, row}, [ia, ib](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    t.accumulate(ia, g);
    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
  });
}

namespace detail {

/// Elementwise map with derivative expressed through input x and output y.
template <typename Scalar, typename F, typename D>
Var<Scalar> unary(const Var<Scalar>& a, F f, D df) {
  const int ia = a.id();
  Matrix<Scalar> out = a.value().unaryExpr(f);
  return a.tape().record(std::move(out), {a}, [ia, df](Tape<Scalar>& t, int self) {
    const auto& x = t.value(ia);
    const auto& y = t.value(self);
    Matrix<Scalar> d = t.grad(self);
    for (Index j = 0; j < d.cols(); ++j)
      for (Index i = 0; i < d.rows(); ++i) d(i, j) *= df(x(i, j), y(i, j));
    t.accumulate(ia, d);
  });
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return x > Scalar(0) ? x : Scalar(0); },
      [](Scalar x, Scalar) { return x > Scalar(0) ? Scalar(1) : Scalar(0); });
}

template <typename Scalar>
Var<Scalar> leaky_relu(const Var<Scalar>& a, Scalar slope) {
  return detail::unary(
      a, [slope](Scalar x) { return x > Scalar(0) ? x : slope * x; },
      [slope](Scalar x, Scalar) { return x > Scalar(0) ? Scalar(1) : slope; });
}

template <typename Scalar>
Var<Scalar> elu(const Var<Scalar>& a, Scalar alpha = Scalar(1)) {
  return detail::unary(
      a, [alpha](Scalar x) { return x > Scalar(0) ? x : alpha * std::expm1(x); },
      [alpha](Scalar x, Scalar y) { return x > Scalar(0) ? Scalar(1) : y + alpha; });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return std::tanh(x); }, [](Scalar, Scalar y) { return Scalar(1) - y * y; });
}

template <typename Scalar>
Var<Scalar> exp(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return std::exp(x); }, [](Scalar, Scalar y) { return y; });
}

template <typename Scalar>
Var<Scalar> log(const Var<Scalar>& a) {
  return detail::unary(
      a, [](Scalar x) { return std::log(x); }, [](Scalar x, Scalar) { return Scalar(1) / x; });
}

/// x^gamma for x >= 0 and gamma >= 1 (derivative gamma * x^(gamma-1), finite at 0).
template <typename Scalar>
Var<Scalar> pow(const Var<Scalar>& a, Scalar gamma) {
  return detail::unary(
      a, [gamma](Scalar x) { return std::pow(x, gamma); },
      [gamma](Scalar x, Scalar) { return gamma * std::pow(x, gamma - Scalar(1)); });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  const int ia = a.id();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(std::move(out), {a}, [ia](Tape<Scalar>& t, int self) {
    const Scalar g = t.grad(self)(0, 0);
    t.grad(ia).array() += g;
  });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  const auto n = static_cast<Scalar>(a.value().size());
  if (a.value().size() == 0) throw Error(ErrorKind::kShapeMismatch, "mean of empty matrix");
  const int ia = a.id();
  // Rounding in sum / n can leave the range of the entries by an ulp.
  Matrix<Scalar> out(1, 1);
  out(0, 0) = std::clamp(a.value().sum() / n, a.value().minCoeff(), a.value().maxCoeff());
  return a.tape().record(std::move(out), {a}, [ia, n](Tape<Scalar>& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0) / n;
  });
}

/// out.row(k) = a.row(rows[k]).
template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar>& a, std::span<const int> rows) {
  std::vector<int> idx(rows.begin(), rows.end());
  Matrix<Scalar> out(static_cast<Index>(idx.size()), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= a.rows()) throw Error(ErrorKind::kShapeMismatch, "gather_rows: index out of range");
    out.row(static_cast<Index>(k)) = a.value().row(idx[k]);
  }
  const int ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, idx = std::move(idx)](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(ia);
    for (std::size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += g.row(static_cast<Index>(k));
  });
}

/// Rows listed in `rows` (distinct) are overwritten by the 1 x cols `token`.
/// The token's adjoint is the sum of adjoints of the replaced rows; the
/// replaced rows of `a` receive nothing.
template <typename Scalar>
Var<Scalar> replace_rows(const Var<Scalar>& a, std::span<const int> rows, const Var<Scalar>& token) {
  detail::require_same_tape(a, token);
  if (token.rows() != 1 || token.cols() != a.cols())
    throw Error(ErrorKind::kShapeMismatch, "replace_rows: token must be 1 x cols");
  std::vector<int> idx(rows.begin(), rows.end());
  Matrix<Scalar> out = a.value();
  for (int r : idx) {
    if (r < 0 || r >= a.rows()) throw Error(ErrorKind::kShapeMismatch, "replace_rows: index out of range");
    out.row(r) = token.value().row(0);
  }
  const int ia = a.id(), it = token.id();
  return a.tape().record(std::move(out), {a, token}, [ia, it, idx = std::move(idx)](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) {
      Matrix<Scalar> ga = g;
      for (int r : idx) ga.row(r).setZero();
      t.accumulate(ia, ga);
    }
    if (t.requires_grad(it)) {
      auto& gt = t.grad(it);
      for (int r : idx) gt.row(0) += g.row(r);
    }
  });
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar>& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols())
    throw Error(ErrorKind::kShapeMismatch, "slice_cols: range out of bounds");
  const int ia = a.id();
  Matrix<Scalar> out = a.value().middleCols(start, count);
  return a.tape().record(std::move(out), {a}, [ia, start, count](Tape<Scalar>& t, int self) {
    t.grad(ia).middleCols(start, count) += t.grad(self);
  });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw Error(ErrorKind::kShapeMismatch, "concat_cols: no parts");
  Index cols = 0;
  for (const auto& p : parts) {
    detail::require_same_tape(parts.front(), p);
    if (p.rows() != parts.front().rows()) throw Error(ErrorKind::kShapeMismatch, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix<Scalar> out(parts.front().rows(), cols);
  std::vector<std::pair<int, Index>> layout;
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    layout.emplace_back(p.id(), offset);
    offset += p.cols();
  }
  return parts.front().tape().record(std::move(out), parts, [layout](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    for (const auto& [id, off] : layout) {
      if (!t.requires_grad(id)) continue;
      t.accumulate(id, g.middleCols(off, t.value(id).cols()));
    }
  });
}

/// out[dst[e]] += weight[e] * x[src[e]] over all arcs e. weights is E x 1.
template <typename Scalar>
Var<Scalar> propagate(const Var<Scalar>& x, std::shared_ptr<const EdgeIndex> edges, const Var<Scalar>& weights) {
  detail::require_same_tape(x, weights);
  if (x.rows() != edges->num_nodes) throw Error(ErrorKind::kShapeMismatch, "propagate: row count differs from node count");
  if (weights.rows() != static_cast<Index>(edges->size()) || weights.cols() != 1)
    throw Error(ErrorKind::kShapeMismatch, "propagate: weights must be E x 1");
  const auto& xv = x.value();
  const auto& wv = weights.value();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(xv.rows(), xv.cols());
  for (std::size_t e = 0; e < edges->size(); ++e)
    out.row(edges->dst[e]) += wv(static_cast<Index>(e), 0) * xv.row(edges->src[e]);
  const int ix = x.id(), iw = weights.id();
  return x.tape().record(std::move(out), {x, weights}, [ix, iw, edges](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    const auto& xv = t.value(ix);
    const auto& wv = t.value(iw);
    if (t.requires_grad(ix)) {
      auto& gx = t.grad(ix);
      for (std::size_t e = 0; e < edges->size(); ++e)
        gx.row(edges->src[e]) += wv(static_cast<Index>(e), 0) * g.row(edges->dst[e]);
    }
    if (t.requires_grad(iw)) {
      auto& gw = t.grad(iw);
      for (std::size_t e = 0; e < edges->size(); ++e)
        gw(static_cast<Index>(e), 0) += g.row(edges->dst[e]).dot(xv.row(edges->src[e]));
    }
  });
}

/// Softmax of E x 1 arc scores over the arcs sharing a destination node.
template <typename Scalar>
Var<Scalar> edge_softmax(const Var<Scalar>& scores, std::shared_ptr<const EdgeIndex> edges) {
  if (scores.rows() != static_cast<Index>(edges->size()) || scores.cols() != 1)
    throw Error(ErrorKind::kShapeMismatch, "edge_softmax: scores must be E x 1");
  const auto& s = scores.value();
  const auto n = static_cast<std::size_t>(edges->num_nodes);
  std::vector<Scalar> max_score(n, -std::numeric_limits<Scalar>::infinity());
  for (std::size_t e = 0; e < edges->size(); ++e) {
    auto& m = max_score[static_cast<std::size_t>(edges->dst[e])];
    m = std::max(m, s(static_cast<Index>(e), 0));
  }
  Matrix<Scalar> out(s.rows(), 1);
  std::vector<Scalar> denom(n, Scalar(0));
  for (std::size_t e = 0; e < edges->size(); ++e) {
    const auto d = static_cast<std::size_t>(edges->dst[e]);
    out(static_cast<Index>(e), 0) = std::exp(s(static_cast<Index>(e), 0) - max_score[d]);
    denom[d] += out(static_cast<Index>(e), 0);
  }
  for (std::size_t e = 0; e < edges->size(); ++e)
    out(static_cast<Index>(e), 0) /= denom[static_cast<std::size_t>(edges->dst[e])];
  const int is = scores.id();
  return scores.tape().record(std::move(out), {scores}, [is, edges](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    const auto& alpha = t.value(self);
    std::vector<Scalar> weighted(static_cast<std::size_t>(edges->num_nodes), Scalar(0));
    for (std::size_t e = 0; e < edges->size(); ++e)
      weighted[static_cast<std::size_t>(edges->dst[e])] += alpha(static_cast<Index>(e), 0) * g(static_cast<Index>(e), 0);
    auto& gs = t.grad(is);
    for (std::size_t e = 0; e < edges->size(); ++e) {
      const auto k = static_cast<Index>(e);
      gs(k, 0) += alpha(k, 0) * (g(k, 0) - weighted[static_cast<std::size_t>(edges->dst[e])]);
    }
  });
}

/// Row-wise softmax.
template <typename Scalar>
Var<Scalar> row_softmax(const Var<Scalar>& a) {
  Matrix<Scalar> out = a.value();
  for (Index i = 0; i < out.rows(); ++i) {
    out.row(i).array() -= out.row(i).maxCoeff();
    out.row(i) = out.row(i).array().exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  const int ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    const auto& y = t.value(self);
    Matrix<Scalar> d(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
      const Scalar dot = g.row(i).dot(y.row(i));
      d.row(i) = y.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
    }
    t.accumulate(ia, d);
  });
}

/// log-softmax over all entries of a column vector.
template <typename Scalar>
Var<Scalar> log_softmax(const Var<Scalar>& a) {
  if (a.cols() != 1) throw Error(ErrorKind::kShapeMismatch, "log_softmax expects a column vector");
  const Scalar m = a.value().maxCoeff();
  const Scalar lse = m + std::log((a.value().array() - m).exp().sum());
  Matrix<Scalar> out = (a.value().array() - lse).matrix();
  const int ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    const Matrix<Scalar> p = t.value(self).array().exp().matrix();
    t.accumulate(ia, g - p * g.sum());
  });
}

/// Row-wise inner products; N x 1.
template <typename Scalar>
Var<Scalar> dot_rows(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "dot_rows");
  Matrix<Scalar> out = a.value().cwiseProduct(b.value()).rowwise().sum();
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, (t.value(ib).array().colwise() * g.col(0).array()).matrix());
    if (t.requires_grad(ib)) t.accumulate(ib, (t.value(ia).array().colwise() * g.col(0).array()).matrix());
  });
}

/// Row-wise cosine similarity, N x 1, clamped to [-1, 1].
/// A row whose either norm is below eps has cosine 0 and no gradient.
template <typename Scalar>
Var<Scalar> cosine_rows(const Var<Scalar>& a, const Var<Scalar>& b, Scalar eps) {
  detail::require_same_shape(a, b, "cosine_rows");
  const auto& av = a.value();
  const auto& bv = b.value();
  const Index n = av.rows();
  Matrix<Scalar> out(n, 1);
  // active(i) = 1 when the cosine is differentiable at row i
  std::vector<char> active(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const Scalar na = av.row(i).norm();
    const Scalar nb = bv.row(i).norm();
    if (na < eps || nb < eps) {
      out(i, 0) = Scalar(0);
      continue;
    }
    const Scalar c = av.row(i).dot(bv.row(i)) / (na * nb);
    if (c > Scalar(1)) {
      out(i, 0) = Scalar(1);
    } else if (c < Scalar(-1)) {
      out(i, 0) = Scalar(-1);
    } else {
      out(i, 0) = c;
      active[static_cast<std::size_t>(i)] = 1;
    }
  }
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib, active = std::move(active)](Tape<Scalar>& t, int self) {
    const auto& g = t.grad(self);
    const auto& av = t.value(ia);
    const auto& bv = t.value(ib);
    const auto& c = t.value(self);
    const bool need_a = t.requires_grad(ia), need_b = t.requires_grad(ib);
    for (Index i = 0; i < av.rows(); ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const Scalar na = av.row(i).norm();
      const Scalar nb = bv.row(i).norm();
      const Scalar gi = g(i, 0);
      if (need_a) t.grad(ia).row(i) += gi * (bv.row(i) / (na * nb) - c(i, 0) * av.row(i) / (na * na));
      if (need_b) t.grad(ib).row(i) += gi * (av.row(i) / (na * nb) - c(i, 0) * bv.row(i) / (nb * nb));
    }
  });
}

}  // namespace ugmae
