#pragma once

#include <map>
#include <string>
#include <string_view>

#include "ugmae/autodiff.hpp"
#include "ugmae/rng.hpp"

namespace ugmae {

using Real = double;
using Mat = Matrix<Real>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Named dense parameters, iterated in name order.
template <typename Scalar>
class ParameterSet {
 public:
  using Map = std::map<std::string, Matrix<Scalar>, std::less<>>;

  void add(std::string name, Matrix<Scalar> value) { entries_[std::move(name)] = std::move(value); }
  bool contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

  Matrix<Scalar>& at(std::string_view name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(ErrorKind::kShapeMismatch, "unknown parameter '" + std::string(name) + "'");
    return it->second;
  }
  const Matrix<Scalar>& at(std::string_view name) const { return const_cast<ParameterSet*>(this)->at(name); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Index scalar_count() const {
    Index n = 0;
    for (const auto& [_, m] : entries_) n += m.size();
    return n;
  }

  /// Zero-valued set with identical names and shapes.
  ParameterSet zeros_like() const {
    ParameterSet out;
    for (const auto& [name, m] : entries_) out.add(name, Matrix<Scalar>::Zero(m.rows(), m.cols()));
    return out;
  }

  void set_zero() {
    for (auto& [_, m] : entries_) m.setZero();
  }

  /// Entries whose names start with prefix, names kept intact.
  ParameterSet subset(std::string_view prefix) const {
    ParameterSet out;
    for (const auto& [name, m] : entries_)
      if (name.starts_with(prefix)) out.add(name, m);
    return out;
  }

  /// Same names and shapes as other.
  bool congruent(const ParameterSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    auto it = other.entries_.begin();
    for (const auto& [name, m] : entries_) {
      if (name != it->first || m.rows() != it->second.rows() || m.cols() != it->second.cols()) return false;
      ++it;
    }
    return true;
  }

  bool operator==(const ParameterSet& other) const {
    if (!congruent(other)) return false;
    auto it = other.entries_.begin();
    for (const auto& [_, m] : entries_) {
      if (m != it->second) return false;
      ++it;
    }
    return true;
  }

 private:
  Map entries_;
};

using Parameters = ParameterSet<Real>;

/// Binds named parameters onto a tape. With a gradient set the parameters are
/// trainable leaves; without one they enter as constants. Repeated lookups of
/// one name return the same node, so shared weights share one leaf.
template <typename Scalar>
class Binding {
 public:
  Binding(Tape<Scalar>& tape, const ParameterSet<Scalar>& values, ParameterSet<Scalar>* grads = nullptr)
      : tape_(&tape), values_(&values), grads_(grads) {}

  Var<Scalar> operator()(std::string_view name) {
    if (auto it = bound_.find(name); it != bound_.end()) return it->second;
    const auto& value = values_->at(name);
    Matrix<Scalar>* sink = grads_ != nullptr ? &grads_->at(name) : nullptr;
    Var<Scalar> var = tape_->leaf(value, sink);
    bound_.emplace(std::string(name), var);
    return var;
  }

  Tape<Scalar>& tape() const { return *tape_; }
  bool trainable() const { return grads_ != nullptr; }

 private:
  Tape<Scalar>* tape_;
  const ParameterSet<Scalar>* values_;
  ParameterSet<Scalar>* grads_;
  std::map<std::string, Var<Scalar>, std::less<>> bound_;
};

/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) entries.
inline Mat uniform_fan_in(Index rows, Index cols, Index fan_in, Rng& rng) {
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(fan_in));
  Mat out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
  return out;
}

}  // namespace ugmae
