#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pursuitlab {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Sorted set of distinct column indices. Usable directly as an Eigen
/// index list, e.g. `phi(Eigen::all, set.indices())`.
class IndexSet {
 public:
  IndexSet() = default;

  /// Sorts and deduplicates.
  explicit IndexSet(std::vector<Index> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    if (!indices_.empty() && indices_.front() < 0)
      throw std::invalid_argument("IndexSet: negative index");
  }

  IndexSet(std::initializer_list<Index> indices)
      : IndexSet(std::vector<Index>(indices)) {}

  const std::vector<Index>& indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool contains(Index i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  /// True when every index is below `n`.
  bool fits(Index n) const { return indices_.empty() || indices_.back() < n; }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<Index> indices_;
};

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(a.size() + b.size()));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return IndexSet(std::move(out));
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  std::vector<Index> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return IndexSet(std::move(out));
}

inline IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  std::vector<Index> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return IndexSet(std::move(out));
}

/// Complement of `a` in [0, n).
inline IndexSet complement(const IndexSet& a, Index n) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n - a.size()));
  for (Index i = 0; i < n; ++i)
    if (!a.contains(i)) out.push_back(i);
  return IndexSet(std::move(out));
}

/// Indices of the nonzero entries of `v`.
template <typename Derived>
IndexSet support_of(const Eigen::MatrixBase<Derived>& v) {
  std::vector<Index> out;
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) != typename Derived::Scalar(0)) out.push_back(i);
  return IndexSet(std::move(out));
}

/// Copy of `v` with every entry outside `set` zeroed (the x_T of the
/// sparse-recovery literature).
template <typename Derived>
Vector<typename Derived::Scalar> restrict_to(const Eigen::MatrixBase<Derived>& v,
                                             const IndexSet& set) {
  Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(v.size());
  for (Index i : set) out(i) = v(i);
  return out;
}

inline std::string to_string(const IndexSet& set) {
  std::string out = "{";
  for (Index i = 0; i < set.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(set[i]);
  }
  return out + "}";
}

}  // namespace pursuitlab
