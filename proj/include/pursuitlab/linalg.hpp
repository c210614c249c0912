#pragma once

// Primitives shared by every recovery algorithm: correlation with the
// dictionary, deterministic top-k selection and least squares restricted to
// a column subset.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pursuitlab/types.hpp"

namespace pursuitlab {

/// Indices of the k largest-magnitude entries of v. Ties go to the smaller
/// index, so the result is a pure function of v.
template <typename Derived>
IndexSet top_k_indices(const Eigen::MatrixBase<Derived>& v, Index k) {
  const Index n = v.size();
  if (k <= 0 || k > n)
    throw std::invalid_argument("top_k_indices: k=" + std::to_string(k) +
                                " outside [1, " + std::to_string(n) + "]");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto before = [&v](Index a, Index b) {
    const auto ma = std::abs(v(a));
    const auto mb = std::abs(v(b));
    return ma > mb || (ma == mb && a < b);
  };
  auto kth = order.begin() + k;
  if (k < n) std::nth_element(order.begin(), kth - 1, order.end(), before);
  order.resize(static_cast<std::size_t>(k));
  return IndexSet(std::move(order));
}

/// Φ* r.
template <typename Scalar>
Vector<Scalar> correlate(const Matrix<Scalar>& phi, const Vector<Scalar>& r) {
  if (phi.rows() != r.size())
    throw std::invalid_argument("correlate: matrix has " + std::to_string(phi.rows()) +
                                " rows but residual has length " + std::to_string(r.size()));
  return phi.transpose() * r;
}

template <typename Scalar>
struct RestrictedLsSolution {
  Vector<Scalar> estimate;  ///< length N, zero off the support
  Vector<Scalar> residual;  ///< y - Φ·estimate
  Scalar residual_norm{0};
  bool rank_deficient{false};
};

/// Pivots below this fraction of the largest pivot count as zero.
inline constexpr double kRankThreshold = 1e-12;

/// argmin ‖y − Φz‖₂ over z supported on `support`, via a complete orthogonal
/// decomposition of Φ_T (column-pivoted QR). A numerically singular Φ_T is
/// flagged and answered with the minimum-norm minimizer.
template <typename Scalar>
RestrictedLsSolution<Scalar> restricted_least_squares(const Matrix<Scalar>& phi,
                                                      const Vector<Scalar>& y,
                                                      const IndexSet& support) {
  if (phi.rows() != y.size())
    throw std::invalid_argument("restricted_least_squares: y has length " +
                                std::to_string(y.size()) + ", expected " +
                                std::to_string(phi.rows()));
  if (support.empty())
    throw std::invalid_argument("restricted_least_squares: empty support");
  if (support.size() > phi.rows())
    throw std::invalid_argument("restricted_least_squares: support size " +
                                std::to_string(support.size()) + " exceeds m=" +
                                std::to_string(phi.rows()));
  if (!support.fits(phi.cols()))
    throw std::invalid_argument("restricted_least_squares: support index out of range");

  const Matrix<Scalar> sub = phi(Eigen::all, support.indices());
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod;
  cod.setThreshold(Scalar(kRankThreshold));
  cod.compute(sub);
  const Vector<Scalar> coeffs = cod.solve(y);

  RestrictedLsSolution<Scalar> out;
  out.estimate = Vector<Scalar>::Zero(phi.cols());
  out.estimate(support.indices()) = coeffs;
  out.residual = y - sub * coeffs;
  out.residual_norm = out.residual.norm();
  out.rank_deficient = cod.rank() < support.size();
  return out;
}

/// max over j in T of |⟨φ_j, r⟩| / (‖y‖₂ ‖φ_j‖₂): the relative residual
/// orthogonality of a least-squares solve on T. Zero columns are skipped.
template <typename Scalar>
Scalar residual_orthogonality(const Matrix<Scalar>& phi, const Vector<Scalar>& residual,
                              const IndexSet& support, Scalar y_norm) {
  if (y_norm <= Scalar(0)) return Scalar(0);
  Scalar worst{0};
  for (Index j : support) {
    const Scalar col_norm = phi.col(j).norm();
    if (col_norm == Scalar(0)) continue;
    worst = std::max(worst, std::abs(phi.col(j).dot(residual)) / (y_norm * col_norm));
  }
  return worst;
}

/// The s largest-magnitude entries of v, everything else zeroed (H_s).
template <typename Derived>
std::pair<IndexSet, Vector<typename Derived::Scalar>> hard_threshold(
    const Eigen::MatrixBase<Derived>& v, Index k) {
  IndexSet kept = top_k_indices(v, k);
  return {kept, restrict_to(v, kept)};
}

}  // namespace pursuitlab
