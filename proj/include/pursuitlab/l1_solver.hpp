#pragma once

// Basis pursuit, min ‖x‖₁ s.t. Φx = y, by over-relaxed ADMM on the split
// x ∈ {Φx = y}, z = x, with residual-balanced penalty.
//
// Termination is certified rather than heuristic: every few iterations the
// support of z is debiased by least squares and a dual point λ is built from
// the ADMM multiplier, corrected so that Φ_T*λ = sign(x_T) holds exactly on
// the candidate support. Feasibility plus a small primal–dual gap
// ‖x‖₁ − yᵀλ/max(1, ‖Φ*λ‖∞) certifies optimality.

#include <cmath>
#include <stdexcept>

#include "pursuitlab/linalg.hpp"

namespace pursuitlab {

struct L1Config {
  double tolerance{1e-8};     ///< feasibility and relative duality gap
  int max_iterations{5000};
  int check_every{10};        ///< ADMM iterations between certificate attempts
  double over_relaxation{1.6};
};

template <typename Scalar>
struct L1Result {
  Vector<Scalar> estimate;
  bool converged{false};
  int iterations{0};
  Scalar feasibility{0};  ///< ‖Φx − y‖₂ / ‖y‖₂
  Scalar duality_gap{0};  ///< relative to 1 + ‖x‖₁
  Scalar max_orthogonality{0};  ///< of the debiasing least-squares solve
};

namespace detail {

template <typename Scalar>
Vector<Scalar> soft_threshold(const Vector<Scalar>& v, Scalar kappa) {
  return v.unaryExpr([kappa](Scalar a) {
    return a > kappa ? a - kappa : (a < -kappa ? a + kappa : Scalar(0));
  });
}

/// Zero entries below `rel`·‖x‖∞ and refit on what survives.
template <typename Scalar>
RestrictedLsSolution<Scalar> debias(const Matrix<Scalar>& phi, const Vector<Scalar>& y,
                                    const Vector<Scalar>& x, Scalar rel) {
  const Scalar cutoff = rel * x.cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) > cutoff) keep.push_back(i);
  return restricted_least_squares<Scalar>(phi, y, IndexSet(std::move(keep)));
}

}  // namespace detail

template <typename Scalar>
L1Result<Scalar> basis_pursuit(const Matrix<Scalar>& phi, const Vector<Scalar>& y,
                               const L1Config& cfg = {}) {
  const Index m = phi.rows();
  const Index n = phi.cols();
  if (y.size() != m) throw std::invalid_argument("basis_pursuit: y length does not match Φ");
  if (m > n) throw std::invalid_argument("basis_pursuit: need m <= n");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("basis_pursuit: tolerance must be > 0");
  if (cfg.max_iterations < 1) throw std::invalid_argument("basis_pursuit: max_iterations < 1");

  L1Result<Scalar> out;
  const Scalar y_norm = y.norm();
  if (y_norm == Scalar(0)) {
    out.estimate = Vector<Scalar>::Zero(n);
    out.converged = true;
    return out;
  }
  const Scalar tol(cfg.tolerance);
  const Scalar relax(cfg.over_relaxation);

  const Matrix<Scalar> gram = phi * phi.transpose();
  const Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> gram_solver(gram);
  // Projection onto {x : Φx = y}.
  auto project = [&](const Vector<Scalar>& v) -> Vector<Scalar> {
    return v - phi.transpose() * gram_solver.solve(Vector<Scalar>(phi * v - y));
  };

  Vector<Scalar> x = project(Vector<Scalar>::Zero(n));
  Vector<Scalar> z = x;
  Vector<Scalar> u = Vector<Scalar>::Zero(n);  // scaled multiplier, λ = u / kappa
  // kappa = 1/ρ is the shrinkage level; it scales with the data, so the
  // iterates are equivariant under y → c·y.
  Scalar kappa = Scalar(0.1) * x.cwiseAbs().maxCoeff();

  RestrictedLsSolution<Scalar> best;

  auto certify = [&]() -> bool {
    const IndexSet support = support_of(z);
    if (support.empty() || support.size() > m) return false;
    auto candidate = restricted_least_squares<Scalar>(phi, y, support);
    const Scalar feas = candidate.residual_norm / y_norm;
    if (!(feas <= tol)) return false;

    const Vector<Scalar> subgradient = u / kappa;
    Vector<Scalar> lambda = gram_solver.solve(Vector<Scalar>(phi * subgradient));
    const Matrix<Scalar> sub = phi(Eigen::all, support.indices());
    Vector<Scalar> signs(support.size());
    for (Index k = 0; k < support.size(); ++k) {
      const Scalar v = candidate.estimate(support[k]);
      signs(k) = v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> sub_t(sub.transpose());
    lambda += sub_t.solve(Vector<Scalar>(signs - sub.transpose() * lambda));
    const Scalar dual_scale =
        std::max(Scalar(1), (phi.transpose() * lambda).cwiseAbs().maxCoeff());
    const Scalar primal = candidate.estimate.template lpNorm<1>();
    const Scalar gap = (primal - y.dot(lambda) / dual_scale) / (Scalar(1) + primal);

    out.feasibility = feas;
    out.duality_gap = gap;
    best = std::move(candidate);
    return gap <= tol;
  };

  int iter = 0;
  bool certified = false;
  while (iter < cfg.max_iterations) {
    ++iter;
    x = project(z - u);
    const Vector<Scalar> x_hat = relax * x + (Scalar(1) - relax) * z;
    const Vector<Scalar> z_old = z;
    z = detail::soft_threshold<Scalar>(x_hat + u, kappa);
    u += x_hat - z;

    if (iter % cfg.check_every == 0) {
      if (certify()) {
        certified = true;
        break;
      }
      const Scalar primal_res = (x - z).norm();
      const Scalar dual_res = (z - z_old).norm() / kappa;
      // Residual balancing; ρ = 1/kappa and u = λ/ρ rescale together.
      if (primal_res > Scalar(10) * dual_res * kappa) {
        kappa /= Scalar(2);
        u *= Scalar(2);
      } else if (dual_res * kappa > Scalar(10) * primal_res) {
        kappa *= Scalar(2);
        u /= Scalar(2);
      }
    }
  }
  out.iterations = iter;
  out.converged = certified;

  RestrictedLsSolution<Scalar> final_fit;
  if (certified) {
    final_fit = detail::debias<Scalar>(phi, y, best.estimate, Scalar(1e-8));
  } else {
    const Vector<Scalar> feasible = project(z - u);
    const Scalar cutoff = Scalar(1e-8) * feasible.cwiseAbs().maxCoeff();
    Index survivors = 0;
    for (Index i = 0; i < n; ++i) survivors += std::abs(feasible(i)) > cutoff;
    if (survivors == 0 || survivors > m) {
      out.estimate = feasible;
      out.feasibility = (phi * feasible - y).norm() / y_norm;
      return out;
    }
    final_fit = detail::debias<Scalar>(phi, y, feasible, Scalar(1e-8));
  }
  const IndexSet kept = support_of(final_fit.estimate);
  out.max_orthogonality = residual_orthogonality<Scalar>(phi, final_fit.residual, kept, y_norm);
  out.feasibility = final_fit.residual_norm / y_norm;
  out.estimate = std::move(final_fit.estimate);
  return out;
}

}  // namespace pursuitlab
