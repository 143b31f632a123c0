#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "polariton/error.hpp"

namespace polariton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ResidualFn = std::function<Vector(const Vector&)>;

/// Bounded nonlinear least-squares problem: minimise 0.5 * |r(p)|^2.
struct FitProblem {
  ResidualFn residual;
  Vector initial;
  Vector lower;
  Vector upper;
  int max_iterations = 500;
  double step_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  double cost_tolerance = 1e-10;
  double jacobian_step = 1e-6;

  /// Unbounded problem.
  static FitProblem unbounded(ResidualFn fn, Vector init) {
    FitProblem p;
    const auto n = init.size();
    p.residual = std::move(fn);
    p.initial = std::move(init);
    p.lower = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    p.upper = Vector::Constant(n, std::numeric_limits<double>::infinity());
    return p;
  }
};

enum class Convergence { converged, max_iterations, stalled };

inline const char* to_string(Convergence c) {
  switch (c) {
    case Convergence::converged: return "converged";
    case Convergence::max_iterations: return "max-iter";
    case Convergence::stalled: return "stalled";
  }
  return "stalled";
}

struct FitResult {
  Vector params;
  double cost = 0.0;
  /// 1-sigma proxy from the Gauss-Newton covariance scaled by the residual variance.
  Vector uncertainty;
  int iterations = 0;
  Convergence status = Convergence::converged;
  std::vector<double> cost_history;  ///< cost after every accepted step, starting point first
};

namespace detail {

inline Vector project(const Vector& x, const Vector& lo, const Vector& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline double half_norm_sq(const Vector& r) { return 0.5 * r.squaredNorm(); }

}  // namespace detail

/// Central-difference jacobian with step h_j = scale * max(|p_j|, 1e-2).
/// Falls back to a one-sided difference on the side that stays within bounds.
inline Matrix finite_difference_jacobian(const ResidualFn& residual, const Vector& params, double step_scale,
                                         const Vector* lower = nullptr, const Vector* upper = nullptr,
                                         const Vector* r0 = nullptr) {
  Vector base;
  if (r0 == nullptr) {
    base = residual(params);
    if (!detail::all_finite(base)) throw Error(ErrorCode::jacobian, "residual is not finite at the expansion point");
    r0 = &base;
  }
  const auto m = r0->size();
  const auto n = params.size();
  Matrix jac(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step_scale * std::max(std::abs(params[j]), 1e-2);
    const double lo = lower ? (*lower)[j] : -std::numeric_limits<double>::infinity();
    const double hi = upper ? (*upper)[j] : std::numeric_limits<double>::infinity();
    const bool can_up = params[j] + h <= hi;
    const bool can_down = params[j] - h >= lo;
    Vector plus = params, minus = params;
    Vector col;
    if (can_up && can_down) {
      plus[j] += h;
      minus[j] -= h;
      col = (residual(plus) - residual(minus)) / (2.0 * h);
    } else if (can_up) {
      plus[j] += h;
      col = (residual(plus) - *r0) / h;
    } else if (can_down) {
      minus[j] -= h;
      col = (*r0 - residual(minus)) / h;
    } else {
      col = Vector::Zero(m);  // parameter pinned by its bounds
    }
    if (!detail::all_finite(col))
      throw Error(ErrorCode::jacobian, "non-finite jacobian column " + std::to_string(j));
    jac.col(j) = col;
  }
  return jac;
}

/// Levenberg-Marquardt with Marquardt diagonal scaling and bound projection.
///
/// Damping starts at 1e-3 and is divided by 10 on an accepted step and
/// multiplied by 10 on a rejected one. Accepted costs never increase.
inline FitResult least_squares(const FitProblem& problem) {
  const auto n = problem.initial.size();
  if (problem.lower.size() != n || problem.upper.size() != n)
    throw Error(ErrorCode::schema, "bounds do not match the parameter count");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(problem.lower[j] <= problem.upper[j])) throw Error(ErrorCode::schema, "bounds are not ordered");
    if (problem.initial[j] < problem.lower[j] || problem.initial[j] > problem.upper[j])
      throw Error(ErrorCode::bad_start, "initial parameter " + std::to_string(j) + " lies outside its bounds");
  }

  Vector x = problem.initial;
  Vector r = problem.residual(x);
  if (!detail::all_finite(r)) throw Error(ErrorCode::bad_start, "residual is not finite at the initial point");
  if (r.size() < n) throw Error(ErrorCode::insufficient_data, "fewer residuals than parameters");

  FitResult out;
  double cost = detail::half_norm_sq(r);
  out.cost_history.push_back(cost);
  double lambda = 1e-3;
  Matrix jac;
  bool have_jac = false;

  auto finish = [&](Convergence status) {
    out.params = x;
    out.cost = cost;
    out.status = status;
    if (!have_jac)
      jac = finite_difference_jacobian(problem.residual, x, problem.jacobian_step, &problem.lower, &problem.upper, &r);
    const Matrix normal = jac.transpose() * jac;
    const Matrix cov = normal.completeOrthogonalDecomposition().pseudoInverse();
    const auto dof = r.size() - n;
    const double variance = dof > 0 ? 2.0 * cost / static_cast<double>(dof) : 1.0;
    out.uncertainty = (cov.diagonal() * variance).cwiseMax(0.0).cwiseSqrt();
    return out;
  };

  if (cost == 0.0) return finish(Convergence::converged);

  for (int iter = 0; iter < problem.max_iterations; ++iter) {
    out.iterations = iter + 1;
    jac = finite_difference_jacobian(problem.residual, x, problem.jacobian_step, &problem.lower, &problem.upper, &r);
    have_jac = true;
    const Vector grad = jac.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() < problem.gradient_tolerance) return finish(Convergence::converged);

    const Matrix normal = jac.transpose() * jac;
    Vector scale = normal.diagonal();
    const double floor = std::max(scale.maxCoeff(), 1.0) * 1e-15;
    scale = scale.cwiseMax(floor);

    bool accepted = false;
    while (!accepted) {
      Matrix damped = normal;
      damped.diagonal() += lambda * scale;
      const Vector delta = damped.ldlt().solve(-grad);
      const Vector trial = detail::project(x + delta, problem.lower, problem.upper);
      const Vector step = trial - x;
      if (!delta.allFinite()) {
        lambda *= 10.0;
      } else if (step.norm() < problem.step_tolerance * (x.norm() + problem.step_tolerance)) {
        return finish(Convergence::converged);
      } else {
        const Vector r_trial = problem.residual(trial);
        const double cost_trial = detail::all_finite(r_trial) ? detail::half_norm_sq(r_trial)
                                                               : std::numeric_limits<double>::infinity();
        if (cost_trial <= cost) {
          const double decrease = (cost - cost_trial) / cost;
          x = trial;
          r = r_trial;
          cost = cost_trial;
          out.cost_history.push_back(cost);
          lambda = std::max(lambda / 10.0, 1e-15);
          accepted = true;
          have_jac = false;
          if (cost == 0.0 || decrease < problem.cost_tolerance) return finish(Convergence::converged);
        } else {
          lambda *= 10.0;
        }
      }
      if (lambda > 1e16) return finish(Convergence::stalled);
    }
  }
  return finish(Convergence::max_iterations);
}

}  // namespace polariton
