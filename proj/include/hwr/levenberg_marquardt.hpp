#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>

namespace hwr {

struct LmOptions {
  int max_iter = 200;
  /// Converged when the relative cost decrease of an accepted step is below tol.
  double tol = 1e-8;
  double initial_damping = 1e-3;
};

struct LmReport {
  double cost = 0.0; ///< 0.5 * |r|^2 at the returned point
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Marquardt scaling) on a problem exposing
///   void residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const;
///   void jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& J) const;
/// x is updated in place to the best point found.
template <typename Problem>
LmReport levenberg_marquardt(const Problem& problem, Eigen::VectorXd& x, const LmOptions& opts = {}) {
  Eigen::VectorXd r, r_try;
  Eigen::MatrixXd J;
  problem.residuals(x, r);
  LmReport rep;
  rep.cost = 0.5 * r.squaredNorm();
  double mu = opts.initial_damping;

  for (rep.iterations = 0; rep.iterations < opts.max_iter; ++rep.iterations) {
    if (rep.cost < 1e-30) {
      rep.converged = true;
      break;
    }
    problem.jacobian(x, J);
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-15) {
      rep.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, i) += mu * std::max(jtj(i, i), 1e-12);
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        mu *= 10.0;
        continue;
      }
      const Eigen::VectorXd x_try = x + step;
      problem.residuals(x_try, r_try);
      const double cost_try = 0.5 * r_try.squaredNorm();
      if (std::isfinite(cost_try) && cost_try < rep.cost) {
        const double decrease = rep.cost - cost_try;
        x = x_try;
        r = r_try;
        const double previous = rep.cost;
        rep.cost = cost_try;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (decrease <= opts.tol * previous || step.norm() <= 1e-12 * (x.norm() + 1e-12)) rep.converged = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) {
      // No descent direction left at any damping: a stationary point.
      rep.converged = true;
      break;
    }
    if (rep.converged) {
      ++rep.iterations;
      break;
    }
  }
  return rep;
}

} // namespace hwr
