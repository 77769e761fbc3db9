#include "nfbf/manifold.hpp"

#include <cmath>
#include <string>

namespace nfbf::manifold {

namespace {

// Real inner product on C^n viewed as R^{2n}.
double rdot(const CVec& a, const CVec& b) { return a.dot(b).real(); }

CVec project_tangent(const CVec& phi, const CVec& v, double radius) {
  const double rho2 = radius * radius;
  CVec out(v.size());
  for (int n = 0; n < v.size(); ++n)
    out(n) = v(n) - (v(n) * std::conj(phi(n))).real() / rho2 * phi(n);
  return out;
}

void require_on_manifold(const CVec& phi, double radius, const char* who) {
  for (int n = 0; n < phi.size(); ++n)
    if (std::abs(std::abs(phi(n)) - radius) > 1e-9)
      throw std::invalid_argument(std::string(who) + ": phi is off the manifold at component " +
                                  std::to_string(n + 1));
}

}  // namespace

double CircleQuadraticProblem::objective(const CVec& phi) const {
  return (phi.adjoint() * q_mat * phi).value().real() - 2.0 * phi.dot(q_vec).real();
}

void CircleQuadraticProblem::check() const {
  if (q_mat.rows() != q_mat.cols() || q_mat.rows() != q_vec.size())
    throw std::invalid_argument("CircleQuadraticProblem: dimension mismatch");
  if (radius <= 0.0) throw std::invalid_argument("CircleQuadraticProblem: radius must be positive");
  const double qn = q_mat.norm();
  if ((q_mat - q_mat.adjoint()).norm() > 1e-10 * std::max(qn, 1e-300))
    throw std::invalid_argument("CircleQuadraticProblem: Q is not Hermitian");
}

CVec euclidean_gradient(const CircleQuadraticProblem& problem, const CVec& phi) {
  if (phi.size() != problem.q_mat.rows())
    throw std::invalid_argument("euclidean_gradient: dimension mismatch");
  return 2.0 * (problem.q_mat * phi - problem.q_vec);
}

CVec riemannian_gradient(const CircleQuadraticProblem& problem, const CVec& phi,
                         const CVec& egrad) {
  require_on_manifold(phi, problem.radius, "riemannian_gradient");
  return project_tangent(phi, egrad, problem.radius);
}

CVec retract(const CVec& phi, const CVec& tangent_step, double radius) {
  CVec out(phi.size());
  for (int n = 0; n < phi.size(); ++n) {
    const cxd moved = phi(n) + tangent_step(n);
    const double mag = std::abs(moved);
    if (mag == 0.0)
      throw NumericError("retract: component " + std::to_string(n + 1) +
                         " cancelled to zero, step too large");
    out(n) = moved * (radius / mag);
  }
  return out;
}

RcgResult solve(const CircleQuadraticProblem& problem, const CVec& phi0,
                const RcgSettings& settings) {
  problem.check();
  require_on_manifold(phi0, problem.radius, "solve");

  const int dim = static_cast<int>(phi0.size());
  const int restart_every = settings.restart_period > 0 ? settings.restart_period : dim;

  RcgResult res;
  res.phi = phi0;
  res.objective = problem.objective(phi0);
  if (!std::isfinite(res.objective)) throw NumericError("rcg: objective not finite at start");

  auto record = [&] {
    if (!settings.record_history) return;
    res.objective_history.push_back(res.objective);
    for (int n = 0; n < res.phi.size(); ++n)
      res.manifold_residual =
          std::max(res.manifold_residual, std::abs(std::abs(res.phi(n)) - problem.radius));
  };
  record();

  CVec grad = riemannian_gradient(problem, res.phi, euclidean_gradient(problem, res.phi));
  CVec dir = -grad;
  double step = settings.initial_step;
  int since_restart = 0;

  for (int it = 0; it < settings.max_iters; ++it) {
    const double grad_norm = grad.norm();
    if (grad_norm <= settings.grad_tol) {
      res.converged = true;
      return res;
    }

    double slope = rdot(grad, dir);
    if (slope >= 0.0) {  // not a descent direction, fall back to steepest descent
      dir = -grad;
      slope = -grad_norm * grad_norm;
      since_restart = 0;
    }

    // Armijo backtracking; retraction singularities just shrink the step.
    double alpha = step;
    CVec candidate;
    double cand_obj = res.objective;
    bool accepted = false;
    while (alpha > 1e-20) {
      bool singular = false;
      try {
        candidate = retract(res.phi, alpha * dir, problem.radius);
      } catch (const NumericError&) {
        singular = true;
      }
      if (!singular) {
        cand_obj = problem.objective(candidate);
        if (!std::isfinite(cand_obj))
          throw NumericError("rcg: objective not finite at iteration " + std::to_string(it + 1));
        if (cand_obj <= res.objective + settings.armijo_c * alpha * slope) {
          accepted = true;
          break;
        }
      }
      alpha *= settings.backtrack;
    }
    if (!accepted) {
      // no acceptable step along any direction this small: stationary enough
      return res;
    }

    const CVec prev_grad = grad;
    res.phi = candidate;
    res.objective = cand_obj;
    res.iters = it + 1;
    record();
    step = alpha / settings.backtrack;  // warm-start next search

    grad = riemannian_gradient(problem, res.phi, euclidean_gradient(problem, res.phi));

    ++since_restart;
    if (since_restart >= restart_every) {
      dir = -grad;
      since_restart = 0;
      continue;
    }

    // Polak-Ribiere+ with projection transport of the previous quantities.
    const CVec prev_grad_t = project_tangent(res.phi, prev_grad, problem.radius);
    const double denom = rdot(prev_grad, prev_grad);
    double beta = denom > 0.0 ? rdot(grad, grad - prev_grad_t) / denom : 0.0;
    beta = std::max(0.0, beta);
    dir = -grad + beta * project_tangent(res.phi, dir, problem.radius);
  }
  res.converged = grad.norm() <= settings.grad_tol;
  return res;
}

}  // namespace nfbf::manifold
