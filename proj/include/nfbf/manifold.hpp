#ifndef NFBF_MANIFOLD_HPP
#define NFBF_MANIFOLD_HPP

#include <vector>

#include "nfbf/types.hpp"

namespace nfbf::manifold {

/// min_phi  Re(phi^H Q phi) - 2 Re(phi^H q)  subject to |phi_n| = radius.
/// Q must be Hermitian PSD; radius is 1/sqrt(N_t) for the phase-shift set.
struct CircleQuadraticProblem {
  CMat q_mat;
  CVec q_vec;
  double radius = 1.0;

  double objective(const CVec& phi) const;
  /// Throws if Q is visibly non-Hermitian or dimensions disagree.
  void check() const;
};

struct RcgSettings {
  int max_iters = 200;
  double grad_tol = 1e-8;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  int restart_period = 0;   // 0 -> problem dimension
  bool record_history = false;
};

struct RcgResult {
  CVec phi;
  double objective = 0.0;
  int iters = 0;
  bool converged = false;
  // filled when record_history is set: objective after every accepted step
  // and the worst per-iterate modulus deviation from the manifold radius
  std::vector<double> objective_history;
  double manifold_residual = 0.0;
};

/// Gradient of the real objective with respect to phi under the standard
/// real inner product: 2*Q*phi - 2*q.
CVec euclidean_gradient(const CircleQuadraticProblem& problem, const CVec& phi);

/// Component-wise tangent projection at phi (phi must be on the manifold).
CVec riemannian_gradient(const CircleQuadraticProblem& problem, const CVec& phi,
                         const CVec& egrad);

/// (phi_n + step_n) * radius / |phi_n + step_n|. Throws NumericError when a
/// component cancels exactly; the line search shrinks the step in response.
CVec retract(const CVec& phi, const CVec& tangent_step, double radius);

/// Riemannian conjugate gradient (Polak-Ribiere+, projection transport,
/// Armijo backtracking). Monotone in the objective; every iterate stays on
/// the manifold by retraction.
RcgResult solve(const CircleQuadraticProblem& problem, const CVec& phi0,
                const RcgSettings& settings);

}  // namespace nfbf::manifold

#endif
