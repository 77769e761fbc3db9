#include <doctest.h>

#include "nfbf/manifold.hpp"
#include "oracles.hpp"

using namespace nfbf;
using manifold::CircleQuadraticProblem;
using manifold::RcgSettings;

namespace {

CircleQuadraticProblem random_problem(int n, Rng& rng) {
  CircleQuadraticProblem p;
  p.q_mat = oracle::random_psd(n, rng);
  p.q_vec = oracle::random_cmat(n, 1, rng);
  p.radius = 1.0 / std::sqrt(static_cast<double>(n));
  return p;
}

}  // namespace

TEST_SUITE("manifold") {
  TEST_CASE("euclidean gradient vs finite differences") {
    Rng rng(5);
    const int n = 6;
    const CircleQuadraticProblem p = random_problem(n, rng);
    const CVec phi = oracle::random_cmat(n, 1, rng);

    // real/imag stacked finite differences
    const auto f = [&](const RVec& x) {
      CVec z(n);
      for (int i = 0; i < n; ++i) z(i) = cxd(x(i), x(n + i));
      return p.objective(z);
    };
    RVec x(2 * n);
    for (int i = 0; i < n; ++i) {
      x(i) = phi(i).real();
      x(n + i) = phi(i).imag();
    }
    const RVec fd = oracle::fd_gradient(f, x);
    const CVec grad = manifold::euclidean_gradient(p, phi);
    for (int i = 0; i < n; ++i) {
      CHECK(grad(i).real() == doctest::Approx(fd(i)).epsilon(1e-6));
      CHECK(grad(i).imag() == doctest::Approx(fd(n + i)).epsilon(1e-6));
    }

    // closed forms for degenerate inputs
    CircleQuadraticProblem eye;
    eye.q_mat = CMat::Identity(n, n);
    eye.q_vec = CVec::Zero(n);
    eye.radius = p.radius;
    CHECK((manifold::euclidean_gradient(eye, phi) - 2.0 * phi).norm() < 1e-14);
    CircleQuadraticProblem affine = p;
    CHECK((manifold::euclidean_gradient(affine, CVec::Zero(n)) + 2.0 * p.q_vec).norm() < 1e-14);
  }

  TEST_CASE("riemannian gradient projection") {
    Rng rng(6);
    const int n = 8;
    const CircleQuadraticProblem p = random_problem(n, rng);
    const CVec phi = oracle::random_phase_vector(n, p.radius, rng);

    // radial input projects to zero
    const CVec radial = 3.7 * phi;
    CHECK(manifold::riemannian_gradient(p, phi, radial).norm() < 1e-12);

    // tangency and idempotence
    const CVec egrad = manifold::euclidean_gradient(p, phi);
    const CVec rgrad = manifold::riemannian_gradient(p, phi, egrad);
    for (int i = 0; i < n; ++i)
      CHECK(std::abs((rgrad(i) * std::conj(phi(i))).real()) < 1e-10);
    const CVec twice = manifold::riemannian_gradient(p, phi, rgrad);
    CHECK((twice - rgrad).norm() < 1e-12);

    CHECK_THROWS_AS(manifold::riemannian_gradient(p, 2.0 * phi, egrad), std::invalid_argument);
  }

  TEST_CASE("retract") {
    Rng rng(7);
    const int n = 5;
    const double radius = 1.0 / std::sqrt(5.0);
    const CVec phi = oracle::random_phase_vector(n, radius, rng);
    CHECK((manifold::retract(phi, CVec::Zero(n), radius) - phi).norm() < 1e-15);

    const CVec step = 0.3 * oracle::random_cmat(n, 1, rng);
    const CVec moved = manifold::retract(phi, step, radius);
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(moved(i)) == doctest::Approx(radius).epsilon(1e-13));

    // exact cancellation: phi + step = 0
    CHECK_THROWS_AS(manifold::retract(phi, CVec(-phi), radius), NumericError);
  }

  TEST_CASE("solve: q = 0, Q = I is already stationary") {
    const int n = 9;
    CircleQuadraticProblem p;
    p.q_mat = CMat::Identity(n, n);
    p.q_vec = CVec::Zero(n);
    p.radius = 1.0 / std::sqrt(static_cast<double>(n));
    Rng rng(8);
    const CVec phi0 = oracle::random_phase_vector(n, p.radius, rng);
    const auto res = manifold::solve(p, phi0, RcgSettings{});
    CHECK(res.iters == 0);
    CHECK(res.converged);
    CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-12));  // rho^2 * n
  }

  TEST_CASE("solve: 1-d problem aligns with q") {
    CircleQuadraticProblem p;
    p.q_mat = CMat::Identity(1, 1) * 0.8;
    p.q_vec = CVec(1);
    p.q_vec(0) = cxd(0.3, -0.7);
    p.radius = 1.0;
    CVec phi0(1);
    phi0(0) = std::polar(1.0, 2.5);
    const auto res = manifold::solve(p, phi0, RcgSettings{});
    const double expect_obj = 0.8 - 2.0 * std::abs(p.q_vec(0));
    CHECK(res.objective == doctest::Approx(expect_obj).epsilon(1e-9));
    CHECK(std::arg(res.phi(0)) == doctest::Approx(std::arg(p.q_vec(0))).epsilon(1e-6));
  }

  TEST_CASE("solve: monotone, on-manifold, beats random sampling") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 4;
      const CircleQuadraticProblem p = random_problem(n, rng);
      const CVec phi0 = oracle::random_phase_vector(n, p.radius, rng);
      const auto res = manifold::solve(p, phi0, RcgSettings{});
      for (int i = 0; i < n; ++i)
        CHECK(std::abs(std::abs(res.phi(i)) - p.radius) <= 1e-12);
      CHECK(res.objective <= p.objective(phi0) + 1e-12);

      double best_random = std::numeric_limits<double>::infinity();
      for (int s = 0; s < 100000; ++s)
        best_random = std::min(best_random,
                               p.objective(oracle::random_phase_vector(n, p.radius, rng)));
      CHECK(res.objective <= best_random + 1e-6);
    }
  }

  TEST_CASE("solve: restarts from ten random points never beat the reported optimum badly") {
    Rng rng(10);
    const int n = 4;
    const CircleQuadraticProblem p = random_problem(n, rng);
    const CVec phi0 = oracle::random_phase_vector(n, p.radius, rng);
    const auto base = manifold::solve(p, phi0, RcgSettings{});
    for (int s = 0; s < 10; ++s) {
      const auto other =
          manifold::solve(p, oracle::random_phase_vector(n, p.radius, rng), RcgSettings{});
      CHECK(base.objective <= other.objective + 1e-6);
    }
  }

  TEST_CASE("gamma-scaling of q keeps the 1-d optimizer phase") {
    CircleQuadraticProblem p;
    p.q_mat = CMat::Identity(1, 1);
    p.q_vec = CVec(1);
    p.q_vec(0) = cxd(-0.2, 0.9);
    p.radius = 1.0;
    CVec phi0(1);
    phi0(0) = std::polar(1.0, -1.0);
    const auto a = manifold::solve(p, phi0, RcgSettings{});
    p.q_vec *= 3.5;  // positive real scaling
    const auto b = manifold::solve(p, phi0, RcgSettings{});
    CHECK(std::arg(a.phi(0)) == doctest::Approx(std::arg(b.phi(0))).epsilon(1e-6));
  }

  TEST_CASE("problem validation") {
    CircleQuadraticProblem bad;
    bad.q_mat = CMat::Zero(2, 2);
    bad.q_mat(0, 1) = cxd(1.0, 0.0);  // not Hermitian
    bad.q_vec = CVec::Zero(2);
    bad.radius = 1.0;
    CVec phi0(2);
    phi0.setConstant(cxd(1.0, 0.0));
    CHECK_THROWS_AS(manifold::solve(bad, phi0, RcgSettings{}), std::invalid_argument);
  }
}
