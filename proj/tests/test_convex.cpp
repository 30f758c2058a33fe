#include <doctest.h>

#include <cmath>

#include "tdm/convex.hpp"
#include "tdm/energy.hpp"
#include "test_util.hpp"

using namespace tdm;
using namespace tdmtest;

namespace {

// Chambolle (2004) dual fixed-point iteration for min 1/2|x-B|^2 + a TV(x);
// an independent route to the same minimizer.
Image chambolle04_denoise(const Image& B, double a, int iters) {
  const int n1 = B.n1(), n2 = B.n2();
  Array2d p1 = Array2d::Zero(n1, n2), p2 = Array2d::Zero(n1, n2);
  Array2d div, gx, gy;
  const double tau = 0.24;
  for (int it = 0; it < iters; ++it) {
    tv_divergence(p1, p2, div);
    const Array2d inner = div - B.array() / a;
    tv_gradient(inner, gx, gy);
    const Array2d mag = (gx * gx + gy * gy).sqrt();
    p1 = (p1 + tau * gx) / (1.0 + tau * mag);
    p2 = (p2 + tau * gy) / (1.0 + tau * mag);
  }
  tv_divergence(p1, p2, div);
  return Image(Array2d(B.array() - a * div));
}

}  // namespace

TEST_SUITE("convex") {

TEST_CASE("prox_tv_dual projects onto the alpha ball") {
  const double a = 0.3;
  Array2d p1 = Array2d::Constant(4, 4, 0.1), p2 = Array2d::Constant(4, 4, 0.2);
  Array2d q1 = p1, q2 = p2;
  prox_tv_dual(q1, q2, a);
  CHECK((q1 == p1).all());  // already feasible
  CHECK((q2 == p2).all());

  Array2d r1 = Array2d::Constant(2, 2, 2 * a), r2 = Array2d::Zero(2, 2);
  prox_tv_dual(r1, r2, a);
  CHECK(((r1 - a).abs() < 1e-15).all());
  CHECK((r2 == 0.0).all());

  // idempotence
  Array2d s1 = Array2d::Constant(3, 3, 1.7), s2 = Array2d::Constant(3, 3, -0.9);
  prox_tv_dual(s1, s2, a);
  Array2d t1 = s1, t2 = s2;
  prox_tv_dual(t1, t2, a);
  CHECK(((t1 - s1).abs() < 1e-15).all());
  CHECK(((t2 - s2).abs() < 1e-15).all());

  // feasibility: |p| <= alpha after projection
  CHECK(((s1 * s1 + s2 * s2).sqrt() <= a + 1e-12).all());
}

TEST_CASE("identity operator with constant data returns the data") {
  const int n = 12;
  Image c(n, n);
  c.array() = 0.42;
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(c);
  PDParams pd;
  pd.max_iters = 500;
  const Image x = solve_l2tv(*op, B, 0.2, Image(n, n), pd);
  CHECK((x.array() - 0.42).abs().maxCoeff() < 1e-6);
}

TEST_CASE("huge alpha drives the solution to the data mean") {
  const int n = 16;
  const Image B = random_image(n, n, 21);
  auto op = identity_make(n, n);
  PDParams pd;
  pd.max_iters = 4000;
  pd.tol = 0.0;
  const Image x = solve_l2tv(*op, op->apply(B), 1e3, Image(n, n), pd);
  const double mean = B.array().mean();
  CHECK((x.array() - mean).abs().maxCoeff() <= 1e-3);
}

TEST_CASE("solver agrees with the Chambolle dual-projection oracle") {
  const int n = 16;
  const Image B = smooth_image(n, n, 22);
  auto op = identity_make(n, n);
  PDParams pd;
  pd.max_iters = 6000;
  pd.tol = 0.0;
  const Image x = solve_l2tv(*op, op->apply(B), 0.1, Image(n, n), pd);
  const Image oracle = chambolle04_denoise(B, 0.1, 8000);
  CHECK((x.array() - oracle.array()).abs().maxCoeff() <= 1e-3);
}

TEST_CASE("tiny alpha with P4 on consistent data gives the least-norm solution") {
  const int n = 16, f = 4;
  const Image I = smooth_image(n, n, 23);
  auto op = p4_make(n, f);
  const MeasurementData B = op->apply(I);
  PDParams pd;
  pd.max_iters = 6000;
  pd.tol = 0.0;
  const Image x = solve_l2tv(*op, B, 1e-8, Image(n, n), pd);
  // least-norm least-squares solution: piecewise-constant block expansion
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(x(i, j) - B.values(i / f, j / f)));
  CHECK(worst <= 1e-3);

  CHECK_THROWS(solve_l2tv(*op, B, 0.0, Image(n, n), pd));
}

TEST_CASE("weighted step with huge beta returns the coupling target") {
  const int n = 16;
  const Image F1 = random_image(n, n, 24);
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(random_image(n, n, 25));
  WeightField w(n, n);
  PDParams pd;
  pd.max_iters = 3000;
  const Image x = solve_weighted_step(*op, B, F1, w, 0.01, 1e6, Image(n, n), pd);
  CHECK((x.array() - F1.array()).abs().maxCoeff() <= 1e-3);
}

TEST_CASE("weighted step matches the pointwise closed form at tiny alpha") {
  const int n = 16;
  const Image F1 = smooth_image(n, n, 26);
  const Image Bimg = smooth_image(n, n, 27);
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(Bimg);
  WeightField w(n, n);
  CounterRng rng(28);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) w.w(i, j) = 0.2 + rng.next_uniform();
  const double beta = 0.7;
  PDParams pd;
  pd.max_iters = 8000;
  pd.tol = 0.0;
  const Image x = solve_weighted_step(*op, B, F1, w, 1e-8, beta, Image(n, n), pd);
  const Array2d closed =
      (B.values + 2.0 * beta * w.w * F1.array()) / (1.0 + 2.0 * beta * w.w);
  CHECK((x.array() - closed).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("weighted step keeps constant data fixed when F1 = B") {
  const int n = 12;
  Image c(n, n);
  c.array() = 0.37;
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(c);
  WeightField w(n, n);
  PDParams pd;
  const Image x = solve_weighted_step(*op, B, c, w, 0.05, 3.0, Image(n, n), pd);
  CHECK((x.array() - 0.37).abs().maxCoeff() <= 1e-6);

  WeightField bad(n, n);
  bad.w(0, 0) = 0.0;
  CHECK_THROWS_AS(solve_weighted_step(*op, B, c, bad, 0.05, 3.0, Image(n, n), pd),
                  std::domain_error);
}

TEST_CASE("primal energy is monotone after burn-in and never worse than x0") {
  const int n = 16;
  const Image target = smooth_image(n, n, 29);
  auto op = radon_make(n, equispaced_angles(8));
  const MeasurementData B = add_gaussian_noise(op->apply(target), 0.05, 5);
  PDParams pd;
  pd.max_iters = 400;
  std::vector<double> energies;
  const Image x0 = random_image(n, n, 30);
  solve_l2tv(*op, B, 0.05, x0, pd, &energies);
  REQUIRE(energies.size() > 10);
  for (size_t t = 5; t + 1 < energies.size(); ++t)
    CHECK(energies[t + 1] <= energies[t] + 1e-10 * std::max(1.0, std::abs(energies[t])));

  std::vector<double> e2;
  const Image out = solve_l2tv(*op, B, 0.05, x0, pd, &e2);
  const Array2d r = op->apply(out).values - B.values;
  const double e_out = 0.5 * (r * r).sum() + 0.05 * tv_value(out);
  CHECK(e_out <= e2.front() + 1e-12);
}

TEST_CASE("violating the step-size condition is a config error") {
  const int n = 8;
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(random_image(n, n, 31));
  PDParams pd;
  pd.tau = 10.0;
  pd.sigma = 10.0;
  CHECK_THROWS_AS(solve_l2tv(*op, B, 0.1, Image(n, n), pd), std::invalid_argument);
}

}  // TEST_SUITE
