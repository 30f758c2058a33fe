#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "tdm/energy.hpp"
#include "test_util.hpp"

using namespace tdm;
using namespace tdmtest;

namespace {

// Independent dense reconstruction of the discrete elastic energy from the
// difference matrices in their textbook form.
double elastic_dense_oracle(const DisplacementField& v, double mu, double lambda_e) {
  using Mat = Eigen::MatrixXd;
  const int n1 = v.n1(), n2 = v.n2();
  const Mat V1 = v.v1().matrix();
  const Mat V2 = v.v2().matrix();

  // staggered forward differences against zero boundary faces
  Mat D1x1 = Mat::Zero(n1, n1 - 1);
  for (int i = 0; i < n1 - 1; ++i) {
    D1x1(i, i) += 1.0;
    D1x1(i + 1, i) -= 1.0;
  }
  Mat D2x2 = Mat::Zero(n2, n2 - 1);
  for (int j = 0; j < n2 - 1; ++j) {
    D2x2(j, j) += 1.0;
    D2x2(j + 1, j) -= 1.0;
  }
  // plain forward differences for the mixed term
  Mat D1x2 = Mat::Zero(n2 - 1, n2);
  for (int j = 0; j < n2 - 1; ++j) {
    D1x2(j, j) = -1.0;
    D1x2(j, j + 1) = 1.0;
  }
  Mat D2x1 = Mat::Zero(n1 - 1, n1);
  for (int i = 0; i < n1 - 1; ++i) {
    D2x1(i, i) = -1.0;
    D2x1(i, i + 1) = 1.0;
  }

  const Mat t11 = D1x1 * V1;
  const Mat t22 = V2 * D2x2.transpose();
  const Mat mix = V1 * D1x2.transpose() + D2x1 * V2;
  const Mat div = t11 + t22;
  return mu * (t11.squaredNorm() + t22.squaredNorm() + 0.5 * mix.squaredNorm()) +
         0.5 * lambda_e * div.squaredNorm();
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("tv_value on constants, the 2x2 witness, and homogeneity") {
  Image c(5, 5);
  c.array() = 0.7;
  CHECK(tv_value(c) == 0.0);

  // two unit jumps in the x2 direction
  Image w(2, 2);
  w(0, 0) = 0.0; w(1, 0) = 0.0; w(0, 1) = 1.0; w(1, 1) = 1.0;
  CHECK(tv_value(w) == doctest::Approx(2.0).epsilon(1e-15));

  const Image r = random_image(9, 7, 91);
  const double c2 = -2.7;
  Image scaled(Array2d(c2 * r.array()));
  CHECK(tv_value(scaled) == doctest::Approx(std::abs(c2) * tv_value(r)).epsilon(1e-12));
  CHECK(tv_value(r) > 0.0);
}

TEST_CASE("elastic energy of zero field is zero with zero gradient") {
  DisplacementField v(6, 6);
  const ValueGrad r = elastic_value_grad(v, 1.3, 0.7);
  CHECK(r.value == 0.0);
  CHECK(r.grad.norm() == 0.0);
}

TEST_CASE("elastic energy matches the dense matrix oracle") {
  const double mu = 0.8, lam = 0.45;
  const DisplacementField v = random_field(7, 9, 101);
  CHECK(elastic_value_grad(v, mu, lam).value ==
        doctest::Approx(elastic_dense_oracle(v, mu, lam)).epsilon(1e-12));

  // globally constant staggered field: only boundary stencils contribute
  DisplacementField c(8, 8);
  c.v1() = 0.6;
  c.v2() = -0.4;
  CHECK(elastic_value_grad(c, mu, lam).value ==
        doctest::Approx(elastic_dense_oracle(c, mu, lam)).epsilon(1e-12));
  CHECK(elastic_value_grad(c, mu, lam).value > 0.0);
}

TEST_CASE("elastic gradient matches finite differences") {
  const double mu = 1.1, lam = 0.6;
  const DisplacementField v = random_field(8, 8, 102);
  const ValueGrad r = elastic_value_grad(v, mu, lam);
  auto f = [&](const DisplacementField& w) {
    return elastic_value_grad(w, mu, lam).value;
  };
  CHECK(fd_field_gradient_error(f, v, r.grad, 1e-5) <= 1e-6);
}

TEST_CASE("elastic and D3 are quadratic forms") {
  const DisplacementField v = random_field(9, 9, 103);
  const double a = 1.7;
  const double s1 = elastic_value_grad(v, 0.9, 0.4).value;
  const double s2 = elastic_value_grad(a * v, 0.9, 0.4).value;
  CHECK(s2 == doctest::Approx(a * a * s1).epsilon(1e-12));

  const double d1 = d3_value_grad(v, 0.9, 0.009).value;
  const double d2 = d3_value_grad(a * v, 0.9, 0.009).value;
  CHECK(d2 == doctest::Approx(a * a * d1).epsilon(1e-12));

  // gradient linearity
  const DisplacementField w = random_field(9, 9, 104);
  DisplacementField combo = 2.0 * v;
  combo += -0.5 * w;
  DisplacementField expect = 2.0 * elastic_value_grad(v, 0.9, 0.4).grad;
  expect += -0.5 * elastic_value_grad(w, 0.9, 0.4).grad;
  const DisplacementField got = elastic_value_grad(combo, 0.9, 0.4).grad;
  CHECK((got - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
}

TEST_CASE("d3 zero field, coercivity floor, and small-grid error") {
  DisplacementField z(8, 8);
  const ValueGrad r0 = d3_value_grad(z, 0.5, 0.005);
  CHECK(r0.value == 0.0);
  CHECK(r0.grad.norm() == 0.0);

  const double nu = 0.7, eta = 0.007;
  const DisplacementField v = random_field(10, 10, 105);
  const double val = d3_value_grad(v, nu, eta).value;
  CHECK(val >= nu * eta * v.dot(v) - 1e-12);

  CHECK_THROWS(d3_value_grad(DisplacementField(6, 8), 0.5, 0.005));
}

TEST_CASE("d3 gradient matches finite differences") {
  const double nu = 0.7, eta = 0.007;
  const DisplacementField v = random_field(10, 10, 106);
  const ValueGrad r = d3_value_grad(v, nu, eta);
  auto f = [&](const DisplacementField& w) { return d3_value_grad(w, nu, eta).value; };
  CHECK(fd_field_gradient_error(f, v, r.grad, 1e-5) <= 1e-6);
}

TEST_CASE("registration energy at the trivial configuration") {
  const Image I = smooth_image(12, 12, 107);
  DisplacementField v(12, 12);
  EnergyParams p = EnergyParams::tied(0.05, 0.1, 0.07, 1);
  const RegistrationEval e = registration_energy(v, I, I, p);
  CHECK(e.value == 0.0);
  CHECK(e.grad.norm() == 0.0);

  const Image J = smooth_image(12, 12, 108);
  const RegistrationEval e2 = registration_energy(v, I, J, p);
  const Array2d d = I.array() - J.array();
  CHECK(e2.value == doctest::Approx((d * d).sum()).epsilon(1e-12));
}

TEST_CASE("registration gradient matches finite differences off the lattice") {
  const int n = 16;
  const Image Ia = smooth_image(n, n, 109);
  const Image Ib = smooth_image(n, n, 110);
  EnergyParams p = EnergyParams::tied(0.05, 0.1, 0.02, 1);

  // constant 0.4 px displacement keeps every query point well inside a
  // bilinear cell, so the central difference stays in the same linear piece
  DisplacementField v(n, n);
  v.v1() = 0.4;
  v.v2() = 0.4;
  const RegistrationEval e = registration_energy(v, Ia, Ib, p, Interp::bilinear);
  auto f = [&](const DisplacementField& w) {
    return registration_value(w, Ia, Ib, p, Interp::bilinear);
  };
  CHECK(fd_field_gradient_error(f, v, e.grad, 1e-4) <= 1e-4);

  // bicubic interpolation is C^1 inside the domain; an offset keeps every
  // query point clear of the boundary-clamp threshold
  DisplacementField vs = smooth_field(n, n, 111, 0.25);
  vs.v1() += 0.4;
  vs.v2() += 0.4;
  const RegistrationEval ec = registration_energy(vs, Ia, Ib, p, Interp::bicubic);
  auto fc = [&](const DisplacementField& w) {
    return registration_value(w, Ia, Ib, p, Interp::bicubic);
  };
  CHECK(fd_field_gradient_error(fc, vs, ec.grad, 1e-4) <= 1e-4);
}

TEST_CASE("gauss-newton operator is SPD with the regularizer floor") {
  const int n = 12;
  const Image Ia = smooth_image(n, n, 112);
  const Image Ib = smooth_image(n, n, 113);
  EnergyParams p = EnergyParams::tied(0.05, 0.1, 0.05, 1);
  const DisplacementField v = smooth_field(n, n, 114, 0.5);
  const RegistrationEval e = registration_energy(v, Ia, Ib, p);
  for (int t = 0; t < 5; ++t) {
    const DisplacementField d = random_field(n, n, 200 + t);
    const double quad = d.dot(e.gn_apply(d));
    CHECK(quad >= 2.0 * p.nu * p.eta * d.dot(d) - 1e-10);
  }
}

TEST_CASE("path energy composes registration terms additively") {
  const int n = 12, K = 3;
  std::vector<Image> frames;
  for (int k = 0; k <= K; ++k) frames.push_back(smooth_image(n, n, 300 + k));
  std::vector<DisplacementField> steps;
  for (int k = 0; k < K; ++k) steps.push_back(smooth_field(n, n, 400 + k, 0.5));
  const ImagePath path(frames);
  const DeformationPath fields(steps);
  EnergyParams p = EnergyParams::tied(0.05, 0.1, 0.03, K);

  double sum = 0.0;
  for (int k = 0; k < K; ++k)
    sum += registration_value(steps[k], frames[k], frames[k + 1], p);
  CHECK(path_energy(path, fields, p) == doctest::Approx(sum).epsilon(1e-12));

  // K = 1 equals a single registration energy
  const ImagePath p1({frames[0], frames[1]});
  const DeformationPath f1({steps[0]});
  CHECK(path_energy(p1, f1, p) ==
        doctest::Approx(registration_value(steps[0], frames[0], frames[1], p)).epsilon(1e-12));

  // all frames equal, zero fields -> zero
  std::vector<Image> same(K + 1, frames[0]);
  std::vector<DisplacementField> zeros(K, DisplacementField(n, n));
  CHECK(path_energy(ImagePath(same), DeformationPath(zeros), p) == 0.0);

  CHECK_THROWS(path_energy(p1, fields, p));
}

TEST_CASE("full objective reduces to L2-TV when beta vanishes") {
  const int n = 16;
  const Image target = smooth_image(n, n, 115);
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(target);

  std::vector<Image> frames(3, smooth_image(n, n, 116));
  std::vector<DisplacementField> zeros(2, DisplacementField(n, n));
  const ImagePath path(frames);
  const DeformationPath fields(zeros);

  EnergyParams p = EnergyParams::tied(0.11, 1.0, 0.05, 2);
  p.beta = 0.0;
  const Array2d r = op->apply(path.frame(0)).values - B.values;
  const double l2tv = 0.5 * (r * r).sum() + p.alpha * tv_value(path.frame(0));
  CHECK(full_objective(path, fields, *op, B, p) == doctest::Approx(l2tv).epsilon(1e-12));

  // consistent constant data with an all-constant path: objective is zero
  Image c(n, n);
  c.array() = 0.5;
  const MeasurementData Bc = op->apply(c);
  std::vector<Image> cframes(3, c);
  EnergyParams pc = EnergyParams::tied(0.11, 0.7, 0.05, 2);
  CHECK(full_objective(ImagePath(cframes), fields, *op, Bc, pc) == 0.0);
}

}  // TEST_SUITE
