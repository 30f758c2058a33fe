#include <doctest.h>

#include <cmath>

#include "tdm/metrics.hpp"
#include "tdm/palm.hpp"
#include "test_util.hpp"

using namespace tdm;
using namespace tdmtest;

namespace {

double H_value(const ImagePath& I, const DeformationPath& v, const EnergyParams& p,
               Interp scheme = Interp::bilinear) {
  return p.beta * path_energy(I, v, p, scheme);
}

}  // namespace

TEST_SUITE("palm") {

TEST_CASE("grad_H vanishes on a constant path at rest") {
  const int n = 12, K = 2;
  std::vector<Image> frames(K + 1, smooth_image(n, n, 900));
  std::vector<DisplacementField> fields(K, DisplacementField(n, n));
  const ImagePath path(frames);
  const DeformationPath def(fields);
  EnergyParams p = EnergyParams::tied(0.05, 0.5, 0.03, K);
  const PalmGrads g = grad_H(path, def, p);
  for (int k = 0; k <= K; ++k) CHECK(g.images[k].sum_sq() == 0.0);
  for (int k = 0; k < K; ++k) CHECK(g.fields.steps[k].norm() == 0.0);
}

TEST_CASE("grad_H image block matches finite differences") {
  const int n = 12, K = 2;
  std::vector<Image> frames;
  for (int k = 0; k <= K; ++k) frames.push_back(smooth_image(n, n, 910 + k));
  std::vector<DisplacementField> fields;
  for (int k = 0; k < K; ++k) {
    DisplacementField v = smooth_field(n, n, 920 + k, 0.2);
    v.v1() += 0.4;
    v.v2() += 0.4;
    fields.push_back(v);
  }
  ImagePath path(frames);
  const DeformationPath def(fields);
  EnergyParams p = EnergyParams::tied(0.05, 0.5, 0.03, K);
  const PalmGrads g = grad_H(path, def, p);

  for (int k = 0; k < K; ++k) {
    auto f = [&](const Image& x) {
      ImagePath tmp = path;
      tmp.set_frame(k, x);
      return H_value(tmp, def, p);
    };
    CHECK(fd_image_gradient_error(f, path.frame(k), g.images[k], 1e-6) <= 1e-4);
  }
  // the reference frame is constrained: gradient identically zero
  CHECK(g.images[K].sum_sq() == 0.0);
}

TEST_CASE("grad_H field block matches finite differences") {
  const int n = 12, K = 2;
  std::vector<Image> frames;
  for (int k = 0; k <= K; ++k) frames.push_back(smooth_image(n, n, 930 + k));
  std::vector<DisplacementField> fields;
  for (int k = 0; k < K; ++k) {
    DisplacementField v(n, n);
    v.v1() = 0.4;
    v.v2() = 0.4;
    fields.push_back(v);
  }
  const ImagePath path(frames);
  DeformationPath def(fields);
  EnergyParams p = EnergyParams::tied(0.05, 0.5, 0.03, K);
  const PalmGrads g = grad_H(path, def, p);

  for (int k = 0; k < K; ++k) {
    auto f = [&](const DisplacementField& w) {
      DeformationPath tmp = def;
      tmp.steps[k] = w;
      return H_value(path, tmp, p);
    };
    CHECK(fd_field_gradient_error(f, def.steps[k], g.fields.steps[k], 1e-4) <= 1e-4);
  }
}

TEST_CASE("grad_H is linear in the image stack for fixed fields") {
  const int n = 10, K = 1;
  const Image A0 = smooth_image(n, n, 940);
  const Image B0 = smooth_image(n, n, 941);
  const Image AR = smooth_image(n, n, 942);
  const Image BR = smooth_image(n, n, 944);
  std::vector<DisplacementField> fields(K, smooth_field(n, n, 943, 0.5));
  const DeformationPath def(fields);
  EnergyParams p = EnergyParams::tied(0.05, 0.5, 0.03, K);

  auto grad0 = [&](const Image& x, const Image& r) {
    return grad_H(ImagePath({x, r}), def, p).images[0];
  };
  Image c0(Array2d(1.3 * A0.array() - 0.6 * B0.array()));
  Image cR(Array2d(1.3 * AR.array() - 0.6 * BR.array()));
  const Image g_combo = grad0(c0, cR);
  const Array2d expect =
      1.3 * grad0(A0, AR).array() - 0.6 * grad0(B0, BR).array();
  CHECK((g_combo.array() - expect).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("grad_H field components are separable across k") {
  const int n = 12, K = 3;
  std::vector<Image> frames;
  for (int k = 0; k <= K; ++k) frames.push_back(smooth_image(n, n, 950 + k));
  std::vector<DisplacementField> fields;
  for (int k = 0; k < K; ++k) fields.push_back(smooth_field(n, n, 960 + k, 0.5));
  const ImagePath path(frames);
  EnergyParams p = EnergyParams::tied(0.05, 0.5, 0.03, K);

  const PalmGrads g1 = grad_H(path, DeformationPath(fields), p);
  auto perturbed = fields;
  perturbed[1] = smooth_field(n, n, 999, 1.0);
  const PalmGrads g2 = grad_H(path, DeformationPath(perturbed), p);
  // changing v_1 does not move the gradient with respect to v_0 or v_2
  CHECK((g1.fields.steps[0].v1() == g2.fields.steps[0].v1()).all());
  CHECK((g1.fields.steps[0].v2() == g2.fields.steps[0].v2()).all());
  CHECK((g1.fields.steps[2].v1() == g2.fields.steps[2].v1()).all());
  CHECK((g1.fields.steps[2].v2() == g2.fields.steps[2].v2()).all());
}

TEST_CASE("palm_step leaves a consistent stationary state unchanged") {
  const int n = 12, K = 2;
  Image c(n, n);
  c.array() = 0.5;
  std::vector<Image> frames(K + 1, c);
  std::vector<DisplacementField> fields(K, DisplacementField(n, n));
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(c);
  EnergyParams p = EnergyParams::tied(0.05, 0.5, 0.03, K);
  PalmParams palm;
  palm.prox_pd.max_iters = 300;

  PalmState st{ImagePath(frames), DeformationPath(fields), 1.0, 1.0};
  const PalmState out = palm_step(st, *op, B, p, palm);
  for (int k = 0; k <= K; ++k)
    CHECK((out.images.frames()[k].array() - 0.5).abs().maxCoeff() <= 1e-10);
  for (int k = 0; k < K; ++k) CHECK(out.fields.steps[k].norm() <= 1e-12);
}

TEST_CASE("objective is nonincreasing over 50 PALM steps on the smoke test") {
  const int n = 32, K = 2;
  const Image target = smooth_image(n, n, 970);
  const Image R = smooth_image(n, n, 971);
  auto op = identity_make(n, n);
  const MeasurementData B = add_gaussian_noise(op->apply(target), 0.05, 3);

  EnergyParams p = EnergyParams::tied(0.05, 0.2, 0.05, K);
  PalmParams palm;
  palm.prox_pd.max_iters = 400;

  std::vector<Image> frames(K + 1, R);
  std::vector<DisplacementField> fields(K, DisplacementField(n, n));
  PalmState st{ImagePath(frames), DeformationPath(fields), 1.0, 1.0};

  double prev = full_objective(st.images, st.fields, *op, B, p);
  for (int it = 0; it < 50; ++it) {
    st = palm_step(std::move(st), *op, B, p, palm);
    const double J = full_objective(st.images, st.fields, *op, B, p);
    CHECK(J <= prev + 1e-8 * std::max(1.0, std::abs(prev)));
    prev = J;
  }
}

TEST_CASE("run_palm reconstructs consistent identity data") {
  const int n = 32;
  const Image target = smooth_image(n, n, 980);
  auto op = identity_make(n, n);
  const MeasurementData B = op->apply(target);

  PalmConfig cfg;
  cfg.alpha = 0.01;
  cfg.beta = 0.1;
  cfg.reg_scale = 0.05;
  cfg.K = 2;
  cfg.max_iters = 80;
  cfg.pd.max_iters = 600;
  const PalmResult res = run_palm(target, B, op, cfg);

  CHECK(ssim(res.path.frame(0), target) >= 0.99);
  for (size_t t = 0; t + 1 < res.objective.size(); ++t)
    CHECK(res.objective[t + 1] <=
          res.objective[t] + 1e-8 * std::max(1.0, std::abs(res.objective[t])));
}

}  // TEST_SUITE
