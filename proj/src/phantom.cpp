#include "tdm/phantom.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tdm/metrics.hpp"
#include "tdm/rng.hpp"

namespace tdm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEdgeBand = 1.5;  // px, soft shape edges

double clamp01(double t) { return t < 0 ? 0 : (t > 1 ? 1 : t); }

struct Ellipse {
  double cx, cy, rx, ry, rot, intensity;

  double coverage(double x, double y) const {
    const double c = std::cos(rot), s = std::sin(rot);
    const double dx = x - cx, dy = y - cy;
    const double u = (c * dx + s * dy) / rx;
    const double v = (-s * dx + c * dy) / ry;
    const double rho = std::sqrt(u * u + v * v);
    const double r_eff = 0.5 * (rx + ry);
    return clamp01(0.5 + (1.0 - rho) * r_eff / kEdgeBand);
  }
};

// Star-ish blob: radius r0 (1 + amp cos(lobes * phi + phase)).
struct PolarShape {
  double cx, cy, r0, amp;
  int lobes;
  double phase, intensity;

  double coverage(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double rho = std::hypot(dx, dy);
    const double phi = std::atan2(dy, dx);
    const double rb = r0 * (1.0 + amp * std::cos(lobes * phi + phase));
    return clamp01(0.5 + (rb - rho) / kEdgeBand);
  }
};

struct Scene {
  std::vector<Ellipse> ellipses;
  std::vector<PolarShape> polar;

  Image render(int size) const {
    Image img(size, size);
    for (int j = 0; j < size; ++j)
      for (int i = 0; i < size; ++i) {
        const double x = i + 1.0, y = j + 1.0;
        double acc = 0.0;
        for (const auto& e : ellipses) acc += e.intensity * e.coverage(x, y);
        for (const auto& p : polar) acc += p.intensity * p.coverage(x, y);
        img(i, j) = clamp01(acc);
      }
    return img;
  }
};

// Common smooth drift plus small per-shape jitter; magnitudes in pixels.
struct Perturbation {
  double gx, gy;        // global drift
  CounterRng* rng;

  void move(double& cx, double& cy, double jitter) {
    cx += gx + jitter * rng->next_normal();
    cy += gy + jitter * rng->next_normal();
  }
};

Scene make_ellipses(int size, CounterRng& rng) {
  Scene sc;
  const double s = size;
  const int count = 5;
  for (int k = 0; k < count; ++k) {
    Ellipse e;
    e.cx = s * (0.3 + 0.4 * rng.next_uniform());
    e.cy = s * (0.3 + 0.4 * rng.next_uniform());
    e.rx = s * (0.07 + 0.1 * rng.next_uniform());
    e.ry = s * (0.07 + 0.1 * rng.next_uniform());
    e.rot = 2.0 * kPi * rng.next_uniform();
    e.intensity = 0.35 + 0.35 * rng.next_uniform();
    sc.ellipses.push_back(e);
  }
  return sc;
}

Scene make_triangles(int size, CounterRng& rng) {
  Scene sc;
  const double s = size;
  const double ring = 0.28 * s;
  for (int k = 0; k < 6; ++k) {
    const double ang = 2.0 * kPi * k / 6.0 + 0.3 * rng.next_uniform();
    PolarShape p;
    p.cx = 0.5 * s + ring * std::cos(ang);
    p.cy = 0.5 * s + ring * std::sin(ang);
    p.r0 = s * (0.055 + 0.03 * rng.next_uniform());
    p.amp = 0.28;
    p.lobes = 3;
    p.phase = 2.0 * kPi * rng.next_uniform();
    p.intensity = 0.5 + 0.3 * rng.next_uniform();
    sc.polar.push_back(p);
  }
  return sc;
}

Scene make_brain(int size, CounterRng& rng) {
  Scene sc;
  const double s = size;
  const double jit = 0.01 * s;
  auto j = [&] { return jit * rng.next_normal(); };
  // skull ring: bright outer shell minus interior
  sc.ellipses.push_back({0.5 * s + j(), 0.5 * s + j(), 0.42 * s, 0.36 * s, 0.1, 0.75});
  sc.ellipses.push_back({0.5 * s + j(), 0.5 * s + j(), 0.38 * s, 0.32 * s, 0.1, -0.45});
  // ventricles
  sc.ellipses.push_back({0.42 * s + j(), 0.47 * s + j(), 0.055 * s, 0.11 * s, 0.35, -0.22});
  sc.ellipses.push_back({0.58 * s + j(), 0.47 * s + j(), 0.055 * s, 0.11 * s, -0.35, -0.22});
  // internal structures
  sc.ellipses.push_back({0.5 * s + j(), 0.68 * s + j(), 0.1 * s, 0.06 * s, 0.0, 0.25});
  sc.ellipses.push_back({0.36 * s + j(), 0.62 * s + j(), 0.05 * s, 0.05 * s, 0.0, 0.18});
  sc.ellipses.push_back({0.64 * s + j(), 0.62 * s + j(), 0.05 * s, 0.05 * s, 0.0, 0.18});
  sc.ellipses.push_back({0.5 * s + j(), 0.33 * s + j(), 0.14 * s, 0.05 * s, 0.0, 0.2});
  return sc;
}

void deform_scene(Scene& sc, int size, CounterRng& rng) {
  const double s = size;
  Perturbation pert{s * 0.02 * rng.next_normal(), s * 0.02 * rng.next_normal(), &rng};
  for (auto& e : sc.ellipses) {
    pert.move(e.cx, e.cy, 0.012 * s);
    e.rx *= 1.0 + 0.08 * rng.next_normal();
    e.ry *= 1.0 + 0.08 * rng.next_normal();
    e.rot += 0.1 * rng.next_normal();
    e.intensity = clamp01(e.intensity + 0.06 * rng.next_normal());
  }
  for (auto& p : sc.polar) {
    pert.move(p.cx, p.cy, 0.012 * s);
    p.r0 *= 1.0 + 0.1 * rng.next_normal();
    p.phase += 0.3 * rng.next_normal();
    // triangles grow into stars
    p.lobes = 5;
    p.amp = 0.32;
    p.intensity = clamp01(p.intensity + 0.06 * rng.next_normal());
  }
}

}  // namespace

PhantomPair gen_phantom(const std::string& kind, int size, std::uint64_t seed) {
  if (size < 32) throw std::invalid_argument("gen_phantom: size must be >= 32");

  std::string base = kind;
  bool want_detail = false, zero_deform = false;
  auto strip = [&](const std::string& suffix, bool& flag) {
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
      flag = true;
      base = base.substr(0, base.size() - suffix.size());
    }
  };
  strip("-static", zero_deform);
  strip("-detail", want_detail);
  strip("-static", zero_deform);  // either suffix order

  CounterRng rng(seed);
  Scene ref_scene;
  if (base == "ellipses") {
    ref_scene = make_ellipses(size, rng);
  } else if (base == "triangles-to-stars") {
    ref_scene = make_triangles(size, rng);
  } else if (base == "brain-like") {
    ref_scene = make_brain(size, rng);
    want_detail = true;
  } else {
    throw std::invalid_argument("gen_phantom: unknown kind '" + kind + "'");
  }

  PhantomPair out;
  out.reference = ref_scene.render(size);

  Scene tgt_scene = ref_scene;
  if (!zero_deform) deform_scene(tgt_scene, size, rng);
  if (want_detail) {
    const double s = size;
    const double r = std::max(2.0, 0.03 * s);
    Ellipse dot{0.68 * s, 0.38 * s, r, r, 0.0, 0.4};
    tgt_scene.ellipses.push_back(dot);
    out.has_detail = true;
    out.detail_x0 = std::max(0, static_cast<int>(dot.cx - r - 3));
    out.detail_x1 = std::min(size, static_cast<int>(dot.cx + r + 3));
    out.detail_y0 = std::max(0, static_cast<int>(dot.cy - r - 3));
    out.detail_y1 = std::min(size, static_cast<int>(dot.cy + r + 3));
  }
  out.target = tgt_scene.render(size);

  if (!zero_deform && ssim(out.reference, out.target) >= 0.95)
    throw std::runtime_error("gen_phantom: pair too similar (SSIM >= 0.95), construction margin violated");
  return out;
}

}  // namespace tdm
