#include "tdm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tdm {

CellVectorField stagger_average(const DisplacementField& v) {
  const int n1 = v.n1(), n2 = v.n2();
  CellVectorField out(n1, n2);
  const Array2d& v1 = v.v1();
  const Array2d& v2 = v.v2();
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const double left = (i > 0) ? v1(i - 1, j) : 0.0;
      const double right = (i < n1 - 1) ? v1(i, j) : 0.0;
      out.u1(i, j) = 0.5 * (left + right);
    }
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const double lo = (j > 0) ? v2(i, j - 1) : 0.0;
      const double hi = (j < n2 - 1) ? v2(i, j) : 0.0;
      out.u2(i, j) = 0.5 * (lo + hi);
    }
  return out;
}

DisplacementField stagger_average_adjoint(const CellVectorField& u) {
  const int n1 = u.n1(), n2 = u.n2();
  DisplacementField out(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1 - 1; ++i)
      out.v1()(i, j) = 0.5 * (u.u1(i, j) + u.u1(i + 1, j));
  for (int j = 0; j < n2 - 1; ++j)
    for (int i = 0; i < n1; ++i)
      out.v2()(i, j) = 0.5 * (u.u2(i, j) + u.u2(i, j + 1));
  return out;
}

namespace {

// Catmull-Rom weights and derivatives for fractional offset t in [0, 1].
inline void catmull_rom(double t, double w[4], double dw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = -0.5 * t3 + t2 - 0.5 * t;
  w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
  w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
  w[3] = 0.5 * t3 - 0.5 * t2;
  dw[0] = -1.5 * t2 + 2.0 * t - 0.5;
  dw[1] = 4.5 * t2 - 5.0 * t;
  dw[2] = -4.5 * t2 + 4.0 * t + 0.5;
  dw[3] = 1.5 * t2 - t;
}

struct Taps {
  int idx[4];
  double w[4];
  double dw[4];
  int count;  // 2 for bilinear, 4 for bicubic
};

// 1-D interpolation taps along an axis of length n at grid coordinate x
// (pixels at 1..n). Out-of-domain queries clamp to the boundary, where the
// interpolant is extended as a constant (derivative 0).
inline Taps axis_taps(double x, int n, Interp scheme) {
  Taps t{};
  const bool outside = (x < 1.0) || (x > static_cast<double>(n));
  const double xc = std::clamp(x, 1.0, static_cast<double>(n));
  int i0 = static_cast<int>(std::floor(xc - 1.0));
  i0 = std::clamp(i0, 0, n - 2);
  const double f = (xc - 1.0) - i0;
  if (scheme == Interp::bilinear) {
    t.count = 2;
    t.idx[0] = i0;
    t.idx[1] = i0 + 1;
    t.w[0] = 1.0 - f;
    t.w[1] = f;
    t.dw[0] = -1.0;
    t.dw[1] = 1.0;
  } else {
    t.count = 4;
    double w[4], dw[4];
    catmull_rom(f, w, dw);
    for (int k = 0; k < 4; ++k) {
      t.idx[k] = std::clamp(i0 - 1 + k, 0, n - 1);
      t.w[k] = w[k];
      t.dw[k] = dw[k];
    }
  }
  if (outside)
    for (int k = 0; k < 4; ++k) t.dw[k] = 0.0;
  return t;
}

}  // namespace

Image sample(const Image& I, const CellVectorField& points, Interp scheme) {
  const int m1 = points.n1(), m2 = points.n2();
  Image out(m1, m2);
  for (int j = 0; j < m2; ++j)
    for (int i = 0; i < m1; ++i) {
      const Taps tx = axis_taps(points.u1(i, j), I.n1(), scheme);
      const Taps ty = axis_taps(points.u2(i, j), I.n2(), scheme);
      double acc = 0.0;
      for (int b = 0; b < ty.count; ++b)
        for (int a = 0; a < tx.count; ++a)
          acc += tx.w[a] * ty.w[b] * I(tx.idx[a], ty.idx[b]);
      out(i, j) = acc;
    }
  return out;
}

SampleWithGrad sample_with_grad(const Image& I, const CellVectorField& points,
                                Interp scheme) {
  const int m1 = points.n1(), m2 = points.n2();
  SampleWithGrad r{Image(m1, m2), Array2d::Zero(m1, m2), Array2d::Zero(m1, m2)};
  for (int j = 0; j < m2; ++j)
    for (int i = 0; i < m1; ++i) {
      const Taps tx = axis_taps(points.u1(i, j), I.n1(), scheme);
      const Taps ty = axis_taps(points.u2(i, j), I.n2(), scheme);
      double val = 0.0, gx = 0.0, gy = 0.0;
      for (int b = 0; b < ty.count; ++b)
        for (int a = 0; a < tx.count; ++a) {
          const double pix = I(tx.idx[a], ty.idx[b]);
          val += tx.w[a] * ty.w[b] * pix;
          gx += tx.dw[a] * ty.w[b] * pix;
          gy += tx.w[a] * ty.dw[b] * pix;
        }
      r.value(i, j) = val;
      r.gx(i, j) = gx;
      r.gy(i, j) = gy;
    }
  return r;
}

Image sample_adjoint(const CellVectorField& points, const Image& y,
                     Interp scheme, int n1, int n2) {
  if (points.n1() != y.n1() || points.n2() != y.n2())
    throw std::invalid_argument("sample_adjoint: shape mismatch");
  Image out(n1, n2);
  for (int j = 0; j < points.n2(); ++j)
    for (int i = 0; i < points.n1(); ++i) {
      const Taps tx = axis_taps(points.u1(i, j), n1, scheme);
      const Taps ty = axis_taps(points.u2(i, j), n2, scheme);
      const double val = y(i, j);
      for (int b = 0; b < ty.count; ++b)
        for (int a = 0; a < tx.count; ++a)
          out(tx.idx[a], ty.idx[b]) += tx.w[a] * ty.w[b] * val;
    }
  return out;
}

CellVectorField identity_map(int n1, int n2) {
  CellVectorField id(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      id.u1(i, j) = i + 1.0;
      id.u2(i, j) = j + 1.0;
    }
  return id;
}

namespace {

CellVectorField warp_points(const DisplacementField& v) {
  CellVectorField p = identity_map(v.n1(), v.n2());
  const CellVectorField pv = stagger_average(v);
  p.u1 -= pv.u1;
  p.u2 -= pv.u2;
  return p;
}

}  // namespace

Image warp(const Image& I, const DisplacementField& v, Interp scheme) {
  if (I.n1() != v.n1() || I.n2() != v.n2())
    throw std::invalid_argument("warp: image/field shape mismatch");
  return sample(I, warp_points(v), scheme);
}

Image warp_adjoint(const Image& y, const DisplacementField& v, Interp scheme) {
  if (y.n1() != v.n1() || y.n2() != v.n2())
    throw std::invalid_argument("warp_adjoint: shape mismatch");
  return sample_adjoint(warp_points(v), y, scheme, v.n1(), v.n2());
}

CellVectorField compose_path(const DeformationPath& path, int upto) {
  if (upto < 0 || upto > path.K())
    throw std::invalid_argument("compose_path: k out of range");
  const int n1 = path.steps.front().n1(), n2 = path.steps.front().n2();
  CellVectorField psi = identity_map(n1, n2);
  for (int k = 0; k < upto; ++k) {
    const CellVectorField pv = stagger_average(path.steps[k]);
    const Image d1 = sample(Image(pv.u1), psi, Interp::bilinear);
    const Image d2 = sample(Image(pv.u2), psi, Interp::bilinear);
    psi.u1 += d1.array();
    psi.u2 += d2.array();
  }
  return psi;
}

WeightField jacobian_det(const CellVectorField& psi, double eps) {
  const int n1 = psi.n1(), n2 = psi.n2();
  auto d_x1 = [&](const Array2d& u, int i, int j) {
    if (i == 0) return u(1, j) - u(0, j);
    if (i == n1 - 1) return u(n1 - 1, j) - u(n1 - 2, j);
    return 0.5 * (u(i + 1, j) - u(i - 1, j));
  };
  auto d_x2 = [&](const Array2d& u, int i, int j) {
    if (j == 0) return u(i, 1) - u(i, 0);
    if (j == n2 - 1) return u(i, n2 - 1) - u(i, n2 - 2);
    return 0.5 * (u(i, j + 1) - u(i, j - 1));
  };
  WeightField out(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const double a = d_x1(psi.u1, i, j), b = d_x2(psi.u1, i, j);
      const double c = d_x1(psi.u2, i, j), d = d_x2(psi.u2, i, j);
      out.w(i, j) = std::max(a * d - b * c, eps);
    }
  return out;
}

Image scattered_resample(const Image& F, const CellVectorField& psi) {
  if (F.n1() != psi.n1() || F.n2() != psi.n2())
    throw std::invalid_argument("scattered_resample: shape mismatch");
  const int n1 = F.n1(), n2 = F.n2();

  const double ext1 = psi.u1.maxCoeff() - psi.u1.minCoeff();
  const double ext2 = psi.u2.maxCoeff() - psi.u2.minCoeff();
  if (ext1 < 1e-9 && ext2 < 1e-9)
    throw std::runtime_error("scattered_resample: singular map (all sample points coincide)");

  // Bin sample points on the pixel lattice for the ring search.
  std::vector<std::vector<int>> bins(static_cast<size_t>(n1) * n2);
  auto bin_of = [&](double x, double y) {
    const int bx = std::clamp(static_cast<int>(std::llround(x)) - 1, 0, n1 - 1);
    const int by = std::clamp(static_cast<int>(std::llround(y)) - 1, 0, n2 - 1);
    return by * n1 + bx;
  };
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      bins[bin_of(psi.u1(i, j), psi.u2(i, j))].push_back(j * n1 + i);

  const int max_ring = std::max(n1, n2);
  Image out(n1, n2);
  for (int qj = 0; qj < n2; ++qj)
    for (int qi = 0; qi < n1; ++qi) {
      const double qx = qi + 1.0, qy = qj + 1.0;
      double best_d2[4] = {1e300, 1e300, 1e300, 1e300};
      double best_f[4] = {0, 0, 0, 0};
      int found = 0;
      auto consider = [&](int lin) {
        const int pi = lin % n1, pj = lin / n1;
        const double dx = psi.u1(pi, pj) - qx, dy = psi.u2(pi, pj) - qy;
        const double d2 = dx * dx + dy * dy;
        if (d2 >= best_d2[3]) return;
        int pos = 3;
        while (pos > 0 && best_d2[pos - 1] > d2) {
          best_d2[pos] = best_d2[pos - 1];
          best_f[pos] = best_f[pos - 1];
          --pos;
        }
        best_d2[pos] = d2;
        best_f[pos] = F(pi, pj);
        if (found < 4) ++found;
      };
      for (int r = 0; r <= max_ring; ++r) {
        const int x0 = qi - r, x1 = qi + r, y0 = qj - r, y1 = qj + r;
        for (int by = std::max(0, y0); by <= std::min(n2 - 1, y1); ++by)
          for (int bx = std::max(0, x0); bx <= std::min(n1 - 1, x1); ++bx) {
            if (r > 0 && bx != x0 && bx != x1 && by != y0 && by != y1) continue;
            for (int lin : bins[static_cast<size_t>(by) * n1 + bx]) consider(lin);
          }
        // Points in ring r' >= r+1 are at distance >= r, so the best-4 set
        // is final once it is full and within that radius.
        if (found == 4 && best_d2[3] <= static_cast<double>(r) * r) break;
      }
      if (best_d2[0] < 1e-24) {
        out(qi, qj) = best_f[0];
        continue;
      }
      double wsum = 0.0, acc = 0.0;
      for (int k = 0; k < found; ++k) {
        const double w = 1.0 / best_d2[k];
        wsum += w;
        acc += w * best_f[k];
      }
      out(qi, qj) = acc / wsum;
    }
  return out;
}

namespace {

// Per-axis renormalized truncated Gaussian, sigma = 1, 5 taps.
void gaussian_pass(const Array2d& in, Array2d& out, bool along_x1) {
  static const double g[5] = {std::exp(-2.0), std::exp(-0.5), 1.0,
                              std::exp(-0.5), std::exp(-2.0)};
  const int n1 = static_cast<int>(in.rows()), n2 = static_cast<int>(in.cols());
  out.resize(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      double acc = 0.0, wsum = 0.0;
      for (int k = -2; k <= 2; ++k) {
        const int ii = along_x1 ? i + k : i;
        const int jj = along_x1 ? j : j + k;
        if (ii < 0 || ii >= n1 || jj < 0 || jj >= n2) continue;
        acc += g[k + 2] * in(ii, jj);
        wsum += g[k + 2];
      }
      out(i, j) = acc / wsum;
    }
}

}  // namespace

Image resize(const Image& I, int n1, int n2, Interp scheme) {
  CellVectorField pts(n1, n2);
  const double s1 = static_cast<double>(I.n1()) / n1;
  const double s2 = static_cast<double>(I.n2()) / n2;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      pts.u1(i, j) = (i + 0.5) * s1 + 0.5;
      pts.u2(i, j) = (j + 0.5) * s2 + 0.5;
    }
  return sample(I, pts, scheme);
}

Image gaussian_downsample(const Image& I) {
  if (I.n1() < 4 || I.n2() < 4)
    throw std::invalid_argument("gaussian_downsample: image too small");
  Array2d tmp, smooth;
  gaussian_pass(I.array(), tmp, true);
  gaussian_pass(tmp, smooth, false);
  const int m1 = (I.n1() + 1) / 2, m2 = (I.n2() + 1) / 2;
  return resize(Image(smooth), m1, m2, Interp::bilinear);
}

DisplacementField upsample_displacement(const DisplacementField& v,
                                        int n1, int n2) {
  const int m1 = v.n1(), m2 = v.n2();
  if (m1 != (n1 + 1) / 2 || m2 != (n2 + 1) / 2)
    throw std::invalid_argument("upsample_displacement: target is not ~2x source");

  const double s1 = static_cast<double>(m1) / n1;
  const double s2 = static_cast<double>(m2) / n2;
  const double scale1 = static_cast<double>(n1) / m1;
  const double scale2 = static_cast<double>(n2) / m2;

  // Normal direction: stored faces at 3/2..m-1/2, implicit zeros at the
  // boundary faces 1/2 and m+1/2. Tangential direction: clamped.
  auto interp_face = [](const Array2d& a, double fi, double fj,
                        bool normal_is_x1) {
    const int rows = static_cast<int>(a.rows()), cols = static_cast<int>(a.cols());
    const int ni = normal_is_x1 ? rows : cols;
    const int tj = normal_is_x1 ? cols : rows;
    double x = std::clamp(fi, -1.0, static_cast<double>(ni));
    double y = std::clamp(fj, 0.0, static_cast<double>(tj - 1));
    const int i0 = std::clamp(static_cast<int>(std::floor(x)), -1, ni - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor(y)), 0, tj - 2);
    const double fx = x - i0, fy = y - j0;
    auto val = [&](int p, int q) {
      if (p < 0 || p >= ni) return 0.0;
      return normal_is_x1 ? a(p, q) : a(q, p);
    };
    return (1 - fx) * (1 - fy) * val(i0, j0) + fx * (1 - fy) * val(i0 + 1, j0) +
           (1 - fx) * fy * val(i0, j0 + 1) + fx * fy * val(i0 + 1, j0 + 1);
  };

  DisplacementField out(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1 - 1; ++i) {
      const double xs = (i + 1.5 - 0.5) * s1 + 0.5;  // fine face -> coarse coord
      const double ys = (j + 1.0 - 0.5) * s2 + 0.5;
      out.v1()(i, j) = scale1 * interp_face(v.v1(), xs - 1.5, ys - 1.0, true);
    }
  for (int j = 0; j < n2 - 1; ++j)
    for (int i = 0; i < n1; ++i) {
      const double xs = (i + 1.0 - 0.5) * s1 + 0.5;
      const double ys = (j + 1.5 - 0.5) * s2 + 0.5;
      out.v2()(i, j) = scale2 * interp_face(v.v2(), ys - 1.5, xs - 1.0, false);
    }
  return out;
}

}  // namespace tdm
