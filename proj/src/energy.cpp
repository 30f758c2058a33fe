#include "tdm/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace tdm {

void EnergyParams::validate() const {
  if (!(alpha > 0) || !(beta > 0) || !(nu > 0))
    throw std::invalid_argument("EnergyParams: alpha, beta, nu must be > 0");
  if (mu < 0 || lambda_e < 0 || eta < 0)
    throw std::invalid_argument("EnergyParams: negative weight");
  if (K < 1) throw std::invalid_argument("EnergyParams: K must be >= 1");
  if (!std::isfinite(alpha + beta + mu + lambda_e + nu + eta))
    throw std::invalid_argument("EnergyParams: non-finite weight");
}

double tv_value(const Image& I) {
  const int n1 = I.n1(), n2 = I.n2();
  double acc = 0.0;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const double dx = (i < n1 - 1) ? I(i + 1, j) - I(i, j) : 0.0;
      const double dy = (j < n2 - 1) ? I(i, j + 1) - I(i, j) : 0.0;
      acc += std::sqrt(dx * dx + dy * dy);
    }
  return acc;
}

void tv_gradient(const Array2d& x, Array2d& gx, Array2d& gy) {
  const auto n1 = x.rows(), n2 = x.cols();
  gx = Array2d::Zero(n1, n2);
  gy = Array2d::Zero(n1, n2);
  gx.topRows(n1 - 1) = x.bottomRows(n1 - 1) - x.topRows(n1 - 1);
  gy.leftCols(n2 - 1) = x.rightCols(n2 - 1) - x.leftCols(n2 - 1);
}

void tv_divergence(const Array2d& p1, const Array2d& p2, Array2d& out) {
  const auto n1 = p1.rows(), n2 = p1.cols();
  out = Array2d::Zero(n1, n2);
  out.topRows(n1 - 1) += p1.topRows(n1 - 1);
  out.bottomRows(n1 - 1) -= p1.topRows(n1 - 1);
  out.leftCols(n2 - 1) += p2.leftCols(n2 - 1);
  out.rightCols(n2 - 1) -= p2.leftCols(n2 - 1);
}

namespace {

// Staggered divergence parts: forward differences against the implicit
// zero boundary faces, mapping face values to the n cells of that axis.
Array2d div_part_x1(const Array2d& v1) {
  const auto n1 = v1.rows() + 1, n2 = v1.cols();
  Array2d out = Array2d::Zero(n1, n2);
  out.topRows(n1 - 1) += v1;
  out.bottomRows(n1 - 1) -= v1;
  return out;
}

Array2d div_part_x1_adj(const Array2d& u) {
  return u.topRows(u.rows() - 1) - u.bottomRows(u.rows() - 1);
}

Array2d div_part_x2(const Array2d& v2) {
  const auto n1 = v2.rows(), n2 = v2.cols() + 1;
  Array2d out = Array2d::Zero(n1, n2);
  out.leftCols(n2 - 1) += v2;
  out.rightCols(n2 - 1) -= v2;
  return out;
}

Array2d div_part_x2_adj(const Array2d& u) {
  return u.leftCols(u.cols() - 1) - u.rightCols(u.cols() - 1);
}

// Plain forward difference across columns (x2), shrinking by one.
Array2d fdiff_cols(const Array2d& a) {
  return a.rightCols(a.cols() - 1) - a.leftCols(a.cols() - 1);
}

Array2d fdiff_cols_adj(const Array2d& m) {
  Array2d out = Array2d::Zero(m.rows(), m.cols() + 1);
  out.rightCols(m.cols()) += m;
  out.leftCols(m.cols()) -= m;
  return out;
}

Array2d fdiff_rows(const Array2d& a) {
  return a.bottomRows(a.rows() - 1) - a.topRows(a.rows() - 1);
}

Array2d fdiff_rows_adj(const Array2d& m) {
  Array2d out = Array2d::Zero(m.rows() + 1, m.cols());
  out.bottomRows(m.rows()) += m;
  out.topRows(m.rows()) -= m;
  return out;
}

}  // namespace

ValueGrad elastic_value_grad(const DisplacementField& v, double mu,
                             double lambda_e) {
  const Array2d d11 = div_part_x1(v.v1());
  const Array2d d22 = div_part_x2(v.v2());
  const Array2d mix = fdiff_cols(v.v1()) + fdiff_rows(v.v2());
  const Array2d div = d11 + d22;

  const double value = mu * ((d11 * d11).sum() + (d22 * d22).sum() +
                             0.5 * (mix * mix).sum()) +
                       0.5 * lambda_e * (div * div).sum();

  DisplacementField grad(v.n1(), v.n2());
  grad.v1() = 2.0 * mu * div_part_x1_adj(d11) + mu * fdiff_cols_adj(mix) +
              lambda_e * div_part_x1_adj(div);
  grad.v2() = 2.0 * mu * div_part_x2_adj(d22) + mu * fdiff_rows_adj(mix) +
              lambda_e * div_part_x2_adj(div);
  return {value, std::move(grad)};
}

namespace {

// Square per-axis stencils used by D3: order 1 forward (last entry 0),
// orders 2 and 3 central with zero-padded ends. C2 is symmetric and C3
// antisymmetric, which fixes their adjoints.
Array2d stencil_rows(const Array2d& a, int order) {
  const Eigen::Index n = a.rows(), m = a.cols();
  Array2d out = Array2d::Zero(n, m);
  auto at = [&](Eigen::Index i, Eigen::Index j) {
    return (i >= 0 && i < n) ? a(i, j) : 0.0;
  };
  switch (order) {
    case 0:
      return a;
    case 1:
      out.topRows(n - 1) = a.bottomRows(n - 1) - a.topRows(n - 1);
      return out;
    case 2:
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          out(i, j) = at(i + 1, j) - 2.0 * a(i, j) + at(i - 1, j);
      return out;
    case 3:
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          out(i, j) = 0.5 * (at(i + 2, j) - 2.0 * at(i + 1, j) +
                             2.0 * at(i - 1, j) - at(i - 2, j));
      return out;
    default:
      throw std::logic_error("stencil_rows: bad order");
  }
}

Array2d stencil_rows_adj(const Array2d& a, int order) {
  switch (order) {
    case 0:
    case 2:
      return stencil_rows(a, order);  // identity / symmetric
    case 3:
      return -stencil_rows(a, 3);  // antisymmetric
    case 1: {
      const auto n = a.rows();
      Array2d out = Array2d::Zero(n, a.cols());
      out.topRows(n - 1) -= a.topRows(n - 1);
      out.bottomRows(n - 1) += a.topRows(n - 1);
      return out;
    }
    default:
      throw std::logic_error("stencil_rows_adj: bad order");
  }
}

Array2d stencil_cols(const Array2d& a, int order) {
  return stencil_rows(a.transpose(), order).transpose();
}

Array2d stencil_cols_adj(const Array2d& a, int order) {
  return stencil_rows_adj(a.transpose(), order).transpose();
}

void d3_component(const Array2d& v, double& value, Array2d& grad) {
  for (int i = 0; i <= 3; ++i) {
    const Array2d t = stencil_cols(stencil_rows(v, i), 3 - i);
    value += (t * t).sum();
    grad += 2.0 * stencil_rows_adj(stencil_cols_adj(t, 3 - i), i);
  }
}

}  // namespace

ValueGrad d3_value_grad(const DisplacementField& v, double nu, double eta) {
  if (v.n1() < 7 || v.n2() < 7)
    throw std::invalid_argument("d3_value_grad: grid too small for D3 (needs >= 7)");
  double value = 0.0;
  Array2d g1 = Array2d::Zero(v.v1().rows(), v.v1().cols());
  Array2d g2 = Array2d::Zero(v.v2().rows(), v.v2().cols());
  d3_component(v.v1(), value, g1);
  d3_component(v.v2(), value, g2);
  value += eta * ((v.v1() * v.v1()).sum() + (v.v2() * v.v2()).sum());
  g1 += 2.0 * eta * v.v1();
  g2 += 2.0 * eta * v.v2();

  DisplacementField grad(g1 * nu, g2 * nu);
  return {nu * value, std::move(grad)};
}

namespace {

CellVectorField warp_query_points(const DisplacementField& v) {
  CellVectorField p = identity_map(v.n1(), v.n2());
  const CellVectorField pv = stagger_average(v);
  p.u1 -= pv.u1;
  p.u2 -= pv.u2;
  return p;
}

}  // namespace

RegistrationEval registration_energy(const DisplacementField& v, const Image& Ia,
                                     const Image& Ib, const EnergyParams& p,
                                     Interp scheme) {
  if (Ia.n1() != v.n1() || Ia.n2() != v.n2() || !Ia.same_shape(Ib))
    throw std::invalid_argument("registration_energy: shape mismatch");

  const ValueGrad el = elastic_value_grad(v, p.mu, p.lambda_e);
  const ValueGrad d3 = d3_value_grad(v, p.nu, p.eta);

  const SampleWithGrad s = sample_with_grad(Ia, warp_query_points(v), scheme);
  const Array2d r = s.value.array() - Ib.array();
  const double value = el.value + d3.value + (r * r).sum();

  // Chain rule through the warp: d/d(Pv) of the residual is -grad(I_a) at
  // the warped points, pulled back to the staggered layout by P^T.
  CellVectorField cell(-2.0 * (s.gx * r), -2.0 * (s.gy * r));
  DisplacementField grad = stagger_average_adjoint(cell);
  grad += el.grad;
  grad += d3.grad;

  const Array2d gx = s.gx, gy = s.gy;
  const double mu = p.mu, lambda_e = p.lambda_e, nu = p.nu, eta = p.eta;
  auto gn = [gx, gy, mu, lambda_e, nu, eta](const DisplacementField& d) {
    const CellVectorField pd = stagger_average(d);
    const Array2d sdir = gx * pd.u1 + gy * pd.u2;
    DisplacementField out =
        stagger_average_adjoint(CellVectorField(2.0 * (gx * sdir), 2.0 * (gy * sdir)));
    out += elastic_value_grad(d, mu, lambda_e).grad;
    out += d3_value_grad(d, nu, eta).grad;
    return out;
  };

  return {value, std::move(grad), std::move(gn)};
}

double registration_value(const DisplacementField& v, const Image& Ia,
                          const Image& Ib, const EnergyParams& p, Interp scheme) {
  if (Ia.n1() != v.n1() || Ia.n2() != v.n2() || !Ia.same_shape(Ib))
    throw std::invalid_argument("registration_value: shape mismatch");
  const double el = elastic_value_grad(v, p.mu, p.lambda_e).value;
  const double d3 = d3_value_grad(v, p.nu, p.eta).value;
  const Array2d r = warp(Ia, v, scheme).array() - Ib.array();
  return el + d3 + (r * r).sum();
}

double path_energy(const ImagePath& I, const DeformationPath& v,
                   const EnergyParams& p, Interp scheme) {
  if (v.K() != I.K())
    throw std::invalid_argument("path_energy: K fields need K+1 frames");
  double acc = 0.0;
  for (int k = 0; k < v.K(); ++k)
    acc += registration_value(v.steps[k], I.frame(k), I.frames()[k + 1], p, scheme);
  return acc;
}

double full_objective(const ImagePath& I, const DeformationPath& v,
                      const MeasurementOp& op, const MeasurementData& B,
                      const EnergyParams& p, Interp scheme) {
  const MeasurementData ax = op.apply(I.frame(0));
  const Array2d r = ax.values - B.values;
  return 0.5 * (r * r).sum() + p.alpha * tv_value(I.frame(0)) +
         p.beta * path_energy(I, v, p, scheme);
}

}  // namespace tdm
