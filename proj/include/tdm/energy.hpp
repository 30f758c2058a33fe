#pragma once

#include <functional>

#include "tdm/grid.hpp"
#include "tdm/image.hpp"
#include "tdm/operators.hpp"

namespace tdm {

// Model weights. The experiments tie lambda_e = mu = nu = 100 * eta and key
// the whole group by a single registration scale (the paper's lambda).
struct EnergyParams {
  double alpha = 0.05;     // TV weight
  double beta = 0.1;       // path-coupling weight
  double mu = 0.07;        // elastic shear weight
  double lambda_e = 0.07;  // elastic divergence weight
  double nu = 0.07;        // third-order weight
  double eta = 0.0007;     // zero-order displacement weight (inside D3)
  int K = 1;               // path steps

  static EnergyParams tied(double alpha, double beta, double reg_scale, int K) {
    EnergyParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.mu = p.lambda_e = p.nu = reg_scale;
    p.eta = reg_scale / 100.0;
    p.K = K;
    return p;
  }

  EnergyParams with_reg_scale(double s) const {
    EnergyParams p = *this;
    p.mu = p.lambda_e = p.nu = s;
    p.eta = s / 100.0;
    return p;
  }

  void validate() const;
};

// Isotropic discrete TV with forward differences, zero contribution from
// the last row/column.
double tv_value(const Image& I);

// Forward-difference gradient matching tv_value (last row/col zero) and its
// negative adjoint; shared with the primal-dual solver.
void tv_gradient(const Array2d& x, Array2d& gx, Array2d& gy);
void tv_divergence(const Array2d& p1, const Array2d& p2, Array2d& out);

struct ValueGrad {
  double value;
  DisplacementField grad;
};

// Linearized elastic potential on the staggered layout:
// S(v) = mu (|D1x1 v1|^2 + |v2 D2x2^T|^2 + 1/2 |v1 D1x2^T + D2x1 v2|^2)
//      + lambda_e/2 |D1x1 v1 + v2 D2x2^T|^2
// with implicit zero boundary-normal components.
ValueGrad elastic_value_grad(const DisplacementField& v, double mu,
                             double lambda_e);

// nu * D3(v) with D3 the third-order smoothness term
// sum_{i=0..3} |D^i_x1 v D^{3-i}_x2|^2 (both components) + eta |v|^2;
// first-order factors are forward differences, second/third order central
// differences with zero-padded ends. Needs at least 7 grid points per axis.
ValueGrad d3_value_grad(const DisplacementField& v, double nu, double eta);

struct RegistrationEval {
  double value;
  DisplacementField grad;
  // Matrix-free SPD Gauss-Newton operator: 2 J^T J from the data term plus
  // the exact Hessian of the quadratic regularizers.
  std::function<DisplacementField(const DisplacementField&)> gn_apply;
};

// R(v; I_a, I_b) = S(v) + nu D3(v) + sum_x |I_a(x - Pv(x)) - I_b(x)|^2
RegistrationEval registration_energy(const DisplacementField& v, const Image& Ia,
                                     const Image& Ib, const EnergyParams& p,
                                     Interp scheme = Interp::bilinear);

// Value-only evaluation (skips gradient assembly for line searches).
double registration_value(const DisplacementField& v, const Image& Ia,
                          const Image& Ib, const EnergyParams& p,
                          Interp scheme = Interp::bilinear);

// F(I, v) = sum_k [ S(v_k) + nu D3(v_k) + |warp(I_k, v_k) - I_{k+1}|^2 ]
double path_energy(const ImagePath& I, const DeformationPath& v,
                   const EnergyParams& p, Interp scheme = Interp::bilinear);

// J = 1/2 |A I_0 - B|^2 + alpha TV(I_0) + beta F(I, v)
double full_objective(const ImagePath& I, const DeformationPath& v,
                      const MeasurementOp& op, const MeasurementData& B,
                      const EnergyParams& p, Interp scheme = Interp::bilinear);

}  // namespace tdm
