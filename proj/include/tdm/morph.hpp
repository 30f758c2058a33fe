#pragma once

#include <vector>

#include "tdm/convex.hpp"
#include "tdm/grid.hpp"

namespace tdm {

// Substituted representation of an image path for a fixed deformation
// chain: F_k = I_k o psi_k, w_k = det(D psi_k) (clamped), psi_0 = id.
// F_K tracks the reference through psi_K and stays fixed during the inner
// alternation; `reference` keeps the original R for desubstitution.
struct SubstitutedPath {
  std::vector<Image> F;                // K+1 frames
  std::vector<WeightField> weights;    // w_1..w_K
  std::vector<CellVectorField> maps;   // psi_0..psi_K
  Image reference;

  int K() const { return static_cast<int>(F.size()) - 1; }
};

SubstitutedPath substitute(const ImagePath& I, const DeformationPath& v,
                           Interp scheme = Interp::bilinear);

// Closed-form minimizer of the weighted chain for fixed endpoints, applied
// pixelwise: F_k = (1 - t_k) F_0 + t_k F_K with
// t_k = (sum_{i<=k} 1/w_i) / (sum_{i<=K} 1/w_i), the solution of the
// tridiagonal stationarity system
// w_k (F_k - F_{k-1}) + w_{k+1} (F_k - F_{k+1}) = 0. No-op for K = 1.
SubstitutedPath interior_update(SubstitutedPath sub);

// The coupled objective of the inner alternation:
// beta sum_{k=0}^{K-1} sum_x w_{k+1} |F_k - F_{k+1}|^2
//   + 1/2 |A F_0 - B|^2 + alpha TV(F_0)
double coupled_objective(const SubstitutedPath& sub, const MeasurementOp& op,
                         const MeasurementData& B, double alpha, double beta);

// Block-coordinate descent on the coupled objective: interior frames by the
// closed form, F_0 by the weighted primal-dual solve (coupled to F_1
// through w_1). The objective is nonincreasing across half-steps.
SubstitutedPath inner_alternation(SubstitutedPath sub, const MeasurementOp& op,
                                  const MeasurementData& B, double alpha,
                                  double beta, const PDParams& pd,
                                  int max_inner = 10, double tol = 1e-5,
                                  std::vector<double>* objective_log = nullptr);

// Back to grid images: I_0 = F_0, I_k = scattered_resample(F_k, psi_k) for
// the interior, I_K = R unchanged.
ImagePath desubstitute(const SubstitutedPath& sub);

}  // namespace tdm
