#pragma once

#include <string>
#include <vector>

#include "tdm/image.hpp"
#include "tdm/operators.hpp"

namespace tdm {

// Primal-dual step configuration. tau/sigma <= 0 selects the automatic
// choice tau = sigma = 0.99 / L with L a power-method estimate of the
// stacked operator (grad; A); explicitly supplied steps must satisfy
// tau * sigma * L^2 <= 1.
struct PDParams {
  double tau = 0.0;
  double sigma = 0.0;
  int max_iters = 2000;
  double tol = 1e-6;       // relative primal decrease over a 10-iteration window
  double theta = 1.0;      // over-relaxation
  bool verbose = false;    // write iter,primal_energy,dual_residual CSV
  std::string log_path;
};

// Pointwise projection of a TV dual field onto the l2 ball of radius alpha.
void prox_tv_dual(Array2d& p1, Array2d& p2, double alpha);

// argmin_x 1/2 |A x - B|^2 + alpha TV(x), Chambolle-Pock with duals for
// both the TV and the data term. The candidate solution is the best-energy
// iterate seen so far, so the result is never worse than x0. `energies`
// (optional) receives the candidate's primal energy per iteration.
Image solve_l2tv(const MeasurementOp& op, const MeasurementData& B, double alpha,
                 const Image& x0, const PDParams& pd,
                 std::vector<double>* energies = nullptr);

// argmin_x beta sum_x w1 |x - F1|^2 + 1/2 |A x - B|^2 + alpha TV(x); the
// strongly convex coupling is absorbed into the primal resolvent pointwise.
Image solve_weighted_step(const MeasurementOp& op, const MeasurementData& B,
                          const Image& F1, const WeightField& w1, double alpha,
                          double beta, const Image& x0, const PDParams& pd,
                          std::vector<double>* energies = nullptr);

}  // namespace tdm
