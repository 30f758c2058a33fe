#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tdm/convex.hpp"
#include "tdm/energy.hpp"
#include "tdm/registration.hpp"

namespace tdm {

// PALM splitting for the same objective the alternating scheme minimizes:
// G1(I) = alpha TV(I_0) + 1/2 |A I_0 - B|^2, G2(v) = 0, and H the smooth
// coupling beta * F(I, v). tau and sigma are inverse step sizes (Lipschitz
// surrogates) grown by backtracking until the block surrogate decrease
// holds.
struct PalmParams {
  double tau0 = 1.0;
  double sigma0 = 1.0;
  double backtrack = 2.0;  // surrogate growth factor, > 1
  double relax = 0.95;     // gentle per-step decay so steps can recover
  int max_backtracks = 60;
  PDParams prox_pd;        // inner primal-dual solve for prox of G1
};

struct PalmState {
  ImagePath images;
  DeformationPath fields;
  double tau;
  double sigma;
};

struct PalmGrads {
  std::vector<Image> images;  // entry K is identically zero (constraint)
  DeformationPath fields;
};

// Exact gradients of H = beta * F(I, v) with respect to both blocks.
PalmGrads grad_H(const ImagePath& I, const DeformationPath& v,
                 const EnergyParams& p, Interp scheme = Interp::bilinear);

// One PALM sweep: proximal-linearized image block (prox of G1 acting on the
// I_0 component only), then an explicit gradient step on the fields.
PalmState palm_step(PalmState state, const MeasurementOp& op,
                    const MeasurementData& B, const EnergyParams& p,
                    const PalmParams& palm, Interp scheme = Interp::bilinear);

struct PalmConfig {
  double alpha = 0.05;
  double beta = 0.1;
  double reg_scale = 0.07;
  int K = 4;            // path length (single-level mode)
  int max_iters = 300;  // PALM sweeps (per level in multilevel mode)
  double tol = 1e-7;    // relative objective decrease
  bool seeded_init = true;  // L2-TV + one registration + seeded frames

  // lev >= 1 runs PALM coarse-to-fine on the same level stack as the
  // alternating driver (path length then follows the ktilde schedule).
  int lev = 0;
  std::vector<int> ktilde;          // empty: {lev-1: 2, lev-2: 1}
  double level_scale_factor = 0.7;  // reg_scale annealing per finer level

  PalmParams palm;
  PDParams pd;
  RegParams reg;
  Interp scheme = Interp::bilinear;
  std::uint64_t seed = 0;
};

struct PalmResult {
  ImagePath path;
  DeformationPath fields;
  // J per iteration (finest level in multilevel mode), leading with the
  // start value.
  std::vector<double> objective;
};

PalmResult run_palm(const Image& R, const MeasurementData& B,
                    std::shared_ptr<const MeasurementOp> op, const PalmConfig& cfg);

}  // namespace tdm
