#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tdm/convex.hpp"
#include "tdm/energy.hpp"
#include "tdm/morph.hpp"
#include "tdm/registration.hpp"

namespace tdm {

struct Level {
  Image R;
  MeasurementData B;
  std::shared_ptr<const MeasurementOp> A;
  int ktilde = 0;  // frames inserted per pair when this level is entered
};

struct LevelStack {
  std::vector<Level> levels;  // [0] finest .. [lev] coarsest

  int lev() const { return static_cast<int>(levels.size()) - 1; }
};

struct RunConfig {
  int lev = 3;
  double alpha = 0.05;
  double beta = 0.1;
  double reg_scale = 0.07;       // the experiments' lambda (= mu = nu = 100 eta)
  std::vector<int> ktilde;       // per level; empty selects {lev-1: 2, lev-2: 1}
  int outer_iters = 5;
  double outer_tol = 1e-4;
  int inner_iters = 10;
  double inner_tol = 1e-5;
  double level_scale_factor = 0.7;  // reg_scale multiplier per finer level
  PDParams pd;
  RegParams reg;
  Interp scheme = Interp::bilinear;
  std::uint64_t seed = 0;

  std::vector<int> ktilde_schedule() const;
  void validate() const;
};

struct OuterRow {
  int level;
  int outer;
  double objective;
};

struct LevelRow {
  int level;
  int n1, n2, K;
  double ssim_gt;  // NaN when no ground truth / grid too small
  double psnr_gt;
};

struct RunLog {
  std::vector<OuterRow> outer;
  std::vector<LevelRow> levels;
};

struct RunResult {
  ImagePath path;
  DeformationPath fields;
  RunLog log;
};

// Reference and data pyramids; operator/data coarsening is delegated to the
// operator's own rule. Requires at least 8 px per axis at the coarsest level.
LevelStack build_stack(const Image& R, const MeasurementData& B,
                       std::shared_ptr<const MeasurementOp> op, int lev,
                       const std::vector<int>& ktilde);

// Coarsest-level start: L2-TV reconstruction, then one registration from
// the reference toward it.
std::pair<Image, DisplacementField> init_coarse(const LevelStack& stack,
                                                const RunConfig& cfg);

// Frames sampled from R along fractions of the displacement:
// frame k = R(x + (k/ktilde) Pv(x)), k = 0..ktilde. Frame 0 is R itself.
ImagePath seed_path(const Image& R, const DisplacementField& v, int ktilde);

// Warm start shared by the multilevel driver and PALM: the seeded frames
// reversed so the chain runs from the reconstruction (frame 0 := I0) to the
// reference (frame K := R exactly), with per-step fields -v/K. v is the
// field registering R toward I0.
std::pair<std::vector<Image>, std::vector<DisplacementField>> seeded_initial_path(
    const Image& R, const Image& I0, const DisplacementField& v, int K);

struct PathState {
  std::vector<Image> frames;
  std::vector<DisplacementField> fields;
};

// Prolongs frames and fields to the next finer grid and inserts `ktilde`
// intermediate frames between every consecutive pair, sampling the later
// frame along fractions of the pairwise field. The last frame is pinned to
// R_fine bitwise.
PathState prolong_path_state(const PathState& st, const Image& R_fine, int n1,
                             int n2, int ktilde);

// The full coarse-to-fine driver. `ground_truth` (optional, finest grid)
// only feeds the per-level metrics log.
RunResult run_tdm_inv(const Image& R, const MeasurementData& B,
                      std::shared_ptr<const MeasurementOp> op,
                      const RunConfig& cfg, const Image* ground_truth = nullptr);

void write_run_log_csv(const std::string& path, const RunLog& log);

}  // namespace tdm
