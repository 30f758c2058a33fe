#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdm/multilevel.hpp"
#include "tdm/phantom.hpp"

namespace tdm {

// Everything needed to reproduce one experiment: parsed from a flat
// key = value config file (one key per line, '#' comments; unknown keys
// rejected) and echoed back canonically.
struct ExperimentSpec {
  std::string task = "ct";           // ct | superres | denoise
  std::string phantom = "ellipses";  // kind, or "file:<ref.pfm>,<target.pfm>"
  int size = 64;
  std::uint64_t phantom_seed = 1;

  int angles = 20;
  double angle_step = 0.0;  // 0: equispaced over [0, 180); else start at 0, step
  int rays = 0;             // 0: default 1.5 * size, even
  int factor = 4;           // superres

  double noise = 0.05;
  std::uint64_t noise_seed = 7;

  RunConfig run;
  int palm_K = 0;           // > 0 additionally runs PALM with this path length
  int palm_iters = 250;
  int palm_lev = 0;         // > 0 runs PALM coarse-to-fine

  bool baseline_l2tv = true;
  bool baseline_bicubic = true;  // only meaningful for superres
  double l2tv_alpha = 0.0;       // 0: reuse run.alpha

  std::string outdir = "out";
};

ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec parse_spec_file(const std::string& path);
std::string spec_echo(const ExperimentSpec& spec);
std::uint64_t spec_hash(const ExperimentSpec& spec);

struct MethodRow {
  std::string method;
  double ssim_val;
  double psnr_val;
  double detail_mse;  // NaN when the phantom has no added detail
  double runtime_sec;
};

struct ExperimentReport {
  std::vector<MethodRow> rows;
  PhantomPair phantom;
  std::string config_hash_hex;
  RunLog tdm_log;
  // CSV with the numeric columns formatted to full precision; runtime is
  // the only column allowed to differ between reruns.
  std::string csv() const;
};

// Forward-simulates data from the target, reconstructs with TDM-INV and the
// enabled baselines (same operator and noise realization), and writes all
// artifacts under spec.outdir (overridable by $TDMINV_OUTPUT_ROOT).
// write_files = false skips artifact emission (used by the grid search).
ExperimentReport run_experiment(const ExperimentSpec& spec, bool write_files = true);

// Writes only the inputs (phantom pair, measurement data, config echo), no
// reconstruction.
void simulate_data(const ExperimentSpec& spec);

struct GridSearchResult {
  double alpha, beta, reg_scale;
  double ssim_val, psnr_val;
  std::vector<std::string> table;  // CSV rows, one per grid cell
};

// Exhaustive search over the given grids, best cell by SSIM; ties broken by
// higher PSNR, then by lexicographic (alpha, beta, reg_scale).
GridSearchResult grid_search(const ExperimentSpec& spec,
                             const std::vector<double>& alphas,
                             const std::vector<double>& betas,
                             const std::vector<double>& reg_scales);

}  // namespace tdm
