#include "tdm/multilevel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tdm/metrics.hpp"

namespace tdm {

std::vector<int> RunConfig::ktilde_schedule() const {
  if (!ktilde.empty()) {
    if (static_cast<int>(ktilde.size()) != lev)
      throw std::invalid_argument("RunConfig: ktilde schedule needs lev entries");
    return ktilde;
  }
  std::vector<int> k(static_cast<size_t>(lev), 0);
  if (lev >= 1) k[static_cast<size_t>(lev - 1)] = 2;
  if (lev >= 2) k[static_cast<size_t>(lev - 2)] = 1;
  return k;
}

void RunConfig::validate() const {
  if (lev < 1) throw std::invalid_argument("RunConfig: lev must be >= 1");
  for (int k : ktilde)
    if (k < 0) throw std::invalid_argument("RunConfig: ktilde entries must be >= 0");
  if (outer_iters < 1 || inner_iters < 1)
    throw std::invalid_argument("RunConfig: iteration counts must be >= 1");
  EnergyParams::tied(alpha, beta, reg_scale, 1).validate();
  reg.validate();
}

LevelStack build_stack(const Image& R, const MeasurementData& B,
                       std::shared_ptr<const MeasurementOp> op, int lev,
                       const std::vector<int>& ktilde) {
  int m1 = R.n1(), m2 = R.n2();
  for (int l = 0; l < lev; ++l) {
    m1 = (m1 + 1) / 2;
    m2 = (m2 + 1) / 2;
  }
  if (m1 < 8 || m2 < 8)
    throw std::invalid_argument("build_stack: coarsest level below 8 px");

  LevelStack stack;
  stack.levels.resize(static_cast<size_t>(lev) + 1);
  stack.levels[0] = {R, B, std::move(op), 0};
  for (int l = 1; l <= lev; ++l) {
    const Level& prev = stack.levels[static_cast<size_t>(l - 1)];
    auto [cop, cdata] = prev.A->coarsen(prev.B);
    stack.levels[static_cast<size_t>(l)] = {gaussian_downsample(prev.R),
                                            std::move(cdata), std::move(cop), 0};
  }
  for (int l = 0; l < lev && l < static_cast<int>(ktilde.size()); ++l)
    stack.levels[static_cast<size_t>(l)].ktilde = ktilde[static_cast<size_t>(l)];
  return stack;
}

std::pair<Image, DisplacementField> init_coarse(const LevelStack& stack,
                                                const RunConfig& cfg) {
  const Level& coarse = stack.levels.back();
  const auto [n1, n2] = coarse.A->grid_shape();
  const Image I0 = solve_l2tv(*coarse.A, coarse.B, cfg.alpha, Image(n1, n2), cfg.pd);
  const EnergyParams params = EnergyParams::tied(cfg.alpha, cfg.beta, cfg.reg_scale, 1);
  const DisplacementField v = register_pair(coarse.R, I0, DisplacementField(n1, n2),
                                            params, cfg.reg, cfg.scheme);
  return {I0, v};
}

ImagePath seed_path(const Image& R, const DisplacementField& v, int ktilde) {
  if (ktilde < 1) throw std::invalid_argument("seed_path: ktilde must be >= 1");
  if (R.n1() != v.n1() || R.n2() != v.n2())
    throw std::invalid_argument("seed_path: shape mismatch");
  const CellVectorField pv = stagger_average(v);
  const CellVectorField id = identity_map(R.n1(), R.n2());
  std::vector<Image> frames;
  frames.reserve(static_cast<size_t>(ktilde) + 1);
  for (int k = 0; k <= ktilde; ++k) {
    const double s = static_cast<double>(k) / ktilde;
    CellVectorField pts(R.n1(), R.n2());
    pts.u1 = id.u1 + s * pv.u1;
    pts.u2 = id.u2 + s * pv.u2;
    frames.push_back(sample(R, pts, Interp::bilinear));
  }
  return ImagePath(std::move(frames));
}

std::pair<std::vector<Image>, std::vector<DisplacementField>> seeded_initial_path(
    const Image& R, const Image& I0, const DisplacementField& v, int K) {
  std::vector<Image> frames;
  std::vector<DisplacementField> fields;
  if (K < 2) {
    frames = {I0, R};
    fields = {-1.0 * v};
    return {std::move(frames), std::move(fields)};
  }
  // The frames R(x - s Pv(x)) run from the reconstruction end (s = 1,
  // replaced by I0) to the reference (s = 0, R exactly): the seeded
  // sequence reversed and anchored at both ends.
  const ImagePath seeded = seed_path(R, -1.0 * v, K);
  frames.resize(static_cast<size_t>(K) + 1);
  for (int k = 0; k <= K; ++k)
    frames[static_cast<size_t>(k)] = seeded.frames()[static_cast<size_t>(K - k)];
  frames.front() = I0;
  frames.back() = R;
  fields.assign(static_cast<size_t>(K), (-1.0 / K) * v);
  return {std::move(frames), std::move(fields)};
}

PathState prolong_path_state(const PathState& st, const Image& R_fine, int n1,
                             int n2, int ktilde) {
  PathState out;
  std::vector<Image> frames;
  frames.reserve(st.frames.size());
  for (const Image& f : st.frames) frames.push_back(resize(f, n1, n2, Interp::bilinear));
  frames.back() = R_fine;

  std::vector<DisplacementField> fields;
  fields.reserve(st.fields.size());
  for (const DisplacementField& v : st.fields)
    fields.push_back(upsample_displacement(v, n1, n2));

  if (ktilde < 1) {
    out.frames = std::move(frames);
    out.fields = std::move(fields);
    return out;
  }

  const int pieces = ktilde + 1;
  for (size_t j = 0; j + 1 < frames.size(); ++j) {
    const ImagePath seeded = seed_path(frames[j + 1], fields[j], pieces);
    out.frames.push_back(frames[j]);
    for (int m = ktilde; m >= 1; --m)
      out.frames.push_back(seeded.frames()[static_cast<size_t>(m)]);
    const DisplacementField sub = (1.0 / pieces) * fields[j];
    for (int m = 0; m < pieces; ++m) out.fields.push_back(sub);
  }
  out.frames.push_back(frames.back());
  return out;
}

namespace {

PathState initial_path(const Image& R_l, const Image& I0_l,
                       const DisplacementField& v_l, int ktilde) {
  PathState st;
  auto seeded = seeded_initial_path(R_l, I0_l, v_l, std::max(ktilde, 1));
  st.frames = std::move(seeded.first);
  st.fields = std::move(seeded.second);
  return st;
}

Image downsample_times(Image img, int times) {
  for (int t = 0; t < times; ++t) img = gaussian_downsample(img);
  return img;
}

}  // namespace

RunResult run_tdm_inv(const Image& R, const MeasurementData& B,
                      std::shared_ptr<const MeasurementOp> op,
                      const RunConfig& cfg, const Image* ground_truth) {
  cfg.validate();
  const auto schedule = cfg.ktilde_schedule();
  const LevelStack stack = build_stack(R, B, std::move(op), cfg.lev, schedule);

  auto [I0_coarse, v_coarse] = init_coarse(stack, cfg);

  RunLog log;
  PathState st;
  for (int l = cfg.lev - 1; l >= 0; --l) {
    const Level& level = stack.levels[static_cast<size_t>(l)];
    const auto [n1, n2] = level.A->grid_shape();
    if (l == cfg.lev - 1) {
      const Image I0_l = resize(I0_coarse, n1, n2, Interp::bilinear);
      const DisplacementField v_l = upsample_displacement(v_coarse, n1, n2);
      st = initial_path(level.R, I0_l, v_l, level.ktilde);
    } else {
      st = prolong_path_state(st, level.R, n1, n2, level.ktilde);
    }

    const int K = static_cast<int>(st.fields.size());
    const double scale = cfg.reg_scale * std::pow(cfg.level_scale_factor, cfg.lev - l);
    const EnergyParams params = EnergyParams::tied(cfg.alpha, cfg.beta, scale, K);

    double prev = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < cfg.outer_iters; ++outer) {
      for (int k = 0; k < K; ++k)
        st.fields[static_cast<size_t>(k)] = register_pair(
            st.frames[static_cast<size_t>(k)], st.frames[static_cast<size_t>(k + 1)],
            st.fields[static_cast<size_t>(k)], params, cfg.reg, cfg.scheme);

      ImagePath path(st.frames);
      DeformationPath fields(st.fields);
      const double J_reg = full_objective(path, fields, *level.A, level.B, params,
                                          cfg.scheme);

      SubstitutedPath sub = substitute(path, fields, cfg.scheme);
      sub = inner_alternation(std::move(sub), *level.A, level.B, cfg.alpha,
                              cfg.beta, cfg.pd, cfg.inner_iters, cfg.inner_tol);

      // The alternation is an exact descent in the substituted variables,
      // but scattered resampling back to grid images carries interpolation
      // error. Accept the candidate only if the true objective does not
      // increase; the frame-0 component always transfers exactly (psi_0 = id).
      ImagePath candidate = desubstitute(sub);
      double J = full_objective(candidate, fields, *level.A, level.B, params,
                                cfg.scheme);
      if (J > J_reg) {
        ImagePath partial = path;
        partial.set_frame(0, sub.F.front());
        const double Jp = full_objective(partial, fields, *level.A, level.B,
                                         params, cfg.scheme);
        if (Jp <= J_reg) {
          candidate = std::move(partial);
          J = Jp;
        } else {
          candidate = std::move(path);
          J = J_reg;
        }
      }
      for (int k = 0; k < K; ++k) st.frames[static_cast<size_t>(k)] = candidate.frame(k);

      if (!std::isfinite(J) || !candidate.frame(0).all_finite()) {
        std::ostringstream os;
        os << "run_tdm_inv: non-finite state at level " << l << " outer " << outer;
        throw std::runtime_error(os.str());
      }
      log.outer.push_back({l, outer, J});
      if (outer >= 1 && prev - J < cfg.outer_tol * (std::abs(prev) + 1e-30)) break;
      prev = J;
    }

    double s = std::numeric_limits<double>::quiet_NaN();
    double p = std::numeric_limits<double>::quiet_NaN();
    if (ground_truth) {
      const Image gt_l = downsample_times(*ground_truth, l);
      if (gt_l.n1() == n1 && gt_l.n2() == n2) {
        p = psnr(st.frames.front(), gt_l);
        if (n1 >= 11 && n2 >= 11) s = ssim(st.frames.front(), gt_l);
      }
    }
    log.levels.push_back({l, n1, n2, K, s, p});
  }

  return {ImagePath(st.frames), DeformationPath(st.fields), std::move(log)};
}

void write_run_log_csv(const std::string& path, const RunLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_run_log_csv: cannot open " + path);
  out.precision(17);
  out << "kind,level,outer_or_K,objective_or_ssim,psnr\n";
  for (const auto& r : log.outer)
    out << "outer," << r.level << "," << r.outer << "," << r.objective << ",\n";
  for (const auto& r : log.levels)
    out << "level," << r.level << "," << r.K << "," << r.ssim_gt << "," << r.psnr_gt
        << "\n";
}

}  // namespace tdm
