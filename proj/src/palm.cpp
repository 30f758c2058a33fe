#include "tdm/palm.hpp"

#include <cmath>
#include <stdexcept>

#include "tdm/multilevel.hpp"

namespace tdm {

namespace {

CellVectorField warp_query_points(const DisplacementField& v) {
  CellVectorField p = identity_map(v.n1(), v.n2());
  const CellVectorField pv = stagger_average(v);
  p.u1 -= pv.u1;
  p.u2 -= pv.u2;
  return p;
}

double smooth_H(const ImagePath& I, const DeformationPath& v,
                const EnergyParams& p, Interp scheme) {
  return p.beta * path_energy(I, v, p, scheme);
}

}  // namespace

PalmGrads grad_H(const ImagePath& I, const DeformationPath& v,
                 const EnergyParams& p, Interp scheme) {
  if (v.K() != I.K()) throw std::invalid_argument("grad_H: path length mismatch");
  const int K = v.K();
  const int n1 = I.frame(0).n1(), n2 = I.frame(0).n2();

  PalmGrads g;
  g.images.assign(static_cast<size_t>(K) + 1, Image(n1, n2));
  std::vector<DisplacementField> gv;
  gv.reserve(static_cast<size_t>(K));

  for (int k = 0; k < K; ++k) {
    const DisplacementField& vk = v.steps[static_cast<size_t>(k)];
    const SampleWithGrad s = sample_with_grad(I.frame(k), warp_query_points(vk), scheme);
    const Array2d r = s.value.array() - I.frames()[static_cast<size_t>(k + 1)].array();

    // d/dI_k of |W_k I_k - I_{k+1}|^2 and d/dI_{k+1} of the same term
    const Image wr = warp_adjoint(Image(r), vk, scheme);
    g.images[static_cast<size_t>(k)].array() += 2.0 * p.beta * wr.array();
    if (k + 1 < K)
      g.images[static_cast<size_t>(k + 1)].array() -= 2.0 * p.beta * r;

    DisplacementField gk = stagger_average_adjoint(
        CellVectorField(-2.0 * (s.gx * r), -2.0 * (s.gy * r)));
    gk += elastic_value_grad(vk, p.mu, p.lambda_e).grad;
    gk += d3_value_grad(vk, p.nu, p.eta).grad;
    gk *= p.beta;
    gv.push_back(std::move(gk));
  }
  g.fields = DeformationPath(std::move(gv));
  return g;
}

PalmState palm_step(PalmState state, const MeasurementOp& op,
                    const MeasurementData& B, const EnergyParams& p,
                    const PalmParams& palm, Interp scheme) {
  const int K = state.fields.K();
  const int n1 = state.images.frame(0).n1(), n2 = state.images.frame(0).n2();

  state.tau = std::max(state.tau * palm.relax, 1e-6);
  state.sigma = std::max(state.sigma * palm.relax, 1e-6);

  // Image block
  const double h0 = smooth_H(state.images, state.fields, p, scheme);
  const PalmGrads g0 = grad_H(state.images, state.fields, p, scheme);
  ImagePath updated = state.images;
  for (int bt = 0; bt <= palm.max_backtracks; ++bt) {
    updated = state.images;
    double inner_lin = 0.0, inner_sq = 0.0;
    for (int k = 0; k < K; ++k) {
      const Array2d z = state.images.frame(k).array() -
                        g0.images[static_cast<size_t>(k)].array() / state.tau;
      Image zk(z);
      if (k == 0) {
        // prox of G1 at weight tau/2: beta w |y - z|^2 with w = tau/(2 beta)
        WeightField w(n1, n2);
        w.w *= state.tau / (2.0 * p.beta);
        zk = solve_weighted_step(op, B, Image(z), w, p.alpha, p.beta,
                                 state.images.frame(0), palm.prox_pd);
      }
      const Array2d d = zk.array() - state.images.frame(k).array();
      inner_lin += (g0.images[static_cast<size_t>(k)].array() * d).sum();
      inner_sq += (d * d).sum();
      updated.set_frame(k, std::move(zk));
    }
    const double h_new = smooth_H(updated, state.fields, p, scheme);
    if (h_new <= h0 + inner_lin + 0.5 * state.tau * inner_sq + 1e-12 * (1 + std::abs(h0)))
      break;
    state.tau *= palm.backtrack;
  }
  state.images = updated;

  // Field block (G2 = 0: plain gradient step with surrogate check)
  const double h1 = smooth_H(state.images, state.fields, p, scheme);
  const PalmGrads g1 = grad_H(state.images, state.fields, p, scheme);
  for (int bt = 0; bt <= palm.max_backtracks; ++bt) {
    DeformationPath trial = state.fields;
    double inner_lin = 0.0, inner_sq = 0.0;
    for (int k = 0; k < K; ++k) {
      const DisplacementField& gk = g1.fields.steps[static_cast<size_t>(k)];
      trial.steps[static_cast<size_t>(k)] -= (1.0 / state.sigma) * gk;
      inner_lin -= gk.dot(gk) / state.sigma;
      inner_sq += gk.dot(gk) / (state.sigma * state.sigma);
    }
    const double h_new = smooth_H(state.images, trial, p, scheme);
    if (h_new <= h1 + inner_lin + 0.5 * state.sigma * inner_sq + 1e-12 * (1 + std::abs(h1))) {
      state.fields = std::move(trial);
      break;
    }
    state.sigma *= palm.backtrack;
    if (bt == palm.max_backtracks) break;  // keep fields unchanged
  }
  return state;
}

namespace {

// PALM sweeps at one level; returns the objective trace.
std::vector<double> palm_iterate(PathState& st, const MeasurementOp& op,
                                 const MeasurementData& B, const EnergyParams& params,
                                 const PalmConfig& cfg) {
  PalmState ps{ImagePath(st.frames), DeformationPath(st.fields), cfg.palm.tau0,
               cfg.palm.sigma0};
  std::vector<double> objective;
  double prev = full_objective(ps.images, ps.fields, op, B, params, cfg.scheme);
  objective.push_back(prev);
  for (int it = 0; it < cfg.max_iters; ++it) {
    ps = palm_step(std::move(ps), op, B, params, cfg.palm, cfg.scheme);
    const double J = full_objective(ps.images, ps.fields, op, B, params, cfg.scheme);
    objective.push_back(J);
    if (!std::isfinite(J)) throw std::runtime_error("run_palm: non-finite objective");
    if (prev - J < cfg.tol * (std::abs(prev) + 1e-30) && it > 3) break;
    prev = J;
  }
  st.frames = ps.images.frames();
  st.fields = ps.fields.steps;
  return objective;
}

PathState palm_initial_state(const Image& R, const MeasurementData& B,
                             const MeasurementOp& op, const PalmConfig& cfg, int K) {
  const int n1 = R.n1(), n2 = R.n2();
  PathState st;
  if (cfg.seeded_init) {
    const Image I0 = solve_l2tv(op, B, cfg.alpha, Image(n1, n2), cfg.pd);
    const EnergyParams reg_params =
        EnergyParams::tied(cfg.alpha, cfg.beta, cfg.reg_scale, 1);
    const DisplacementField v = register_pair(R, I0, DisplacementField(n1, n2),
                                              reg_params, cfg.reg, cfg.scheme);
    auto seeded = seeded_initial_path(R, I0, v, K);
    st.frames = std::move(seeded.first);
    st.fields = std::move(seeded.second);
  } else {
    st.frames.assign(static_cast<size_t>(K) + 1, R);
    st.fields.assign(static_cast<size_t>(K), DisplacementField(n1, n2));
  }
  return st;
}

}  // namespace

PalmResult run_palm(const Image& R, const MeasurementData& B,
                    std::shared_ptr<const MeasurementOp> op, const PalmConfig& cfg) {
  PalmResult res;

  if (cfg.lev < 1) {
    const EnergyParams params =
        EnergyParams::tied(cfg.alpha, cfg.beta, cfg.reg_scale, cfg.K);
    params.validate();
    PathState st = palm_initial_state(R, B, *op, cfg, cfg.K);
    res.objective = palm_iterate(st, *op, B, params, cfg);
    res.path = ImagePath(std::move(st.frames));
    res.fields = DeformationPath(std::move(st.fields));
    return res;
  }

  // Coarse-to-fine on the same pyramid as the alternating driver.
  std::vector<int> schedule = cfg.ktilde;
  if (schedule.empty()) {
    schedule.assign(static_cast<size_t>(cfg.lev), 0);
    if (cfg.lev >= 1) schedule[static_cast<size_t>(cfg.lev - 1)] = 2;
    if (cfg.lev >= 2) schedule[static_cast<size_t>(cfg.lev - 2)] = 1;
  }
  const LevelStack stack = build_stack(R, B, op, cfg.lev, schedule);

  PathState st;
  for (int l = cfg.lev - 1; l >= 0; --l) {
    const Level& level = stack.levels[static_cast<size_t>(l)];
    const auto [n1, n2] = level.A->grid_shape();
    if (l == cfg.lev - 1) {
      PalmConfig coarse = cfg;
      coarse.reg_scale = cfg.reg_scale;
      PathState init = palm_initial_state(stack.levels.back().R, stack.levels.back().B,
                                          *stack.levels.back().A, coarse,
                                          std::max(level.ktilde, 1));
      // prolong the coarsest-level seed onto this level's grid
      st = prolong_path_state(init, level.R, n1, n2, 0);
    } else {
      st = prolong_path_state(st, level.R, n1, n2, level.ktilde);
    }
    const double scale =
        cfg.reg_scale * std::pow(cfg.level_scale_factor, cfg.lev - l);
    const EnergyParams params = EnergyParams::tied(
        cfg.alpha, cfg.beta, scale, static_cast<int>(st.fields.size()));
    params.validate();
    res.objective = palm_iterate(st, *level.A, level.B, params, cfg);
  }
  res.path = ImagePath(std::move(st.frames));
  res.fields = DeformationPath(std::move(st.fields));
  return res;
}

}  // namespace tdm
