#include "tdm/convex.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tdm/energy.hpp"
#include "tdm/rng.hpp"

namespace tdm {

void prox_tv_dual(Array2d& p1, Array2d& p2, double alpha) {
  const Array2d mag = (p1 * p1 + p2 * p2).sqrt();
  const Array2d scale = (mag / alpha).max(1.0);
  p1 /= scale;
  p2 /= scale;
}

namespace {

// ||(grad; A)|| by power iteration on grad^T grad + A^T A.
double stacked_norm(const MeasurementOp& op, int n1, int n2) {
  CounterRng rng(0x5eedULL);
  std::uint64_t ctr = 0;
  Image x(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) x(i, j) = rng.normal_at(ctr++);
  x.array() /= std::sqrt(x.sum_sq());
  double lambda = 8.0;  // grad alone is bounded by sqrt(8)
  Array2d gx, gy, div;
  for (int it = 0; it < 30; ++it) {
    tv_gradient(x.array(), gx, gy);
    tv_divergence(gx, gy, div);
    Image z = op.adjoint(op.apply(x));
    z.array() -= div;  // grad^T grad = -div o grad
    lambda = (x.array() * z.array()).sum();
    const double nz = std::sqrt(z.sum_sq());
    if (nz == 0) break;
    x.array() = z.array() / nz;
  }
  return std::sqrt(std::max(lambda, 1e-12));
}

struct CpProblem {
  const MeasurementOp& op;
  const MeasurementData& B;
  double alpha;
  double beta;               // 0 disables the coupling
  const Image* F1;           // coupling target (weighted variant)
  const WeightField* w1;     // coupling weights
};

double primal_energy(const CpProblem& pr, const Image& x) {
  const Array2d r = pr.op.apply(x).values - pr.B.values;
  double e = 0.5 * (r * r).sum() + pr.alpha * tv_value(x);
  if (pr.beta > 0) {
    const Array2d d = x.array() - pr.F1->array();
    e += pr.beta * (pr.w1->w * d * d).sum();
  }
  return e;
}

Image chambolle_pock(const CpProblem& pr, const Image& x0, const PDParams& pd,
                     std::vector<double>* energies) {
  const int n1 = x0.n1(), n2 = x0.n2();
  double tau = pd.tau, sigma = pd.sigma;
  const double L = stacked_norm(pr.op, n1, n2);
  if (tau <= 0 || sigma <= 0) {
    tau = sigma = 0.99 / L;
  } else if (tau * sigma * L * L > 1.0 + 1e-9) {
    throw std::invalid_argument("chambolle_pock: step sizes violate tau*sigma*L^2 <= 1");
  }

  Image x = x0;
  Image xbar = x0;
  Array2d p1 = Array2d::Zero(n1, n2), p2 = Array2d::Zero(n1, n2);
  Array2d q = Array2d::Zero(pr.B.values.rows(), pr.B.values.cols());
  Array2d gx, gy, div;

  // The candidate solution is the best-energy iterate seen so far; the raw
  // primal-dual iterate is allowed to oscillate, the candidate is not.
  double best_energy = primal_energy(pr, x);
  Image best = x;
  if (energies) energies->push_back(best_energy);

  std::ofstream log;
  if (pd.verbose && !pd.log_path.empty()) {
    log.open(pd.log_path);
    log << "iter,primal_energy,dual_residual\n";
  }

  double window_ref = best_energy;
  for (int it = 1; it <= pd.max_iters; ++it) {
    tv_gradient(xbar.array(), gx, gy);
    p1 += sigma * gx;
    p2 += sigma * gy;
    prox_tv_dual(p1, p2, pr.alpha);

    const MeasurementData ax = pr.op.apply(xbar);
    q = (q + sigma * (ax.values - pr.B.values)) / (1.0 + sigma);

    tv_divergence(p1, p2, div);
    MeasurementData qd{q, ""};
    const Image atq = pr.op.adjoint(qd);
    Array2d xnew = x.array() - tau * (atq.array() - div);
    if (pr.beta > 0)
      xnew = (xnew + 2.0 * tau * pr.beta * pr.w1->w * pr.F1->array()) /
             (1.0 + 2.0 * tau * pr.beta * pr.w1->w);

    const Array2d dx = xnew - x.array();
    xbar.array() = xnew + pd.theta * dx;
    x.array() = xnew;

    const double e = primal_energy(pr, x);
    if (e < best_energy) {
      best_energy = e;
      best = x;
    }
    if (energies) energies->push_back(best_energy);
    if (log.is_open())
      log << it << "," << best_energy << "," << std::sqrt((dx * dx).sum()) / tau
          << "\n";
    if (it % 10 == 0) {
      const double denom = std::abs(window_ref) + 1e-30;
      if (window_ref - best_energy < pd.tol * denom) break;
      window_ref = best_energy;
    }
  }
  return best;
}

}  // namespace

Image solve_l2tv(const MeasurementOp& op, const MeasurementData& B, double alpha,
                 const Image& x0, const PDParams& pd, std::vector<double>* energies) {
  if (!(alpha > 0)) throw std::invalid_argument("solve_l2tv: alpha must be > 0");
  const auto [n1, n2] = op.grid_shape();
  if (x0.n1() != n1 || x0.n2() != n2)
    throw std::invalid_argument("solve_l2tv: x0 shape mismatch");
  CpProblem pr{op, B, alpha, 0.0, nullptr, nullptr};
  return chambolle_pock(pr, x0, pd, energies);
}

Image solve_weighted_step(const MeasurementOp& op, const MeasurementData& B,
                          const Image& F1, const WeightField& w1, double alpha,
                          double beta, const Image& x0, const PDParams& pd,
                          std::vector<double>* energies) {
  if (!(alpha > 0) || !(beta > 0))
    throw std::invalid_argument("solve_weighted_step: alpha, beta must be > 0");
  if ((w1.w <= 0.0).any())
    throw std::domain_error("solve_weighted_step: weights must be positive");
  const auto [n1, n2] = op.grid_shape();
  if (x0.n1() != n1 || x0.n2() != n2 || !F1.same_shape(x0) ||
      w1.n1() != n1 || w1.n2() != n2)
    throw std::invalid_argument("solve_weighted_step: shape mismatch");
  CpProblem pr{op, B, alpha, beta, &F1, &w1};
  return chambolle_pock(pr, x0, pd, energies);
}

}  // namespace tdm
