#include "tdm/morph.hpp"

#include <cmath>
#include <stdexcept>

#include "tdm/energy.hpp"

namespace tdm {

SubstitutedPath substitute(const ImagePath& I, const DeformationPath& v,
                           Interp scheme) {
  if (v.K() != I.K())
    throw std::invalid_argument("substitute: K fields need K+1 frames");
  const int K = v.K();
  SubstitutedPath sub;
  sub.reference = I.reference();
  sub.maps.reserve(K + 1);
  sub.F.reserve(K + 1);
  sub.weights.reserve(K);
  for (int k = 0; k <= K; ++k) {
    sub.maps.push_back(compose_path(v, k));
    sub.F.push_back(sample(I.frames()[k], sub.maps.back(), scheme));
    if (k >= 1) sub.weights.push_back(jacobian_det(sub.maps.back()));
  }
  return sub;
}

SubstitutedPath interior_update(SubstitutedPath sub) {
  const int K = sub.K();
  if (K < 2) return sub;
  const int n1 = sub.F.front().n1(), n2 = sub.F.front().n2();

  // cum(k) = sum_{i<=k} 1/w_i, accumulated pixelwise
  std::vector<Array2d> cum(K + 1);
  cum[0] = Array2d::Zero(n1, n2);
  for (int k = 1; k <= K; ++k)
    cum[k] = cum[k - 1] + sub.weights[k - 1].w.inverse();

  const Array2d& F0 = sub.F.front().array();
  const Array2d& FK = sub.F.back().array();
  for (int k = 1; k < K; ++k) {
    const Array2d t = cum[k] / cum[K];
    sub.F[k].array() = (1.0 - t) * F0 + t * FK;
  }
  return sub;
}

double coupled_objective(const SubstitutedPath& sub, const MeasurementOp& op,
                         const MeasurementData& B, double alpha, double beta) {
  double chain = 0.0;
  for (int k = 0; k < sub.K(); ++k) {
    const Array2d d = sub.F[k].array() - sub.F[k + 1].array();
    chain += (sub.weights[k].w * d * d).sum();
  }
  const Array2d r = op.apply(sub.F.front()).values - B.values;
  return beta * chain + 0.5 * (r * r).sum() + alpha * tv_value(sub.F.front());
}

SubstitutedPath inner_alternation(SubstitutedPath sub, const MeasurementOp& op,
                                  const MeasurementData& B, double alpha,
                                  double beta, const PDParams& pd, int max_inner,
                                  double tol, std::vector<double>* objective_log) {
  double prev = coupled_objective(sub, op, B, alpha, beta);
  if (objective_log) objective_log->push_back(prev);
  for (int it = 0; it < max_inner; ++it) {
    sub = interior_update(std::move(sub));
    if (objective_log)
      objective_log->push_back(coupled_objective(sub, op, B, alpha, beta));

    sub.F.front() = solve_weighted_step(op, B, sub.F[1], sub.weights.front(),
                                        alpha, beta, sub.F.front(), pd);
    const double cur = coupled_objective(sub, op, B, alpha, beta);
    if (objective_log) objective_log->push_back(cur);

    if (prev - cur < tol * (std::abs(prev) + 1e-30)) break;
    prev = cur;
  }
  return sub;
}

ImagePath desubstitute(const SubstitutedPath& sub) {
  const int K = sub.K();
  std::vector<Image> frames;
  frames.reserve(K + 1);
  frames.push_back(sub.F.front());
  for (int k = 1; k < K; ++k)
    frames.push_back(scattered_resample(sub.F[k], sub.maps[k]));
  frames.push_back(sub.reference);
  return ImagePath(std::move(frames));
}

}  // namespace tdm
