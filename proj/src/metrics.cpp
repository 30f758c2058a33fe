#include "tdm/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tdm {

double psnr(const Image& x, const Image& y, double peak) {
  if (!x.same_shape(y)) throw std::invalid_argument("psnr: shape mismatch");
  const Array2d d = x.array() - y.array();
  const double mse = (d * d).sum() / static_cast<double>(d.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

// Valid-mode separable Gaussian window filter, 11 taps, sigma 1.5.
Array2d window_filter(const Array2d& a) {
  double g[11], sum = 0.0;
  for (int k = 0; k < 11; ++k) {
    g[k] = std::exp(-0.5 * (k - 5.0) * (k - 5.0) / (1.5 * 1.5));
    sum += g[k];
  }
  for (double& w : g) w /= sum;

  const Eigen::Index n1 = a.rows(), n2 = a.cols();
  Array2d tmp(n1 - 10, n2);
  for (Eigen::Index j = 0; j < n2; ++j)
    for (Eigen::Index i = 0; i + 10 < n1; ++i) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += g[k] * a(i + k, j);
      tmp(i, j) = acc;
    }
  Array2d out(n1 - 10, n2 - 10);
  for (Eigen::Index j = 0; j + 10 < n2; ++j)
    for (Eigen::Index i = 0; i < n1 - 10; ++i) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += g[k] * tmp(i, j + k);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& x, const Image& y) {
  if (!x.same_shape(y)) throw std::invalid_argument("ssim: shape mismatch");
  if (x.n1() < 11 || x.n2() < 11)
    throw std::invalid_argument("ssim: images must be at least 11x11");

  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const Array2d& ax = x.array();
  const Array2d& ay = y.array();
  const Array2d mx = window_filter(ax);
  const Array2d my = window_filter(ay);
  const Array2d sxx = window_filter(ax * ax) - mx * mx;
  const Array2d syy = window_filter(ay * ay) - my * my;
  const Array2d sxy = window_filter(ax * ay) - mx * my;

  const Array2d num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
  const Array2d den = (mx * mx + my * my + c1) * (sxx + syy + c2);
  return (num / den).mean();
}

}  // namespace tdm
