#include "tdm/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tdm/grid.hpp"
#include "tdm/rng.hpp"

namespace tdm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RadonOp::RadonOp(int n1, int n2, std::vector<double> angles_deg, int rays)
    : n1_(n1), n2_(n2), angles_deg_(std::move(angles_deg)), rays_(rays) {
  if (angles_deg_.empty()) throw std::invalid_argument("RadonOp: empty angle list");
  if (rays_ < 2) throw std::invalid_argument("RadonOp: needs at least 2 rays");
  if (n1_ < 2 || n2_ < 2) throw std::invalid_argument("RadonOp: grid too small");
  spacing_ = std::hypot(static_cast<double>(n1_), static_cast<double>(n2_)) / rays_;
}

std::pair<int, int> RadonOp::output_shape() const {
  return {static_cast<int>(angles_deg_.size()), rays_};
}

// Visits the Joseph samples of ray (a, m): for every slice along the
// dominant axis, the two pixels bracketing the intersection point with
// their linear weights times the step length.
template <typename Acc>
void RadonOp::traverse(int a, int m, Acc&& acc) const {
  const double theta = angles_deg_[a] * kPi / 180.0;
  const double wx = std::cos(theta), wy = std::sin(theta);
  const double dx = -wy, dy = wx;
  const double cx = 0.5 * (n1_ + 1), cy = 0.5 * (n2_ + 1);
  const double s = (m - 0.5 * (rays_ - 1)) * spacing_;
  const double px = cx + s * wx, py = cy + s * wy;
  if (std::abs(dy) >= std::abs(dx)) {
    const double step = 1.0 / std::abs(dy);
    for (int j = 1; j <= n2_; ++j) {
      const double t = (j - py) / dy;
      const double x = px + t * dx;
      const int i0 = static_cast<int>(std::floor(x - 1.0));
      const double f = (x - 1.0) - i0;
      if (i0 >= 0 && i0 < n1_) acc(i0, j - 1, (1.0 - f) * step);
      if (i0 + 1 >= 0 && i0 + 1 < n1_) acc(i0 + 1, j - 1, f * step);
    }
  } else {
    const double step = 1.0 / std::abs(dx);
    for (int i = 1; i <= n1_; ++i) {
      const double t = (i - px) / dx;
      const double y = py + t * dy;
      const int j0 = static_cast<int>(std::floor(y - 1.0));
      const double f = (y - 1.0) - j0;
      if (j0 >= 0 && j0 < n2_) acc(i - 1, j0, (1.0 - f) * step);
      if (j0 + 1 >= 0 && j0 + 1 < n2_) acc(i - 1, j0 + 1, f * step);
    }
  }
}

MeasurementData RadonOp::apply(const Image& x) const {
  if (x.n1() != n1_ || x.n2() != n2_)
    throw std::invalid_argument("RadonOp::apply: image shape mismatch");
  const int na = static_cast<int>(angles_deg_.size());
  MeasurementData out{Array2d::Zero(na, rays_), describe()};
  for (int a = 0; a < na; ++a)
    for (int m = 0; m < rays_; ++m) {
      double acc = 0.0;
      traverse(a, m, [&](int i, int j, double w) { acc += w * x(i, j); });
      out.values(a, m) = acc;
    }
  return out;
}

Image RadonOp::adjoint(const MeasurementData& y) const {
  const int na = static_cast<int>(angles_deg_.size());
  if (y.rows() != na || y.cols() != rays_)
    throw std::invalid_argument("RadonOp::adjoint: data shape mismatch");
  Image out(n1_, n2_);
  for (int a = 0; a < na; ++a)
    for (int m = 0; m < rays_; ++m) {
      const double val = y.values(a, m);
      traverse(a, m, [&](int i, int j, double w) { out(i, j) += w * val; });
    }
  return out;
}

std::pair<std::shared_ptr<MeasurementOp>, MeasurementData> RadonOp::coarsen(
    const MeasurementData& data) const {
  if (rays_ % 2 != 0)
    throw std::invalid_argument("RadonOp::coarsen: odd ray count");
  const int na = static_cast<int>(angles_deg_.size());
  if (data.rows() != na || data.cols() != rays_)
    throw std::invalid_argument("RadonOp::coarsen: data shape mismatch");
  auto op = std::make_shared<RadonOp>((n1_ + 1) / 2, (n2_ + 1) / 2, angles_deg_,
                                      rays_ / 2);
  // Neighboring rays averaged, then rescaled by 1/2: line integrals are in
  // pixel units and the grid spacing doubles.
  MeasurementData out{Array2d::Zero(na, rays_ / 2), op->describe()};
  for (int a = 0; a < na; ++a)
    for (int m = 0; m < rays_ / 2; ++m)
      out.values(a, m) = 0.25 * (data.values(a, 2 * m) + data.values(a, 2 * m + 1));
  return {op, std::move(out)};
}

std::string RadonOp::describe() const {
  std::ostringstream os;
  os << "radon grid " << n1_ << " " << n2_ << " rays " << rays_ << " angles_deg";
  for (double a : angles_deg_) os << " " << a;
  return os.str();
}

SubsampleOp::SubsampleOp(int n1, int n2, int factor)
    : n1_(n1), n2_(n2), factor_(factor) {
  if (factor_ < 1) throw std::invalid_argument("SubsampleOp: factor must be >= 1");
  if (n1_ % factor_ != 0 || n2_ % factor_ != 0)
    throw std::invalid_argument("SubsampleOp: grid not divisible by factor");
}

std::pair<int, int> SubsampleOp::output_shape() const {
  return {n1_ / factor_, n2_ / factor_};
}

MeasurementData SubsampleOp::apply(const Image& x) const {
  if (x.n1() != n1_ || x.n2() != n2_)
    throw std::invalid_argument("SubsampleOp::apply: image shape mismatch");
  const int m1 = n1_ / factor_, m2 = n2_ / factor_;
  MeasurementData out{Array2d::Zero(m1, m2), describe()};
  const double w = 1.0 / (static_cast<double>(factor_) * factor_);
  for (int j = 0; j < m2; ++j)
    for (int i = 0; i < m1; ++i) {
      double acc = 0.0;
      for (int b = 0; b < factor_; ++b)
        for (int a = 0; a < factor_; ++a)
          acc += x(i * factor_ + a, j * factor_ + b);
      out.values(i, j) = acc * w;
    }
  return out;
}

Image SubsampleOp::adjoint(const MeasurementData& y) const {
  const int m1 = n1_ / factor_, m2 = n2_ / factor_;
  if (y.rows() != m1 || y.cols() != m2)
    throw std::invalid_argument("SubsampleOp::adjoint: data shape mismatch");
  Image out(n1_, n2_);
  const double w = 1.0 / (static_cast<double>(factor_) * factor_);
  for (int j = 0; j < n2_; ++j)
    for (int i = 0; i < n1_; ++i)
      out(i, j) = w * y.values(i / factor_, j / factor_);
  return out;
}

std::pair<std::shared_ptr<MeasurementOp>, MeasurementData> SubsampleOp::coarsen(
    const MeasurementData& data) const {
  if (factor_ > 1) {
    if (factor_ % 2 != 0)
      throw std::invalid_argument("SubsampleOp::coarsen: odd factor > 1");
    auto op = std::make_shared<SubsampleOp>(n1_ / 2, n2_ / 2, factor_ / 2);
    MeasurementData out = data;
    out.geometry = op->describe();
    return {op, std::move(out)};
  }
  // Already the identity: the grid halves and the data follows the same
  // Gaussian pyramid as the reference image.
  auto op = std::make_shared<SubsampleOp>((n1_ + 1) / 2, (n2_ + 1) / 2, 1);
  MeasurementData out{gaussian_downsample(Image(data.values)).array(),
                      op->describe()};
  return {op, std::move(out)};
}

std::string SubsampleOp::describe() const {
  std::ostringstream os;
  os << "subsample grid " << n1_ << " " << n2_ << " factor " << factor_;
  return os.str();
}

std::shared_ptr<MeasurementOp> radon_make(int n, std::vector<double> angles_deg,
                                          int rays) {
  if (rays == 0) {
    rays = static_cast<int>(std::ceil(1.5 * n));
    if (rays % 2 != 0) ++rays;
  }
  return std::make_shared<RadonOp>(n, n, std::move(angles_deg), rays);
}

std::shared_ptr<MeasurementOp> p4_make(int n, int factor) {
  return std::make_shared<SubsampleOp>(n, n, factor);
}

std::shared_ptr<MeasurementOp> identity_make(int n1, int n2) {
  return std::make_shared<SubsampleOp>(n1, n2, 1);
}

std::vector<double> equispaced_angles(int count, double stop) {
  if (count < 1) throw std::invalid_argument("equispaced_angles: count < 1");
  std::vector<double> a(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) a[static_cast<size_t>(i)] = i * stop / count;
  return a;
}

MeasurementData add_gaussian_noise(const MeasurementData& data, double level,
                                   std::uint64_t seed) {
  if (level < 0) throw std::invalid_argument("add_gaussian_noise: negative level");
  MeasurementData out = data;
  if (level == 0) return out;
  const auto count = static_cast<double>(data.values.size());
  const double sigma = level * data.norm() / std::sqrt(count);
  CounterRng rng(seed);
  std::uint64_t ctr = 0;
  for (int r = 0; r < data.rows(); ++r)
    for (int c = 0; c < data.cols(); ++c)
      out.values(r, c) += sigma * rng.normal_at(ctr++);
  return out;
}

double adjoint_check(const MeasurementOp& op, int trials, std::uint64_t seed) {
  const auto [n1, n2] = op.grid_shape();
  const auto [r, c] = op.output_shape();
  CounterRng rng(seed);
  std::uint64_t ctr = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Image x(n1, n2);
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) x(i, j) = rng.normal_at(ctr++);
    MeasurementData y{Array2d::Zero(r, c), ""};
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) y.values(i, j) = rng.normal_at(ctr++);
    const MeasurementData ax = op.apply(x);
    const Image aty = op.adjoint(y);
    const double lhs = (ax.values * y.values).sum();
    const double rhs = (x.array() * aty.array()).sum();
    const double denom = ax.norm() * std::sqrt((y.values * y.values).sum()) + 1e-30;
    worst = std::max(worst, std::abs(lhs - rhs) / denom);
  }
  return worst;
}

double op_norm_estimate(const MeasurementOp& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("op_norm_estimate: iters < 1");
  const auto [n1, n2] = op.grid_shape();
  CounterRng rng(seed);
  std::uint64_t ctr = 0;
  Image x(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) x(i, j) = rng.normal_at(ctr++);
  double nx = std::sqrt(x.sum_sq());
  if (nx == 0) return 0.0;
  x.array() /= nx;
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Image z = op.adjoint(op.apply(x));
    lambda = (x.array() * z.array()).sum();
    const double nz = std::sqrt(z.sum_sq());
    if (nz == 0) return 0.0;
    x.array() = z.array() / nz;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace tdm
