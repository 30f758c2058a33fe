#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tdm/image.hpp"

namespace tdm {

// Measurement vector. For the Radon operator values(a, r) is the integral
// along ray r of angle a; for subsampling operators it is the low-res image
// in Image layout; geometry carries the sidecar text description.
struct MeasurementData {
  Array2d values;
  std::string geometry;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  double norm() const { return std::sqrt((values * values).sum()); }
};

// Linear measurement operator A with exact-transpose adjoint and a
// per-level coarsening rule for multilevel runs.
class MeasurementOp {
 public:
  virtual ~MeasurementOp() = default;

  virtual MeasurementData apply(const Image& x) const = 0;
  virtual Image adjoint(const MeasurementData& y) const = 0;
  virtual std::pair<int, int> output_shape() const = 0;  // (rows, cols)
  virtual std::pair<int, int> grid_shape() const = 0;    // (n1, n2)
  virtual std::pair<std::shared_ptr<MeasurementOp>, MeasurementData> coarsen(
      const MeasurementData& data) const = 0;
  virtual std::string describe() const = 0;
};

// Parallel-beam Radon transform, Joseph's method (per-ray linear
// interpolation along the dominant axis), detectors spanning the image
// diagonal, centered. The adjoint is the exact transpose of the discrete
// forward map.
class RadonOp final : public MeasurementOp {
 public:
  RadonOp(int n1, int n2, std::vector<double> angles_deg, int rays);

  MeasurementData apply(const Image& x) const override;
  Image adjoint(const MeasurementData& y) const override;
  std::pair<int, int> output_shape() const override;
  std::pair<int, int> grid_shape() const override { return {n1_, n2_}; }
  std::pair<std::shared_ptr<MeasurementOp>, MeasurementData> coarsen(
      const MeasurementData& data) const override;
  std::string describe() const override;

  const std::vector<double>& angles() const { return angles_deg_; }
  int rays() const { return rays_; }
  double ray_spacing() const { return spacing_; }

 private:
  template <typename Acc>
  void traverse(int a, int m, Acc&& acc) const;

  int n1_, n2_;
  std::vector<double> angles_deg_;
  int rays_;
  double spacing_;
};

// Separable block-averaging operator B = P x P^T where P averages groups of
// `factor` consecutive samples with weight 1/factor. factor = 1 is the
// identity.
class SubsampleOp final : public MeasurementOp {
 public:
  SubsampleOp(int n1, int n2, int factor);

  MeasurementData apply(const Image& x) const override;
  Image adjoint(const MeasurementData& y) const override;
  std::pair<int, int> output_shape() const override;
  std::pair<int, int> grid_shape() const override { return {n1_, n2_}; }
  std::pair<std::shared_ptr<MeasurementOp>, MeasurementData> coarsen(
      const MeasurementData& data) const override;
  std::string describe() const override;

  int factor() const { return factor_; }

 private:
  int n1_, n2_, factor_;
};

// Defaults rays to ceil(1.5 * max(n1, n2)) rounded up to even, so that the
// ray count stays even through the multilevel coarsening chain.
std::shared_ptr<MeasurementOp> radon_make(int n, std::vector<double> angles_deg,
                                          int rays = 0);
std::shared_ptr<MeasurementOp> p4_make(int n, int factor);
std::shared_ptr<MeasurementOp> identity_make(int n1, int n2);

// Equally spaced angle lists: [0, stop) in `count` steps (the sparse setup)
// or the explicit limited-angle list start, start+step, ...
std::vector<double> equispaced_angles(int count, double stop = 180.0);

// data + sigma * N(0,1) i.i.d. with sigma = level * ||data||_F / sqrt(#entries);
// bit-reproducible given the seed.
MeasurementData add_gaussian_noise(const MeasurementData& data, double level,
                                   std::uint64_t seed);

// max over trials of |<Ax,y> - <x,A^T y>| / (||Ax|| ||y|| + eps)
double adjoint_check(const MeasurementOp& op, int trials, std::uint64_t seed);

// Power-method estimate of ||A||_2 via A^T A Rayleigh quotients
// (nondecreasing in iters).
double op_norm_estimate(const MeasurementOp& op, int iters, std::uint64_t seed);

}  // namespace tdm
