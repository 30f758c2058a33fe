#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tdm {

// Storage convention used throughout: Array2d a(n1, n2) with a(i, j) the
// value at grid point (x1, x2) = (i+1, j+1). The grid is G = {1..n1} x
// {1..n2}, pixel centers at integers, integration domain
// [1/2, n1+1/2] x [1/2, n2+1/2], midpoint quadrature (plain sums).
using Array2d = Eigen::ArrayXXd;

// Cell-centered scalar field on G.
class Image {
 public:
  Image() = default;
  Image(int n1, int n2) : a_(Array2d::Zero(n1, n2)) { check(n1, n2); }
  explicit Image(Array2d a) : a_(std::move(a)) {
    check(static_cast<int>(a_.rows()), static_cast<int>(a_.cols()));
  }

  int n1() const { return static_cast<int>(a_.rows()); }
  int n2() const { return static_cast<int>(a_.cols()); }

  double operator()(int i, int j) const { return a_(i, j); }
  double& operator()(int i, int j) { return a_(i, j); }

  const Array2d& array() const { return a_; }
  Array2d& array() { return a_; }

  bool same_shape(const Image& o) const {
    return n1() == o.n1() && n2() == o.n2();
  }
  bool all_finite() const { return a_.isFinite().all(); }

  double sum_sq() const { return (a_ * a_).sum(); }

 private:
  static void check(int n1, int n2) {
    if (n1 < 2 || n2 < 2)
      throw std::invalid_argument("Image: dimensions must be >= 2");
  }
  Array2d a_;
};

// Staggered displacement field v = (v1, v2). v1 lives on the x1-faces
// G1 = {3/2..n1-1/2} x {1..n2} (shape (n1-1) x n2), v2 on the x2-faces
// (shape n1 x (n2-1)). Boundary-normal components are identically zero
// and are not stored.
class DisplacementField {
 public:
  DisplacementField() = default;
  DisplacementField(int n1, int n2)
      : n1_(n1), n2_(n2),
        v1_(Array2d::Zero(n1 - 1, n2)), v2_(Array2d::Zero(n1, n2 - 1)) {
    if (n1 < 2 || n2 < 2)
      throw std::invalid_argument("DisplacementField: grid must be >= 2");
  }
  DisplacementField(Array2d v1, Array2d v2)
      : v1_(std::move(v1)), v2_(std::move(v2)) {
    n1_ = static_cast<int>(v1_.rows()) + 1;
    n2_ = static_cast<int>(v1_.cols());
    if (v2_.rows() != n1_ || v2_.cols() != n2_ - 1)
      throw std::invalid_argument("DisplacementField: staggered shapes do not match");
  }

  int n1() const { return n1_; }
  int n2() const { return n2_; }

  const Array2d& v1() const { return v1_; }
  const Array2d& v2() const { return v2_; }
  Array2d& v1() { return v1_; }
  Array2d& v2() { return v2_; }

  bool same_shape(const DisplacementField& o) const {
    return n1_ == o.n1_ && n2_ == o.n2_;
  }
  bool all_finite() const {
    return v1_.isFinite().all() && v2_.isFinite().all();
  }

  double dot(const DisplacementField& o) const {
    return (v1_ * o.v1_).sum() + (v2_ * o.v2_).sum();
  }
  double norm() const { return std::sqrt(dot(*this)); }

  DisplacementField& operator+=(const DisplacementField& o) {
    v1_ += o.v1_; v2_ += o.v2_; return *this;
  }
  DisplacementField& operator-=(const DisplacementField& o) {
    v1_ -= o.v1_; v2_ -= o.v2_; return *this;
  }
  DisplacementField& operator*=(double s) {
    v1_ *= s; v2_ *= s; return *this;
  }
  friend DisplacementField operator+(DisplacementField a, const DisplacementField& b) { a += b; return a; }
  friend DisplacementField operator-(DisplacementField a, const DisplacementField& b) { a -= b; return a; }
  friend DisplacementField operator*(double s, DisplacementField a) { a *= s; return a; }

 private:
  int n1_ = 0, n2_ = 0;
  Array2d v1_, v2_;
};

// Cell-centered vector field on G; doubles as a container of absolute
// positions (a map) when stated by the operation using it.
struct CellVectorField {
  Array2d u1, u2;

  CellVectorField() = default;
  CellVectorField(int n1, int n2)
      : u1(Array2d::Zero(n1, n2)), u2(Array2d::Zero(n1, n2)) {}
  CellVectorField(Array2d a, Array2d b) : u1(std::move(a)), u2(std::move(b)) {
    if (u1.rows() != u2.rows() || u1.cols() != u2.cols())
      throw std::invalid_argument("CellVectorField: component shapes differ");
  }

  int n1() const { return static_cast<int>(u1.rows()); }
  int n2() const { return static_cast<int>(u1.cols()); }
};

// Strictly positive per-pixel weights (clamped Jacobian determinants).
struct WeightField {
  Array2d w;

  WeightField() = default;
  explicit WeightField(Array2d a) : w(std::move(a)) {}
  WeightField(int n1, int n2) : w(Array2d::Ones(n1, n2)) {}

  int n1() const { return static_cast<int>(w.rows()); }
  int n2() const { return static_cast<int>(w.cols()); }
};

// Ordered deformation chain (v_0, ..., v_{K-1}), phi_k = id + v_k.
struct DeformationPath {
  std::vector<DisplacementField> steps;

  DeformationPath() = default;
  explicit DeformationPath(std::vector<DisplacementField> s) : steps(std::move(s)) {
    if (steps.empty())
      throw std::invalid_argument("DeformationPath: needs K >= 1 steps");
    for (const auto& v : steps)
      if (!v.same_shape(steps.front()))
        throw std::invalid_argument("DeformationPath: mixed grid sizes");
  }

  int K() const { return static_cast<int>(steps.size()); }
};

// Image chain (I_0, ..., I_K); the last frame is the reference R and is
// immutable after construction.
class ImagePath {
 public:
  ImagePath() = default;
  explicit ImagePath(std::vector<Image> frames) : frames_(std::move(frames)) {
    if (frames_.size() < 2)
      throw std::invalid_argument("ImagePath: needs at least 2 frames");
    for (const auto& f : frames_)
      if (!f.same_shape(frames_.front()))
        throw std::invalid_argument("ImagePath: mixed frame sizes");
  }

  int K() const { return static_cast<int>(frames_.size()) - 1; }
  const Image& frame(int k) const { return frames_.at(k); }
  const Image& reference() const { return frames_.back(); }
  const std::vector<Image>& frames() const { return frames_; }

  void set_frame(int k, Image img) {
    if (k < 0 || k >= K())
      throw std::invalid_argument("ImagePath: only frames 0..K-1 are mutable");
    if (!img.same_shape(frames_.front()))
      throw std::invalid_argument("ImagePath: frame shape mismatch");
    frames_[k] = std::move(img);
  }

 private:
  std::vector<Image> frames_;
};

}  // namespace tdm
