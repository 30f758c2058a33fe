#include <doctest.h>

#include <cmath>
#include <limits>

#include "tdm/metrics.hpp"
#include "tdm/operators.hpp"
#include "test_util.hpp"

using namespace tdm;
using namespace tdmtest;

TEST_SUITE("metrics") {

TEST_CASE("psnr closed form, identity sentinel, permutation invariance") {
  const int n = 16;
  const Image x = random_image(n, n, 41);
  Image y = x;
  y.array() += 0.1;
  CHECK(psnr(x, y) == doctest::Approx(20.0).epsilon(1e-12));

  CHECK(psnr(x, x) == std::numeric_limits<double>::infinity());
  CHECK_THROWS(psnr(x, Image(8, 8)));

  // common permutation of both images leaves the MSE unchanged
  Image xp(n, n), yp(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      xp(i, j) = x(n - 1 - i, n - 1 - j);
      yp(i, j) = y(n - 1 - i, n - 1 - j);
    }
  CHECK(psnr(xp, yp) == doctest::Approx(psnr(x, y)).epsilon(1e-12));
}

TEST_CASE("ssim of an image with itself is one and ssim is symmetric") {
  const Image x = smooth_image(24, 24, 42);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));

  const Image y = smooth_image(24, 24, 43);
  CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)).epsilon(1e-12));
  CHECK(ssim(x, y) <= 1.0);
  CHECK(ssim(x, y) < 1.0);

  CHECK_THROWS(ssim(x, Image(12, 12)));
  CHECK_THROWS(ssim(Image(10, 10), Image(10, 10)));
}

TEST_CASE("ssim of a binary image and its inversion is far from one") {
  const int n = 32;
  Image x(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = ((i / 4 + j / 4) % 2) ? 1.0 : 0.0;
  Image inv(Array2d(1.0 - x.array()));
  CHECK(ssim(x, inv) < 0.5);
}

TEST_CASE("psnr strictly decreases with increasing noise level") {
  const int n = 32;
  const Image x = smooth_image(n, n, 44);
  MeasurementData d{x.array(), ""};
  double prev = std::numeric_limits<double>::infinity();
  for (double level : {0.01, 0.03, 0.09}) {
    const MeasurementData noisy = add_gaussian_noise(d, level, 99);
    const double p = psnr(x, Image(noisy.values));
    CHECK(p < prev);
    prev = p;
  }
}

}  // TEST_SUITE
