#pragma once

#include "tdm/image.hpp"

namespace tdm {

// 10 log10(peak^2 / MSE); +inf for identical images.
double psnr(const Image& x, const Image& y, double peak = 1.0);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
// C2 = 0.03^2; windows fully inside the image. Needs size >= 11.
double ssim(const Image& x, const Image& y);

}  // namespace tdm
