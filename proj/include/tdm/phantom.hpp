#pragma once

#include <cstdint>
#include <string>

#include "tdm/image.hpp"

namespace tdm {

struct PhantomPair {
  Image reference;
  Image target;
  bool has_detail = false;
  // Inclusive-exclusive pixel bounds of the added structure (target only).
  int detail_x0 = 0, detail_x1 = 0, detail_y0 = 0, detail_y1 = 0;
};

// Procedural reference/target pairs: the target is the reference with
// smoothly perturbed shapes and an intensity change; "-detail" variants
// (and brain-like by default) additionally contain one small structure
// absent from the reference. A "-static" suffix suppresses the deformation
// so the target differs by the added detail only.
//
// Kinds: ellipses, triangles-to-stars, brain-like (plus -detail/-static).
// Deterministic given the seed; non-static pairs are checked to satisfy
// SSIM(reference, target) < 0.95.
PhantomPair gen_phantom(const std::string& kind, int size, std::uint64_t seed);

}  // namespace tdm
