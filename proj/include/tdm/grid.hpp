#pragma once

#include "tdm/image.hpp"

namespace tdm {

enum class Interp { bilinear, bicubic };

// Floor applied to Jacobian determinant weights; w appears as a reciprocal
// in the tridiagonal closed form, so it must stay bounded away from zero.
inline constexpr double kWeightFloor = 1e-3;

// Averaging P = (P1, P2): staggered components to cell centers. Cells next
// to the boundary average the stored value with the implicit zero boundary
// component.
CellVectorField stagger_average(const DisplacementField& v);

// Adjoint of stagger_average (cell field back to the staggered layout).
DisplacementField stagger_average_adjoint(const CellVectorField& u);

// Interpolate I at absolute positions (points.u1, points.u2), grid units.
// Coordinates are clamped to the integration domain before interpolation;
// the result is linear in I for fixed points.
Image sample(const Image& I, const CellVectorField& points, Interp scheme);

// Same, also returning the derivative of the interpolant with respect to
// the query coordinates (evaluated per query point).
struct SampleWithGrad {
  Image value;
  Array2d gx;  // d/dx1 of the interpolant at each query
  Array2d gy;  // d/dx2
};
SampleWithGrad sample_with_grad(const Image& I, const CellVectorField& points,
                                Interp scheme);

// Adjoint of I -> sample(I, points, scheme) for fixed points: scatters y
// back onto an (n1, n2) image with the interpolation weights.
Image sample_adjoint(const CellVectorField& points, const Image& y,
                     Interp scheme, int n1, int n2);

// out(x) = I(x - Pv(x)); the discrete data-term warp with phi^-1 ~ id - v.
Image warp(const Image& I, const DisplacementField& v, Interp scheme);

// Adjoint of I -> warp(I, v, scheme) for fixed v.
Image warp_adjoint(const Image& y, const DisplacementField& v, Interp scheme);

// Absolute positions of the grid nodes (the identity map).
CellVectorField identity_map(int n1, int n2);

// psi_k = phi_{k-1} o ... o phi_0 evaluated at the grid nodes:
// psi_0 = id, psi_k(x) = psi_{k-1}(x) + (P v_{k-1})(psi_{k-1}(x)) with
// bilinear evaluation of the averaged displacement.
CellVectorField compose_path(const DeformationPath& path, int upto);

// det of the central-difference Jacobian of an absolute-position map,
// one-sided at the boundary, clamped below at eps.
WeightField jacobian_det(const CellVectorField& psi, double eps = kWeightFloor);

// Recover I with I(psi(x)) ~ F(x) from scattered samples (psi(x), F(x)):
// Shepard inverse-distance weighting over the 4 nearest points, exact
// pass-through where a query coincides with a sample location.
Image scattered_resample(const Image& F, const CellVectorField& psi);

// Truncated 5x5 Gaussian (sigma = 1 px, renormalized at the boundary)
// followed by bilinear resampling to ceil(n/2) per axis.
Image gaussian_downsample(const Image& I);

// Bilinear / Catmull-Rom resampling to an arbitrary target size; both grids
// span the same domain, so constants are preserved.
Image resize(const Image& I, int n1, int n2, Interp scheme);

// Bilinear prolongation of a staggered field to a finer grid (target about
// twice the source); values are rescaled to fine-grid pixel units.
DisplacementField upsample_displacement(const DisplacementField& v,
                                        int n1, int n2);

}  // namespace tdm
