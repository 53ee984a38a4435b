#pragma once

#include "aeidc/tensor.hpp"

namespace aeidc {

// Guard added to the trace(C^2) denominator: a zero-covariance batch then
// yields ID = 0 with a bounded gradient instead of 0/0.
inline constexpr double kPrEpsilon = 1e-12;

// Effective dimension count from a covariance/Gram spectrum.
struct IdValue {
    double value = 0.0;
};

// (tr g)^2 / (||g||_F^2 + eps) for a symmetric PSD matrix g. For symmetric g
// this equals (sum e_i)^2 / (sum e_i^2) over the eigenvalues of g.
// Throws ValidationError when g is asymmetric beyond 1e-9.
IdValue participation_ratio(const Tensor& g);

// Global intrinsic dimension of a batch: reshape N x C x H x W to
// N x (C*H*W), center every feature column, and take the participation
// ratio of the N x N Gram matrix. Requires N >= 2.
IdValue gid(const Tensor& batch);

// Local intrinsic dimension of one sample: reshape C x H x W to C x (H*W)
// without centering and take the participation ratio of the C x C Gram.
IdValue lid(const Tensor& sample);

// d gid / d batch and d lid / d sample, same shape as the input. Centering
// for gid is absorbed: the gradient of the ratio at the centered matrix is
// already column-centered.
Tensor gid_gradient(const Tensor& batch);
Tensor lid_gradient(const Tensor& sample);

// Participation ratio of row space of an (already reshaped/centered) matrix
// a, i.e. of gram(a); shared by gid/lid and their gradients.
double participation_ratio_of_rows(const Tensor& a);
Tensor participation_ratio_of_rows_gradient(const Tensor& a);

}  // namespace aeidc
