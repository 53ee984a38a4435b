#include "aeidc/id.hpp"

#include <cmath>

namespace aeidc {

IdValue participation_ratio(const Tensor& g) {
    if (g.rank() != 2 || g.rows() != g.cols())
        throw ValidationError("participation_ratio: need a square matrix, got " + g.shape_str());
    const int n = g.rows();
    double scale = max_abs(g);
    if (scale == 0.0) scale = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::fabs(g(i, j) - g(j, i)) > 1e-9 * scale)
                throw ValidationError("participation_ratio: asymmetric input at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    const double t1 = trace(g);
    const double t2 = frob_sq(g);
    return IdValue{t1 * t1 / (t2 + kPrEpsilon)};
}

double participation_ratio_of_rows(const Tensor& a) {
    // tr(a a^T) and ||a a^T||_F^2 without symmetry checks; gram() is
    // symmetric by construction.
    const Tensor g = gram(a);
    const double t1 = trace(g);
    const double t2 = frob_sq(g);
    return t1 * t1 / (t2 + kPrEpsilon);
}

Tensor participation_ratio_of_rows_gradient(const Tensor& a) {
    // For g = a a^T: d tr(g) = 2a, d tr(g^2) = 4 g a, so
    // d [tr(g)^2 / (tr(g^2)+eps)] = (4 t1 / d2) a - (4 t1^2 / d2^2) g a.
    const Tensor g = gram(a);
    const double t1 = trace(g);
    const double d2 = frob_sq(g) + kPrEpsilon;
    const Tensor ga = matmul(g, a);
    Tensor grad = scale(a, 4.0 * t1 / d2);
    axpy(-4.0 * t1 * t1 / (d2 * d2), ga, grad);
    return grad;
}

static Tensor batch_as_rows(const Tensor& batch) {
    if (batch.rank() < 2)
        throw ValidationError("gid: batch must have a leading sample dimension, got " + batch.shape_str());
    if (batch.dim(0) < 2)
        throw ValidationError("gid: need at least 2 samples, got " + std::to_string(batch.dim(0)) +
                              " (centering annihilates a single sample)");
    return batch.as_matrix();
}

IdValue gid(const Tensor& batch) {
    const Tensor centered = center_columns(batch_as_rows(batch));
    return IdValue{participation_ratio_of_rows(centered)};
}

Tensor gid_gradient(const Tensor& batch) {
    const Tensor centered = center_columns(batch_as_rows(batch));
    // Chain through centering: the ratio gradient at the centered matrix is
    // itself column-centered, so projecting again is a no-op.
    return participation_ratio_of_rows_gradient(centered).reshaped(batch.shape());
}

static Tensor sample_as_channels(const Tensor& sample) {
    if (sample.rank() < 2)
        throw ValidationError("lid: sample must be C x H x W (or C x m), got " + sample.shape_str());
    return sample.as_matrix();
}

IdValue lid(const Tensor& sample) {
    return IdValue{participation_ratio_of_rows(sample_as_channels(sample))};
}

Tensor lid_gradient(const Tensor& sample) {
    return participation_ratio_of_rows_gradient(sample_as_channels(sample)).reshaped(sample.shape());
}

}  // namespace aeidc
