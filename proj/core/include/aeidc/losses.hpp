#pragma once

#include <string>

#include "aeidc/tensor.hpp"

namespace aeidc {

enum class ReconKind { kMse, kBce };

std::string recon_kind_name(ReconKind k);
ReconKind recon_kind_from_name(const std::string& name);

// Composite objective value split into its parts:
// total = recon_weight * reconstruction + lambda1 * gid_term + lambda2 * lid_term.
// recon_weight is 1 except for the GID+LID-only ablation.
struct LossBreakdown {
    double reconstruction = 0.0;
    double gid_term = 0.0;
    double lid_term = 0.0;
    double total = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double recon_weight = 1.0;
};

// Batch-mean of per-sample summed squared error.
double mse(const Tensor& x, const Tensor& xhat);
Tensor mse_gradient(const Tensor& x, const Tensor& xhat);  // d/dxhat

// Batch-mean of per-sample summed binary cross entropy; xhat is clamped to
// [eps, 1-eps] with eps = 1e-7, x must lie in [0,1].
double bce(const Tensor& x, const Tensor& xhat);
Tensor bce_gradient(const Tensor& x, const Tensor& xhat);

// (GID(x) - GID(xhat))^2. The input batch is a detached target: gradients
// flow only through xhat.
double gid_penalty(const Tensor& x, const Tensor& xhat);
Tensor gid_penalty_gradient(const Tensor& x, const Tensor& xhat);

// Sum over the batch of (LID(x_i) - LID(xhat_i))^2, targets detached.
double lid_penalty(const Tensor& x, const Tensor& xhat);
Tensor lid_penalty_gradient(const Tensor& x, const Tensor& xhat);

LossBreakdown total_loss(const Tensor& x, const Tensor& xhat, double lambda1, double lambda2,
                         ReconKind kind, double recon_weight = 1.0);
Tensor total_loss_gradient(const Tensor& x, const Tensor& xhat, double lambda1, double lambda2,
                           ReconKind kind, double recon_weight = 1.0);

// Analytic differential of tr(W X^T X W^T)^2 / tr((W X^T X W^T)^2) in W,
// evaluated exactly as the factored reference form: with T0 = W X^T X,
// T1 = T0 W^T, t2 = tr(T1), T3 = T1 W X^T X, t4 = tr(T3 W^T), the result is
// (4 t2 / t4) T0 - (4 t2^2 / t4^2) T3. Validation path only; production
// gradients come from the layer vjp chain.
Tensor id_gradient_linear(const Tensor& w, const Tensor& x);

}  // namespace aeidc
