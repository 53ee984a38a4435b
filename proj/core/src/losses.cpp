#include "aeidc/losses.hpp"

#include <cmath>

#include "aeidc/id.hpp"

namespace aeidc {

namespace {
constexpr double kBceClamp = 1e-7;

int batch_size_of(const Tensor& x, const char* who) {
    if (x.rank() < 2) throw ShapeError(std::string(who) + ": expected a batched tensor, got " + x.shape_str());
    return x.dim(0);
}

void require_same(const Tensor& x, const Tensor& xhat, const char* who) {
    if (!x.same_shape(xhat))
        throw ShapeError(std::string(who) + ": shape mismatch " + x.shape_str() + " vs " + xhat.shape_str());
}
}  // namespace

std::string recon_kind_name(ReconKind k) { return k == ReconKind::kMse ? "mse" : "bce"; }

ReconKind recon_kind_from_name(const std::string& name) {
    if (name == "mse") return ReconKind::kMse;
    if (name == "bce") return ReconKind::kBce;
    throw ValidationError("unknown reconstruction loss '" + name + "'");
}

double mse(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "mse");
    const int n = batch_size_of(x, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = xhat[i] - x[i];
        s += d * d;
    }
    return s / n;
}

Tensor mse_gradient(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "mse");
    const int n = batch_size_of(x, "mse");
    Tensor g(x.shape());
    const double c = 2.0 / n;
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = c * (xhat[i] - x[i]);
    return g;
}

static double clamp01(double v) {
    if (v < kBceClamp) return kBceClamp;
    if (v > 1.0 - kBceClamp) return 1.0 - kBceClamp;
    return v;
}

double bce(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "bce");
    const int n = batch_size_of(x, "bce");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i];
        if (t < 0.0 || t > 1.0)
            throw ValidationError("bce: target outside [0,1] at flat index " + std::to_string(i));
        const double p = clamp01(xhat[i]);
        s += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return -s / n;
}

Tensor bce_gradient(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "bce");
    const int n = batch_size_of(x, "bce");
    Tensor g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i];
        if (t < 0.0 || t > 1.0)
            throw ValidationError("bce: target outside [0,1] at flat index " + std::to_string(i));
        const double raw = xhat[i];
        if (raw < kBceClamp || raw > 1.0 - kBceClamp) {
            // Clamped region: the loss is locally constant in xhat.
            g[i] = 0.0;
        } else {
            g[i] = (-t / raw + (1.0 - t) / (1.0 - raw)) / n;
        }
    }
    return g;
}

double gid_penalty(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "gid_penalty");
    const double gap = gid(x).value - gid(xhat).value;
    return gap * gap;
}

Tensor gid_penalty_gradient(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "gid_penalty");
    const double gap = gid(xhat).value - gid(x).value;
    return scale(gid_gradient(xhat), 2.0 * gap);
}

namespace {
// Views sample i of an (N, ...) batch as its own tensor.
Tensor slice_sample(const Tensor& batch, int i, const std::vector<int>& sample_shape) {
    const std::size_t per = shape_numel(sample_shape);
    std::vector<double> buf(batch.data() + static_cast<std::size_t>(i) * per,
                            batch.data() + static_cast<std::size_t>(i + 1) * per);
    return Tensor(sample_shape, std::move(buf));
}
}  // namespace

double lid_penalty(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "lid_penalty");
    const int n = batch_size_of(x, "lid_penalty");
    const std::vector<int> sample_shape(x.shape().begin() + 1, x.shape().end());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double gap =
            lid(slice_sample(x, i, sample_shape)).value - lid(slice_sample(xhat, i, sample_shape)).value;
        s += gap * gap;
    }
    return s;
}

Tensor lid_penalty_gradient(const Tensor& x, const Tensor& xhat) {
    require_same(x, xhat, "lid_penalty");
    const int n = batch_size_of(x, "lid_penalty");
    const std::vector<int> sample_shape(x.shape().begin() + 1, x.shape().end());
    const std::size_t per = shape_numel(sample_shape);
    Tensor g(x.shape());
    for (int i = 0; i < n; ++i) {
        const Tensor xi = slice_sample(x, i, sample_shape);
        const Tensor xhi = slice_sample(xhat, i, sample_shape);
        const double gap = lid(xhi).value - lid(xi).value;
        const Tensor gi = lid_gradient(xhi);
        double* dst = g.data() + static_cast<std::size_t>(i) * per;
        for (std::size_t t = 0; t < per; ++t) dst[t] = 2.0 * gap * gi[t];
    }
    return g;
}

LossBreakdown total_loss(const Tensor& x, const Tensor& xhat, double lambda1, double lambda2,
                         ReconKind kind, double recon_weight) {
    LossBreakdown b;
    b.lambda1 = lambda1;
    b.lambda2 = lambda2;
    b.recon_weight = recon_weight;
    b.reconstruction = kind == ReconKind::kMse ? mse(x, xhat) : bce(x, xhat);
    b.gid_term = lambda1 != 0.0 ? gid_penalty(x, xhat) : 0.0;
    b.lid_term = lambda2 != 0.0 ? lid_penalty(x, xhat) : 0.0;
    b.total = recon_weight * b.reconstruction + lambda1 * b.gid_term + lambda2 * b.lid_term;
    return b;
}

Tensor total_loss_gradient(const Tensor& x, const Tensor& xhat, double lambda1, double lambda2,
                           ReconKind kind, double recon_weight) {
    Tensor g = kind == ReconKind::kMse ? mse_gradient(x, xhat) : bce_gradient(x, xhat);
    if (recon_weight != 1.0)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= recon_weight;
    if (lambda1 != 0.0) axpy(lambda1, gid_penalty_gradient(x, xhat), g);
    if (lambda2 != 0.0) axpy(lambda2, lid_penalty_gradient(x, xhat), g);
    return g;
}

Tensor id_gradient_linear(const Tensor& w, const Tensor& x) {
    if (w.rank() != 2 || x.rank() != 2)
        throw ShapeError("id_gradient_linear: W and X must be matrices");
    if (w.cols() != x.cols())
        throw ShapeError("id_gradient_linear: W is n x m and X is N x m, got " + w.shape_str() +
                         " and " + x.shape_str());
    const Tensor xtx = matmul(transpose(x), x);          // m x m
    const Tensor t0 = matmul(w, xtx);                    // n x m
    const Tensor t1 = matmul(t0, transpose(w));          // n x n
    const double t2 = trace(t1);
    const Tensor t3 = matmul(t1, t0);                    // T1 W X^T X, n x m
    const double t4 = trace(matmul(t3, transpose(w)));
    if (!(t4 > kPrEpsilon))
        throw ValidationError("id_gradient_linear: degenerate denominator tr(T3 W^T) = " +
                              std::to_string(t4));
    Tensor g = scale(t0, 4.0 * t2 / t4);
    axpy(-4.0 * t2 * t2 / (t4 * t4), t3, g);
    return g;
}

}  // namespace aeidc
