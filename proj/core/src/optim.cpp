#include "aeidc/optim.hpp"

#include <cmath>

namespace aeidc {

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerKind::kSgd;
    if (name == "adam") return OptimizerKind::kAdam;
    throw ValidationError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerConfig cfg, const std::vector<Tensor*>& params) : cfg_(cfg) {
    m_.reserve(params.size());
    for (const Tensor* p : params) m_.emplace_back(Tensor::zeros(p->shape()));
    if (cfg_.kind == OptimizerKind::kAdam) {
        v_.reserve(params.size());
        for (const Tensor* p : params) v_.emplace_back(Tensor::zeros(p->shape()));
    }
}

void Optimizer::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ValidationError("optimizer: parameter list changed size");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!all_finite(grads[i]))
            throw NumericError("non-finite gradient in parameter slot " + std::to_string(i) +
                               " (shape " + grads[i].shape_str() + ")");
    }
    if (cfg_.kind == OptimizerKind::kSgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            Tensor& mom = m_[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                mom[j] = cfg_.momentum * mom[j] + grads[i][j];
                p[j] -= cfg_.learning_rate * mom[j];
            }
        }
        return;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& m1 = m_[i];
        Tensor& m2 = v_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double g = grads[i][j];
            m1[j] = cfg_.beta1 * m1[j] + (1.0 - cfg_.beta1) * g;
            m2[j] = cfg_.beta2 * m2[j] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m1[j] / bc1;
            const double vhat = m2[j] / bc2;
            p[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace aeidc
