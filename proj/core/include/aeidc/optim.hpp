#pragma once

#include <string>
#include <vector>

#include "aeidc/tensor.hpp"

namespace aeidc {

enum class OptimizerKind { kSgd, kAdam };

std::string optimizer_name(OptimizerKind k);
OptimizerKind optimizer_from_name(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::kAdam;
    double learning_rate = 1e-3;
    double momentum = 0.9;   // sgd
    double beta1 = 0.9;      // adam
    double beta2 = 0.999;    // adam
    double eps = 1e-8;       // adam
};

// Holds per-parameter state (momentum / Adam moments) for a fixed list of
// parameter tensors. step() aborts with NumericError on non-finite
// gradients, naming the offending parameter slot.
class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, const std::vector<Tensor*>& params);

    // grads parallel to the params passed at construction.
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    std::vector<Tensor> m_;  // momentum / first moment
    std::vector<Tensor> v_;  // second moment (adam)
    long t_ = 0;             // adam step count
};

}  // namespace aeidc
