#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "aeidc/rng.hpp"
#include "aeidc/tensor.hpp"

namespace aeidc {

enum class Act { kRelu, kSigmoid, kTanh };

std::string act_name(Act a);
Act act_from_name(const std::string& name);

struct DenseSpec {
    int in = 0, out = 0;
};
struct Conv2dSpec {
    int in_ch = 0, out_ch = 0, kernel = 0, stride = 1, padding = 0;
};
// Exact adjoint of the convolution with the same kernel/stride/padding.
// The output height is (H-1)*stride + kernel - 2*padding + output_pad with
// output_pad in [0, stride); the model builder resolves output_pad so the
// decoder lands on its unit's input shape.
struct TConv2dSpec {
    int in_ch = 0, out_ch = 0, kernel = 0, stride = 1, padding = 0;
};
// Non-overlapping window, stride = window.
struct MaxPool2dSpec {
    int window = 0;
};
// Nearest-neighbor duplication.
struct Upsample2dSpec {
    int factor = 0;
};
struct ActivationSpec {
    Act act = Act::kRelu;
};

using LayerSpec =
    std::variant<DenseSpec, Conv2dSpec, TConv2dSpec, MaxPool2dSpec, Upsample2dSpec, ActivationSpec>;

std::string layer_spec_name(const LayerSpec& spec);
bool layer_has_params(const LayerSpec& spec);

// Output shape for one sample. Throws ShapeError on incompatible input.
// tconv_output_pad only applies to TConv2dSpec.
std::vector<int> infer_out_shape(const LayerSpec& spec, const std::vector<int>& in,
                                 int tconv_output_pad = 0);

// A layer spec bound to concrete per-sample shapes, holding its parameters.
// Param layout: dense {W(out,in), b(out)}; conv2d {W(oc,ic,k,k), b(oc)};
// tconv2d {W(ic,oc,k,k), b(oc)}; others none.
struct Layer {
    LayerSpec spec;
    std::vector<int> in_shape;
    std::vector<int> out_shape;
    std::vector<Tensor> params;
};

// Builds the layer and initializes parameters uniform on [-a, a],
// a = sqrt(1/fan_in); draws weights then bias from rng.
Layer make_layer(const LayerSpec& spec, const std::vector<int>& in_shape, Rng& rng,
                 int tconv_output_pad = 0);

// What the backward pass needs from forward.
struct LayerContext {
    Tensor input;                 // batch input
    Tensor output;                // only kept for activations
    std::vector<std::int64_t> argmax;  // maxpool winner positions, flat per output element
};

// x has shape (N, *in_shape); returns (N, *out_shape). ctx may be null when
// no backward pass will follow.
Tensor layer_forward(const Layer& layer, const Tensor& x, LayerContext* ctx);

// Vector-Jacobian product: upstream gy shaped (N, *out_shape) -> input grad
// (N, *in_shape). When param_grads is non-null it must match params shapes
// and is accumulated into.
Tensor layer_vjp(const Layer& layer, const LayerContext& ctx, const Tensor& gy,
                 std::vector<Tensor>* param_grads);

// Zero tensors shaped like the layer's params.
std::vector<Tensor> zero_param_grads(const Layer& layer);

}  // namespace aeidc
