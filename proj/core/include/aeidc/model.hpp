#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeidc/layers.hpp"

namespace aeidc {

// One autoencoder unit. decode() output is reshaped to the unit's input
// shape (a dense decoder emits a flat vector of the right size).
struct SubAE {
    std::vector<Layer> encoder;
    std::vector<Layer> decoder;
    std::vector<int> input_shape;       // per-sample input of this unit
    std::vector<int> bottleneck_shape;  // encoder output
};

struct SubAESpec {
    std::vector<LayerSpec> encoder;
    std::vector<LayerSpec> decoder;
};

// Symmetric stacked autoencoder: the first half of the units contract
// (bottleneck no larger than input), the second half expand, and the
// composition of all encoders returns to the input element count.
struct Autoencoder {
    std::vector<SubAE> units;
    std::vector<int> input_shape;
    std::uint64_t init_seed = 0;
};

// Resolves shapes unit by unit (searching transposed-conv output padding so
// every decoder lands exactly on its unit's input shape), validates the
// symmetric-SAE structure, and initializes parameters from seed.
Autoencoder build_model(const std::vector<SubAESpec>& units, const std::vector<int>& input_shape,
                        std::uint64_t seed);

// Reference 4-unit convolutional architecture: conv(C->4C,k3,s2,p1)+relu and
// conv(4C->8C,k3,s2,p1)+relu encoders with mirrored transposed-conv decoders;
// the second half expands back. final_act caps reconstruction outputs
// (sigmoid for BCE training, nothing for MSE).
std::vector<SubAESpec> conv_preset_specs(const std::vector<int>& input_shape, bool sigmoid_output);

// Dense 4-unit ladder m -> m/2 -> m/4 -> m/2 -> m for flat or flattened data.
std::vector<SubAESpec> dense_preset_specs(const std::vector<int>& input_shape, bool sigmoid_output);

// Composition of the first `through` unit encoders; through = 0 returns x.
// x is batched (N, ...).
Tensor encode_stack(const Autoencoder& model, const Tensor& x, int through);

// First L/2 encoders: the inference-time feature extractor.
Tensor embed(const Autoencoder& model, const Tensor& x);

// decode(encode(x)) for one unit.
Tensor unit_reconstruct(const SubAE& unit, const Tensor& x);

// All L encoders; output reshaped to x's shape.
Tensor sae_reconstruct(const Autoencoder& model, const Tensor& x);

// ---- forward/backward over a layer list ----

Tensor forward_layers(const std::vector<Layer>& layers, const Tensor& x,
                      std::vector<LayerContext>* ctxs);

// Walks the vjp chain in reverse. param_grads, when non-null, has one entry
// per layer (zero_param_grads shapes) and is accumulated into.
Tensor backward_layers(const std::vector<Layer>& layers, const std::vector<LayerContext>& ctxs,
                       const Tensor& gy, std::vector<std::vector<Tensor>>* param_grads);

// ---- parameter plumbing ----

// Pointers to every parameter tensor of the model in declaration order:
// units first to last, encoder then decoder, layers in order.
std::vector<Tensor*> collect_params(Autoencoder& model);
std::vector<const Tensor*> collect_params(const Autoencoder& model);
// Only the encoder parameters of every unit (global training targets).
std::vector<Tensor*> collect_encoder_params(Autoencoder& model);

// ---- checkpoint file ----
// Text header (format version, seed, shapes, one line per layer) terminated
// by a "data <n-doubles>" line, then raw little-endian float64 parameters in
// declaration order. Loading validates layer shapes.
void save_checkpoint(const Autoencoder& model, const std::string& path);
Autoencoder load_checkpoint(const std::string& path);

}  // namespace aeidc
