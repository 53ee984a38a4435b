#include "aeidc/layers.hpp"

#include <cmath>
#include <limits>

namespace aeidc {

std::string act_name(Act a) {
    switch (a) {
        case Act::kRelu: return "relu";
        case Act::kSigmoid: return "sigmoid";
        case Act::kTanh: return "tanh";
    }
    return "?";
}

Act act_from_name(const std::string& name) {
    if (name == "relu") return Act::kRelu;
    if (name == "sigmoid") return Act::kSigmoid;
    if (name == "tanh") return Act::kTanh;
    throw ValidationError("unknown activation '" + name + "'");
}

std::string layer_spec_name(const LayerSpec& spec) {
    struct V {
        std::string operator()(const DenseSpec&) const { return "dense"; }
        std::string operator()(const Conv2dSpec&) const { return "conv2d"; }
        std::string operator()(const TConv2dSpec&) const { return "tconv2d"; }
        std::string operator()(const MaxPool2dSpec&) const { return "maxpool2d"; }
        std::string operator()(const Upsample2dSpec&) const { return "upsample2d"; }
        std::string operator()(const ActivationSpec& a) const { return act_name(a.act); }
    };
    return std::visit(V{}, spec);
}

bool layer_has_params(const LayerSpec& spec) {
    return std::holds_alternative<DenseSpec>(spec) || std::holds_alternative<Conv2dSpec>(spec) ||
           std::holds_alternative<TConv2dSpec>(spec);
}

static void require_chw(const std::vector<int>& in, const std::string& who) {
    if (in.size() != 3)
        throw ShapeError(who + ": expected a (C,H,W) input, got " + shape_to_string(in));
}

std::vector<int> infer_out_shape(const LayerSpec& spec, const std::vector<int>& in,
                                 int tconv_output_pad) {
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
        if (static_cast<std::size_t>(d->in) != shape_numel(in))
            throw ShapeError("dense: input " + shape_to_string(in) + " has " +
                             std::to_string(shape_numel(in)) + " elements, spec wants " +
                             std::to_string(d->in));
        return {d->out};
    }
    if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
        require_chw(in, "conv2d");
        if (in[0] != c->in_ch)
            throw ShapeError("conv2d: input has " + std::to_string(in[0]) + " channels, spec wants " +
                             std::to_string(c->in_ch));
        const int oh = (in[1] + 2 * c->padding - c->kernel) / c->stride + 1;
        const int ow = (in[2] + 2 * c->padding - c->kernel) / c->stride + 1;
        if (in[1] + 2 * c->padding < c->kernel || in[2] + 2 * c->padding < c->kernel)
            throw ShapeError("conv2d: kernel larger than padded input");
        return {c->out_ch, oh, ow};
    }
    if (const auto* t = std::get_if<TConv2dSpec>(&spec)) {
        require_chw(in, "tconv2d");
        if (in[0] != t->in_ch)
            throw ShapeError("tconv2d: input has " + std::to_string(in[0]) + " channels, spec wants " +
                             std::to_string(t->in_ch));
        if (tconv_output_pad < 0 || tconv_output_pad >= t->stride)
            throw ShapeError("tconv2d: output padding must lie in [0, stride)");
        const int oh = (in[1] - 1) * t->stride + t->kernel - 2 * t->padding + tconv_output_pad;
        const int ow = (in[2] - 1) * t->stride + t->kernel - 2 * t->padding + tconv_output_pad;
        if (oh < 1 || ow < 1) throw ShapeError("tconv2d: non-positive output size");
        return {t->out_ch, oh, ow};
    }
    if (const auto* m = std::get_if<MaxPool2dSpec>(&spec)) {
        require_chw(in, "maxpool2d");
        const int oh = in[1] / m->window;
        const int ow = in[2] / m->window;
        if (oh < 1 || ow < 1) throw ShapeError("maxpool2d: window larger than input");
        return {in[0], oh, ow};
    }
    if (const auto* u = std::get_if<Upsample2dSpec>(&spec)) {
        require_chw(in, "upsample2d");
        return {in[0], in[1] * u->factor, in[2] * u->factor};
    }
    return in;  // activation
}

Layer make_layer(const LayerSpec& spec, const std::vector<int>& in_shape, Rng& rng,
                 int tconv_output_pad) {
    Layer l;
    l.spec = spec;
    l.in_shape = in_shape;
    l.out_shape = infer_out_shape(spec, in_shape, tconv_output_pad);

    auto init = [&rng](Tensor& t, int fan_in) {
        const double a = std::sqrt(1.0 / fan_in);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-a, a);
    };

    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
        Tensor w({d->out, d->in}), b({d->out});
        init(w, d->in);
        init(b, d->in);
        l.params = {std::move(w), std::move(b)};
    } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
        Tensor w({c->out_ch, c->in_ch, c->kernel, c->kernel}), b({c->out_ch});
        const int fan_in = c->in_ch * c->kernel * c->kernel;
        init(w, fan_in);
        init(b, fan_in);
        l.params = {std::move(w), std::move(b)};
    } else if (const auto* t = std::get_if<TConv2dSpec>(&spec)) {
        Tensor w({t->in_ch, t->out_ch, t->kernel, t->kernel}), b({t->out_ch});
        const int fan_in = t->in_ch * t->kernel * t->kernel;
        init(w, fan_in);
        init(b, fan_in);
        l.params = {std::move(w), std::move(b)};
    }
    return l;
}

std::vector<Tensor> zero_param_grads(const Layer& layer) {
    std::vector<Tensor> g;
    g.reserve(layer.params.size());
    for (const auto& p : layer.params) g.emplace_back(Tensor::zeros(p.shape()));
    return g;
}

// ---- convolution kernels -------------------------------------------------
// x (N,ic,H,W), w (oc,ic,k,k) -> y (N,oc,OH,OW)

static Tensor conv2d_forward(const Tensor& x, const Tensor& w, int s, int p, int oh, int ow) {
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int oc = w.dim(0), k = w.dim(2);
    Tensor y({n, oc, oh, ow});
    for (int b = 0; b < n; ++b) {
        for (int o = 0; o < oc; ++o) {
            for (int c = 0; c < ic; ++c) {
                for (int oi = 0; oi < oh; ++oi) {
                    const int i0 = oi * s - p;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int j0 = oj * s - p;
                        double acc = 0.0;
                        for (int u = 0; u < k; ++u) {
                            const int i = i0 + u;
                            if (i < 0 || i >= h) continue;
                            for (int v = 0; v < k; ++v) {
                                const int j = j0 + v;
                                if (j < 0 || j >= wd) continue;
                                acc += w(o, c, u, v) * x(b, c, i, j);
                            }
                        }
                        y(b, o, oi, oj) += acc;
                    }
                }
            }
        }
    }
    return y;
}

// Adjoint of conv2d_forward in its input: gy (N,oc,OH,OW) -> gx (N,ic,H,W).
static Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int s, int p, int h, int wd) {
    const int n = gy.dim(0), oc = gy.dim(1), oh = gy.dim(2), ow = gy.dim(3);
    const int ic = w.dim(1), k = w.dim(2);
    Tensor gx({n, ic, h, wd});
    for (int b = 0; b < n; ++b) {
        for (int o = 0; o < oc; ++o) {
            for (int c = 0; c < ic; ++c) {
                for (int oi = 0; oi < oh; ++oi) {
                    const int i0 = oi * s - p;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int j0 = oj * s - p;
                        const double g = gy(b, o, oi, oj);
                        if (g == 0.0) continue;
                        for (int u = 0; u < k; ++u) {
                            const int i = i0 + u;
                            if (i < 0 || i >= h) continue;
                            for (int v = 0; v < k; ++v) {
                                const int j = j0 + v;
                                if (j < 0 || j >= wd) continue;
                                gx(b, c, i, j) += w(o, c, u, v) * g;
                            }
                        }
                    }
                }
            }
        }
    }
    return gx;
}

// gw(o,c,u,v) = sum over batch and output positions of x * gy.
static void conv2d_backward_weight(const Tensor& x, const Tensor& gy, int s, int p, Tensor& gw) {
    const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
    const int oc = gy.dim(1), oh = gy.dim(2), ow = gy.dim(3);
    const int ic = gw.dim(1), k = gw.dim(2);
    for (int b = 0; b < n; ++b) {
        for (int o = 0; o < oc; ++o) {
            for (int c = 0; c < ic; ++c) {
                for (int oi = 0; oi < oh; ++oi) {
                    const int i0 = oi * s - p;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int j0 = oj * s - p;
                        const double g = gy(b, o, oi, oj);
                        if (g == 0.0) continue;
                        for (int u = 0; u < k; ++u) {
                            const int i = i0 + u;
                            if (i < 0 || i >= h) continue;
                            for (int v = 0; v < k; ++v) {
                                const int j = j0 + v;
                                if (j < 0 || j >= wd) continue;
                                gw(o, c, u, v) += x(b, c, i, j) * g;
                            }
                        }
                    }
                }
            }
        }
    }
}

static void add_channel_bias(Tensor& y, const Tensor& b) {
    const int n = y.dim(0), c = y.dim(1);
    const std::size_t plane = y.size() / (static_cast<std::size_t>(n) * c);
    std::size_t idx = 0;
    for (int bi = 0; bi < n; ++bi)
        for (int ci = 0; ci < c; ++ci) {
            const double bv = b[static_cast<std::size_t>(ci)];
            for (std::size_t t = 0; t < plane; ++t) y[idx++] += bv;
        }
}

static void channel_bias_grad(const Tensor& gy, Tensor& gb) {
    const int n = gy.dim(0), c = gy.dim(1);
    const std::size_t plane = gy.size() / (static_cast<std::size_t>(n) * c);
    std::size_t idx = 0;
    for (int bi = 0; bi < n; ++bi)
        for (int ci = 0; ci < c; ++ci) {
            double s = gb[static_cast<std::size_t>(ci)];
            for (std::size_t t = 0; t < plane; ++t) s += gy[idx++];
            gb[static_cast<std::size_t>(ci)] = s;
        }
}

// ---- per-kind forward ----------------------------------------------------

static std::vector<int> batched(int n, const std::vector<int>& per_sample) {
    std::vector<int> s;
    s.reserve(per_sample.size() + 1);
    s.push_back(n);
    s.insert(s.end(), per_sample.begin(), per_sample.end());
    return s;
}

Tensor layer_forward(const Layer& layer, const Tensor& x, LayerContext* ctx) {
    if (x.rank() < 2) throw ShapeError("layer_forward: input must be batched, got " + x.shape_str());
    const int n = x.dim(0);
    {
        std::vector<int> per_sample(x.shape().begin() + 1, x.shape().end());
        if (shape_numel(per_sample) != shape_numel(layer.in_shape))
            throw ShapeError("layer_forward(" + layer_spec_name(layer.spec) + "): input " +
                             x.shape_str() + " does not match layer input " +
                             shape_to_string(layer.in_shape));
    }
    if (ctx) {
        ctx->input = x;
        ctx->output = Tensor();
        ctx->argmax.clear();
    }

    if (const auto* d = std::get_if<DenseSpec>(&layer.spec)) {
        const Tensor xin = x.reshaped({n, d->in});
        const Tensor& w = layer.params[0];
        const Tensor& b = layer.params[1];
        Tensor y({n, d->out});
        for (int bi = 0; bi < n; ++bi) {
            for (int o = 0; o < d->out; ++o) {
                double acc = b[static_cast<std::size_t>(o)];
                const double* wr = w.data() + static_cast<std::size_t>(o) * d->in;
                const double* xr = xin.data() + static_cast<std::size_t>(bi) * d->in;
                for (int i = 0; i < d->in; ++i) acc += wr[i] * xr[i];
                y(bi, o) = acc;
            }
        }
        return y;
    }
    if (const auto* c = std::get_if<Conv2dSpec>(&layer.spec)) {
        const Tensor xin = x.reshaped(batched(n, layer.in_shape));
        Tensor y = conv2d_forward(xin, layer.params[0], c->stride, c->padding, layer.out_shape[1],
                                  layer.out_shape[2]);
        add_channel_bias(y, layer.params[1]);
        return y;
    }
    if (const auto* t = std::get_if<TConv2dSpec>(&layer.spec)) {
        const Tensor xin = x.reshaped(batched(n, layer.in_shape));
        Tensor y = conv2d_backward_input(xin, layer.params[0], t->stride, t->padding,
                                         layer.out_shape[1], layer.out_shape[2]);
        add_channel_bias(y, layer.params[1]);
        return y;
    }
    if (const auto* m = std::get_if<MaxPool2dSpec>(&layer.spec)) {
        const Tensor xin = x.reshaped(batched(n, layer.in_shape));
        const int ch = layer.in_shape[0], h = layer.in_shape[1], wd = layer.in_shape[2];
        const int oh = layer.out_shape[1], ow = layer.out_shape[2];
        const int win = m->window;
        Tensor y({n, ch, oh, ow});
        if (ctx) ctx->argmax.assign(y.size(), 0);
        std::size_t out_idx = 0;
        for (int bi = 0; bi < n; ++bi) {
            for (int ci = 0; ci < ch; ++ci) {
                for (int oi = 0; oi < oh; ++oi) {
                    for (int oj = 0; oj < ow; ++oj, ++out_idx) {
                        double best = -std::numeric_limits<double>::infinity();
                        std::int64_t best_at = -1;
                        for (int u = 0; u < win; ++u) {
                            const int i = oi * win + u;
                            for (int v = 0; v < win; ++v) {
                                const int j = oj * win + v;
                                const double val = xin(bi, ci, i, j);
                                if (val > best) {
                                    best = val;
                                    best_at =
                                        ((static_cast<std::int64_t>(bi) * ch + ci) * h + i) * wd + j;
                                }
                            }
                        }
                        y[out_idx] = best;
                        if (ctx) ctx->argmax[out_idx] = best_at;
                    }
                }
            }
        }
        return y;
    }
    if (const auto* u = std::get_if<Upsample2dSpec>(&layer.spec)) {
        const Tensor xin = x.reshaped(batched(n, layer.in_shape));
        const int ch = layer.in_shape[0];
        const int oh = layer.out_shape[1], ow = layer.out_shape[2];
        const int f = u->factor;
        Tensor y({n, ch, oh, ow});
        for (int bi = 0; bi < n; ++bi)
            for (int ci = 0; ci < ch; ++ci)
                for (int i = 0; i < oh; ++i)
                    for (int j = 0; j < ow; ++j) y(bi, ci, i, j) = xin(bi, ci, i / f, j / f);
        return y;
    }
    const auto& a = std::get<ActivationSpec>(layer.spec);
    Tensor y = x;
    switch (a.act) {
        case Act::kRelu:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
            break;
        case Act::kSigmoid:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
            break;
        case Act::kTanh:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
            break;
    }
    if (ctx) ctx->output = y;
    return y;
}

// ---- per-kind vjp ----------------------------------------------------------

Tensor layer_vjp(const Layer& layer, const LayerContext& ctx, const Tensor& gy,
                 std::vector<Tensor>* param_grads) {
    if (ctx.input.empty()) throw ValidationError("layer_vjp: missing cached forward context");
    const int n = ctx.input.dim(0);
    if (param_grads && param_grads->size() != layer.params.size())
        throw ValidationError("layer_vjp: param_grads arity mismatch");

    if (const auto* d = std::get_if<DenseSpec>(&layer.spec)) {
        const Tensor xin = ctx.input.reshaped({n, d->in});
        const Tensor gyv = gy.reshaped({n, d->out});
        const Tensor& w = layer.params[0];
        if (param_grads) {
            Tensor& gw = (*param_grads)[0];
            Tensor& gb = (*param_grads)[1];
            for (int bi = 0; bi < n; ++bi)
                for (int o = 0; o < d->out; ++o) {
                    const double g = gyv(bi, o);
                    gb[static_cast<std::size_t>(o)] += g;
                    if (g == 0.0) continue;
                    double* gwr = gw.data() + static_cast<std::size_t>(o) * d->in;
                    const double* xr = xin.data() + static_cast<std::size_t>(bi) * d->in;
                    for (int i = 0; i < d->in; ++i) gwr[i] += g * xr[i];
                }
        }
        Tensor gx({n, d->in});
        for (int bi = 0; bi < n; ++bi)
            for (int o = 0; o < d->out; ++o) {
                const double g = gyv(bi, o);
                if (g == 0.0) continue;
                const double* wr = w.data() + static_cast<std::size_t>(o) * d->in;
                double* gxr = gx.data() + static_cast<std::size_t>(bi) * d->in;
                for (int i = 0; i < d->in; ++i) gxr[i] += g * wr[i];
            }
        return gx.reshaped(ctx.input.shape());
    }
    if (const auto* c = std::get_if<Conv2dSpec>(&layer.spec)) {
        const Tensor xin = ctx.input.reshaped(batched(n, layer.in_shape));
        const Tensor gyv = gy.reshaped(batched(n, layer.out_shape));
        if (param_grads) {
            conv2d_backward_weight(xin, gyv, c->stride, c->padding, (*param_grads)[0]);
            channel_bias_grad(gyv, (*param_grads)[1]);
        }
        return conv2d_backward_input(gyv, layer.params[0], c->stride, c->padding, layer.in_shape[1],
                                     layer.in_shape[2])
            .reshaped(ctx.input.shape());
    }
    if (const auto* t = std::get_if<TConv2dSpec>(&layer.spec)) {
        const Tensor xin = ctx.input.reshaped(batched(n, layer.in_shape));
        const Tensor gyv = gy.reshaped(batched(n, layer.out_shape));
        if (param_grads) {
            // <g, adj(W) x> = <conv_W(g), x>: the weight grad swaps the roles
            // of input and upstream in the conv weight-grad kernel.
            conv2d_backward_weight(gyv, xin, t->stride, t->padding, (*param_grads)[0]);
            channel_bias_grad(gyv, (*param_grads)[1]);
        }
        return conv2d_forward(gyv, layer.params[0], t->stride, t->padding, layer.in_shape[1],
                              layer.in_shape[2])
            .reshaped(ctx.input.shape());
    }
    if (std::holds_alternative<MaxPool2dSpec>(layer.spec)) {
        Tensor gx(batched(n, layer.in_shape));
        for (std::size_t oi = 0; oi < gy.size(); ++oi)
            gx[static_cast<std::size_t>(ctx.argmax[oi])] += gy[oi];
        return gx.reshaped(ctx.input.shape());
    }
    if (const auto* u = std::get_if<Upsample2dSpec>(&layer.spec)) {
        const Tensor gyv = gy.reshaped(batched(n, layer.out_shape));
        const int ch = layer.in_shape[0], ih = layer.in_shape[1], iw = layer.in_shape[2];
        const int f = u->factor;
        Tensor gx({n, ch, ih, iw});
        for (int bi = 0; bi < n; ++bi)
            for (int ci = 0; ci < ch; ++ci)
                for (int i = 0; i < layer.out_shape[1]; ++i)
                    for (int j = 0; j < layer.out_shape[2]; ++j)
                        gx(bi, ci, i / f, j / f) += gyv(bi, ci, i, j);
        return gx.reshaped(ctx.input.shape());
    }
    const auto& a = std::get<ActivationSpec>(layer.spec);
    Tensor gx = gy;
    const Tensor& y = ctx.output;
    switch (a.act) {
        case Act::kRelu:
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = y[i] > 0.0 ? gx[i] : 0.0;
            break;
        case Act::kSigmoid:
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= y[i] * (1.0 - y[i]);
            break;
        case Act::kTanh:
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= 1.0 - y[i] * y[i];
            break;
    }
    return gx.reshaped(ctx.input.shape());
}

}  // namespace aeidc
