#include "aeidc/model.hpp"

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace aeidc {

namespace {

struct ResolvedLayer {
    LayerSpec spec;
    std::vector<int> in_shape;
    std::vector<int> out_shape;
    int tconv_pad = 0;
};

bool numel_equal(const std::vector<int>& a, const std::vector<int>& b) {
    return shape_numel(a) == shape_numel(b);
}

// Resolves a layer list forward from `in`, branching over transposed-conv
// output padding. accept(final_shape) decides whether a completed chain is
// valid; the lexicographically smallest padding assignment wins.
bool resolve_chain(const std::vector<LayerSpec>& specs, std::size_t idx, std::vector<int> cur,
                   const std::function<bool(const std::vector<int>&)>& accept,
                   std::vector<ResolvedLayer>& out) {
    if (idx == specs.size()) return accept(cur);
    const LayerSpec& spec = specs[idx];
    int pad_choices = 1;
    if (const auto* t = std::get_if<TConv2dSpec>(&spec)) pad_choices = t->stride;
    for (int op = 0; op < pad_choices; ++op) {
        std::vector<int> next;
        try {
            next = infer_out_shape(spec, cur, op);
        } catch (const ShapeError&) {
            continue;
        }
        out.push_back({spec, cur, next, op});
        if (resolve_chain(specs, idx + 1, next, accept, out)) return true;
        out.pop_back();
    }
    return false;
}

std::vector<Layer> materialize(const std::vector<ResolvedLayer>& resolved, Rng& rng) {
    std::vector<Layer> layers;
    layers.reserve(resolved.size());
    for (const auto& r : resolved) layers.push_back(make_layer(r.spec, r.in_shape, rng, r.tconv_pad));
    return layers;
}

}  // namespace

Autoencoder build_model(const std::vector<SubAESpec>& units, const std::vector<int>& input_shape,
                        std::uint64_t seed) {
    if (units.empty() || units.size() % 2 != 0)
        throw ValidationError("build_model: unit count must be even and positive, got " +
                              std::to_string(units.size()));
    const std::size_t num_units = units.size();

    // Resolve every encoder first: transposed-conv paddings in the encoder
    // chain are constrained globally by the symmetric-SAE closure (the last
    // encoder must land back on the input element count).
    std::vector<std::vector<ResolvedLayer>> enc_resolved(num_units);
    std::function<bool(std::size_t, std::vector<int>)> solve = [&](std::size_t u,
                                                                   std::vector<int> cur) -> bool {
        if (u == num_units) return numel_equal(cur, input_shape);
        std::vector<ResolvedLayer> attempt;
        auto accept = [&](const std::vector<int>& bottleneck) {
            enc_resolved[u] = attempt;
            if (solve(u + 1, bottleneck)) return true;
            enc_resolved[u].clear();
            return false;
        };
        return resolve_chain(units[u].encoder, 0, cur, accept, attempt);
    };
    if (!solve(0, input_shape))
        throw ValidationError(
            "build_model: encoders do not compose back to the input element count (input " +
            shape_to_string(input_shape) + ")");

    Autoencoder model;
    model.input_shape = input_shape;
    model.init_seed = seed;
    Rng rng(seed);

    std::vector<int> cur = input_shape;
    for (std::size_t u = 0; u < num_units; ++u) {
        SubAE unit;
        unit.input_shape = cur;
        unit.encoder = materialize(enc_resolved[u], rng);
        unit.bottleneck_shape = unit.encoder.empty() ? cur : unit.encoder.back().out_shape;

        // Decoder must land exactly on the unit input (flat output of equal
        // element count is accepted and reshaped by unit_reconstruct).
        std::vector<ResolvedLayer> dec_resolved;
        auto accept = [&](const std::vector<int>& final_shape) {
            return final_shape == unit.input_shape ||
                   (final_shape.size() == 1 && numel_equal(final_shape, unit.input_shape));
        };
        if (!resolve_chain(units[u].decoder, 0, unit.bottleneck_shape, accept, dec_resolved))
            throw ValidationError("build_model: unit " + std::to_string(u) +
                                  " decoder cannot reproduce the unit input shape " +
                                  shape_to_string(unit.input_shape) + " from bottleneck " +
                                  shape_to_string(unit.bottleneck_shape));
        unit.decoder = materialize(dec_resolved, rng);

        const std::size_t in_n = shape_numel(unit.input_shape);
        const std::size_t mid_n = shape_numel(unit.bottleneck_shape);
        const bool first_half = u < num_units / 2;
        if (first_half && mid_n > in_n)
            throw ValidationError("build_model: unit " + std::to_string(u) +
                                  " of the contracting half expands " + std::to_string(in_n) +
                                  " -> " + std::to_string(mid_n));
        if (!first_half && mid_n < in_n)
            throw ValidationError("build_model: unit " + std::to_string(u) +
                                  " of the expanding half contracts " + std::to_string(in_n) +
                                  " -> " + std::to_string(mid_n));

        cur = unit.bottleneck_shape;
        model.units.push_back(std::move(unit));
    }
    return model;
}

std::vector<SubAESpec> conv_preset_specs(const std::vector<int>& input_shape, bool sigmoid_output) {
    if (input_shape.size() != 3)
        throw ValidationError("conv preset needs a (C,H,W) input, got " +
                              shape_to_string(input_shape));
    const int c = input_shape[0];
    const int c1 = 4 * c, c2 = 8 * c;
    const Act hidden = sigmoid_output ? Act::kSigmoid : Act::kRelu;
    const std::optional<Act> out_act =
        sigmoid_output ? std::optional<Act>(Act::kSigmoid) : std::nullopt;

    auto act = [](Act a) { return LayerSpec{ActivationSpec{a}}; };
    std::vector<SubAESpec> units(4);
    units[0].encoder = {Conv2dSpec{c, c1, 3, 2, 1}, act(hidden)};
    units[0].decoder = {TConv2dSpec{c1, c, 3, 2, 1}};
    if (out_act) units[0].decoder.push_back(act(*out_act));
    units[1].encoder = {Conv2dSpec{c1, c2, 3, 2, 1}, act(hidden)};
    units[1].decoder = {TConv2dSpec{c2, c1, 3, 2, 1}, act(hidden)};
    units[2].encoder = {TConv2dSpec{c2, c1, 3, 2, 1}, act(hidden)};
    units[2].decoder = {Conv2dSpec{c1, c2, 3, 2, 1}, act(hidden)};
    units[3].encoder = {TConv2dSpec{c1, c, 3, 2, 1}};
    if (out_act) units[3].encoder.push_back(act(*out_act));
    units[3].decoder = {Conv2dSpec{c, c1, 3, 2, 1}, act(hidden)};
    return units;
}

std::vector<SubAESpec> dense_preset_specs(const std::vector<int>& input_shape, bool sigmoid_output) {
    const int m = static_cast<int>(shape_numel(input_shape));
    const int h1 = std::max(1, m / 2), h2 = std::max(1, m / 4);
    const Act hidden = sigmoid_output ? Act::kSigmoid : Act::kRelu;
    auto act = [](Act a) { return LayerSpec{ActivationSpec{a}}; };

    std::vector<SubAESpec> units(4);
    units[0].encoder = {DenseSpec{m, h1}, act(hidden)};
    units[0].decoder = {DenseSpec{h1, m}};
    if (sigmoid_output) units[0].decoder.push_back(act(Act::kSigmoid));
    units[1].encoder = {DenseSpec{h1, h2}, act(hidden)};
    units[1].decoder = {DenseSpec{h2, h1}, act(hidden)};
    units[2].encoder = {DenseSpec{h2, h1}, act(hidden)};
    units[2].decoder = {DenseSpec{h1, h2}, act(hidden)};
    units[3].encoder = {DenseSpec{h1, m}};
    if (sigmoid_output) units[3].encoder.push_back(act(Act::kSigmoid));
    units[3].decoder = {DenseSpec{m, h1}, act(hidden)};
    return units;
}

Tensor forward_layers(const std::vector<Layer>& layers, const Tensor& x,
                      std::vector<LayerContext>* ctxs) {
    if (ctxs) ctxs->resize(layers.size());
    Tensor cur = x;
    for (std::size_t i = 0; i < layers.size(); ++i)
        cur = layer_forward(layers[i], cur, ctxs ? &(*ctxs)[i] : nullptr);
    return cur;
}

Tensor backward_layers(const std::vector<Layer>& layers, const std::vector<LayerContext>& ctxs,
                       const Tensor& gy, std::vector<std::vector<Tensor>>* param_grads) {
    if (ctxs.size() != layers.size())
        throw ValidationError("backward_layers: context count mismatch");
    Tensor g = gy;
    for (std::size_t i = layers.size(); i-- > 0;) {
        std::vector<Tensor>* pg = param_grads ? &(*param_grads)[i] : nullptr;
        g = layer_vjp(layers[i], ctxs[i], g, pg);
    }
    return g;
}

Tensor encode_stack(const Autoencoder& model, const Tensor& x, int through) {
    if (through < 0 || through > static_cast<int>(model.units.size()))
        throw ValidationError("encode_stack: unit count " + std::to_string(through) +
                              " out of range [0, " + std::to_string(model.units.size()) + "]");
    Tensor cur = x;
    for (int u = 0; u < through; ++u) cur = forward_layers(model.units[u].encoder, cur, nullptr);
    return cur;
}

Tensor embed(const Autoencoder& model, const Tensor& x) {
    return encode_stack(model, x, static_cast<int>(model.units.size()) / 2);
}

static std::vector<int> batched_shape(int n, const std::vector<int>& per_sample) {
    std::vector<int> s{n};
    s.insert(s.end(), per_sample.begin(), per_sample.end());
    return s;
}

Tensor unit_reconstruct(const SubAE& unit, const Tensor& x) {
    Tensor z = forward_layers(unit.encoder, x, nullptr);
    Tensor y = forward_layers(unit.decoder, z, nullptr);
    return y.reshaped(batched_shape(x.dim(0), unit.input_shape));
}

Tensor sae_reconstruct(const Autoencoder& model, const Tensor& x) {
    return encode_stack(model, x, static_cast<int>(model.units.size())).reshaped(x.shape());
}

std::vector<Tensor*> collect_params(Autoencoder& model) {
    std::vector<Tensor*> out;
    for (auto& unit : model.units) {
        for (auto& l : unit.encoder)
            for (auto& p : l.params) out.push_back(&p);
        for (auto& l : unit.decoder)
            for (auto& p : l.params) out.push_back(&p);
    }
    return out;
}

std::vector<const Tensor*> collect_params(const Autoencoder& model) {
    std::vector<const Tensor*> out;
    for (const auto& unit : model.units) {
        for (const auto& l : unit.encoder)
            for (const auto& p : l.params) out.push_back(&p);
        for (const auto& l : unit.decoder)
            for (const auto& p : l.params) out.push_back(&p);
    }
    return out;
}

std::vector<Tensor*> collect_encoder_params(Autoencoder& model) {
    std::vector<Tensor*> out;
    for (auto& unit : model.units)
        for (auto& l : unit.encoder)
            for (auto& p : l.params) out.push_back(&p);
    return out;
}

// ---- checkpoint IO ---------------------------------------------------------

static void write_layer_line(std::ostream& os, const Layer& l) {
    os << "layer " << layer_spec_name(l.spec);
    if (const auto* d = std::get_if<DenseSpec>(&l.spec)) {
        os << " " << d->in << " " << d->out;
    } else if (const auto* c = std::get_if<Conv2dSpec>(&l.spec)) {
        os << " " << c->in_ch << " " << c->out_ch << " " << c->kernel << " " << c->stride << " "
           << c->padding;
    } else if (const auto* t = std::get_if<TConv2dSpec>(&l.spec)) {
        os << " " << t->in_ch << " " << t->out_ch << " " << t->kernel << " " << t->stride << " "
           << t->padding;
    } else if (const auto* m = std::get_if<MaxPool2dSpec>(&l.spec)) {
        os << " " << m->window;
    } else if (const auto* u = std::get_if<Upsample2dSpec>(&l.spec)) {
        os << " " << u->factor;
    }
    os << " in";
    for (int d : l.in_shape) os << " " << d;
    os << " out";
    for (int d : l.out_shape) os << " " << d;
    os << "\n";
}

void save_checkpoint(const Autoencoder& model, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << "aeidc-checkpoint v1\n";
    f << "seed " << model.init_seed << "\n";
    f << "input_shape";
    for (int d : model.input_shape) f << " " << d;
    f << "\n";
    f << "units " << model.units.size() << "\n";
    std::size_t total = 0;
    for (const auto* p : collect_params(model)) total += p->size();
    for (std::size_t u = 0; u < model.units.size(); ++u) {
        const SubAE& unit = model.units[u];
        f << "unit " << u << " encoder " << unit.encoder.size() << "\n";
        for (const auto& l : unit.encoder) write_layer_line(f, l);
        f << "unit " << u << " decoder " << unit.decoder.size() << "\n";
        for (const auto& l : unit.decoder) write_layer_line(f, l);
    }
    f << "data " << total << "\n";
    for (const auto* p : collect_params(model))
        f.write(reinterpret_cast<const char*>(p->data()),
                static_cast<std::streamsize>(p->size() * sizeof(double)));
    if (!f) throw FormatError("short write to " + path);
}

namespace {

std::vector<int> read_shape_tokens(std::istringstream& is, const std::string& stop_or_end,
                                   std::string* hit) {
    // Reads ints until `stop_or_end` token or stream end.
    std::vector<int> dims;
    std::string tok;
    while (is >> tok) {
        if (tok == stop_or_end) {
            if (hit) *hit = tok;
            return dims;
        }
        dims.push_back(std::stoi(tok));
    }
    if (hit) hit->clear();
    return dims;
}

Layer parse_layer_line(const std::string& line) {
    std::istringstream is(line);
    std::string word, kind;
    is >> word >> kind;
    if (word != "layer") throw FormatError("checkpoint: expected layer line, got '" + line + "'");
    LayerSpec spec;
    auto next_int = [&is, &line]() {
        int v;
        if (!(is >> v)) throw FormatError("checkpoint: truncated layer line '" + line + "'");
        return v;
    };
    if (kind == "dense") {
        DenseSpec d;
        d.in = next_int();
        d.out = next_int();
        spec = d;
    } else if (kind == "conv2d" || kind == "tconv2d") {
        int ic = next_int(), oc = next_int(), k = next_int(), s = next_int(), p = next_int();
        if (kind == "conv2d")
            spec = Conv2dSpec{ic, oc, k, s, p};
        else
            spec = TConv2dSpec{ic, oc, k, s, p};
    } else if (kind == "maxpool2d") {
        spec = MaxPool2dSpec{next_int()};
    } else if (kind == "upsample2d") {
        spec = Upsample2dSpec{next_int()};
    } else {
        spec = ActivationSpec{act_from_name(kind)};
    }
    std::string tag;
    is >> tag;
    if (tag != "in") throw FormatError("checkpoint: missing 'in' shape in '" + line + "'");
    std::string hit;
    Layer l;
    l.spec = spec;
    l.in_shape = read_shape_tokens(is, "out", &hit);
    if (hit != "out") throw FormatError("checkpoint: missing 'out' shape in '" + line + "'");
    l.out_shape = read_shape_tokens(is, "", nullptr);
    if (l.in_shape.empty() || l.out_shape.empty())
        throw FormatError("checkpoint: empty shapes in '" + line + "'");

    // Validate the recorded shapes against the spec.
    bool ok = false;
    if (const auto* t = std::get_if<TConv2dSpec>(&spec)) {
        for (int op = 0; op < t->stride && !ok; ++op) {
            try {
                ok = infer_out_shape(spec, l.in_shape, op) == l.out_shape;
            } catch (const ShapeError&) {
            }
        }
    } else {
        try {
            ok = infer_out_shape(spec, l.in_shape) == l.out_shape;
        } catch (const ShapeError&) {
        }
    }
    if (!ok)
        throw FormatError("checkpoint: recorded shapes are inconsistent with the layer spec: '" +
                          line + "'");

    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
        l.params = {Tensor({d->out, d->in}), Tensor({d->out})};
    } else if (const auto* c = std::get_if<Conv2dSpec>(&spec)) {
        l.params = {Tensor({c->out_ch, c->in_ch, c->kernel, c->kernel}), Tensor({c->out_ch})};
    } else if (const auto* t = std::get_if<TConv2dSpec>(&spec)) {
        l.params = {Tensor({t->in_ch, t->out_ch, t->kernel, t->kernel}), Tensor({t->out_ch})};
    }
    return l;
}

}  // namespace

Autoencoder load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(f, line)) throw FormatError(path + ": truncated header");
        return line;
    };
    if (next_line() != "aeidc-checkpoint v1") throw FormatError(path + ": bad magic '" + line + "'");

    Autoencoder model;
    {
        std::istringstream is(next_line());
        std::string tag;
        is >> tag >> model.init_seed;
        if (tag != "seed") throw FormatError(path + ": expected seed line");
    }
    {
        std::istringstream is(next_line());
        std::string tag;
        is >> tag;
        if (tag != "input_shape") throw FormatError(path + ": expected input_shape line");
        int d;
        while (is >> d) model.input_shape.push_back(d);
    }
    std::size_t num_units = 0;
    {
        std::istringstream is(next_line());
        std::string tag;
        is >> tag >> num_units;
        if (tag != "units") throw FormatError(path + ": expected units line");
    }
    model.units.resize(num_units);
    for (std::size_t u = 0; u < num_units; ++u) {
        for (const char* part : {"encoder", "decoder"}) {
            std::istringstream is(next_line());
            std::string tag, which;
            std::size_t uu = 0, count = 0;
            is >> tag >> uu >> which >> count;
            if (tag != "unit" || uu != u || which != part)
                throw FormatError(path + ": malformed unit header '" + line + "'");
            auto& layers = (which == "encoder") ? model.units[u].encoder : model.units[u].decoder;
            for (std::size_t i = 0; i < count; ++i) layers.push_back(parse_layer_line(next_line()));
        }
        model.units[u].input_shape = model.units[u].encoder.empty()
                                         ? model.input_shape
                                         : model.units[u].encoder.front().in_shape;
        model.units[u].bottleneck_shape = model.units[u].encoder.empty()
                                              ? model.units[u].input_shape
                                              : model.units[u].encoder.back().out_shape;
    }
    std::size_t total = 0;
    {
        std::istringstream is(next_line());
        std::string tag;
        is >> tag >> total;
        if (tag != "data") throw FormatError(path + ": expected data line");
    }
    std::size_t have = 0;
    for (auto* p : collect_params(model)) have += p->size();
    if (have != total)
        throw FormatError(path + ": data count " + std::to_string(total) +
                          " does not match layer parameters (" + std::to_string(have) + ")");
    for (auto* p : collect_params(model)) {
        f.read(reinterpret_cast<char*>(p->data()),
               static_cast<std::streamsize>(p->size() * sizeof(double)));
        if (static_cast<std::size_t>(f.gcount()) != p->size() * sizeof(double))
            throw FormatError(path + ": truncated parameter payload");
    }
    return model;
}

}  // namespace aeidc
