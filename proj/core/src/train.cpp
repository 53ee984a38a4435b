#include "aeidc/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "aeidc/rng.hpp"

namespace aeidc {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::kPlain: return "plain";
        case Variant::kDenoising: return "denoising";
        case Variant::kSparse: return "sparse";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "plain") return Variant::kPlain;
    if (name == "denoising") return Variant::kDenoising;
    if (name == "sparse") return Variant::kSparse;
    throw ValidationError("unknown variant '" + name + "'");
}

std::string stage_mode_name(StageMode m) {
    switch (m) {
        case StageMode::kTwoStage: return "two_stage";
        case StageMode::kLayerwiseOnly: return "layerwise_only";
        case StageMode::kGlobalOnly: return "global_only";
        case StageMode::kBaseline: return "baseline";
    }
    return "?";
}

StageMode stage_mode_from_name(const std::string& name) {
    if (name == "two_stage") return StageMode::kTwoStage;
    if (name == "layerwise_only") return StageMode::kLayerwiseOnly;
    if (name == "global_only") return StageMode::kGlobalOnly;
    if (name == "baseline") return StageMode::kBaseline;
    throw ValidationError("unknown stage_mode '" + name + "'");
}

void TrainConfig::validate() const {
    if (lambda1 < 0.0) throw ValidationError("training.lambda1 must be >= 0");
    if (lambda2 < 0.0) throw ValidationError("training.lambda2 must be >= 0");
    if (layerwise_epochs < 0) throw ValidationError("training.layerwise_epochs must be >= 0");
    if (global_epochs < 0) throw ValidationError("training.global_epochs must be >= 0");
    if (batch_size < 2) throw ValidationError("training.batch_size must be >= 2 (GID needs 2 samples)");
    if (optimizer.learning_rate <= 0.0) throw ValidationError("training.learning_rate must be > 0");
    if (noise_std < 0.0) throw ValidationError("training.noise_std must be >= 0");
    if (sparsity_weight < 0.0) throw ValidationError("training.sparsity_weight must be >= 0");
    if (recon_weight < 0.0) throw ValidationError("training.recon_weight must be >= 0");
    if (variant == Variant::kDenoising && noise_std == 0.0)
        throw ValidationError("training.noise_std must be set for the denoising variant");
}

Tensor apply_variant(const Tensor& batch, const TrainConfig& cfg, Rng& rng) {
    if (cfg.variant != Variant::kDenoising || cfg.noise_std == 0.0) return batch;
    Tensor noisy = batch;
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += rng.gaussian(0.0, cfg.noise_std);
    return noisy;
}

namespace {

struct EffectiveLambdas {
    double l1, l2;
};

EffectiveLambdas effective_lambdas(const TrainConfig& cfg) {
    if (cfg.stage_mode == StageMode::kBaseline) return {0.0, 0.0};
    return {cfg.lambda1, cfg.lambda2};
}

double mean_abs(const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += std::fabs(t[i]);
    return t.size() ? s / static_cast<double>(t.size()) : 0.0;
}

// d(mean |z|)/dz scaled by weight.
Tensor sparse_gradient(const Tensor& z, double weight) {
    Tensor g(z.shape());
    const double c = weight / static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) g[i] = z[i] > 0.0 ? c : (z[i] < 0.0 ? -c : 0.0);
    return g;
}

void check_finite_loss(double loss, const std::string& where) {
    if (!std::isfinite(loss)) throw NumericError("non-finite loss during " + where);
}

std::vector<int> batched_shape(int n, const std::vector<int>& per_sample) {
    std::vector<int> s{n};
    s.insert(s.end(), per_sample.begin(), per_sample.end());
    return s;
}

}  // namespace

std::vector<StageLog> train_layerwise(Autoencoder& model, const LabeledDataset& data,
                                      const TrainConfig& cfg) {
    cfg.validate();
    if (data.train_idx.empty()) throw ValidationError("train_layerwise: empty train split");
    const auto [l1, l2] = effective_lambdas(cfg);
    const int num_units = static_cast<int>(model.units.size());
    std::vector<StageLog> logs;
    Rng noise_rng(cfg.seed ^ 0xdeadbeefULL);

    for (int u = 0; u < num_units; ++u) {
        SubAE& unit = model.units[static_cast<std::size_t>(u)];
        StageLog log;
        log.name = "layerwise_unit" + std::to_string(u + 1);

        std::vector<Tensor*> params;
        for (auto& l : unit.encoder)
            for (auto& p : l.params) params.push_back(&p);
        for (auto& l : unit.decoder)
            for (auto& p : l.params) params.push_back(&p);
        Optimizer opt(cfg.optimizer, params);

        for (int epoch = 0; epoch < cfg.layerwise_epochs; ++epoch) {
            EpochRecord rec;
            rec.epoch = epoch + 1;
            int batches_seen = 0;
            // Distinct shuffle stream per unit so units do not replay the
            // same batch order.
            const int shuffle_epoch = u * cfg.layerwise_epochs + epoch;
            for (const auto& idx : batch_indices(data.train_idx, cfg.batch_size, cfg.seed,
                                                 shuffle_epoch)) {
                const Tensor raw = gather_batch(data, idx);
                // Frozen composition of the previous encoders.
                const Tensor unit_input = encode_stack(model, raw, u);
                const Tensor fed = apply_variant(unit_input, cfg, noise_rng);

                std::vector<LayerContext> enc_ctx, dec_ctx;
                const Tensor z = forward_layers(unit.encoder, fed, &enc_ctx);
                Tensor xhat = forward_layers(unit.decoder, z, &dec_ctx);
                const Tensor xhat_shaped =
                    xhat.reshaped(batched_shape(raw.dim(0), unit.input_shape));
                const Tensor target =
                    unit_input.reshaped(batched_shape(raw.dim(0), unit.input_shape));

                const LossBreakdown lb =
                    total_loss(target, xhat_shaped, l1, l2, cfg.recon, cfg.recon_weight);
                double objective = lb.total;
                if (cfg.variant == Variant::kSparse && cfg.sparsity_weight > 0.0)
                    objective += cfg.sparsity_weight * mean_abs(z);
                check_finite_loss(objective, log.name);

                std::vector<std::vector<Tensor>> enc_grads, dec_grads;
                for (const auto& l : unit.encoder) enc_grads.push_back(zero_param_grads(l));
                for (const auto& l : unit.decoder) dec_grads.push_back(zero_param_grads(l));

                Tensor g = total_loss_gradient(target, xhat_shaped, l1, l2, cfg.recon,
                                               cfg.recon_weight)
                               .reshaped(xhat.shape());
                g = backward_layers(unit.decoder, dec_ctx, g, &dec_grads);
                if (cfg.variant == Variant::kSparse && cfg.sparsity_weight > 0.0)
                    axpy(1.0, sparse_gradient(z, cfg.sparsity_weight), g);
                backward_layers(unit.encoder, enc_ctx, g, &enc_grads);

                std::vector<Tensor> flat;
                for (auto& lg : enc_grads)
                    for (auto& t : lg) flat.push_back(std::move(t));
                for (auto& lg : dec_grads)
                    for (auto& t : lg) flat.push_back(std::move(t));
                opt.step(params, flat);

                rec.reconstruction += lb.reconstruction;
                rec.gid += lb.gid_term;
                rec.lid += lb.lid_term;
                rec.total += objective;
                ++batches_seen;
            }
            if (batches_seen > 0) {
                rec.reconstruction /= batches_seen;
                rec.gid /= batches_seen;
                rec.lid /= batches_seen;
                rec.total /= batches_seen;
            }
            log.epochs.push_back(rec);
        }
        logs.push_back(std::move(log));
    }
    return logs;
}

StageLog train_global(Autoencoder& model, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.train_idx.empty()) throw ValidationError("train_global: empty train split");
    const auto [l1, l2] = effective_lambdas(cfg);
    const int num_units = static_cast<int>(model.units.size());
    const int embed_units = num_units / 2;
    StageLog log;
    log.name = "global";
    Rng noise_rng(cfg.seed ^ 0xfeedfaceULL);

    std::vector<Tensor*> params = collect_encoder_params(model);
    Optimizer opt(cfg.optimizer, params);

    for (int epoch = 0; epoch < cfg.global_epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch + 1;
        int batches_seen = 0;
        // Offset the shuffle stream past the layerwise epochs.
        const int shuffle_epoch = num_units * cfg.layerwise_epochs + epoch;
        for (const auto& idx : batch_indices(data.train_idx, cfg.batch_size, cfg.seed,
                                             shuffle_epoch)) {
            const Tensor x = gather_batch(data, idx);
            const Tensor fed = apply_variant(x, cfg, noise_rng);

            std::vector<std::vector<LayerContext>> ctxs(static_cast<std::size_t>(num_units));
            Tensor cur = fed;
            Tensor bottleneck;
            for (int u = 0; u < num_units; ++u) {
                cur = forward_layers(model.units[static_cast<std::size_t>(u)].encoder, cur,
                                     &ctxs[static_cast<std::size_t>(u)]);
                if (u + 1 == embed_units) bottleneck = cur;
            }
            const Tensor xhat = cur.reshaped(x.shape());

            const LossBreakdown lb = total_loss(x, xhat, l1, l2, cfg.recon, cfg.recon_weight);
            double objective = lb.total;
            if (cfg.variant == Variant::kSparse && cfg.sparsity_weight > 0.0)
                objective += cfg.sparsity_weight * mean_abs(bottleneck);
            check_finite_loss(objective, log.name);

            std::vector<std::vector<std::vector<Tensor>>> pgrads(
                static_cast<std::size_t>(num_units));
            for (int u = 0; u < num_units; ++u)
                for (const auto& l : model.units[static_cast<std::size_t>(u)].encoder)
                    pgrads[static_cast<std::size_t>(u)].push_back(zero_param_grads(l));

            Tensor g = total_loss_gradient(x, xhat, l1, l2, cfg.recon, cfg.recon_weight)
                           .reshaped(cur.shape());
            for (int u = num_units; u-- > 0;) {
                g = backward_layers(model.units[static_cast<std::size_t>(u)].encoder,
                                    ctxs[static_cast<std::size_t>(u)], g,
                                    &pgrads[static_cast<std::size_t>(u)]);
                if (u == embed_units && cfg.variant == Variant::kSparse &&
                    cfg.sparsity_weight > 0.0)
                    axpy(1.0, sparse_gradient(bottleneck, cfg.sparsity_weight), g);
            }

            std::vector<Tensor> flat;
            for (auto& unit_grads : pgrads)
                for (auto& lg : unit_grads)
                    for (auto& t : lg) flat.push_back(std::move(t));
            opt.step(params, flat);

            rec.reconstruction += lb.reconstruction;
            rec.gid += lb.gid_term;
            rec.lid += lb.lid_term;
            rec.total += objective;
            ++batches_seen;
        }
        if (batches_seen > 0) {
            rec.reconstruction /= batches_seen;
            rec.gid /= batches_seen;
            rec.lid /= batches_seen;
            rec.total /= batches_seen;
        }
        log.epochs.push_back(rec);
    }
    return log;
}

TrainLog train(Autoencoder& model, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    TrainLog log;
    const bool layerwise = cfg.stage_mode == StageMode::kTwoStage ||
                           cfg.stage_mode == StageMode::kLayerwiseOnly ||
                           cfg.stage_mode == StageMode::kBaseline;
    const bool global = cfg.stage_mode == StageMode::kTwoStage ||
                        cfg.stage_mode == StageMode::kGlobalOnly ||
                        cfg.stage_mode == StageMode::kBaseline;
    if (layerwise)
        for (auto& s : train_layerwise(model, data, cfg)) log.stages.push_back(std::move(s));
    if (global) log.stages.push_back(train_global(model, data, cfg));
    return log;
}

LossMeasurement measure_losses(const Autoencoder& model, const LabeledDataset& data,
                               const std::vector<int>& pool, int batch_size, ReconKind kind) {
    LossMeasurement m;
    int batches_seen = 0;
    // Fixed order (epoch 0 of seed 0) so different models see identical batches.
    for (const auto& idx : batch_indices(pool, batch_size, 0, 0)) {
        const Tensor x = gather_batch(data, idx);
        const Tensor xhat = sae_reconstruct(model, x);
        m.reconstruction += kind == ReconKind::kMse ? mse(x, xhat) : bce(x, xhat);
        m.gid_penalty += gid_penalty(x, xhat);
        m.lid_penalty += lid_penalty(x, xhat);
        ++batches_seen;
    }
    if (batches_seen > 0) {
        m.reconstruction /= batches_seen;
        m.gid_penalty /= batches_seen;
        m.lid_penalty /= batches_seen;
    }
    return m;
}

void write_stage_csv(const StageLog& log, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << "epoch,reconstruction,gid,lid,total\n";
    char buf[128];
    for (const auto& r : log.epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.reconstruction,
                      r.gid, r.lid, r.total);
        f << buf;
    }
}

}  // namespace aeidc
