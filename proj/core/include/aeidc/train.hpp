#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeidc/data.hpp"
#include "aeidc/losses.hpp"
#include "aeidc/model.hpp"
#include "aeidc/optim.hpp"

namespace aeidc {

enum class Variant { kPlain, kDenoising, kSparse };
enum class StageMode { kTwoStage, kLayerwiseOnly, kGlobalOnly, kBaseline };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);
std::string stage_mode_name(StageMode m);
StageMode stage_mode_from_name(const std::string& name);

struct TrainConfig {
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    int layerwise_epochs = 100;
    int global_epochs = 100;
    int batch_size = 64;
    OptimizerConfig optimizer;
    std::uint64_t seed = 42;
    ReconKind recon = ReconKind::kMse;
    Variant variant = Variant::kPlain;
    double noise_std = 0.0;        // denoising: input noise, clean target
    double sparsity_weight = 0.0;  // sparse: weight of mean |bottleneck|
    StageMode stage_mode = StageMode::kTwoStage;
    double recon_weight = 1.0;     // 0 only for the GID+LID-only ablation

    void validate() const;  // throws ValidationError naming the field
};

// gid/lid columns hold the unweighted penalty values when the corresponding
// lambda is active and 0 otherwise (a baseline run never computes them);
// total is the optimized objective including variant terms.
struct EpochRecord {
    int epoch = 0;
    double reconstruction = 0.0;
    double gid = 0.0;
    double lid = 0.0;
    double total = 0.0;
};

struct StageLog {
    std::string name;
    std::vector<EpochRecord> epochs;
};

struct TrainLog {
    std::vector<StageLog> stages;
};

// Layerwise stage: trains unit i on the frozen composition of the previous
// encoders, updating only unit i. One StageLog per unit.
std::vector<StageLog> train_layerwise(Autoencoder& model, const LabeledDataset& data,
                                      const TrainConfig& cfg);

// Global stage: the stacked L encoders reconstruct the input end to end;
// only encoder parameters are updated.
StageLog train_global(Autoencoder& model, const LabeledDataset& data, const TrainConfig& cfg);

// Dispatches on cfg.stage_mode (baseline = two-stage with both lambdas 0).
TrainLog train(Autoencoder& model, const LabeledDataset& data, const TrainConfig& cfg);

// Denoising input corruption; the reconstruction target stays clean.
// noise_std = 0 returns the batch unchanged.
Tensor apply_variant(const Tensor& batch, const TrainConfig& cfg, Rng& rng);

// Post-hoc measurement of the unweighted loss components of a trained model
// over a sample pool, batch-averaged with a fixed batch order; lets runs
// with different lambdas (including 0) be compared on equal footing.
struct LossMeasurement {
    double reconstruction = 0.0;
    double gid_penalty = 0.0;
    double lid_penalty = 0.0;
};
LossMeasurement measure_losses(const Autoencoder& model, const LabeledDataset& data,
                               const std::vector<int>& pool, int batch_size, ReconKind kind);

// One CSV per stage: header epoch,reconstruction,gid,lid,total.
void write_stage_csv(const StageLog& log, const std::string& path);

}  // namespace aeidc
