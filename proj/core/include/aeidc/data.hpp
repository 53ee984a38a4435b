#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeidc/tensor.hpp"

namespace aeidc {

// Samples are (C,H,W) tensors with values in [0,1]; train/test are disjoint
// covering index lists.
struct LabeledDataset {
    std::vector<Tensor> samples;
    std::vector<int> labels;
    std::vector<int> train_idx;
    std::vector<int> test_idx;

    int size() const { return static_cast<int>(samples.size()); }
    std::vector<int> sample_shape() const;
    int num_classes() const;
};

// Ground-truth-ID fixture: samples live on an r-dimensional linear manifold
// embedded in the (C,H,W) ambient space. Class structure stays inside the
// manifold (class centers are latent offsets), so the intrinsic dimension of
// the noiseless data is exactly min(r, N-1) regardless of class count.
struct SyntheticSpec {
    int intrinsic_dim = 2;
    std::vector<int> shape{1, 8, 8};  // (C,H,W)
    int classes = 1;
    int per_class = 100;
    double noise_std = 0.0;
    std::uint64_t seed = 0;
    double latent_std = 1.0;   // within-class spread of manifold coordinates
    double class_sep = 3.0;    // spread of latent class centers
    double test_fraction = 0.2;
};

// samples = U (c_k + z) + ambient noise, with U a seeded orthonormal basis
// of the manifold, then one affine renormalization of the whole dataset to
// [0,1]. Split is stratified per class.
LabeledDataset gen_linear_manifold(const SyntheticSpec& spec);

// Classic IDX files: big-endian magic (0x00000801 labels / 0x00000803
// images), big-endian 32-bit dimension sizes, unsigned-byte payload. Pixels
// are scaled to [0,1]; images become single-channel (1,H,W) samples. All
// loaded indices land in the train split.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writes the listed sample indices as an IDX image/label pair, quantizing
// [0,1] to bytes. Multi-channel samples are written channel-planes stacked
// into the height dimension.
void save_idx(const LabeledDataset& ds, const std::vector<int>& indices,
              const std::string& images_path, const std::string& labels_path);

// Marks the samples of `test` as the test split of `train` (concatenation).
LabeledDataset merge_train_test(LabeledDataset train, const LabeledDataset& test);

// Seeded per-epoch shuffle of the train split, chunked into batches; a final
// chunk smaller than 2 is dropped (GID needs two samples).
std::vector<std::vector<int>> batch_indices(const std::vector<int>& pool, int batch_size,
                                            std::uint64_t seed, int epoch);

// Stacks the chosen samples into an (N,C,H,W) batch tensor.
Tensor gather_batch(const LabeledDataset& ds, const std::vector<int>& indices);

// Stacks a whole split (train or test) into a batch plus labels.
Tensor gather_split(const LabeledDataset& ds, const std::vector<int>& indices,
                    std::vector<int>* labels_out);

}  // namespace aeidc
