#include "aeidc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "aeidc/rng.hpp"

namespace aeidc {

std::vector<int> LabeledDataset::sample_shape() const {
    if (samples.empty()) return {};
    return samples.front().shape();
}

int LabeledDataset::num_classes() const {
    int m = 0;
    for (int l : labels) m = std::max(m, l + 1);
    return m;
}

namespace {

// Gram-Schmidt orthonormal basis: ambient x r, columns orthonormal.
std::vector<std::vector<double>> orthonormal_basis(int ambient, int r, Rng& rng) {
    std::vector<std::vector<double>> cols(r, std::vector<double>(ambient));
    for (int j = 0; j < r; ++j) {
        auto& c = cols[j];
        for (int i = 0; i < ambient; ++i) c[i] = rng.gaussian();
        for (int prev = 0; prev < j; ++prev) {
            double d = 0.0;
            for (int i = 0; i < ambient; ++i) d += c[i] * cols[prev][i];
            for (int i = 0; i < ambient; ++i) c[i] -= d * cols[prev][i];
        }
        double norm = 0.0;
        for (int i = 0; i < ambient; ++i) norm += c[i] * c[i];
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericError("orthonormal_basis: degenerate draw");
        for (int i = 0; i < ambient; ++i) c[i] /= norm;
    }
    return cols;
}

}  // namespace

LabeledDataset gen_linear_manifold(const SyntheticSpec& spec) {
    if (spec.shape.size() != 3)
        throw ValidationError("gen_linear_manifold: shape must be (C,H,W), got " +
                              shape_to_string(spec.shape));
    const int ambient = static_cast<int>(shape_numel(spec.shape));
    const int r = spec.intrinsic_dim;
    if (r < 1 || r > ambient)
        throw ValidationError("gen_linear_manifold: intrinsic_dim " + std::to_string(r) +
                              " outside [1, " + std::to_string(ambient) + "]");
    if (spec.classes < 1 || spec.per_class < 1)
        throw ValidationError("gen_linear_manifold: classes and per_class must be positive");
    if (spec.noise_std < 0.0)
        throw ValidationError("gen_linear_manifold: noise_std must be nonnegative");

    Rng rng(spec.seed);
    const auto basis = orthonormal_basis(ambient, r, rng);

    std::vector<std::vector<double>> centers(spec.classes, std::vector<double>(r, 0.0));
    if (spec.classes > 1)
        for (auto& c : centers)
            for (double& v : c) v = rng.gaussian(0.0, spec.class_sep);

    const int total = spec.classes * spec.per_class;
    LabeledDataset ds;
    ds.samples.reserve(total);
    ds.labels.reserve(total);
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < spec.classes; ++k) {
        for (int s = 0; s < spec.per_class; ++s) {
            std::vector<double> z(r);
            for (int j = 0; j < r; ++j) z[j] = centers[k][j] + rng.gaussian(0.0, spec.latent_std);
            Tensor sample(spec.shape);
            for (int i = 0; i < ambient; ++i) {
                double v = 0.0;
                for (int j = 0; j < r; ++j) v += basis[j][i] * z[j];
                if (spec.noise_std > 0.0) v += rng.gaussian(0.0, spec.noise_std);
                sample[i] = v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            ds.samples.push_back(std::move(sample));
            ds.labels.push_back(k);
        }
    }
    // One affine map onto [0,1]; relative geometry is preserved.
    const double span = hi - lo;
    const double inv = span > 0.0 ? 1.0 / span : 0.0;
    for (auto& sample : ds.samples)
        for (std::size_t i = 0; i < sample.size(); ++i)
            sample[i] = span > 0.0 ? (sample[i] - lo) * inv : 0.5;

    // Stratified split: the tail of each class block goes to test.
    const int test_per_class =
        std::min(spec.per_class, static_cast<int>(std::lround(spec.per_class * spec.test_fraction)));
    for (int k = 0; k < spec.classes; ++k) {
        const int base = k * spec.per_class;
        for (int s = 0; s < spec.per_class; ++s) {
            if (s >= spec.per_class - test_per_class)
                ds.test_idx.push_back(base + s);
            else
                ds.train_idx.push_back(base + s);
        }
    }
    return ds;
}

// ---- IDX ------------------------------------------------------------------

namespace {

std::uint32_t read_be32(std::istream& f, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (f.gcount() != 4)
        throw FormatError(path + ": truncated at byte offset " + std::to_string(offset));
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void write_be32(std::ostream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<char*>(b), 4);
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw FormatError("cannot open " + images_path);
    std::uint32_t magic = read_be32(fi, images_path, 0);
    if (magic != kIdxImagesMagic)
        throw FormatError(images_path + ": bad magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%08x", magic);
            return std::string(buf);
        }() + " at byte offset 0 (want 0x00000803)");
    const std::uint32_t count = read_be32(fi, images_path, 4);
    const std::uint32_t h = read_be32(fi, images_path, 8);
    const std::uint32_t w = read_be32(fi, images_path, 12);
    if (h == 0 || w == 0) throw FormatError(images_path + ": zero image dimensions");

    std::vector<unsigned char> pixels(static_cast<std::size_t>(count) * h * w);
    fi.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(fi.gcount()) != pixels.size())
        throw FormatError(images_path + ": truncated pixel payload at byte offset " +
                          std::to_string(16 + fi.gcount()));

    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw FormatError("cannot open " + labels_path);
    magic = read_be32(fl, labels_path, 0);
    if (magic != kIdxLabelsMagic)
        throw FormatError(labels_path + ": bad magic at byte offset 0 (want 0x00000801)");
    const std::uint32_t label_count = read_be32(fl, labels_path, 4);
    if (label_count != count)
        throw FormatError(labels_path + ": label count " + std::to_string(label_count) +
                          " does not match image count " + std::to_string(count));
    std::vector<unsigned char> raw_labels(label_count);
    fl.read(reinterpret_cast<char*>(raw_labels.data()),
            static_cast<std::streamsize>(raw_labels.size()));
    if (static_cast<std::size_t>(fl.gcount()) != raw_labels.size())
        throw FormatError(labels_path + ": truncated label payload at byte offset " +
                          std::to_string(8 + fl.gcount()));

    LabeledDataset ds;
    ds.samples.reserve(count);
    ds.labels.reserve(count);
    const std::vector<int> shape{1, static_cast<int>(h), static_cast<int>(w)};
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t(shape);
        const std::size_t base = static_cast<std::size_t>(i) * h * w;
        for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p)
            t[p] = pixels[base + p] / 255.0;
        ds.samples.push_back(std::move(t));
        ds.labels.push_back(raw_labels[i]);
        ds.train_idx.push_back(static_cast<int>(i));
    }
    return ds;
}

void save_idx(const LabeledDataset& ds, const std::vector<int>& indices,
              const std::string& images_path, const std::string& labels_path) {
    if (indices.empty()) throw ValidationError("save_idx: empty index list");
    const auto shape = ds.samples[static_cast<std::size_t>(indices[0])].shape();
    if (shape.size() != 3) throw ValidationError("save_idx: samples must be (C,H,W)");
    const int c = shape[0], h = shape[1], w = shape[2];

    std::ofstream fi(images_path, std::ios::binary);
    if (!fi) throw FormatError("cannot open " + images_path + " for writing");
    write_be32(fi, kIdxImagesMagic);
    write_be32(fi, static_cast<std::uint32_t>(indices.size()));
    write_be32(fi, static_cast<std::uint32_t>(c * h));  // channel planes stacked vertically
    write_be32(fi, static_cast<std::uint32_t>(w));
    for (int idx : indices) {
        const Tensor& t = ds.samples[static_cast<std::size_t>(idx)];
        if (t.shape() != shape) throw ValidationError("save_idx: inhomogeneous sample shapes");
        for (std::size_t p = 0; p < t.size(); ++p) {
            const double v = std::clamp(t[p], 0.0, 1.0);
            const auto byte = static_cast<unsigned char>(std::lround(v * 255.0));
            fi.write(reinterpret_cast<const char*>(&byte), 1);
        }
    }
    std::ofstream fl(labels_path, std::ios::binary);
    if (!fl) throw FormatError("cannot open " + labels_path + " for writing");
    write_be32(fl, kIdxLabelsMagic);
    write_be32(fl, static_cast<std::uint32_t>(indices.size()));
    for (int idx : indices) {
        const auto byte = static_cast<unsigned char>(ds.labels[static_cast<std::size_t>(idx)]);
        fl.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

LabeledDataset merge_train_test(LabeledDataset train, const LabeledDataset& test) {
    LabeledDataset ds = std::move(train);
    ds.test_idx.clear();
    const int base = ds.size();
    ds.train_idx.resize(static_cast<std::size_t>(base));
    for (int i = 0; i < base; ++i) ds.train_idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < test.size(); ++i) {
        ds.samples.push_back(test.samples[static_cast<std::size_t>(i)]);
        ds.labels.push_back(test.labels[static_cast<std::size_t>(i)]);
        ds.test_idx.push_back(base + i);
    }
    return ds;
}

std::vector<std::vector<int>> batch_indices(const std::vector<int>& pool, int batch_size,
                                            std::uint64_t seed, int epoch) {
    if (batch_size < 2) throw ValidationError("batch_indices: batch_size must be >= 2");
    std::vector<int> order = pool;
    // One stream per (seed, epoch) so epochs reshuffle but reruns repeat.
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1)));
    rng.shuffle(order);
    std::vector<std::vector<int>> batches;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(batch_size));
        if (end - at < 2) break;  // GID undefined on a single sample
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

Tensor gather_batch(const LabeledDataset& ds, const std::vector<int>& indices) {
    if (indices.empty()) throw ValidationError("gather_batch: empty index list");
    const auto shape = ds.samples[static_cast<std::size_t>(indices[0])].shape();
    std::vector<int> bshape{static_cast<int>(indices.size())};
    bshape.insert(bshape.end(), shape.begin(), shape.end());
    Tensor batch(bshape);
    const std::size_t per = shape_numel(shape);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const Tensor& s = ds.samples[static_cast<std::size_t>(indices[i])];
        if (s.shape() != shape) throw ValidationError("gather_batch: inhomogeneous sample shapes");
        std::copy(s.data(), s.data() + per, batch.data() + i * per);
    }
    return batch;
}

Tensor gather_split(const LabeledDataset& ds, const std::vector<int>& indices,
                    std::vector<int>* labels_out) {
    if (labels_out) {
        labels_out->clear();
        for (int i : indices) labels_out->push_back(ds.labels[static_cast<std::size_t>(i)]);
    }
    return gather_batch(ds, indices);
}

}  // namespace aeidc
