#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeidc/tensor.hpp"

namespace aeidc {

// Flattened embeddings (N x d) with their class labels.
struct EmbeddingSet {
    Tensor vectors;           // N x d
    std::vector<int> labels;  // N entries, >= 0

    int count() const { return vectors.rank() >= 1 ? vectors.dim(0) : 0; }
};

// Top-1 accuracy of a k-nearest-neighbor vote in Euclidean distance. Ties:
// majority label first, then the smaller summed distance among tied labels,
// then the smaller label.
double knn_accuracy(const EmbeddingSet& train, const EmbeddingSet& test, int k);

struct ClusteringResult {
    std::vector<int> assignments;  // values in [0, k)
    double inertia = 0.0;
    double ari = 0.0;
    double ami = 0.0;
};

// Lloyd's algorithm with k-means++ seeding, `restarts` independent runs
// (fixed ordering, lowest-inertia restart wins, ties to the lowest restart
// index), each run capped at 300 iterations. ari/ami are left 0; use
// cluster_and_score to fill them against reference labels.
ClusteringResult kmeans(const Tensor& vectors, int k, int restarts, std::uint64_t seed);

// kmeans + ARI/AMI of the assignment against `labels`.
ClusteringResult cluster_and_score(const Tensor& vectors, const std::vector<int>& labels, int k,
                                   int restarts, std::uint64_t seed);

// Adjusted Rand index (pair counting with expected-index correction).
double ari(const std::vector<int>& a, const std::vector<int>& b);
// Adjusted mutual information under the permutation model, max(H) normalized.
double ami(const std::vector<int>& a, const std::vector<int>& b);

// Shortest-path distances through the undirected K-nearest-neighbor graph
// with Euclidean edge weights, linearly rescaled so the largest finite
// distance is 1. Unreachable pairs get distance 1; when the graph is
// disconnected, num_components_out (if given) reports the component count
// and a warning is printed to stderr.
Tensor geodesic_distances(const Tensor& vectors, int k = 15, int* num_components_out = nullptr);

// Entry (a,b): mean geodesic distance over sample pairs of classes (a,b);
// diagonal excludes self-pairs. A class with fewer than two members gets a
// NaN diagonal entry.
Tensor class_distance_matrix(const Tensor& geo, const std::vector<int>& labels);

// Downstream scores for export.
struct MetricsReport {
    std::vector<std::pair<int, double>> knn;  // (k, accuracy)
    double ari = 0.0;
    double ami = 0.0;
    double inertia = 0.0;
    int embedding_dim = 0;
};

// key = value lines.
void write_metrics_report(const MetricsReport& report, const std::string& path);

// Comma-separated grid, row-major; NaN cells serialized as "nan".
void write_matrix_csv(const Tensor& m, const std::string& path);

}  // namespace aeidc
