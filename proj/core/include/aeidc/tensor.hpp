#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aeidc/errors.hpp"

namespace aeidc {

// Dense row-major array of doubles with an explicit shape.
// Invariant: data.size() == product of shape entries. Reshape only
// reinterprets the shape, it never reorders data.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);
    // 2-D identity.
    static Tensor identity(int n);
    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Matrix access (rank 2).
    double& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(i) * shape_[1] + j];
    }
    double operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * shape_[1] + j];
    }
    // Rank-3 access (C,H,W).
    double& operator()(int c, int i, int j) {
        return data_[(static_cast<std::size_t>(c) * shape_[1] + i) * shape_[2] + j];
    }
    double operator()(int c, int i, int j) const {
        return data_[(static_cast<std::size_t>(c) * shape_[1] + i) * shape_[2] + j];
    }
    // Rank-4 access (N,C,H,W).
    double& operator()(int n, int c, int i, int j) {
        return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + i) * shape_[3] + j];
    }
    double operator()(int n, int c, int i, int j) const {
        return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + i) * shape_[3] + j];
    }

    int rows() const { return shape_.size() >= 1 ? shape_[0] : 0; }
    int cols() const { return shape_.size() >= 2 ? shape_[1] : 0; }

    // Same data, new shape; element counts must agree.
    Tensor reshaped(std::vector<int> new_shape) const;
    // Flatten all but the leading dim to a rows x cols matrix.
    Tensor as_matrix() const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

std::size_t shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

// --- linear algebra primitives ---
// All reductions accumulate left to right so repeated runs are bit-identical.

// Standard matrix product; inner dimensions must agree.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// x * x^T for an N x m matrix; N x N result.
Tensor gram(const Tensor& x);
// Subtract the per-column mean from every column of an N x m matrix.
Tensor center_columns(const Tensor& x);
double trace(const Tensor& a);
double frob_sq(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);

// Elementwise helpers (shapes must match).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// y += alpha * x
void axpy(double alpha, const Tensor& x, Tensor& y);

double max_abs(const Tensor& a);
bool all_finite(const Tensor& a);

// Simple binary tensor file: text header line "aeidc-tensor v1", a shape
// line, then raw little-endian float64 payload.
void save_tensor(const Tensor& t, const std::string& path);
Tensor load_tensor(const std::string& path);

}  // namespace aeidc
