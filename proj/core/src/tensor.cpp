#include "aeidc/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace aeidc {

static_assert(std::endian::native == std::endian::little,
              "tensor and checkpoint files assume a little-endian host");

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_to_string(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_to_string(shape_));
    }
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t({n, n});
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ShapeError("from_rows: empty row list");
    const int n = static_cast<int>(rows.size());
    const int m = static_cast<int>(rows[0].size());
    Tensor t({n, m});
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != m)
            throw ShapeError("from_rows: ragged rows");
        for (int j = 0; j < m; ++j) t(i, j) = rows[i][j];
    }
    return t;
}

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
    if (shape_numel(new_shape) != data_.size()) {
        throw ShapeError("reshape from " + shape_to_string(shape_) + " to " +
                         shape_to_string(new_shape) + " changes element count");
    }
    return Tensor(std::move(new_shape), data_);
}

Tensor Tensor::as_matrix() const {
    if (rank() < 1) throw ShapeError("as_matrix: rank-0 tensor");
    const int n = shape_[0];
    const int m = static_cast<int>(data_.size() / static_cast<std::size_t>(n));
    return reshaped({n, m});
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

static void require_matrix(const Tensor& a, const char* who) {
    if (a.rank() != 2) throw ShapeError(std::string(who) + ": expected a matrix, got " + a.shape_str());
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() + " x " + b.shape_str());
    }
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Tensor c({n, m});
    // i-k-j order keeps both b and c rows contiguous; the j loop accumulates
    // into c so the per-element summation order stays left to right in k.
    for (int i = 0; i < n; ++i) {
        for (int kk = 0; kk < k; ++kk) {
            const double aik = a(i, kk);
            const double* brow = b.data() + static_cast<std::size_t>(kk) * m;
            double* crow = c.data() + static_cast<std::size_t>(i) * m;
            for (int j = 0; j < m; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Tensor transpose(const Tensor& a) {
    require_matrix(a, "transpose");
    Tensor t({a.cols(), a.rows()});
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Tensor gram(const Tensor& x) {
    require_matrix(x, "gram");
    const int n = x.rows(), m = x.cols();
    Tensor g({n, n});
    for (int i = 0; i < n; ++i) {
        const double* ri = x.data() + static_cast<std::size_t>(i) * m;
        for (int j = i; j < n; ++j) {
            const double* rj = x.data() + static_cast<std::size_t>(j) * m;
            double s = 0.0;
            for (int t = 0; t < m; ++t) s += ri[t] * rj[t];
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

Tensor center_columns(const Tensor& x) {
    require_matrix(x, "center_columns");
    const int n = x.rows(), m = x.cols();
    std::vector<double> mean(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) mean[static_cast<std::size_t>(j)] += x(i, j);
    for (auto& v : mean) v /= n;
    Tensor out({n, m});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out(i, j) = x(i, j) - mean[static_cast<std::size_t>(j)];
    return out;
}

double trace(const Tensor& a) {
    require_matrix(a, "trace");
    if (a.rows() != a.cols()) throw ShapeError("trace: non-square matrix " + a.shape_str());
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

double frob_sq(const Tensor& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
    return s;
}

double dot(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

static void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(who) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

Tensor scale(const Tensor& a, double s) {
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= s;
    return c;
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
    require_same_shape(x, y, "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double max_abs(const Tensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

bool all_finite(const Tensor& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

void save_tensor(const Tensor& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << "aeidc-tensor v1\n";
    f << "shape:";
    for (int d : t.shape()) f << " " << d;
    f << "\n";
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!f) throw FormatError("short write to " + path);
}

Tensor load_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path);
    std::string magic;
    std::getline(f, magic);
    if (magic != "aeidc-tensor v1") throw FormatError(path + ": bad magic line '" + magic + "'");
    std::string shape_line;
    std::getline(f, shape_line);
    std::istringstream is(shape_line);
    std::string tag;
    is >> tag;
    if (tag != "shape:") throw FormatError(path + ": missing shape line");
    std::vector<int> shape;
    int d;
    while (is >> d) shape.push_back(d);
    if (shape.empty()) throw FormatError(path + ": empty shape");
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (static_cast<std::size_t>(f.gcount()) != t.size() * sizeof(double))
        throw FormatError(path + ": truncated payload");
    return t;
}

}  // namespace aeidc
