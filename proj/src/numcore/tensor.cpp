#include "hsprobe/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hsprobe/error.hpp"

namespace hsprobe {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    require(!shape.empty() && shape.size() <= 3, ErrorCode::kInvalidArgument,
            "tensor rank must be 1..3, got " + std::to_string(shape.size()));
    for (std::size_t d : shape) {
        require(d > 0, ErrorCode::kInvalidArgument, "tensor dimensions must be positive");
    }
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    require(element_count(shape_) == data_.size(), ErrorCode::kDimensionMismatch,
            "tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                shape_string(shape_));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    require(rows.size() > 0, ErrorCode::kInvalidArgument, "from_rows needs at least one row");
    const std::size_t cols = rows.begin()->size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        require(r.size() == cols, ErrorCode::kDimensionMismatch, "ragged rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor({rows.size(), cols}, std::move(data));
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            s += "x";
        }
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor softmax_rows(const Tensor& m) {
    require(m.rank() == 2, ErrorCode::kInvalidArgument,
            "softmax_rows expects rank 2, got shape " + shape_string(m.shape()));
    Tensor out(m.shape());
    const std::size_t cols = m.cols();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto in = m.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double e = std::exp(in[c] - mx);
            out(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out(r, c) /= sum;
        }
    }
    return out;
}

Tensor sinusoidal_pe(std::size_t length, std::size_t dim) {
    require(dim > 0 && dim % 2 == 0, ErrorCode::kInvalidArgument,
            "positional embedding dim must be even and positive, got " + std::to_string(dim));
    require(length > 0, ErrorCode::kInvalidArgument, "positional embedding length must be positive");
    Tensor pe = Tensor::matrix(length, dim);
    for (std::size_t i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
        for (std::size_t t = 0; t < length; ++t) {
            const double angle = static_cast<double>(t) / freq;
            pe(t, 2 * i) = std::sin(angle);
            pe(t, 2 * i + 1) = std::cos(angle);
        }
    }
    return pe;
}

double bce(double p, double y) {
    const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
    return -(y * std::log(q) + (1.0 - y) * std::log1p(-q));
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace hsprobe
