#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "asc/errors.hpp"

namespace asc {

/// Dense N-dimensional array, row-major. Scalar type is a template
/// parameter so the network can run float32 in production and float64
/// in gradient-check builds.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        values.assign(numel(), T(0));
    }
    Tensor(std::vector<std::size_t> s, T fill) : shape(std::move(s)) {
        values.assign(numel(), fill);
    }

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    T* data() { return values.data(); }
    const T* data() const { return values.data(); }

    T& operator[](std::size_t i) { return values[i]; }
    const T& operator[](std::size_t i) const { return values[i]; }

    // 2-d / 3-d / 4-d accessors, row-major.
    T& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
    const T& at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }

    T& at(std::size_t i, std::size_t j, std::size_t k) {
        return values[(i * shape[1] + j) * shape[2] + k];
    }
    const T& at(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * shape[1] + j) * shape[2] + k];
    }

    T& at(std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
        return values[((n * shape[1] + h) * shape[2] + w) * shape[3] + c];
    }
    const T& at(std::size_t n, std::size_t h, std::size_t w, std::size_t c) const {
        return values[((n * shape[1] + h) * shape[2] + w) * shape[3] + c];
    }

    void fill(T v) { std::fill(values.begin(), values.end(), v); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (T v : values)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape.size(); ++i)
            os << (i ? "x" : "") << shape[i];
        os << "]";
        return os.str();
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape);
        for (std::size_t i = 0; i < values.size(); ++i)
            out.values[i] = static_cast<U>(values[i]);
        return out;
    }
};

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* where) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
}

}  // namespace asc
