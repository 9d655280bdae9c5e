#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbp {

// Dense batch of spatial descriptor grids, layout sample-major then
// row, col, channel. One location's descriptor is contiguous.
struct Grid {
    std::size_t n = 0;
    std::size_t h = 0;
    std::size_t w = 0;
    std::size_t c = 0;
    std::vector<double> data;

    Grid() = default;
    Grid(std::size_t n_, std::size_t h_, std::size_t w_, std::size_t c_)
        : n(n_), h(h_), w(w_), c(c_), data(n_ * h_ * w_ * c_, 0.0) {
        if (n_ == 0 || h_ == 0 || w_ == 0 || c_ == 0)
            throw std::invalid_argument("Grid: all dims must be >= 1");
    }

    std::size_t locations() const { return h * w; }
    std::size_t size() const { return n * h * w * c; }

    std::size_t offset(std::size_t sample, std::size_t row, std::size_t col) const {
        if (sample >= n || row >= h || col >= w)
            throw std::out_of_range("Grid::offset: index out of range");
        return ((sample * h + row) * w + col) * c;
    }

    // The c-vector x_s at one spatial location.
    std::span<const double> at(std::size_t sample, std::size_t row, std::size_t col) const {
        return {data.data() + offset(sample, row, col), c};
    }
    std::span<double> at(std::size_t sample, std::size_t row, std::size_t col) {
        return {data.data() + offset(sample, row, col), c};
    }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

enum class PoolKind { FullBilinear, RandomMaclaurin, TensorSketch };

// Global per-sample descriptor, length c^2 (full bilinear) or d (compact).
struct Pooled {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> data;
    PoolKind kind = PoolKind::FullBilinear;

    Pooled() = default;
    Pooled(std::size_t n_, std::size_t dim_, PoolKind kind_)
        : n(n_), dim(dim_), data(n_ * dim_, 0.0), kind(kind_) {}

    std::span<const double> row(std::size_t sample) const {
        if (sample >= n) throw std::out_of_range("Pooled::row: sample out of range");
        return {data.data() + sample * dim, dim};
    }
    std::span<double> row(std::size_t sample) {
        if (sample >= n) throw std::out_of_range("Pooled::row: sample out of range");
        return {data.data() + sample * dim, dim};
    }
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check_shape(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace cbp
