#include "cbp/bilinear.hpp"

namespace cbp {

Pooled bilinear_pool(const Grid& grid) {
    const std::size_t c = grid.c;
    Pooled out(grid.n, c * c, PoolKind::FullBilinear);
    for (std::size_t s = 0; s < grid.n; ++s) {
        auto acc = out.row(s);
        for (std::size_t r = 0; r < grid.h; ++r) {
            for (std::size_t col = 0; col < grid.w; ++col) {
                auto x = grid.at(s, r, col);
                for (std::size_t i = 0; i < c; ++i) {
                    const double xi = x[i];
                    for (std::size_t j = 0; j < c; ++j) acc[i * c + j] += xi * x[j];
                }
            }
        }
    }
    return out;
}

Grid bilinear_pool_backward(const Grid& grid, const Pooled& grad_out) {
    const std::size_t c = grid.c;
    check_shape(grad_out.n == grid.n && grad_out.dim == c * c,
                "bilinear_pool_backward: grad_out shape mismatch");
    Grid grad(grid.n, grid.h, grid.w, grid.c);
    for (std::size_t s = 0; s < grid.n; ++s) {
        auto g = grad_out.row(s);
        for (std::size_t r = 0; r < grid.h; ++r) {
            for (std::size_t col = 0; col < grid.w; ++col) {
                auto x = grid.at(s, r, col);
                auto gx = grad.at(s, r, col);
                // (G + G^T) x
                for (std::size_t i = 0; i < c; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < c; ++j)
                        acc += (g[i * c + j] + g[j * c + i]) * x[j];
                    gx[i] = acc;
                }
            }
        }
    }
    return grad;
}

double exact_kernel(const Grid& a, const Grid& b) {
    check_shape(a.n == 1 && b.n == 1, "exact_kernel: grids must be single-sample");
    check_shape(a.c == b.c, "exact_kernel: channel mismatch");
    const std::size_t c = a.c;
    double total = 0.0;
    for (std::size_t ra = 0; ra < a.h; ++ra)
        for (std::size_t ca = 0; ca < a.w; ++ca) {
            auto x = a.at(0, ra, ca);
            for (std::size_t rb = 0; rb < b.h; ++rb)
                for (std::size_t cb = 0; cb < b.w; ++cb) {
                    auto y = b.at(0, rb, cb);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < c; ++i) dot += x[i] * y[i];
                    total += dot * dot;
                }
        }
    return total;
}

}  // namespace cbp
