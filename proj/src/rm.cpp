#include "cbp/rm.hpp"

#include <cmath>

namespace cbp {

RmParams gen_rm(std::size_t c, std::size_t d, SeededRng& rng) {
    if (c == 0 || d == 0) throw std::invalid_argument("gen_rm: dims must be >= 1");
    RmParams p;
    p.c = c;
    p.d = d;
    p.w1.resize(d * c);
    p.w2.resize(d * c);
    for (auto& v : p.w1) v = rng.rademacher();
    for (auto& v : p.w2) v = rng.rademacher();
    return p;
}

namespace {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

std::vector<double> rm_project(std::span<const double> x, const RmParams& p) {
    check_shape(x.size() == p.c, "rm_project: input length mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.d));
    std::vector<double> out(p.d);
    for (std::size_t r = 0; r < p.d; ++r)
        out[r] = scale * dot(p.w1_row(r), x) * dot(p.w2_row(r), x);
    return out;
}

Pooled rm_pool(const Grid& grid, const RmParams& p) {
    check_shape(grid.c == p.c, "rm_pool: channel mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.d));
    Pooled out(grid.n, p.d, PoolKind::RandomMaclaurin);
    for (std::size_t s = 0; s < grid.n; ++s) {
        auto acc = out.row(s);
        for (std::size_t r = 0; r < grid.h; ++r)
            for (std::size_t col = 0; col < grid.w; ++col) {
                auto x = grid.at(s, r, col);
                for (std::size_t j = 0; j < p.d; ++j)
                    acc[j] += scale * dot(p.w1_row(j), x) * dot(p.w2_row(j), x);
            }
    }
    return out;
}

RmGradients rm_backward(const Grid& grid, const RmParams& p, const Pooled& grad_out,
                        bool with_param_grads) {
    check_shape(grid.c == p.c, "rm_backward: channel mismatch");
    check_shape(grad_out.n == grid.n && grad_out.dim == p.d,
                "rm_backward: grad_out shape mismatch");
    const std::size_t c = p.c;
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.d));

    RmGradients g;
    g.grad_x = Grid(grid.n, grid.h, grid.w, grid.c);
    if (with_param_grads) {
        g.grad_w1.assign(p.d * c, 0.0);
        g.grad_w2.assign(p.d * c, 0.0);
    }

    for (std::size_t s = 0; s < grid.n; ++s) {
        auto go = grad_out.row(s);
        for (std::size_t r = 0; r < grid.h; ++r)
            for (std::size_t col = 0; col < grid.w; ++col) {
                auto x = grid.at(s, r, col);
                auto gx = g.grad_x.at(s, r, col);
                for (std::size_t j = 0; j < p.d; ++j) {
                    const double coeff = scale * go[j];
                    if (coeff == 0.0) continue;
                    auto w1 = p.w1_row(j);
                    auto w2 = p.w2_row(j);
                    const double a1 = dot(w1, x);
                    const double a2 = dot(w2, x);
                    for (std::size_t i = 0; i < c; ++i)
                        gx[i] += coeff * (a2 * w1[i] + a1 * w2[i]);
                    if (with_param_grads) {
                        for (std::size_t i = 0; i < c; ++i) {
                            g.grad_w1[j * c + i] += coeff * a2 * x[i];
                            g.grad_w2[j * c + i] += coeff * a1 * x[i];
                        }
                    }
                }
            }
    }
    return g;
}

}  // namespace cbp
