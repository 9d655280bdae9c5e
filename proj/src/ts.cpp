#include "cbp/ts.hpp"

namespace cbp {

TsParams gen_ts(std::size_t c, std::size_t d, SeededRng& rng) {
    if (c == 0 || d == 0) throw std::invalid_argument("gen_ts: dims must be >= 1");
    TsParams p;
    p.c = c;
    p.d = d;
    auto rng1 = rng.child(1);
    auto rng2 = rng.child(2);
    p.sketch1 = gen_count_sketch(c, d, rng1);
    p.sketch2 = gen_count_sketch(c, d, rng2);
    return p;
}

std::vector<double> ts_project(std::span<const double> x, const TsParams& p) {
    check_shape(x.size() == p.c, "ts_project: input length mismatch");
    return circ_conv_fast(count_sketch(x, p.sketch1), count_sketch(x, p.sketch2));
}

Pooled ts_pool(const Grid& grid, const TsParams& p) {
    check_shape(grid.c == p.c, "ts_pool: channel mismatch");
    Pooled out(grid.n, p.d, PoolKind::TensorSketch);
    for (std::size_t s = 0; s < grid.n; ++s) {
        auto acc = out.row(s);
        for (std::size_t r = 0; r < grid.h; ++r)
            for (std::size_t col = 0; col < grid.w; ++col) {
                auto phi = ts_project(grid.at(s, r, col), p);
                for (std::size_t j = 0; j < p.d; ++j) acc[j] += phi[j];
            }
    }
    return out;
}

TsGradients ts_backward(const Grid& grid, const TsParams& p, const Pooled& grad_out,
                        bool with_param_grads) {
    check_shape(grid.c == p.c, "ts_backward: channel mismatch");
    check_shape(grad_out.n == grid.n && grad_out.dim == p.d,
                "ts_backward: grad_out shape mismatch");
    const std::size_t c = p.c;

    TsGradients g;
    g.grad_x = Grid(grid.n, grid.h, grid.w, grid.c);
    if (with_param_grads) {
        g.grad_s1.assign(c, 0.0);
        g.grad_s2.assign(c, 0.0);
    }

    // Sketches are recomputed per location rather than cached from the
    // forward pass; same asymptotic cost as forward.
    for (std::size_t s = 0; s < grid.n; ++s) {
        auto go = grad_out.row(s);
        for (std::size_t r = 0; r < grid.h; ++r)
            for (std::size_t col = 0; col < grid.w; ++col) {
                auto x = grid.at(s, r, col);
                auto gx = g.grad_x.at(s, r, col);
                auto psi1 = count_sketch(x, p.sketch1);
                auto psi2 = count_sketch(x, p.sketch2);
                // Pull grad_out back through the convolution against the
                // opposite branch, then scatter through each hash.
                auto g1 = circ_corr(go, psi2);
                auto g2 = circ_corr(go, psi1);
                for (std::size_t t = 0; t < c; ++t) {
                    const double gb1 = g1[p.sketch1.h[t]];
                    const double gb2 = g2[p.sketch2.h[t]];
                    gx[t] += p.sketch1.s[t] * gb1 + p.sketch2.s[t] * gb2;
                    if (with_param_grads) {
                        g.grad_s1[t] += x[t] * gb1;
                        g.grad_s2[t] += x[t] * gb2;
                    }
                }
            }
    }
    return g;
}

}  // namespace cbp
