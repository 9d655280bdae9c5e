#pragma once

#include <span>
#include <vector>

#include "cbp/rng.hpp"
#include "cbp/types.hpp"

namespace cbp {

// Random Maclaurin projection parameters. W1, W2 are d x c, row-major,
// Rademacher at generation; entries become unconstrained reals if tuned.
struct RmParams {
    std::size_t c = 0;
    std::size_t d = 0;
    std::vector<double> w1;
    std::vector<double> w2;

    std::span<const double> w1_row(std::size_t r) const { return {w1.data() + r * c, c}; }
    std::span<const double> w2_row(std::size_t r) const { return {w2.data() + r * c, c}; }
};

RmParams gen_rm(std::size_t c, std::size_t d, SeededRng& rng);

// phi(x) = (1/sqrt(d)) (W1 x) .* (W2 x)
std::vector<double> rm_project(std::span<const double> x, const RmParams& p);

// Sum of rm_project over all spatial locations, per sample.
Pooled rm_pool(const Grid& grid, const RmParams& p);

struct RmGradients {
    Grid grad_x;
    std::vector<double> grad_w1;  // d x c, empty when with_param_grads = false
    std::vector<double> grad_w2;
};

RmGradients rm_backward(const Grid& grid, const RmParams& p, const Pooled& grad_out,
                        bool with_param_grads = true);

}  // namespace cbp
