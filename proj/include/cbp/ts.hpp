#pragma once

#include <span>
#include <vector>

#include "cbp/rng.hpp"
#include "cbp/sketch.hpp"
#include "cbp/types.hpp"

namespace cbp {

// Tensor Sketch parameters: two independent Count Sketches of matching
// shape. Hashes stay fixed; signs are tunable.
struct TsParams {
    std::size_t c = 0;
    std::size_t d = 0;
    CountSketchParams sketch1;
    CountSketchParams sketch2;
};

TsParams gen_ts(std::size_t c, std::size_t d, SeededRng& rng);

// phi(x) = circular convolution of the two count sketches of x.
std::vector<double> ts_project(std::span<const double> x, const TsParams& p);

// Sum of ts_project over spatial locations, per sample.
Pooled ts_pool(const Grid& grid, const TsParams& p);

struct TsGradients {
    Grid grad_x;
    std::vector<double> grad_s1;  // length c, empty when with_param_grads = false
    std::vector<double> grad_s2;
};

// Gradients w.r.t. inputs and signs; hashes are combinatorial and held
// fixed. Per branch k, grad_out is pulled back through the convolution
// by correlating against the opposite branch's sketch, then scattered
// through the hash.
TsGradients ts_backward(const Grid& grid, const TsParams& p, const Pooled& grad_out,
                        bool with_param_grads = true);

}  // namespace cbp
