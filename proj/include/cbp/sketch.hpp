#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbp/rng.hpp"
#include "cbp/types.hpp"

namespace cbp {

// Count Sketch hash/sign parameters. Buckets are 0-based. Signs start
// in {+1,-1} and become unconstrained reals if tuned; the hash stays
// fixed forever.
struct CountSketchParams {
    std::size_t c = 0;
    std::size_t d = 0;
    std::vector<std::uint32_t> h;  // bucket index per input coordinate, in [0, d)
    std::vector<double> s;         // sign per input coordinate
};

CountSketchParams gen_count_sketch(std::size_t c, std::size_t d, SeededRng& rng);

// out[j] = sum over t with h(t)=j of s(t) * x[t].
std::vector<double> count_sketch(std::span<const double> x, const CountSketchParams& p);
void count_sketch_into(std::span<const double> x, const CountSketchParams& p,
                       std::span<double> out);

// out[j] = sum_i a[i] * b[(j-i) mod d]. O(d^2); permanent test oracle.
std::vector<double> circ_conv_naive(std::span<const double> a, std::span<const double> b);

// Same contract as circ_conv_naive, O(d log d) via FFT, any d >= 1.
std::vector<double> circ_conv_fast(std::span<const double> a, std::span<const double> b);

// Adjoint of circular convolution: out[j] = sum_i a[i] * b[(i-j) mod d],
// so <a*b, g> == <a, circ_corr(g, b)>.
std::vector<double> circ_corr(std::span<const double> a, std::span<const double> b);

}  // namespace cbp
