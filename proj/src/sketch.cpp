#include "cbp/sketch.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace cbp {

CountSketchParams gen_count_sketch(std::size_t c, std::size_t d, SeededRng& rng) {
    if (c == 0 || d == 0) throw std::invalid_argument("gen_count_sketch: dims must be >= 1");
    CountSketchParams p;
    p.c = c;
    p.d = d;
    p.h.resize(c);
    p.s.resize(c);
    for (std::size_t i = 0; i < c; ++i) p.h[i] = static_cast<std::uint32_t>(rng.uniform_index(d));
    for (std::size_t i = 0; i < c; ++i) p.s[i] = rng.rademacher();
    return p;
}

void count_sketch_into(std::span<const double> x, const CountSketchParams& p,
                       std::span<double> out) {
    check_shape(x.size() == p.c, "count_sketch: input length mismatch");
    check_shape(out.size() == p.d, "count_sketch: output length mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t t = 0; t < p.c; ++t) out[p.h[t]] += p.s[t] * x[t];
}

std::vector<double> count_sketch(std::span<const double> x, const CountSketchParams& p) {
    std::vector<double> out(p.d);
    count_sketch_into(x, p, out);
    return out;
}

std::vector<double> circ_conv_naive(std::span<const double> a, std::span<const double> b) {
    check_shape(a.size() == b.size() && !a.empty(), "circ_conv_naive: length mismatch");
    const std::size_t d = a.size();
    std::vector<double> out(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) acc += a[i] * b[(j + d - i) % d];
        out[j] = acc;
    }
    return out;
}

namespace {

// FFTW plan creation is not thread safe; execution on distinct buffers is.
std::mutex plan_mutex;

struct FftScratch {
    std::size_t d = 0;
    double* in_a = nullptr;
    double* in_b = nullptr;
    fftw_complex* fa = nullptr;
    fftw_complex* fb = nullptr;
    fftw_plan fwd_a{};
    fftw_plan fwd_b{};
    fftw_plan inv{};

    explicit FftScratch(std::size_t d_) : d(d_) {
        const std::size_t nc = d / 2 + 1;
        in_a = fftw_alloc_real(d);
        in_b = fftw_alloc_real(d);
        fa = fftw_alloc_complex(nc);
        fb = fftw_alloc_complex(nc);
        // Measured plans only where transform cost dwarfs planning cost.
        const unsigned flags = d >= 2048 ? FFTW_MEASURE : FFTW_ESTIMATE;
        std::lock_guard lock(plan_mutex);
        fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(d), in_a, fa, flags);
        fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(d), in_b, fb, flags);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(d), fa, in_a, flags);
    }
    ~FftScratch() {
        std::lock_guard lock(plan_mutex);
        fftw_destroy_plan(fwd_a);
        fftw_destroy_plan(fwd_b);
        fftw_destroy_plan(inv);
        fftw_free(in_a);
        fftw_free(in_b);
        fftw_free(fa);
        fftw_free(fb);
    }
    FftScratch(const FftScratch&) = delete;
    FftScratch& operator=(const FftScratch&) = delete;
};

// Per-thread plan cache keyed by length; each size is planned once.
FftScratch& scratch_for(std::size_t d) {
    thread_local std::map<std::size_t, std::unique_ptr<FftScratch>> cache;
    auto& slot = cache[d];
    if (!slot) slot = std::make_unique<FftScratch>(d);
    return *slot;
}

std::vector<double> spectral_product(std::span<const double> a, std::span<const double> b,
                                     bool conjugate_b) {
    const std::size_t d = a.size();
    if (d == 1) return {a[0] * b[0]};
    auto& s = scratch_for(d);
    std::copy(a.begin(), a.end(), s.in_a);
    std::copy(b.begin(), b.end(), s.in_b);
    fftw_execute(s.fwd_a);
    fftw_execute(s.fwd_b);
    const std::size_t nc = d / 2 + 1;
    for (std::size_t i = 0; i < nc; ++i) {
        const double ar = s.fa[i][0], ai = s.fa[i][1];
        const double br = s.fb[i][0];
        const double bi = conjugate_b ? -s.fb[i][1] : s.fb[i][1];
        s.fa[i][0] = ar * br - ai * bi;
        s.fa[i][1] = ar * bi + ai * br;
    }
    fftw_execute(s.inv);
    std::vector<double> out(d);
    const double scale = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = s.in_a[i] * scale;
    return out;
}

}  // namespace

std::vector<double> circ_conv_fast(std::span<const double> a, std::span<const double> b) {
    check_shape(a.size() == b.size() && !a.empty(), "circ_conv_fast: length mismatch");
    return spectral_product(a, b, false);
}

std::vector<double> circ_corr(std::span<const double> a, std::span<const double> b) {
    check_shape(a.size() == b.size() && !a.empty(), "circ_corr: length mismatch");
    return spectral_product(a, b, true);
}

}  // namespace cbp
