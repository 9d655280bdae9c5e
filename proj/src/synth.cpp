#include "cbp/synth.hpp"

#include <cmath>

namespace cbp {

SynthData synth_data(const SynthConfig& cfg, SeededRng& rng) {
    if (cfg.classes < 2) throw std::invalid_argument("synth_data: need at least 2 classes");
    if (cfg.spread < 0.0) throw std::invalid_argument("synth_data: spread must be >= 0");

    auto mean_rng = rng.child(0);
    auto noise_rng = rng.child(1);

    // One unit mean direction per class.
    std::vector<std::vector<double>> means(cfg.classes, std::vector<double>(cfg.c));
    for (auto& mu : means) {
        double norm2 = 0.0;
        for (auto& v : mu) {
            v = mean_rng.normal();
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        for (auto& v : mu) v /= norm > 0.0 ? norm : 1.0;
    }

    const std::size_t n = cfg.classes * cfg.per_class;
    SynthData out{Grid(n, cfg.h, cfg.w, cfg.c), {}};
    std::size_t sample = 0;
    for (std::size_t cls = 0; cls < cfg.classes; ++cls) {
        for (std::size_t i = 0; i < cfg.per_class; ++i, ++sample) {
            for (std::size_t r = 0; r < cfg.h; ++r)
                for (std::size_t col = 0; col < cfg.w; ++col) {
                    auto x = out.grid.at(sample, r, col);
                    for (std::size_t j = 0; j < cfg.c; ++j)
                        x[j] = means[cls][j] + cfg.spread * noise_rng.normal();
                }
            out.labels.rows.emplace_back(static_cast<std::uint32_t>(sample),
                                         static_cast<std::uint32_t>(cls));
        }
    }
    return out;
}

}  // namespace cbp
