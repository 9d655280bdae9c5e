#pragma once

#include "cbp/io.hpp"
#include "cbp/rng.hpp"
#include "cbp/types.hpp"

namespace cbp {

struct SynthConfig {
    std::size_t classes = 2;
    std::size_t per_class = 10;
    std::size_t c = 8;
    std::size_t h = 2;
    std::size_t w = 2;
    double spread = 0.1;  // isotropic noise around the class mean direction
};

struct SynthData {
    Grid grid;
    io::LabelTable labels;
};

// Class-specific unit mean directions plus Gaussian noise of the given
// spread at every spatial location. Samples are ordered class-major.
SynthData synth_data(const SynthConfig& cfg, SeededRng& rng);

}  // namespace cbp
