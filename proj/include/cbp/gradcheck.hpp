#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace cbp {

// Central finite differences of a scalar loss over a parameter buffer.
// The caller's loss closure reads the buffer by reference.
inline std::vector<double> finite_diff(std::vector<double>& params,
                                       const std::function<double()>& loss, double eps) {
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        const double step = eps * std::max(1.0, std::fabs(saved));
        params[i] = saved + step;
        const double up = loss();
        params[i] = saved - step;
        const double down = loss();
        params[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

// Max relative error between analytic and numeric gradients, with an
// absolute floor so near-zero entries do not blow up the ratio.
inline double max_rel_error(std::span<const double> analytic, std::span<const double> numeric,
                            double floor = 1e-6) {
    double scale = floor;
    for (std::size_t i = 0; i < analytic.size(); ++i)
        scale = std::max({scale, std::fabs(analytic[i]), std::fabs(numeric[i])});
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, std::fabs(analytic[i] - numeric[i]) / scale);
    return worst;
}

}  // namespace cbp
