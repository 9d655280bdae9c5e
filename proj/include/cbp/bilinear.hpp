#pragma once

#include "cbp/types.hpp"

namespace cbp {

// Exact second-order pooling: per sample, sum of outer products
// x_s x_s^T over spatial locations, flattened row-major to length c^2.
// This is the ground-truth oracle for the compact methods.
Pooled bilinear_pool(const Grid& grid);

// Chain rule through the pooled outer products:
// dL/dx_s = (G + G^T) x_s with G = grad_out reshaped c x c.
Grid bilinear_pool_backward(const Grid& grid, const Pooled& grad_out);

// Sum over location pairs of <x_s, y_u>^2, computed by the double sum
// directly (never through the c^2 descriptor). Both grids must be n=1.
double exact_kernel(const Grid& a, const Grid& b);

}  // namespace cbp
