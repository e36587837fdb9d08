#pragma once

#include "cyclab/tensor.hpp"

namespace cyclab {

// Truncated-Gaussian kernel dilation of binary masks into soft labels.
struct DilationParams {
    double sigma = 1.0;  // grid-cell units, > 0
    int radius = 2;      // maximum dilation radius R in cells, >= 0
};

// K(u, v) = exp(-(u^2+v^2) / (2 sigma^2)) for u^2+v^2 <= R^2.
double dilation_kernel(int du, int dv, const DilationParams& p);

// Cells inside exactly one positive neighborhood take max(original, induced);
// cells inside several take the minimum of the induced values (then max with
// the original). R = 0 returns the mask unchanged. Throws on non-binary input.
// Longitude (last axis) wraps when lon_wrap is set.
Tensor3 dilate(const Tensor3& mask, const DilationParams& p, bool lon_wrap = true);

}  // namespace cyclab
