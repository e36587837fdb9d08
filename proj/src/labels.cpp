#include "cyclab/labels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cyclab {

double dilation_kernel(int du, int dv, const DilationParams& p) {
    const int d2 = du * du + dv * dv;
    if (d2 > p.radius * p.radius) return 0.0;
    return std::exp(-d2 / (2.0 * p.sigma * p.sigma));
}

Tensor3 dilate(const Tensor3& mask, const DilationParams& p, bool lon_wrap) {
    if (p.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    if (p.radius < 0) throw std::invalid_argument("radius must be non-negative");
    for (double x : mask.v)
        if (x != 0.0 && x != 1.0) throw std::invalid_argument("mask must be binary");
    if (p.radius == 0) return mask;

    Tensor3 out = mask;
    const int R = p.radius;

    #pragma omp parallel for schedule(static)
    for (int t = 0; t < mask.t; ++t) {
        // positives at this timestep
        std::vector<std::pair<int, int>> pos;
        for (int i = 0; i < mask.r; ++i)
            for (int j = 0; j < mask.c; ++j)
                if (mask(t, i, j) == 1.0) pos.emplace_back(i, j);
        if (pos.empty()) continue;

        for (const auto& [pi, pj] : pos) {
            for (int du = -R; du <= R; ++du) {
                const int i = pi + du;
                if (i < 0 || i >= mask.r) continue;
                for (int dv = -R; dv <= R; ++dv) {
                    if (du * du + dv * dv > R * R) continue;
                    int j = pj + dv;
                    if (lon_wrap)
                        j = ((j % mask.c) + mask.c) % mask.c;
                    else if (j < 0 || j >= mask.c)
                        continue;
                    const double k = dilation_kernel(du, dv, p);
                    // min over inducing neighborhoods, tracked via a sentinel:
                    // out holds the running min of induced values where the
                    // original is 0; originals stay pinned at 1 by the final max.
                    double& cell = out(t, i, j);
                    if (mask(t, i, j) == 1.0) continue;  // original positive stays 1
                    if (cell == 0.0 && mask(t, i, j) == 0.0)
                        cell = k;  // first inducer
                    else
                        cell = std::min(cell, k);
                }
            }
        }
    }
    return out;
}

}  // namespace cyclab
