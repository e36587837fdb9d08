#pragma once

// Serial reference implementations of the OpenMP kernels. These favor the
// simplest possible formulation (brute force where applicable) and are kept
// as independent oracles for the parallel versions, plus as the baseline for
// the benchmark tool.

#include "cyclab/attack.hpp"
#include "cyclab/detector.hpp"
#include "cyclab/labels.hpp"
#include "cyclab/surrogate.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab::ref {

// Brute-force dilation: for every cell, scan all positive cells in range.
Tensor3 dilate(const Tensor3& mask, const DilationParams& p, bool lon_wrap = true);

// Naive serial convolutional forward pass, same padding rules as the model.
Tensor3 forward(const SurrogateModel& m, const Tensor4& x);

// Exhaustive great-circle scan over the whole grid.
double regional_max_wind(const DetectorInputs& inp, int t, int i, int j,
                         const DetectorConfig& cfg);

// Serial distance weights with a full scan per cell.
DistanceWeights distance_weights(const Tensor3& zstar, const GridGeometry& geom,
                                 double sigma_grad, double sigma_reg);

}  // namespace cyclab::ref
