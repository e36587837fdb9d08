#pragma once

#include <array>
#include <cstdint>

#include "cyclab/detector.hpp"
#include "cyclab/geo.hpp"
#include "cyclab/grid.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab {

struct TargetGenParams {
    double gamma1 = 1.0;  // deviation-from-original weight
    double gamma2 = 1.0;  // coherence-with-previous weight
    bool sample = false;  // false = deterministic argmax
    uint64_t seed = 7;
    double earth_radius_km = kEarthRadiusKm;
};

// The 8-connected compass basis, bearings {0, 45, ..., 315}, as (east, north)
// unit vectors.
std::array<std::array<double, 2>, 8> compass_basis();

// Great-circle step lengths d_tau for tau = 2..n, in km.
std::vector<double> step_distances(const Trajectory& traj, double earth_radius_km = kEarthRadiusKm);

struct DirectionChoice {
    std::array<double, 8> probs{};
    int chosen = 0;
};

// Scores s_j = g1 exp(-cos th_orig) + g2 exp(cos th_adv), normalized; the
// gamma2 term is omitted when there is no previous adversarial displacement.
// v_orig / v_prev_adv are planar (east, north) vectors; v_orig must be nonzero.
DirectionChoice direction_scores(const std::array<double, 2>& v_orig,
                                 const std::array<double, 2>* v_prev_adv,
                                 const TargetGenParams& p);

// Deviating trajectory with preserved per-step geodesic lengths and the same
// origin. Deterministic given params (argmax mode), or seeded sampling.
Trajectory synthesize_adversarial_track(const Trajectory& traj, const TargetGenParams& p);

// Nearest-cell rasterization: one cell set per point at its timestep.
// Throws if a point falls outside the grid.
Tensor3 rasterize(const Trajectory& traj, const GridGeometry& g, int steps);

// Zero the original trajectory's cells in `mask` and set the adversarial
// ones, leaving everything else unchanged.
Tensor3 replace_track(const Tensor3& mask, const Trajectory& original,
                      const Trajectory& adversarial, const GridGeometry& g);

}  // namespace cyclab
