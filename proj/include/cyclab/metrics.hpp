#pragma once

#include <vector>

#include "cyclab/detector.hpp"
#include "cyclab/field.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab {

struct LocationRates {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
    double tpr = 0.0, tnr = 0.0, fpr = 0.0, fnr = 0.0;
};

LocationRates location_rates(const Tensor3& pred, const Tensor3& target);

struct TrajectoryScores {
    double dr = 0.0;   // detected targets / total targets (NaN when no targets)
    double far = 0.0;  // zero-overlap predictions / total predictions (NaN when none)
    int targets = 0, detected = 0;
    int predictions = 0, false_alarms = 0;
    std::vector<double> overlap_fraction;   // per target
    std::vector<bool> false_alarm_flags;    // per prediction
};

// Same-timestep overlap within radius_deg; a target is detected when its best
// prediction covers at least detect_frac of its points; a prediction is a
// false alarm when it overlaps no target at all.
TrajectoryScores trajectory_scores(const std::vector<Trajectory>& pred,
                                   const std::vector<Trajectory>& targets,
                                   double radius_deg = 2.0, double detect_frac = 0.5);

// Mean absolute difference over all entries, in standardized units.
double closeness(const FieldSequence& orig, const FieldSequence& adv,
                 const StandardizationStats& stats);
double closeness(const Tensor4& orig_std, const Tensor4& adv_std);

}  // namespace cyclab
