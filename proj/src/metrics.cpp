#include "cyclab/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cyclab {

LocationRates location_rates(const Tensor3& pred, const Tensor3& target) {
    require_same_shape(pred, target, "location_rates");
    LocationRates r;
    for (size_t k = 0; k < pred.v.size(); ++k) {
        const bool p = pred.v[k] != 0.0, z = target.v[k] != 0.0;
        if (p && z) ++r.tp;
        else if (!p && !z) ++r.tn;
        else if (p) ++r.fp;
        else ++r.fn;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.tpr = (r.tp + r.fn) ? static_cast<double>(r.tp) / (r.tp + r.fn) : nan;
    r.fnr = (r.tp + r.fn) ? static_cast<double>(r.fn) / (r.tp + r.fn) : nan;
    r.tnr = (r.tn + r.fp) ? static_cast<double>(r.tn) / (r.tn + r.fp) : nan;
    r.fpr = (r.tn + r.fp) ? static_cast<double>(r.fp) / (r.tn + r.fp) : nan;
    return r;
}

namespace {

int overlap_count(const Trajectory& pred, const Trajectory& target, double radius_deg) {
    int n = 0;
    for (const auto& tp : target.points)
        for (const auto& pp : pred.points)
            if (pp.t == tp.t && great_circle_deg(pp.pos, tp.pos) < radius_deg) {
                ++n;
                break;  // each target point counted once
            }
    return n;
}

}  // namespace

TrajectoryScores trajectory_scores(const std::vector<Trajectory>& pred,
                                   const std::vector<Trajectory>& targets,
                                   double radius_deg, double detect_frac) {
    TrajectoryScores s;
    s.targets = static_cast<int>(targets.size());
    s.predictions = static_cast<int>(pred.size());

    for (const auto& tgt : targets) {
        int best = 0;
        for (const auto& p : pred) best = std::max(best, overlap_count(p, tgt, radius_deg));
        const double frac = tgt.points.empty() ? 0.0
                                               : static_cast<double>(best) / tgt.length();
        s.overlap_fraction.push_back(frac);
        if (!tgt.points.empty() && frac >= detect_frac) ++s.detected;
    }
    for (const auto& p : pred) {
        bool overlaps_any = false;
        for (const auto& tgt : targets)
            if (overlap_count(p, tgt, radius_deg) > 0) {
                overlaps_any = true;
                break;
            }
        s.false_alarm_flags.push_back(!overlaps_any);
        if (!overlaps_any) ++s.false_alarms;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.dr = s.targets ? static_cast<double>(s.detected) / s.targets : nan;
    s.far = s.predictions ? static_cast<double>(s.false_alarms) / s.predictions : nan;
    return s;
}

double closeness(const Tensor4& orig_std, const Tensor4& adv_std) {
    if (!orig_std.same_shape(adv_std))
        throw std::invalid_argument("shape mismatch: closeness");
    double sum = 0.0;
    for (size_t k = 0; k < orig_std.v.size(); ++k)
        sum += std::abs(orig_std.v[k] - adv_std.v[k]);
    return sum / static_cast<double>(orig_std.v.size());
}

double closeness(const FieldSequence& orig, const FieldSequence& adv,
                 const StandardizationStats& stats) {
    if (orig.vars != adv.vars) throw std::invalid_argument("variable list mismatch: closeness");
    return closeness(standardize(orig, stats).data, standardize(adv, stats).data);
}

}  // namespace cyclab
