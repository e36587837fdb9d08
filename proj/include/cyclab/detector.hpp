#pragma once

#include <vector>

#include "cyclab/field.hpp"
#include "cyclab/geo.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab {

// Per-snapshot detection candidate.
struct Candidate {
    int t = 0;
    int i = 0, j = 0;
    double msl = 0.0;
    double elevation = 0.0;
    double regional_max_wind = 0.0;
};

struct TrackPoint {
    int t = 0;
    GeoPoint pos;
    double msl = 0.0;
    double wind = 0.0;       // regional max 10-m wind
    double elevation = 0.0;
};

struct Trajectory {
    std::vector<TrackPoint> points;  // strictly increasing t

    int length() const { return static_cast<int>(points.size()); }
};

struct DetectorConfig {
    double min_separation_deg = 6.0;
    double msl_contour_delta = 200.0;        // Pa
    double msl_contour_radius_deg = 5.5;
    double thickness_contour_delta = 58.8;   // m^2/s^2
    double thickness_contour_radius_deg = 6.5;
    double thickness_peak_tolerance_deg = 1.0;
    double max_step_deg = 8.0;
    double max_gap_hours = 24.0;
    double min_lifetime_hours = 54.0;
    int min_qualified_steps = 10;
    double wind_threshold = 10.0;            // m/s
    double elevation_max = 150.0;            // m
    double lat_band_min = -50.0, lat_band_max = 50.0;
    double step_hours = 6.0;
    double regional_wind_radius_deg = 2.0;
    double epsilon = 1e-8;

    static DetectorConfig from_json_file(const std::string& path);
};

// Missing-value convention for 10-m wind.
bool wind_is_missing(double w);

// Max of wind10 over cells within regional_wind_radius_deg + epsilon
// (great circle), skipping missing values; falls back to the cell's own wind
// when the neighborhood is empty.
double regional_max_wind(const DetectorInputs& inp, int t, int i, int j,
                         const DetectorConfig& cfg);

// Stage 1: strict 8-neighborhood MSL minima (longitude wraps, latitude
// clamps), pruned by the deeper-minimum separation rule, the MSL
// closed-contour test (16 rays), and a closed-contour thickness maximum
// within tolerance.
std::vector<Candidate> detect_candidates(const DetectorInputs& inp, int t,
                                         const DetectorConfig& cfg);

// Stage 2: greedy time-ordered nearest-neighbor stitching with lexicographic
// tie-breaking, then lifetime / qualified-step filtering.
std::vector<Trajectory> stitch(const std::vector<std::vector<Candidate>>& by_time,
                               const GridGeometry& geom, const DetectorConfig& cfg);

struct DetectionResult {
    Tensor3 mask;  // 1 exactly at surviving trajectory points
    std::vector<Trajectory> tracks;
};

DetectionResult detect(const DetectorInputs& inp, const DetectorConfig& cfg);

}  // namespace cyclab
