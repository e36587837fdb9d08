#pragma once

#include <string>
#include <vector>

#include "cyclab/detector.hpp"
#include "cyclab/field.hpp"

namespace cyclab {

// A parametric vortex moving along a scripted great-circle track.
struct VortexSpec {
    GeoPoint start;
    std::vector<double> bearing_deg;   // per step; last entry repeats if short
    std::vector<double> speed_km;      // km per step; last entry repeats if short
    double depth_pa = 2000.0;          // MSL depression at center
    double core_radius_deg = 3.0;      // Gaussian core for msl / warm core
    double peak_wind_ms = 25.0;
    double wind_radius_deg = 1.5;      // radius of maximum wind
    double warm_core_amp = 150.0;      // m^2/s^2 added to z300 at center
    int lifetime_steps = 0;            // 0 = full scenario length
};

struct ScenarioSpec {
    GridGeometry geom;
    int steps = 12;
    double background_msl = 101325.0;
    double background_z300 = 89000.0;  // m^2/s^2
    double background_z500 = 54000.0;
    double background_u10 = 2.0;       // uniform zonal flow, m/s
    double noise_amplitude = 60.0;     // Pa, msl noise std
    double noise_wind_amplitude = -1.0;      // m/s; < 0 means noise_amplitude / 60
    double noise_geo_amplitude = -1.0;       // m^2/s^2; < 0 means noise_amplitude / 3
    double noise_correlation_cells = 3.0;
    std::vector<VortexSpec> vortices;
    uint64_t seed = 1;

    static ScenarioSpec from_json_file(const std::string& path);
    std::string to_json() const;
};

// Modified Rankine tangential wind profile with a smooth cutoff beyond
// 3 x wind_radius. r in degrees.
double rankine_profile(double r_deg, double peak_wind, double wind_radius_deg);

struct Scenario {
    FieldSequence fields;
    std::vector<Trajectory> truth;
};

// Deterministic given spec.seed. Throws if a vortex track leaves |lat| <= 89.
Scenario synth_scenario(const ScenarioSpec& spec);

}  // namespace cyclab
