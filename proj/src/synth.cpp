#include "cyclab/synth.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cyclab/rng.hpp"

namespace cyclab {

using nlohmann::json;

double rankine_profile(double r_deg, double peak_wind, double wind_radius_deg) {
    if (r_deg <= 0.0) return 0.0;
    double v;
    if (r_deg <= wind_radius_deg)
        v = peak_wind * (r_deg / wind_radius_deg);
    else
        v = peak_wind * std::pow(wind_radius_deg / r_deg, 0.6);
    // smooth cutoff between 2.5 and 3 wind radii
    const double cut_lo = 2.5 * wind_radius_deg, cut_hi = 3.0 * wind_radius_deg;
    if (r_deg >= cut_hi) return 0.0;
    if (r_deg > cut_lo) {
        const double x = (r_deg - cut_lo) / (cut_hi - cut_lo);
        v *= 0.5 * (1.0 + std::cos(M_PI * x));
    }
    return v;
}

namespace {

// Isotropic correlated noise: white field smoothed by a separable Gaussian,
// rescaled to unit standard deviation.
Tensor3 correlated_noise(int T, int r, int c, double corr_cells, Rng& rng) {
    Tensor3 white(T, r, c);
    for (auto& x : white.v) x = rng.normal();
    if (corr_cells <= 0.0) return white;

    const int K = std::max(1, static_cast<int>(std::ceil(3.0 * corr_cells)));
    std::vector<double> kernel(2 * K + 1);
    for (int k = -K; k <= K; ++k)
        kernel[k + K] = std::exp(-0.5 * (k * k) / (corr_cells * corr_cells));

    Tensor3 tmp(T, r, c), out(T, r, c);
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double s = 0.0, wsum = 0.0;
                for (int k = -K; k <= K; ++k) {
                    const int jj = ((j + k) % c + c) % c;
                    s += kernel[k + K] * white(t, i, jj);
                    wsum += kernel[k + K];
                }
                tmp(t, i, j) = s / wsum;
            }
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double s = 0.0, wsum = 0.0;
                for (int k = -K; k <= K; ++k) {
                    const int ii = i + k;
                    if (ii < 0 || ii >= r) continue;
                    s += kernel[k + K] * tmp(t, ii, j);
                    wsum += kernel[k + K];
                }
                out(t, i, j) = s / wsum;
            }
    }
    // normalize to unit std
    double sum = 0.0, sq = 0.0;
    for (double x : out.v) {
        sum += x;
        sq += x * x;
    }
    const double n = static_cast<double>(out.v.size());
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(sq / n - mean * mean, 1e-30));
    for (auto& x : out.v) x = (x - mean) / sd;
    return out;
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json j;
    in >> j;
    ScenarioSpec s;
    const auto& g = j.at("grid");
    s.geom.rows = g.at("rows").get<int>();
    s.geom.cols = g.at("cols").get<int>();
    s.geom.lat0 = g.at("lat0").get<double>();
    s.geom.dlat = g.value("dlat", 1.0);
    s.geom.lon0 = g.at("lon0").get<double>();
    s.geom.dlon = g.value("dlon", 1.0);
    s.steps = j.value("steps", 12);
    s.background_msl = j.value("background_msl", s.background_msl);
    s.background_z300 = j.value("background_z300", s.background_z300);
    s.background_z500 = j.value("background_z500", s.background_z500);
    s.background_u10 = j.value("background_u10", s.background_u10);
    s.noise_amplitude = j.value("noise_amplitude", s.noise_amplitude);
    s.noise_wind_amplitude = j.value("noise_wind_amplitude", s.noise_wind_amplitude);
    s.noise_geo_amplitude = j.value("noise_geo_amplitude", s.noise_geo_amplitude);
    s.noise_correlation_cells = j.value("noise_correlation_cells", s.noise_correlation_cells);
    s.seed = j.value("seed", uint64_t{1});
    for (const auto& vj : j.value("vortices", json::array())) {
        VortexSpec v;
        v.start = make_geopoint(vj.at("lat").get<double>(), vj.at("lon").get<double>());
        v.bearing_deg = vj.value("bearing_deg", std::vector<double>{90.0});
        v.speed_km = vj.value("speed_km", std::vector<double>{150.0});
        v.depth_pa = vj.value("depth_pa", v.depth_pa);
        v.core_radius_deg = vj.value("core_radius_deg", v.core_radius_deg);
        v.peak_wind_ms = vj.value("peak_wind_ms", v.peak_wind_ms);
        v.wind_radius_deg = vj.value("wind_radius_deg", v.wind_radius_deg);
        v.warm_core_amp = vj.value("warm_core_amp", v.warm_core_amp);
        v.lifetime_steps = vj.value("lifetime_steps", 0);
        s.vortices.push_back(v);
    }
    return s;
}

std::string ScenarioSpec::to_json() const {
    json j;
    j["grid"] = {{"rows", geom.rows}, {"cols", geom.cols}, {"lat0", geom.lat0},
                 {"dlat", geom.dlat}, {"lon0", geom.lon0}, {"dlon", geom.dlon}};
    j["steps"] = steps;
    j["background_msl"] = background_msl;
    j["background_z300"] = background_z300;
    j["background_z500"] = background_z500;
    j["background_u10"] = background_u10;
    j["noise_amplitude"] = noise_amplitude;
    j["noise_wind_amplitude"] = noise_wind_amplitude;
    j["noise_geo_amplitude"] = noise_geo_amplitude;
    j["noise_correlation_cells"] = noise_correlation_cells;
    j["seed"] = seed;
    j["vortices"] = json::array();
    for (const auto& v : vortices) {
        j["vortices"].push_back({{"lat", v.start.lat_deg}, {"lon", v.start.lon_deg},
                                 {"bearing_deg", v.bearing_deg}, {"speed_km", v.speed_km},
                                 {"depth_pa", v.depth_pa}, {"core_radius_deg", v.core_radius_deg},
                                 {"peak_wind_ms", v.peak_wind_ms},
                                 {"wind_radius_deg", v.wind_radius_deg},
                                 {"warm_core_amp", v.warm_core_amp},
                                 {"lifetime_steps", v.lifetime_steps}});
    }
    return j.dump(2);
}

Scenario synth_scenario(const ScenarioSpec& spec) {
    spec.geom.validate();
    if (spec.steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (spec.noise_amplitude < 0.0) throw std::invalid_argument("negative noise amplitude");

    const int T = spec.steps, r = spec.geom.rows, c = spec.geom.cols;
    const double wind_amp = spec.noise_wind_amplitude >= 0.0
                                ? spec.noise_wind_amplitude
                                : spec.noise_amplitude / 60.0;
    const double geo_amp = spec.noise_geo_amplitude >= 0.0 ? spec.noise_geo_amplitude
                                                           : spec.noise_amplitude / 3.0;

    FieldSequence f;
    f.geom = spec.geom;
    f.vars = {"msl", "u10", "v10", "z300", "z500", "surface_geopotential"};
    f.data = Tensor4(T, 6, r, c);

    Rng rng(spec.seed);
    Tensor3 n_msl = correlated_noise(T, r, c, spec.noise_correlation_cells, rng);
    Tensor3 n_u = correlated_noise(T, r, c, spec.noise_correlation_cells, rng);
    Tensor3 n_v = correlated_noise(T, r, c, spec.noise_correlation_cells, rng);
    Tensor3 n_z3 = correlated_noise(T, r, c, spec.noise_correlation_cells, rng);
    Tensor3 n_z5 = correlated_noise(T, r, c, spec.noise_correlation_cells, rng);

    for (int t = 0; t < T; ++t)
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                f.data(t, 0, i, j) = spec.background_msl + spec.noise_amplitude * n_msl(t, i, j);
                f.data(t, 1, i, j) = spec.background_u10 + wind_amp * n_u(t, i, j);
                f.data(t, 2, i, j) = wind_amp * n_v(t, i, j);
                f.data(t, 3, i, j) = spec.background_z300 + geo_amp * n_z3(t, i, j);
                f.data(t, 4, i, j) = spec.background_z500 + geo_amp * n_z5(t, i, j);
                f.data(t, 5, i, j) = 0.0;  // open ocean
            }

    std::vector<Trajectory> truth;
    for (const auto& v : spec.vortices) {
        const int life = v.lifetime_steps > 0 ? std::min(v.lifetime_steps, T) : T;
        if (v.depth_pa < 0.0 || v.core_radius_deg <= 0.0 || v.wind_radius_deg <= 0.0)
            throw std::invalid_argument("invalid vortex spec");

        // scripted track
        std::vector<GeoPoint> track;
        GeoPoint pos = v.start;
        track.push_back(pos);
        for (int t = 1; t < life; ++t) {
            const double b = v.bearing_deg.empty()
                                 ? 90.0
                                 : v.bearing_deg[std::min<size_t>(t - 1, v.bearing_deg.size() - 1)];
            const double s = v.speed_km.empty()
                                 ? 150.0
                                 : v.speed_km[std::min<size_t>(t - 1, v.speed_km.size() - 1)];
            pos = destination_point(pos, b, s);
            if (std::abs(pos.lat_deg) > 89.0)
                throw std::invalid_argument("vortex track leaves |lat| <= 89");
            track.push_back(pos);
        }

        Trajectory gt;
        for (int t = 0; t < life; ++t) {
            const GeoPoint& ctr = track[t];
            const double hemi = ctr.lat_deg >= 0.0 ? 1.0 : -1.0;  // cyclonic sense
            const double reach = 3.0 * std::max(v.wind_radius_deg, v.core_radius_deg) + 2.0;
            for (int i = 0; i < r; ++i) {
                if (std::abs(spec.geom.lat_of_row(i) - ctr.lat_deg) > reach) continue;
                for (int j = 0; j < c; ++j) {
                    const GeoPoint p = spec.geom.point_at(i, j);
                    const double d = great_circle_deg(ctr, p);
                    if (d > reach) continue;
                    const double core = std::exp(-d * d / (2.0 * v.core_radius_deg * v.core_radius_deg));
                    f.data(t, 0, i, j) -= v.depth_pa * core;
                    f.data(t, 3, i, j) += v.warm_core_amp * core;
                    const double w = rankine_profile(d, v.peak_wind_ms, v.wind_radius_deg);
                    if (w > 0.0 && d > 1e-9) {
                        // tangential flow: bearing from center, rotated 90 deg
                        const double dlon = std::remainder(p.lon_deg - ctr.lon_deg, 360.0);
                        const double east = dlon * std::cos(0.5 * (p.lat_deg + ctr.lat_deg) * kDegToRad);
                        const double north = p.lat_deg - ctr.lat_deg;
                        const double norm = std::sqrt(east * east + north * north);
                        if (norm > 1e-12) {
                            // counterclockwise in NH: tangent = (-north, east)/|.|
                            f.data(t, 1, i, j) += hemi * w * (-north / norm);
                            f.data(t, 2, i, j) += hemi * w * (east / norm);
                        }
                    }
                }
            }
            TrackPoint tp;
            tp.t = t;
            tp.pos = ctr;
            tp.msl = spec.background_msl - v.depth_pa;
            tp.wind = v.peak_wind_ms;
            tp.elevation = 0.0;
            gt.points.push_back(tp);
        }
        truth.push_back(std::move(gt));
    }

    f.validate();
    return Scenario{std::move(f), std::move(truth)};
}

}  // namespace cyclab
