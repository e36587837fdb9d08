#include "cyclab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cyclab {

bool wind_is_missing(double w) {
    return std::isnan(w) || std::abs(w - 1e20) < 1e-6;
}

DetectorConfig DetectorConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    DetectorConfig c;
    auto opt = [&](const char* k, double& tgt) { if (j.contains(k)) tgt = j[k].get<double>(); };
    opt("min_separation_deg", c.min_separation_deg);
    opt("msl_contour_delta", c.msl_contour_delta);
    opt("msl_contour_radius_deg", c.msl_contour_radius_deg);
    opt("thickness_contour_delta", c.thickness_contour_delta);
    opt("thickness_contour_radius_deg", c.thickness_contour_radius_deg);
    opt("thickness_peak_tolerance_deg", c.thickness_peak_tolerance_deg);
    opt("max_step_deg", c.max_step_deg);
    opt("max_gap_hours", c.max_gap_hours);
    opt("min_lifetime_hours", c.min_lifetime_hours);
    if (j.contains("min_qualified_steps")) c.min_qualified_steps = j["min_qualified_steps"].get<int>();
    opt("wind_threshold", c.wind_threshold);
    opt("elevation_max", c.elevation_max);
    opt("lat_band_min", c.lat_band_min);
    opt("lat_band_max", c.lat_band_max);
    opt("step_hours", c.step_hours);
    opt("regional_wind_radius_deg", c.regional_wind_radius_deg);
    opt("epsilon", c.epsilon);
    return c;
}

double regional_max_wind(const DetectorInputs& inp, int t, int i, int j,
                         const DetectorConfig& cfg) {
    const GridGeometry& g = inp.geom;
    const GeoPoint center = g.point_at(i, j);
    const double radius = cfg.regional_wind_radius_deg + cfg.epsilon;

    // search window: radius in rows is radius/|dlat|; widen columns by the
    // cosine of the most poleward latitude in the window
    const int dr = static_cast<int>(std::ceil(radius / std::abs(g.dlat))) + 1;
    const int i_lo = std::max(0, i - dr), i_hi = std::min(g.rows - 1, i + dr);
    double max_abs_lat = 0.0;
    for (int ii = i_lo; ii <= i_hi; ++ii)
        max_abs_lat = std::max(max_abs_lat, std::abs(g.lat_of_row(ii)));
    const double coslat = std::max(std::cos(max_abs_lat * kDegToRad), 1e-3);
    int dc = static_cast<int>(std::ceil(radius / (std::abs(g.dlon) * coslat))) + 1;
    dc = std::min(dc, g.cols);

    bool found = false;
    double best = 0.0;
    for (int ii = i_lo; ii <= i_hi; ++ii) {
        for (int djc = -dc; djc <= dc; ++djc) {
            int jj = j + djc;
            if (g.lon_wraps())
                jj = ((jj % g.cols) + g.cols) % g.cols;
            else if (jj < 0 || jj >= g.cols)
                continue;
            const double w = inp.wind10(t, ii, jj);
            if (wind_is_missing(w)) continue;
            if (great_circle_deg(center, g.point_at(ii, jj)) <= radius) {
                if (!found || w > best) best = w;
                found = true;
            }
        }
    }
    return found ? best : inp.wind10(t, i, j);
}

namespace {

// Strict local extremum over the 8-neighborhood; longitude wraps when the
// grid is global, latitude clamps at the boundary rows.
bool strict_local_extremum(const Tensor3& f, const GridGeometry& g, int t, int i, int j,
                           bool minimum) {
    const double center = f(t, i, j);
    for (int di = -1; di <= 1; ++di) {
        const int ii = i + di;
        if (ii < 0 || ii >= g.rows) continue;
        for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            int jj = j + dj;
            if (g.lon_wraps())
                jj = ((jj % g.cols) + g.cols) % g.cols;
            else if (jj < 0 || jj >= g.cols)
                continue;
            const double x = f(t, ii, jj);
            if (minimum ? (x <= center) : (x >= center)) return false;
        }
    }
    return true;
}

// Closed-contour test: along each of 16 great-circle rays the field must
// rise (minimum) or fall (maximum) by at least `delta` within `radius_deg`.
// Samples at grid-spacing resolution; out-of-grid samples are skipped.
bool closed_contour(const Tensor3& f, const GridGeometry& g, int t, int i, int j,
                    double delta, double radius_deg, bool minimum) {
    const GeoPoint center = g.point_at(i, j);
    const double center_val = f(t, i, j);
    const double step = g.spacing_deg();
    const int nsteps = static_cast<int>(std::floor(radius_deg / step + 1e-9));
    for (int ray = 0; ray < 16; ++ray) {
        const double bearing = ray * 22.5;
        bool ok = false;
        for (int k = 1; k <= nsteps && !ok; ++k) {
            const double dist_km = k * step * kDegToRad * kEarthRadiusKm;
            const GeoPoint p = destination_point(center, bearing, dist_km);
            const int ii = g.row_of_lat(p.lat_deg);
            const int jj = g.col_of_lon(p.lon_deg);
            if (ii < 0 || jj < 0) continue;
            const double diff = f(t, ii, jj) - center_val;
            if (minimum ? (diff >= delta) : (diff <= -delta)) ok = true;
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace

std::vector<Candidate> detect_candidates(const DetectorInputs& inp, int t,
                                         const DetectorConfig& cfg) {
    const GridGeometry& g = inp.geom;

    // (a) strict MSL minima
    std::vector<std::pair<int, int>> minima;
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j)
            if (strict_local_extremum(inp.msl, g, t, i, j, true)) minima.emplace_back(i, j);

    // (b) deeper-minimum separation rule; ties broken by lexicographic index
    std::vector<std::pair<int, int>> kept;
    for (const auto& [i, j] : minima) {
        bool shadowed = false;
        for (const auto& [oi, oj] : minima) {
            if (oi == i && oj == j) continue;
            const double od = inp.msl(t, oi, oj), md = inp.msl(t, i, j);
            const bool deeper = od < md || (od == md && std::make_pair(oi, oj) < std::make_pair(i, j));
            if (!deeper) continue;
            if (great_circle_deg(g.point_at(i, j), g.point_at(oi, oj)) <= cfg.min_separation_deg) {
                shadowed = true;
                break;
            }
        }
        if (!shadowed) kept.push_back({i, j});
    }

    std::vector<Candidate> out;
    for (const auto& [i, j] : kept) {
        // (c) MSL closed contour
        if (!closed_contour(inp.msl, g, t, i, j, cfg.msl_contour_delta,
                            cfg.msl_contour_radius_deg, true))
            continue;

        // (d) closed-contour thickness maximum within tolerance
        const GeoPoint p = g.point_at(i, j);
        const int tol_r = static_cast<int>(std::ceil(cfg.thickness_peak_tolerance_deg /
                                                     std::abs(g.dlat))) + 1;
        bool warm = false;
        for (int ii = std::max(0, i - tol_r); ii <= std::min(g.rows - 1, i + tol_r) && !warm; ++ii)
            for (int dj = -tol_r; dj <= tol_r && !warm; ++dj) {
                int jj = j + dj;
                if (g.lon_wraps())
                    jj = ((jj % g.cols) + g.cols) % g.cols;
                else if (jj < 0 || jj >= g.cols)
                    continue;
                if (great_circle_deg(p, g.point_at(ii, jj)) > cfg.thickness_peak_tolerance_deg)
                    continue;
                if (!strict_local_extremum(inp.thickness, g, t, ii, jj, false)) continue;
                if (closed_contour(inp.thickness, g, t, ii, jj, cfg.thickness_contour_delta,
                                   cfg.thickness_contour_radius_deg, false))
                    warm = true;
            }
        if (!warm) continue;

        Candidate cand;
        cand.t = t;
        cand.i = i;
        cand.j = j;
        cand.msl = inp.msl(t, i, j);
        cand.elevation = inp.elevation(t, i, j);
        cand.regional_max_wind = regional_max_wind(inp, t, i, j, cfg);
        out.push_back(cand);
    }
    return out;
}

std::vector<Trajectory> stitch(const std::vector<std::vector<Candidate>>& by_time,
                               const GridGeometry& geom, const DetectorConfig& cfg) {
    const int T = static_cast<int>(by_time.size());
    const int max_gap_steps = static_cast<int>(std::floor(cfg.max_gap_hours / cfg.step_hours));

    struct OpenTrack {
        Trajectory traj;
        int last_t = -1;
    };
    std::vector<OpenTrack> open;
    std::vector<Trajectory> closed;

    auto to_point = [&](const Candidate& c) {
        TrackPoint p;
        p.t = c.t;
        p.pos = geom.point_at(c.i, c.j);
        p.msl = c.msl;
        p.wind = c.regional_max_wind;
        p.elevation = c.elevation;
        return p;
    };

    for (int t = 0; t < T; ++t) {
        std::vector<Candidate> cands = by_time[t];
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
        });
        std::vector<bool> claimed(cands.size(), false);

        // extend tracks in creation order; each claims its nearest unclaimed
        // candidate within the step limit, ties by lexicographic index
        for (auto& trk : open) {
            if (t - trk.last_t > max_gap_steps) continue;
            const GeoPoint last = trk.traj.points.back().pos;
            int best = -1;
            double best_d = 0.0;
            for (size_t k = 0; k < cands.size(); ++k) {
                if (claimed[k]) continue;
                const double d = great_circle_deg(last, geom.point_at(cands[k].i, cands[k].j));
                if (d > cfg.max_step_deg) continue;
                if (best < 0 || d < best_d) {
                    best = static_cast<int>(k);
                    best_d = d;
                }
            }
            if (best >= 0) {
                claimed[best] = true;
                trk.traj.points.push_back(to_point(cands[best]));
                trk.last_t = t;
            }
        }
        // expire tracks that can no longer be extended
        std::vector<OpenTrack> still_open;
        for (auto& trk : open) {
            if (t - trk.last_t >= max_gap_steps)
                closed.push_back(std::move(trk.traj));
            else
                still_open.push_back(std::move(trk));
        }
        open = std::move(still_open);

        for (size_t k = 0; k < cands.size(); ++k)
            if (!claimed[k]) open.push_back({Trajectory{{to_point(cands[k])}}, t});
    }
    for (auto& trk : open) closed.push_back(std::move(trk.traj));

    std::vector<Trajectory> out;
    for (auto& traj : closed) {
        const double lifetime =
            (traj.points.back().t - traj.points.front().t) * cfg.step_hours;
        if (lifetime < cfg.min_lifetime_hours) continue;
        int qualified = 0;
        for (const auto& p : traj.points)
            if (p.wind >= cfg.wind_threshold && p.elevation <= cfg.elevation_max &&
                p.pos.lat_deg >= cfg.lat_band_min && p.pos.lat_deg <= cfg.lat_band_max)
                ++qualified;
        if (qualified < cfg.min_qualified_steps) continue;
        out.push_back(std::move(traj));
    }
    return out;
}

DetectionResult detect(const DetectorInputs& inp, const DetectorConfig& cfg) {
    const int T = inp.msl.t;
    std::vector<std::vector<Candidate>> by_time(T);
    #pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < T; ++t) by_time[t] = detect_candidates(inp, t, cfg);

    DetectionResult res;
    res.tracks = stitch(by_time, inp.geom, cfg);
    res.mask = Tensor3(T, inp.msl.r, inp.msl.c);
    for (const auto& traj : res.tracks)
        for (const auto& p : traj.points) {
            const int i = inp.geom.row_of_lat(p.pos.lat_deg);
            const int j = inp.geom.col_of_lon(p.pos.lon_deg);
            res.mask(p.t, i, j) = 1.0;
        }
    return res;
}

}  // namespace cyclab
