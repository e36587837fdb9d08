#include "cyclab/targetgen.hpp"

#include <cmath>
#include <stdexcept>

#include "cyclab/rng.hpp"

namespace cyclab {

std::array<std::array<double, 2>, 8> compass_basis() {
    std::array<std::array<double, 2>, 8> basis{};
    for (int j = 0; j < 8; ++j) {
        const double b = j * 45.0 * kDegToRad;
        basis[j] = {std::sin(b), std::cos(b)};  // (east, north)
    }
    return basis;
}

std::vector<double> step_distances(const Trajectory& traj, double earth_radius_km) {
    if (traj.length() < 2) throw std::invalid_argument("trajectory needs at least 2 points");
    std::vector<double> d;
    for (int k = 1; k < traj.length(); ++k) {
        const double ang = great_circle_deg(traj.points[k - 1].pos, traj.points[k].pos);
        d.push_back(earth_radius_km * ang * kDegToRad);
    }
    return d;
}

DirectionChoice direction_scores(const std::array<double, 2>& v_orig,
                                 const std::array<double, 2>* v_prev_adv,
                                 const TargetGenParams& p) {
    const double n_orig = std::hypot(v_orig[0], v_orig[1]);
    if (n_orig <= 0.0) throw std::invalid_argument("zero original displacement");
    double n_prev = 0.0;
    if (v_prev_adv) n_prev = std::hypot((*v_prev_adv)[0], (*v_prev_adv)[1]);

    const auto basis = compass_basis();
    DirectionChoice out;
    double total = 0.0;
    for (int j = 0; j < 8; ++j) {
        const double cos_orig = (v_orig[0] * basis[j][0] + v_orig[1] * basis[j][1]) / n_orig;
        double s = p.gamma1 * std::exp(-cos_orig);
        if (v_prev_adv && n_prev > 0.0) {
            const double cos_adv =
                ((*v_prev_adv)[0] * basis[j][0] + (*v_prev_adv)[1] * basis[j][1]) / n_prev;
            s += p.gamma2 * std::exp(cos_adv);
        }
        out.probs[j] = s;
        total += s;
    }
    if (total <= 0.0) {
        // no informative term (e.g. gamma1 = 0 before any adversarial step):
        // fall back to a uniform choice over the compass directions
        for (int j = 0; j < 8; ++j) out.probs[j] = 0.125;
    } else {
        for (int j = 0; j < 8; ++j) out.probs[j] /= total;
    }
    out.chosen = 0;
    for (int j = 1; j < 8; ++j)
        if (out.probs[j] > out.probs[out.chosen]) out.chosen = j;
    return out;
}

namespace {

// Planar (east, north) displacement in degrees between consecutive points.
std::array<double, 2> planar_displacement(const GeoPoint& a, const GeoPoint& b) {
    double dlon = std::remainder(b.lon_deg - a.lon_deg, 360.0);
    const double east = dlon * std::cos(0.5 * (a.lat_deg + b.lat_deg) * kDegToRad);
    const double north = b.lat_deg - a.lat_deg;
    return {east, north};
}

}  // namespace

Trajectory synthesize_adversarial_track(const Trajectory& traj, const TargetGenParams& p) {
    if (traj.length() < 2) throw std::invalid_argument("trajectory needs at least 2 points");
    if (p.gamma1 + p.gamma2 <= 0.0) throw std::invalid_argument("gamma1 + gamma2 must be positive");

    const auto basis = compass_basis();
    const std::vector<double> dist = step_distances(traj, p.earth_radius_km);
    Rng rng(p.seed);

    Trajectory adv;
    adv.points.push_back(traj.points[0]);  // same origin

    bool have_prev = false;
    std::array<double, 2> prev_disp{};
    for (int tau = 1; tau < traj.length(); ++tau) {
        const GeoPoint prev_adv = adv.points.back().pos;
        const double d_km = dist[tau - 1];
        auto v = planar_displacement(traj.points[tau - 1].pos, traj.points[tau].pos);
        const double vn = std::hypot(v[0], v[1]);

        GeoPoint next;
        if (d_km <= 0.0 || vn <= 1e-12) {
            next = prev_adv;  // stationary step
        } else {
            DirectionChoice dc =
                direction_scores(v, have_prev ? &prev_disp : nullptr, p);
            int jstar = dc.chosen;
            if (p.sample) {
                double u = rng.uniform(), acc = 0.0;
                for (int j = 0; j < 8; ++j) {
                    acc += dc.probs[j];
                    if (u < acc) { jstar = j; break; }
                }
            }
            // blend the unit original direction with the chosen compass vector
            double ue = v[0] / vn + basis[jstar][0];
            double un = v[1] / vn + basis[jstar][1];
            if (std::hypot(ue, un) < 1e-12) {
                ue = basis[jstar][0];
                un = basis[jstar][1];
            }
            const double bearing = bearing_of_planar_vector(ue, un);
            next = destination_point(prev_adv, bearing, d_km, p.earth_radius_km);
            prev_disp = planar_displacement(prev_adv, next);
            have_prev = true;
        }

        TrackPoint tp = traj.points[tau];
        tp.pos = next;
        adv.points.push_back(tp);
    }
    return adv;
}

Tensor3 rasterize(const Trajectory& traj, const GridGeometry& g, int steps) {
    Tensor3 mask(steps, g.rows, g.cols);
    for (const auto& pnt : traj.points) {
        if (pnt.t < 0 || pnt.t >= steps)
            throw std::invalid_argument("trajectory point time outside mask range");
        const int i = g.row_of_lat(pnt.pos.lat_deg);
        const int j = g.col_of_lon(pnt.pos.lon_deg);
        if (i < 0 || j < 0) throw std::invalid_argument("trajectory point outside grid");
        mask(pnt.t, i, j) = 1.0;
    }
    return mask;
}

Tensor3 replace_track(const Tensor3& mask, const Trajectory& original,
                      const Trajectory& adversarial, const GridGeometry& g) {
    Tensor3 out = mask;
    for (const auto& pnt : original.points) {
        const int i = g.row_of_lat(pnt.pos.lat_deg);
        const int j = g.col_of_lon(pnt.pos.lon_deg);
        if (i < 0 || j < 0) throw std::invalid_argument("original point outside grid");
        out(pnt.t, i, j) = 0.0;
    }
    for (const auto& pnt : adversarial.points) {
        if (pnt.t < 0 || pnt.t >= mask.t)
            throw std::invalid_argument("adversarial point time outside mask range");
        const int i = g.row_of_lat(pnt.pos.lat_deg);
        const int j = g.col_of_lon(pnt.pos.lon_deg);
        if (i < 0 || j < 0) throw std::invalid_argument("adversarial point outside grid");
        out(pnt.t, i, j) = 1.0;
    }
    return out;
}

}  // namespace cyclab
