#include "cyclab/geo.hpp"

#include <algorithm>
#include <cmath>

namespace cyclab {

double normalize_lon(double lon_deg) {
    double l = std::fmod(lon_deg, 360.0);
    if (l < 0.0) l += 360.0;
    if (l >= 360.0) l = 0.0;  // fmod can land exactly on 360 after the add
    return l;
}

GeoPoint make_geopoint(double lat_deg, double lon_deg) {
    if (!(lat_deg >= -90.0 && lat_deg <= 90.0))
        throw std::invalid_argument("latitude out of [-90, 90]");
    return GeoPoint{lat_deg, normalize_lon(lon_deg)};
}

double great_circle_deg(const GeoPoint& a, const GeoPoint& b) {
    const double pa = a.lat_deg * kDegToRad, pb = b.lat_deg * kDegToRad;
    const double dl = (b.lon_deg - a.lon_deg) * kDegToRad;
    double cosang = std::sin(pa) * std::sin(pb) + std::cos(pa) * std::cos(pb) * std::cos(dl);
    cosang = std::clamp(cosang, -1.0, 1.0);
    return std::acos(cosang) * kRadToDeg;
}

GeoPoint destination_point(const GeoPoint& start, double bearing_deg,
                           double distance_km, double earth_radius_km) {
    if (distance_km < 0.0) throw std::invalid_argument("negative distance");
    if (earth_radius_km <= 0.0) throw std::invalid_argument("non-positive radius");
    const double phi1 = start.lat_deg * kDegToRad;
    const double lam1 = start.lon_deg * kDegToRad;
    const double theta = bearing_deg * kDegToRad;
    const double ang = distance_km / earth_radius_km;

    const double sinphi2 = std::clamp(
        std::sin(phi1) * std::cos(ang) + std::cos(phi1) * std::sin(ang) * std::cos(theta),
        -1.0, 1.0);
    const double phi2 = std::asin(sinphi2);
    const double lam2 = lam1 + std::atan2(std::sin(theta) * std::sin(ang) * std::cos(phi1),
                                          std::cos(ang) - std::sin(phi1) * sinphi2);
    return GeoPoint{phi2 * kRadToDeg, normalize_lon(lam2 * kRadToDeg)};
}

double bearing_of_planar_vector(double east, double north) {
    if (east == 0.0 && north == 0.0)
        throw std::invalid_argument("degenerate direction");
    double deg = std::atan2(east, north) * kRadToDeg;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

}  // namespace cyclab
