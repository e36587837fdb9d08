#pragma once

#include <stdexcept>

namespace cyclab {

inline constexpr double kEarthRadiusKm = 6371.0088;  // IUGG mean radius
inline constexpr double kDegToRad = 0.017453292519943295;
inline constexpr double kRadToDeg = 57.29577951308232;

// Longitude lives in [0, 360); latitude in [-90, 90].
struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

double normalize_lon(double lon_deg);
GeoPoint make_geopoint(double lat_deg, double lon_deg);

// Central angle in degrees via the spherical law of cosines, cosine clipped
// to [-1, 1]. Symmetric, range [0, 180].
double great_circle_deg(const GeoPoint& a, const GeoPoint& b);

// Point reached from `start` traveling `distance_km` along the initial
// compass bearing (0 = north, 90 = east) on a sphere of the given radius.
GeoPoint destination_point(const GeoPoint& start, double bearing_deg,
                           double distance_km, double earth_radius_km = kEarthRadiusKm);

// Compass bearing of a planar (east, north) vector, degrees in [0, 360).
// Throws on the zero vector.
double bearing_of_planar_vector(double east, double north);

}  // namespace cyclab
