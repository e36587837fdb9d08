#pragma once

#include <cmath>
#include <stdexcept>

#include "cyclab/geo.hpp"

namespace cyclab {

// Regular latitude/longitude lattice. lat_of_row and lon_of_col are affine
// maps from index to degrees; spacing must be positive and latitude strictly
// monotone over rows.
struct GridGeometry {
    int rows = 0, cols = 0;
    double lat0 = 0.0, dlat = 1.0;   // lat of row i = lat0 + i * dlat
    double lon0 = 0.0, dlon = 1.0;   // lon of col j = lon0 + j * dlon

    double lat_of_row(int i) const { return lat0 + i * dlat; }
    double lon_of_col(int j) const { return normalize_lon(lon0 + j * dlon); }
    double spacing_deg() const { return std::abs(dlat); }

    GeoPoint point_at(int i, int j) const {
        return GeoPoint{lat_of_row(i), lon_of_col(j)};
    }

    // True when the longitude axis covers the full circle.
    bool lon_wraps() const {
        return std::abs(std::abs(dlon) * cols - 360.0) < 1e-9;
    }

    // Nearest row for a latitude; -1 if outside the lattice.
    int row_of_lat(double lat_deg) const {
        double x = (lat_deg - lat0) / dlat;
        int i = static_cast<int>(std::lround(x));
        return (i >= 0 && i < rows) ? i : -1;
    }

    // Nearest column for a longitude, honoring wraparound; -1 if outside.
    int col_of_lon(double lon_deg) const {
        double delta = normalize_lon(lon_deg) - normalize_lon(lon0);
        if (dlon > 0) {
            if (delta < 0) delta += 360.0;
        } else {
            if (delta > 0) delta -= 360.0;
        }
        double x = delta / dlon;
        int j = static_cast<int>(std::lround(x));
        if (lon_wraps()) {
            j = ((j % cols) + cols) % cols;
            return j;
        }
        return (j >= 0 && j < cols) ? j : -1;
    }

    void validate() const {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid dims must be positive");
        if (dlat == 0.0 || dlon == 0.0) throw std::invalid_argument("grid spacing must be nonzero");
        if (std::abs(dlon) * cols > 360.0 + 1e-9)
            throw std::invalid_argument("longitude axis exceeds 360 degrees");
        double latN = lat_of_row(rows - 1);
        if (lat0 < -90.0 || lat0 > 90.0 || latN < -90.0 || latN > 90.0)
            throw std::invalid_argument("latitude out of range");
    }

    bool operator==(const GridGeometry& o) const {
        return rows == o.rows && cols == o.cols && lat0 == o.lat0 && dlat == o.dlat &&
               lon0 == o.lon0 && dlon == o.dlon;
    }
};

}  // namespace cyclab
