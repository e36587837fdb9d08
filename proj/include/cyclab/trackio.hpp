#pragma once

#include <string>
#include <vector>

#include "cyclab/detector.hpp"
#include "cyclab/grid.hpp"

namespace cyclab {

// GeoJSON FeatureCollection with one LineString per trajectory. Grid geometry
// and the timestep count ride along in top-level "properties" so downstream
// commands can rasterize without the source field file.
struct TrackFile {
    GridGeometry geom;
    int steps = 0;
    std::vector<Trajectory> tracks;
    std::vector<std::string> roles;  // parallel to tracks: "original" / "adversarial"
};

void write_tracks(const TrackFile& tf, const std::string& path);
TrackFile read_tracks(const std::string& path);

}  // namespace cyclab
