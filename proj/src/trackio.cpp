#include "cyclab/trackio.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cyclab {

using nlohmann::json;

void write_tracks(const TrackFile& tf, const std::string& path) {
    json features = json::array();
    for (size_t k = 0; k < tf.tracks.size(); ++k) {
        const Trajectory& traj = tf.tracks[k];
        json coords = json::array();
        json times = json::array(), msl = json::array(), wind = json::array(),
             elev = json::array();
        for (const auto& p : traj.points) {
            coords.push_back({p.pos.lon_deg, p.pos.lat_deg});
            times.push_back(p.t);
            msl.push_back(p.msl);
            wind.push_back(p.wind);
            elev.push_back(p.elevation);
        }
        const std::string role = k < tf.roles.size() ? tf.roles[k] : "original";
        features.push_back({{"type", "Feature"},
                            {"properties", {{"role", role}, {"times", times}, {"msl", msl},
                                            {"wind", wind}, {"elevation", elev}}},
                            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
    }
    json doc{{"type", "FeatureCollection"},
             {"properties",
              {{"steps", tf.steps},
               {"grid", {{"rows", tf.geom.rows}, {"cols", tf.geom.cols}, {"lat0", tf.geom.lat0},
                         {"dlat", tf.geom.dlat}, {"lon0", tf.geom.lon0}, {"dlon", tf.geom.dlon}}}}},
             {"features", features}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << doc.dump(2) << "\n";
}

TrackFile read_tracks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json doc;
    in >> doc;
    if (doc.value("type", "") != "FeatureCollection")
        throw std::runtime_error("not a FeatureCollection: " + path);

    TrackFile tf;
    const auto& props = doc.at("properties");
    tf.steps = props.at("steps").get<int>();
    const auto& g = props.at("grid");
    tf.geom.rows = g.at("rows").get<int>();
    tf.geom.cols = g.at("cols").get<int>();
    tf.geom.lat0 = g.at("lat0").get<double>();
    tf.geom.dlat = g.at("dlat").get<double>();
    tf.geom.lon0 = g.at("lon0").get<double>();
    tf.geom.dlon = g.at("dlon").get<double>();

    for (const auto& feat : doc.at("features")) {
        const auto& p = feat.at("properties");
        const auto& coords = feat.at("geometry").at("coordinates");
        Trajectory traj;
        for (size_t i = 0; i < coords.size(); ++i) {
            TrackPoint tp;
            tp.pos = make_geopoint(coords[i][1].get<double>(), coords[i][0].get<double>());
            tp.t = p.at("times")[i].get<int>();
            tp.msl = p.at("msl")[i].get<double>();
            tp.wind = p.at("wind")[i].get<double>();
            tp.elevation = p.at("elevation")[i].get<double>();
            traj.points.push_back(tp);
        }
        tf.tracks.push_back(std::move(traj));
        tf.roles.push_back(p.value("role", "original"));
    }
    return tf;
}

}  // namespace cyclab
