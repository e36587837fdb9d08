#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "cyclab/trackio.hpp"

using namespace cyclab;

namespace {

TrackFile sample_trackfile() {
    TrackFile tf;
    tf.geom = GridGeometry{40, 64, -2.0, 1.0, 150.0, 1.0};
    tf.steps = 12;
    Trajectory a, b;
    for (int t = 0; t < 12; ++t) {
        TrackPoint p;
        p.t = t;
        p.pos = GeoPoint{10.0 + 0.25 * t, 170.0 + 1.5 * t};
        p.msl = 100250.0 - 10.0 * t;
        p.wind = 18.0 + 0.5 * t;
        p.elevation = 0.0;
        a.points.push_back(p);
        p.pos = GeoPoint{-5.0 + 0.5 * t, 210.0 - 1.0 * t};
        p.msl = 100400.0;
        p.wind = 15.0;
        b.points.push_back(p);
    }
    tf.tracks = {a, b};
    tf.roles = {"original", "adversarial"};
    return tf;
}

}  // namespace

TEST_CASE("track files round-trip exactly") {
    const TrackFile tf = sample_trackfile();
    const std::string path = "/tmp/cyclab_test_tracks.json";
    write_tracks(tf, path);
    const TrackFile got = read_tracks(path);

    CHECK(got.geom.rows == tf.geom.rows);
    CHECK(got.geom.cols == tf.geom.cols);
    CHECK(got.geom.lat0 == tf.geom.lat0);
    CHECK(got.geom.lon0 == tf.geom.lon0);
    CHECK(got.geom.dlat == tf.geom.dlat);
    CHECK(got.geom.dlon == tf.geom.dlon);
    CHECK(got.steps == tf.steps);
    REQUIRE(got.tracks.size() == tf.tracks.size());
    REQUIRE(got.roles == tf.roles);
    for (size_t k = 0; k < tf.tracks.size(); ++k) {
        REQUIRE(got.tracks[k].length() == tf.tracks[k].length());
        for (int t = 0; t < tf.tracks[k].length(); ++t) {
            const TrackPoint& x = tf.tracks[k].points[t];
            const TrackPoint& y = got.tracks[k].points[t];
            CHECK(y.t == x.t);
            CHECK(y.pos.lat_deg == x.pos.lat_deg);
            CHECK(y.pos.lon_deg == x.pos.lon_deg);
            CHECK(y.msl == x.msl);
            CHECK(y.wind == x.wind);
            CHECK(y.elevation == x.elevation);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("read_tracks rejects a non-FeatureCollection document") {
    const std::string path = "/tmp/cyclab_test_bad_tracks.json";
    {
        std::ofstream out(path);
        out << "{\"type\": \"Feature\", \"geometry\": null}";
    }
    CHECK_THROWS(static_cast<void>(read_tracks(path)));
    std::remove(path.c_str());
}

TEST_CASE("read_tracks rejects malformed JSON and missing files") {
    const std::string path = "/tmp/cyclab_test_garbage.json";
    {
        std::ofstream out(path);
        out << "not json at all {{{";
    }
    CHECK_THROWS(static_cast<void>(read_tracks(path)));
    std::remove(path.c_str());
    CHECK_THROWS(static_cast<void>(read_tracks("/tmp/does_not_exist_cyclab.json")));
}
