#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cyclab/trackio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = CYCLAB_CLI;
const fs::path kDir = "/tmp/cyclab_cli_test";

int run(const std::string& args, bool quiet = true) {
    const std::string cmd = kCli + " " + args + (quiet ? " >/dev/null 2>&1" : "");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

// Small single-vortex scenario: fast to synthesize, train on, and attack.
const char* kSpec = R"({
  "grid": {"rows": 24, "cols": 40, "lat0": -2.0, "dlat": 1.0, "lon0": 165.0, "dlon": 1.0},
  "steps": 12,
  "seed": 2024,
  "noise_amplitude": 80.0,
  "noise_correlation_cells": 1.5,
  "noise_geo_amplitude": 10.0,
  "vortices": [{
    "lat": 8.0, "lon": 185.0,
    "bearing_deg": [280.0], "speed_km": [110.0],
    "depth_pa": 2000.0, "peak_wind_ms": 25.0,
    "core_radius_deg": 2.5, "wind_radius_deg": 1.5,
    "warm_core_amp": 200.0
  }]
})";

struct CliFixture {
    CliFixture() {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
        write_text(kDir / "spec.json", kSpec);
    }
};

std::string path(const char* name) { return (kDir / name).string(); }

}  // namespace

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(run("") == 2);                       // a subcommand is required
    CHECK(run("detect --no-such-flag") == 2);  // unknown flag
    CHECK(run("frobnicate") == 2);             // unknown subcommand
}

TEST_CASE("cli: missing input files exit with code 3") {
    CHECK(run("detect --in /tmp/definitely_missing.wfld --out-tracks /tmp/x.json") == 3);
    CHECK(run("eval --pred-tracks /tmp/nope.json --target-tracks /tmp/nope.json "
              "--out /tmp/x.json") == 3);
}

TEST_CASE("cli: full synth/detect/gen-target/train/attack/eval pipeline") {
    CliFixture fx;

    REQUIRE(run("synth --spec " + path("spec.json") + " --out " + path("orig.wfld") +
                " --tracks " + path("truth.geojson")) == 0);
    CHECK(fs::exists(kDir / "orig.wfld"));
    CHECK(fs::exists(kDir / "orig.wfld.manifest.json"));

    REQUIRE(run("detect --in " + path("orig.wfld") + " --out-mask " + path("mask.wfld") +
                " --out-tracks " + path("det.geojson")) == 0);
    const cyclab::TrackFile det = cyclab::read_tracks(path("det.geojson"));
    REQUIRE(det.tracks.size() == 1);  // one clean vortex -> one LineString
    CHECK(det.steps == 12);

    REQUIRE(run("gen-target --tracks " + path("det.geojson") +
                " --gamma1 1 --gamma2 1 --sample --seed 7 --out " + path("adv.geojson") +
                " --out-mask " + path("zstar.wfld")) == 0);
    const cyclab::TrackFile adv = cyclab::read_tracks(path("adv.geojson"));
    REQUIRE(adv.tracks.size() == 1);
    CHECK(adv.roles[0] == "adversarial");

    fs::create_directories(kDir / "data");
    fs::copy_file(kDir / "orig.wfld", kDir / "data" / "orig.wfld");
    write_text(kDir / "train.json", R"({"epochs": 4, "seed": 1})");
    REQUIRE(run("train-surrogate --data " + path("data") + " --config " +
                path("train.json") + " --out " + path("model.bin")) == 0);

    REQUIRE(run("attack --in " + path("orig.wfld") + " --model " + path("model.bin") +
                " --target " + path("zstar.wfld") + " --orig-mask " + path("mask.wfld") +
                " --method cyc --eta 0.05 --iters 5 --out " + path("advfield.wfld") +
                " --trace " + path("trace.csv")) == 0);
    CHECK(fs::exists(kDir / "advfield.wfld"));
    const std::string trace = slurp(kDir / "trace.csv");
    CHECK(trace.find("iter") != std::string::npos);

    REQUIRE(run("detect --in " + path("advfield.wfld") + " --out-tracks " +
                path("det_adv.geojson")) == 0);
    REQUIRE(run("eval --pred-tracks " + path("det_adv.geojson") + " --target-tracks " +
                path("adv.geojson") + " --orig " + path("orig.wfld") + " --adv " +
                path("advfield.wfld") + " --out " + path("report.json")) == 0);
    const json rep = json::parse(slurp(kDir / "report.json"));
    CHECK(rep.contains("dr"));
    CHECK(rep.contains("far"));
    CHECK(rep.contains("delta_c"));
    CHECK(rep["targets"].get<int>() == 1);
    CHECK(rep["delta_c"].get<double>() >= 0.0);
}

TEST_CASE("cli: attack with --iters 0 writes a byte-identical field") {
    CliFixture fx;
    REQUIRE(run("synth --spec " + path("spec.json") + " --out " + path("orig.wfld")) == 0);
    REQUIRE(run("detect --in " + path("orig.wfld") + " --out-mask " + path("mask.wfld") +
                " --out-tracks " + path("det.geojson")) == 0);
    REQUIRE(run("gen-target --tracks " + path("det.geojson") + " --seed 7 --out " +
                path("adv.geojson") + " --out-mask " + path("zstar.wfld")) == 0);
    fs::create_directories(kDir / "data");
    fs::copy_file(kDir / "orig.wfld", kDir / "data" / "orig.wfld");
    write_text(kDir / "train.json", R"({"epochs": 2, "seed": 1})");
    REQUIRE(run("train-surrogate --data " + path("data") + " --config " +
                path("train.json") + " --out " + path("model.bin")) == 0);
    REQUIRE(run("attack --in " + path("orig.wfld") + " --model " + path("model.bin") +
                " --target " + path("zstar.wfld") + " --iters 0 --out " +
                path("noop.wfld")) == 0);
    CHECK(slurp(kDir / "noop.wfld") == slurp(kDir / "orig.wfld"));
}

TEST_CASE("cli: dilate writes a label field beside the mask") {
    CliFixture fx;
    REQUIRE(run("synth --spec " + path("spec.json") + " --out " + path("orig.wfld")) == 0);
    REQUIRE(run("detect --in " + path("orig.wfld") + " --out-mask " + path("mask.wfld")) ==
            0);
    REQUIRE(run("dilate --in " + path("mask.wfld") + " --sigma 1.0 --radius 2 --out " +
                path("label.wfld")) == 0);
    CHECK(fs::exists(kDir / "label.wfld"));
}

TEST_CASE("cli: render is deterministic and emits SVG") {
    CliFixture fx;
    REQUIRE(run("synth --spec " + path("spec.json") + " --out " + path("orig.wfld") +
                " --tracks " + path("truth.geojson")) == 0);
    REQUIRE(run("render --tracks " + path("truth.geojson") + " --out " +
                path("a.svg")) == 0);
    REQUIRE(run("render --tracks " + path("truth.geojson") + " --out " +
                path("b.svg")) == 0);
    const std::string a = slurp(kDir / "a.svg");
    CHECK(a == slurp(kDir / "b.svg"));
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("polyline") != std::string::npos);
}

TEST_CASE("cli: synth is reproducible byte-for-byte") {
    CliFixture fx;
    REQUIRE(run("synth --spec " + path("spec.json") + " --out " + path("a.wfld")) == 0);
    REQUIRE(run("synth --spec " + path("spec.json") + " --out " + path("b.wfld")) == 0);
    CHECK(slurp(kDir / "a.wfld") == slurp(kDir / "b.wfld"));
}
