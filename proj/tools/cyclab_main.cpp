// cyclab: command-line driver for the synthetic cyclone attack laboratory.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "cyclab/attack.hpp"
#include "cyclab/detector.hpp"
#include "cyclab/field.hpp"
#include "cyclab/labels.hpp"
#include "cyclab/metrics.hpp"
#include "cyclab/stealth.hpp"
#include "cyclab/surrogate.hpp"
#include "cyclab/synth.hpp"
#include "cyclab/targetgen.hpp"
#include "cyclab/trackio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cyclab;

namespace {

constexpr const char* kVersion = "cyclab 1.0.0";

// Thrown for failures that should map to the numeric-failure exit code.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifestWriter {
    std::string command;
    json config;
    std::vector<std::string> inputs, outputs;
    uint64_t seed = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const std::string& beside) const {
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        json m{{"command", command}, {"config", config},   {"inputs", inputs},
               {"outputs", outputs}, {"seed", seed},       {"version", kVersion},
               {"wall_time_ms", ms}};
        const std::string path = beside + ".manifest.json";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for write: " + path);
        out << m.dump(2) << "\n";
    }
};

std::vector<std::string> list_wfld(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".wfld")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(const std::vector<std::string>& specs, std::string out, std::string tracks,
              int jobs) {
    omp_set_num_threads(std::max(1, jobs));
    const bool multi = specs.size() > 1;
    if (multi && (!fs::is_directory(out) || (!tracks.empty() && !fs::is_directory(tracks))))
        throw std::invalid_argument("with multiple specs, --out/--tracks must be directories");

    for (const auto& spec_path : specs) {
        const ScenarioSpec spec = ScenarioSpec::from_json_file(spec_path);
        const Scenario sc = synth_scenario(spec);

        const std::string stem = fs::path(spec_path).stem().string();
        const std::string fout = multi ? (fs::path(out) / (stem + ".wfld")).string() : out;
        ManifestWriter mw{"synth", json::parse(spec.to_json()), {spec_path}, {}, spec.seed};
        write_field(sc.fields, fout);
        mw.outputs.push_back(fout);

        if (!tracks.empty()) {
            const std::string tout =
                multi ? (fs::path(tracks) / (stem + ".geojson")).string() : tracks;
            TrackFile tf;
            tf.geom = spec.geom;
            tf.steps = spec.steps;
            tf.tracks = sc.truth;
            tf.roles.assign(sc.truth.size(), "original");
            write_tracks(tf, tout);
            mw.outputs.push_back(tout);
        }
        mw.write(fout);
    }
    return 0;
}

// ---- detect -----------------------------------------------------------------

int cmd_detect(const std::string& in, const std::string& config,
               const std::string& out_mask, const std::string& out_tracks) {
    DetectorConfig cfg;
    if (!config.empty()) cfg = DetectorConfig::from_json_file(config);
    const FieldSequence f = read_field(in);
    const DetectorInputs inp = derive_inputs(f);
    const DetectionResult res = detect(inp, cfg);

    ManifestWriter mw{"detect", json::parse(config.empty() ? "{}" : "{}"), {in}, {}};
    if (!config.empty()) mw.inputs.push_back(config);
    std::string beside;
    if (!out_mask.empty()) {
        write_mask(res.mask, f.geom, out_mask);
        mw.outputs.push_back(out_mask);
        beside = out_mask;
    }
    if (!out_tracks.empty()) {
        TrackFile tf;
        tf.geom = f.geom;
        tf.steps = f.times();
        tf.tracks = res.tracks;
        tf.roles.assign(res.tracks.size(), "original");
        write_tracks(tf, out_tracks);
        mw.outputs.push_back(out_tracks);
        if (beside.empty()) beside = out_tracks;
    }
    if (!beside.empty()) mw.write(beside);
    std::cout << "tracks: " << res.tracks.size() << "\n";
    return 0;
}

// ---- dilate -----------------------------------------------------------------

int cmd_dilate(const std::string& in, double sigma, int radius, const std::string& out) {
    auto [mask, geom] = read_mask(in);
    const Tensor3 d = dilate(mask, DilationParams{sigma, radius}, geom.lon_wraps());
    ManifestWriter mw{"dilate", json{{"sigma", sigma}, {"radius", radius}}, {in}, {out}};
    write_mask(d, geom, out, "label");
    mw.write(out);
    return 0;
}

// ---- train-surrogate --------------------------------------------------------

int cmd_train(const std::string& data_dir, const std::string& config,
              const std::string& out, const std::string& report_path) {
    TrainConfig cfg;
    if (!config.empty()) cfg = TrainConfig::from_json_file(config);

    std::vector<std::string> fields;
    for (const auto& p : list_wfld(data_dir)) {
        const std::string s = fs::path(p).filename().string();
        if (s.ends_with(".label.wfld") || s.ends_with(".mask.wfld")) continue;
        fields.push_back(p);
    }
    if (fields.empty()) throw std::runtime_error("no field files in: " + data_dir);

    // accumulate channel and variable statistics over the corpus, then build
    // per-snapshot training samples with soft labels (provided or derived by
    // running the rule detector and dilating its mask)
    StandardizationStats chan_stats, var_stats;
    {
        double n = 0.0;
        std::map<std::string, std::pair<double, double>> acc;  // sum, sumsq
        std::map<std::string, std::pair<double, double>> acc_ch;
        for (const auto& p : fields) {
            const FieldSequence f = read_field(p);
            const DetectorInputs di = derive_inputs(f);
            const Tensor3* chans[4] = {&di.msl, &di.wind10, &di.thickness, &di.elevation};
            for (int c = 0; c < 4; ++c)
                for (double v : chans[c]->v) {
                    acc_ch[kSurrogateChannels[c]].first += v;
                    acc_ch[kSurrogateChannels[c]].second += v * v;
                }
            for (size_t d = 0; d < f.vars.size(); ++d)
                for (int t = 0; t < f.data.t; ++t)
                    for (int i = 0; i < f.data.r; ++i)
                        for (int j = 0; j < f.data.c; ++j) {
                            const double v = f.data(t, static_cast<int>(d), i, j);
                            acc[f.vars[d]].first += v;
                            acc[f.vars[d]].second += v * v;
                        }
            n += static_cast<double>(f.data.t) * f.data.r * f.data.c;
        }
        for (const auto& [k, sv] : acc_ch) {
            const double mean = sv.first / n;
            const double var = std::max(sv.second / n - mean * mean, 0.0);
            chan_stats.set(k, mean, std::max(std::sqrt(var), 1e-12));
        }
        for (const auto& [k, sv] : acc) {
            const double mean = sv.first / n;
            const double var = std::max(sv.second / n - mean * mean, 0.0);
            var_stats.set(k, mean, std::max(std::sqrt(var), 1e-12));
        }
    }

    std::vector<Snapshot> samples;
    DetectorConfig det_cfg;
    for (const auto& p : fields) {
        const FieldSequence f = read_field(p);
        const DetectorInputs di = derive_inputs(f);
        Tensor3 label(f.data.t, f.data.r, f.data.c);
        const std::string label_path =
            (fs::path(p).parent_path() / (fs::path(p).stem().string() + ".label.wfld"))
                .string();
        if (fs::exists(label_path)) {
            label = read_mask(label_path).first;
        } else {
            const DetectionResult res = detect(di, det_cfg);
            label = dilate(res.mask, DilationParams{1.0, 2}, f.geom.lon_wraps());
        }
        const Tensor4 x = standardized_inputs(di, chan_stats);
        const size_t plane = static_cast<size_t>(f.data.r) * f.data.c;
        for (int t = 0; t < f.data.t; ++t) {
            Snapshot s;
            s.x = Tensor3(4, f.data.r, f.data.c);
            std::copy(x.v.begin() + static_cast<size_t>(t) * 4 * plane,
                      x.v.begin() + static_cast<size_t>(t + 1) * 4 * plane, s.x.v.begin());
            s.label = Tensor3(1, f.data.r, f.data.c);
            std::copy(label.v.begin() + static_cast<size_t>(t) * plane,
                      label.v.begin() + static_cast<size_t>(t + 1) * plane,
                      s.label.v.begin());
            samples.push_back(std::move(s));
        }
    }

    const size_t n_val = std::max<size_t>(1, samples.size() / 5);
    std::vector<Snapshot> val(samples.end() - n_val, samples.end());
    samples.resize(samples.size() - n_val);

    std::vector<TrainReportRow> report;
    SurrogateModel model;
    try {
        model = train_surrogate(samples, val, cfg, 16, &report);
    } catch (const std::runtime_error& e) {
        throw NumericError(e.what());
    }
    model.channel_stats = chan_stats;
    model.var_stats = var_stats;

    ManifestWriter mw{"train-surrogate",
                      json{{"learning_rate", cfg.learning_rate}, {"epochs", cfg.epochs},
                           {"batch_size", cfg.batch_size}, {"gamma", cfg.gamma}},
                      {data_dir}, {out}, cfg.seed};
    save_model(model, out);
    if (!report_path.empty()) {
        std::ofstream rep(report_path);
        if (!rep) throw std::runtime_error("cannot open for write: " + report_path);
        rep << "epoch,train_loss,val_loss\n";
        for (const auto& row : report)
            rep << row.epoch << "," << row.train_loss << "," << row.val_loss << "\n";
        mw.outputs.push_back(report_path);
    }
    mw.write(out);
    return 0;
}

// ---- gen-target -------------------------------------------------------------

int cmd_gen_target(const std::string& tracks_path, double gamma1, double gamma2,
                   bool sample, uint64_t seed, const std::string& out,
                   const std::string& out_mask) {
    const TrackFile tf = read_tracks(tracks_path);
    TargetGenParams p;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    p.sample = sample;
    p.seed = seed;

    TrackFile adv;
    adv.geom = tf.geom;
    adv.steps = tf.steps;
    Tensor3 zstar(tf.steps, tf.geom.rows, tf.geom.cols);
    for (size_t k = 0; k < tf.tracks.size(); ++k) {
        const Trajectory a = synthesize_adversarial_track(tf.tracks[k], p);
        adv.tracks.push_back(a);
        adv.roles.push_back("adversarial");
        const Tensor3 m = rasterize(a, tf.geom, tf.steps);
        for (size_t q = 0; q < zstar.v.size(); ++q)
            if (m.v[q] != 0.0) zstar.v[q] = 1.0;
    }

    ManifestWriter mw{"gen-target",
                      json{{"gamma1", gamma1}, {"gamma2", gamma2}, {"sample", sample}},
                      {tracks_path}, {out}, seed};
    write_tracks(adv, out);
    if (!out_mask.empty()) {
        write_mask(zstar, tf.geom, out_mask);
        mw.outputs.push_back(out_mask);
    }
    mw.write(out);
    return 0;
}

// ---- attack -----------------------------------------------------------------

int cmd_attack(const std::string& in, const std::string& model_path,
               const std::string& target, const std::string& orig_mask,
               const std::string& config, const std::string& method, double eta,
               double delta, int iters, const std::string& out, const std::string& trace,
               int jobs) {
    omp_set_num_threads(std::max(1, jobs));
    AttackConfig cfg;
    if (!config.empty()) cfg = AttackConfig::from_json_file(config);
    if (!method.empty()) cfg.method = attack_method_from_string(method);
    if (eta > 0.0) cfg.eta = eta;
    if (delta >= 0.0) cfg.delta = delta;
    if (iters >= 0) cfg.iters = iters;

    const FieldSequence f = read_field(in);
    const SurrogateModel model = load_model(model_path);
    const Tensor3 zstar = read_mask(target).first;
    Tensor3 z(zstar.t, zstar.r, zstar.c);
    if (!orig_mask.empty()) z = read_mask(orig_mask).first;

    AttackResult res;
    try {
        res = run_attack(f, z, zstar, model, cfg);
    } catch (const std::runtime_error& e) {
        throw NumericError(e.what());
    }

    ManifestWriter mw{"attack", json::parse(cfg.to_json()),
                      {in, model_path, target}, {out}, cfg.seed};
    if (!orig_mask.empty()) mw.inputs.push_back(orig_mask);
    write_field(res.adversarial, out);
    if (!trace.empty()) {
        write_trace_csv(res.trace, trace);
        mw.outputs.push_back(trace);
    }
    mw.write(out);
    return 0;
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(const std::string& pred_tracks, const std::string& target_tracks,
             const std::string& orig, const std::string& adv, const std::string& out) {
    const TrackFile pred = read_tracks(pred_tracks);
    const TrackFile tgt = read_tracks(target_tracks);
    const TrajectoryScores sc = trajectory_scores(pred.tracks, tgt.tracks);

    json rep{{"dr", sc.dr},
             {"far", sc.far},
             {"targets", sc.targets},
             {"detected", sc.detected},
             {"predictions", sc.predictions},
             {"false_alarms", sc.false_alarms}};

    ManifestWriter mw{"eval", json{}, {pred_tracks, target_tracks}, {out}};
    if (!orig.empty() && !adv.empty()) {
        const FieldSequence fo = read_field(orig);
        const FieldSequence fa = read_field(adv);
        rep["delta_c"] = closeness(fo, fa, compute_stats(fo));
        mw.inputs.push_back(orig);
        mw.inputs.push_back(adv);
    }
    std::ofstream o(out);
    if (!o) throw std::runtime_error("cannot open for write: " + out);
    o << rep.dump(2) << "\n";
    mw.write(out);
    std::cout << rep.dump(2) << "\n";
    return 0;
}

// ---- stealth ----------------------------------------------------------------

int cmd_stealth(const std::string& clean_dir, const std::string& adv_dir,
                const std::string& kind_s, double contamination, uint64_t seed,
                const std::string& attacker, const std::string& out) {
    StealthParams params;
    params.kind = stealth_kind_from_string(kind_s);
    params.contamination = contamination;
    params.seed = seed;

    std::vector<std::vector<double>> clean, adv;
    for (const auto& p : list_wfld(clean_dir)) clean.push_back(extract_features(read_field(p)));
    for (const auto& p : list_wfld(adv_dir)) adv.push_back(extract_features(read_field(p)));

    const StealthModel model = fit_stealth(clean, params);
    const StealthReport rep = evaluate_stealth(model, clean, adv);

    ManifestWriter mw{"stealth",
                      json{{"kind", kind_s}, {"contamination", contamination}},
                      {clean_dir, adv_dir}, {out}, seed};
    std::ofstream o(out);
    if (!o) throw std::runtime_error("cannot open for write: " + out);
    o << "detector,attacker,precision,recall,f1\n";
    o << kind_s << "," << attacker << "," << rep.precision << "," << rep.recall << ","
      << rep.f1 << "\n";
    mw.write(out);
    std::cout << "precision=" << rep.precision << " recall=" << rep.recall
              << " f1=" << rep.f1 << (rep.degenerate ? " (nothing flagged)" : "") << "\n";
    return 0;
}

// ---- render -----------------------------------------------------------------

int cmd_render(const std::vector<std::string>& track_files, const std::string& out) {
    const int W = 960, H = 480;  // plate carree: x = lon/360*W, y = (90-lat)/180*H
    auto px = [&](const GeoPoint& p) {
        return std::pair<double, double>{normalize_lon(p.lon_deg) / 360.0 * W,
                                         (90.0 - p.lat_deg) / 180.0 * H};
    };
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
           "\" height=\"" + std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) +
           " " + std::to_string(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#f8f9fb\"/>\n";
    for (int lat = -60; lat <= 60; lat += 30) {
        const double y = (90.0 - lat) / 180.0 * H;
        svg += "<line x1=\"0\" y1=\"" + std::to_string(y) + "\" x2=\"" + std::to_string(W) +
               "\" y2=\"" + std::to_string(y) + "\" stroke=\"#d8dce2\" stroke-width=\"0.5\"/>\n";
    }
    for (int lon = 0; lon < 360; lon += 30) {
        const double x = lon / 360.0 * W;
        svg += "<line x1=\"" + std::to_string(x) + "\" y1=\"0\" x2=\"" + std::to_string(x) +
               "\" y2=\"" + std::to_string(H) + "\" stroke=\"#d8dce2\" stroke-width=\"0.5\"/>\n";
    }

    for (const auto& path : track_files) {
        const TrackFile tf = read_tracks(path);
        for (size_t k = 0; k < tf.tracks.size(); ++k) {
            const bool adv = k < tf.roles.size() && tf.roles[k] == "adversarial";
            const std::string color = adv ? "#d62728" : "#1f77b4";  // red / blue
            std::string pts;
            bool broken = false;
            double last_x = 0.0;
            for (const auto& tp : tf.tracks[k].points) {
                auto [x, y] = px(tp.pos);
                // break polylines at the antimeridian jump instead of
                // drawing a spurious crossing segment
                if (!pts.empty() && std::abs(x - last_x) > W / 2.0) broken = true;
                if (broken) {
                    svg += "<polyline fill=\"none\" stroke=\"" + color +
                           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
                    pts.clear();
                    broken = false;
                }
                pts += std::to_string(x) + "," + std::to_string(y) + " ";
                last_x = x;
            }
            if (!pts.empty())
                svg += "<polyline fill=\"none\" stroke=\"" + color +
                       "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
            if (!tf.tracks[k].points.empty()) {
                auto [x, y] = px(tf.tracks[k].points.front().pos);
                svg += "<circle cx=\"" + std::to_string(x) + "\" cy=\"" + std::to_string(y) +
                       "\" r=\"3\" fill=\"" + color + "\"/>\n";
            }
        }
    }
    svg += "</svg>\n";

    std::ofstream o(out);
    if (!o) throw std::runtime_error("cannot open for write: " + out);
    o << svg;
    ManifestWriter mw{"render", json{}, track_files, {out}};
    mw.write(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyclab: synthetic cyclone detection and adversarial attack laboratory.\n"
                 "Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric failure."};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
    std::vector<std::string> synth_specs;
    std::string synth_out, synth_tracks;
    int synth_jobs = 1;
    synth->add_option("--spec", synth_specs, "Scenario spec JSON (repeatable)")->required();
    synth->add_option("--out", synth_out, "Output field file (or directory)")->required();
    synth->add_option("--tracks", synth_tracks, "Ground-truth tracks GeoJSON (or directory)");
    synth->add_option("--jobs", synth_jobs, "Worker threads");

    // detect
    auto* det = app.add_subcommand("detect", "Run the rule-based trajectory detector");
    std::string det_in, det_cfg, det_mask, det_tracks;
    det->add_option("--in", det_in, "Input field file")->required();
    det->add_option("--config", det_cfg, "Detector config JSON");
    det->add_option("--out-mask", det_mask, "Output detection mask");
    det->add_option("--out-tracks", det_tracks, "Output tracks GeoJSON");

    // dilate
    auto* dil = app.add_subcommand("dilate", "Kernel-dilate a binary mask");
    std::string dil_in, dil_out;
    double dil_sigma = 1.0;
    int dil_radius = 2;
    dil->add_option("--in", dil_in, "Input mask file")->required();
    dil->add_option("--sigma", dil_sigma, "Kernel sigma (cells)");
    dil->add_option("--radius", dil_radius, "Truncation radius (cells)");
    dil->add_option("--out", dil_out, "Output label file")->required();

    // train-surrogate
    auto* tr = app.add_subcommand("train-surrogate", "Train the differentiable surrogate");
    std::string tr_data, tr_cfg, tr_out, tr_report;
    tr->add_option("--data", tr_data, "Directory of .wfld training fields")->required();
    tr->add_option("--config", tr_cfg, "Training config JSON");
    tr->add_option("--out", tr_out, "Output model checkpoint")->required();
    tr->add_option("--report", tr_report, "Per-epoch loss CSV");

    // gen-target
    auto* gt = app.add_subcommand("gen-target", "Synthesize adversarial target tracks");
    std::string gt_tracks, gt_out, gt_mask;
    double gt_g1 = 1.0, gt_g2 = 1.0;
    bool gt_sample = false;
    uint64_t gt_seed = 7;
    gt->add_option("--tracks", gt_tracks, "Original tracks GeoJSON")->required();
    gt->add_option("--gamma1", gt_g1, "Away-from-original weight");
    gt->add_option("--gamma2", gt_g2, "Momentum weight");
    gt->add_flag("--sample", gt_sample, "Sample directions instead of argmax");
    gt->add_option("--seed", gt_seed, "RNG seed");
    gt->add_option("--out", gt_out, "Adversarial tracks GeoJSON")->required();
    gt->add_option("--out-mask", gt_mask, "Rasterized target mask");

    // attack
    auto* at = app.add_subcommand("attack", "Gradient attack against the surrogate");
    std::string at_in, at_model, at_target, at_orig_mask, at_cfg, at_method, at_out, at_trace;
    double at_eta = -1.0, at_delta = -1.0;
    int at_iters = -1, at_jobs = 1;
    at->add_option("--in", at_in, "Original forecast field")->required();
    at->add_option("--model", at_model, "Surrogate checkpoint")->required();
    at->add_option("--target", at_target, "Adversarial target mask")->required();
    at->add_option("--orig-mask", at_orig_mask, "Original detection mask (calibration)");
    at->add_option("--config", at_cfg, "Attack config JSON");
    at->add_option("--method", at_method, "cyc|cyc-no-dilation|cyc-no-weighting|cyc-no-dilation-no-weighting|ala|taaowpf|aowf");
    at->add_option("--eta", at_eta, "Step size");
    at->add_option("--delta", at_delta, "l-inf budget (standardized units)");
    at->add_option("--iters", at_iters, "Iteration count");
    at->add_option("--out", at_out, "Adversarial field output")->required();
    at->add_option("--trace", at_trace, "Per-iteration loss CSV");
    at->add_option("--jobs", at_jobs, "Worker threads");

    // eval
    auto* ev = app.add_subcommand("eval", "Score detections against target tracks");
    std::string ev_pred, ev_tgt, ev_orig, ev_adv, ev_out;
    ev->add_option("--pred-tracks", ev_pred, "Detected tracks GeoJSON")->required();
    ev->add_option("--target-tracks", ev_tgt, "Target tracks GeoJSON")->required();
    ev->add_option("--orig", ev_orig, "Original field (for delta_c)");
    ev->add_option("--adv", ev_adv, "Adversarial field (for delta_c)");
    ev->add_option("--out", ev_out, "Report JSON")->required();

    // stealth
    auto* st = app.add_subcommand("stealth", "Anomaly-detection stealth evaluation");
    std::string st_clean, st_adv, st_kind, st_attacker = "adv", st_out;
    double st_cont = 0.05;
    uint64_t st_seed = 0;
    st->add_option("--clean", st_clean, "Directory of clean .wfld samples")->required();
    st->add_option("--adv", st_adv, "Directory of adversarial .wfld samples")->required();
    st->add_option("--kind", st_kind, "pca|iforest|lof")->required();
    st->add_option("--contamination", st_cont, "Expected clean outlier fraction");
    st->add_option("--seed", st_seed, "RNG seed");
    st->add_option("--attacker", st_attacker, "Attacker label for the CSV");
    st->add_option("--out", st_out, "Report CSV")->required();

    // render
    auto* rn = app.add_subcommand("render", "Render track files to an SVG map");
    std::vector<std::string> rn_tracks;
    std::string rn_out;
    rn->add_option("--tracks", rn_tracks, "Track GeoJSON files")->required();
    rn->add_option("--out", rn_out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed())
            return cmd_synth(synth_specs, synth_out, synth_tracks, synth_jobs);
        if (det->parsed()) return cmd_detect(det_in, det_cfg, det_mask, det_tracks);
        if (dil->parsed()) return cmd_dilate(dil_in, dil_sigma, dil_radius, dil_out);
        if (tr->parsed()) return cmd_train(tr_data, tr_cfg, tr_out, tr_report);
        if (gt->parsed())
            return cmd_gen_target(gt_tracks, gt_g1, gt_g2, gt_sample, gt_seed, gt_out, gt_mask);
        if (at->parsed())
            return cmd_attack(at_in, at_model, at_target, at_orig_mask, at_cfg, at_method,
                              at_eta, at_delta, at_iters, at_out, at_trace, at_jobs);
        if (ev->parsed()) return cmd_eval(ev_pred, ev_tgt, ev_orig, ev_adv, ev_out);
        if (st->parsed())
            return cmd_stealth(st_clean, st_adv, st_kind, st_cont, st_seed, st_attacker, st_out);
        if (rn->parsed()) return cmd_render(rn_tracks, rn_out);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
