#include "cyclab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cyclab {

using nlohmann::json;

AttackMethod attack_method_from_string(const std::string& s) {
    if (s == "cyc") return AttackMethod::Cyc;
    if (s == "cyc-no-dilation") return AttackMethod::CycNoDilation;
    if (s == "cyc-no-weighting") return AttackMethod::CycNoWeighting;
    if (s == "cyc-no-dilation-no-weighting") return AttackMethod::CycNoDilationNoWeighting;
    if (s == "ala") return AttackMethod::Ala;
    if (s == "taaowpf") return AttackMethod::Taaowpf;
    if (s == "aowf") return AttackMethod::Aowf;
    throw std::invalid_argument("unknown attack method: " + s);
}

std::string to_string(AttackMethod m) {
    switch (m) {
        case AttackMethod::Cyc: return "cyc";
        case AttackMethod::CycNoDilation: return "cyc-no-dilation";
        case AttackMethod::CycNoWeighting: return "cyc-no-weighting";
        case AttackMethod::CycNoDilationNoWeighting: return "cyc-no-dilation-no-weighting";
        case AttackMethod::Ala: return "ala";
        case AttackMethod::Taaowpf: return "taaowpf";
        case AttackMethod::Aowf: return "aowf";
    }
    return "?";
}

AttackConfig AttackConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json j;
    in >> j;
    AttackConfig c;
    c.eta = j.value("eta", c.eta);
    c.delta = j.value("delta", c.delta);
    c.iters = j.value("iters", c.iters);
    c.lambda_reg = j.value("lambda_reg", c.lambda_reg);
    if (j.contains("sigma_grad_deg")) c.sigma_grad = j["sigma_grad_deg"].get<double>() * kDegToRad;
    if (j.contains("sigma_reg_deg")) c.sigma_reg = j["sigma_reg_deg"].get<double>() * kDegToRad;
    c.dilation.sigma = j.value("dilation_sigma", c.dilation.sigma);
    c.dilation.radius = j.value("dilation_radius", c.dilation.radius);
    if (j.contains("method")) c.method = attack_method_from_string(j["method"].get<std::string>());
    c.seed = j.value("seed", uint64_t{0});
    return c;
}

std::string AttackConfig::to_json() const {
    json j{{"eta", eta}, {"delta", delta}, {"iters", iters}, {"lambda_reg", lambda_reg},
           {"sigma_grad_deg", sigma_grad * kRadToDeg}, {"sigma_reg_deg", sigma_reg * kRadToDeg},
           {"dilation_sigma", dilation.sigma}, {"dilation_radius", dilation.radius},
           {"method", to_string(method)}, {"seed", seed}};
    return j.dump(2);
}

const std::vector<std::string>& perturbable_variables() {
    static const std::vector<std::string> vars = {"msl", "u10", "v10", "z300", "z500"};
    return vars;
}

Tensor3 calibration_mask(const Tensor3& zstar, const Tensor3& z, const Tensor3& prob0) {
    require_same_shape(zstar, z, "calibration_mask");
    require_same_shape(zstar, prob0, "calibration_mask");
    Tensor3 m(zstar.t, zstar.r, zstar.c);
    for (size_t k = 0; k < m.v.size(); ++k) {
        const double zs = zstar.v[k], zo = z.v[k];
        const double pred = prob0.v[k] >= 0.5 ? 1.0 : 0.0;
        m.v[k] = (zs != zo && pred == zs) ? 1.0 : 0.0;
    }
    return m;
}

DistanceWeights distance_weights(const Tensor3& zstar, const GridGeometry& geom,
                                 double sigma_grad, double sigma_reg) {
    DistanceWeights w;
    w.w_grad = Tensor3(zstar.t, zstar.r, zstar.c, 1.0);
    w.w_reg = Tensor3(zstar.t, zstar.r, zstar.c, 0.0);

    #pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < zstar.t; ++t) {
        std::vector<GeoPoint> targets;
        std::vector<std::pair<int, int>> target_cells;
        for (int i = 0; i < zstar.r; ++i)
            for (int j = 0; j < zstar.c; ++j)
                if (zstar(t, i, j) != 0.0) {
                    targets.push_back(geom.point_at(i, j));
                    target_cells.emplace_back(i, j);
                }
        if (targets.empty()) continue;  // d = 0 everywhere: w_grad 1, w_reg 0

        for (int i = 0; i < zstar.r; ++i)
            for (int j = 0; j < zstar.c; ++j) {
                if (zstar(t, i, j) != 0.0) {
                    w.w_grad(t, i, j) = 1.0;
                    w.w_reg(t, i, j) = 0.0;
                    continue;
                }
                const GeoPoint p = geom.point_at(i, j);
                double dmin = 1e30;
                for (const auto& tp : targets)
                    dmin = std::min(dmin, great_circle_deg(p, tp));
                const double d = dmin * kDegToRad;  // radians
                w.w_grad(t, i, j) = std::exp(-d * d / (2.0 * sigma_grad * sigma_grad));
                w.w_reg(t, i, j) = 1.0 - std::exp(-d * d / (2.0 * sigma_reg * sigma_reg));
            }
    }
    return w;
}

namespace {

Tensor3 gamma_map_from_calibration(const Tensor3& calib) {
    Tensor3 g(calib.t, calib.r, calib.c, 2.0);
    for (size_t k = 0; k < g.v.size(); ++k)
        if (calib.v[k] != 0.0) g.v[k] = 0.0;
    return g;
}

double reg_term(const Tensor3& w_reg, const Tensor4& y_std, const Tensor4& yp_std,
                double lambda) {
    double s = 0.0;
    for (int t = 0; t < yp_std.t; ++t)
        for (int d = 0; d < yp_std.d; ++d)
            for (int i = 0; i < yp_std.r; ++i)
                for (int j = 0; j < yp_std.c; ++j) {
                    const double x = w_reg(t, i, j) * (y_std(t, d, i, j) - yp_std(t, d, i, j));
                    s += x * x;
                }
    return lambda * s / yp_std.t;
}

struct MethodFlags {
    bool dilate_target = false;
    bool weighting = false;
    bool calibration = false;
    bool adam = false;
    bool cosine_schedule = false;
};

MethodFlags flags_for(AttackMethod m) {
    switch (m) {
        case AttackMethod::Cyc: return {true, true, true, false, false};
        case AttackMethod::CycNoDilation: return {false, true, true, false, false};
        case AttackMethod::CycNoWeighting: return {true, false, false, false, false};
        case AttackMethod::CycNoDilationNoWeighting: return {false, false, false, false, false};
        case AttackMethod::Taaowpf: return {false, false, false, false, false};
        case AttackMethod::Ala: return {false, false, false, true, false};
        case AttackMethod::Aowf: return {false, false, false, false, true};
    }
    return {};
}

}  // namespace

double adv_loss(const Tensor3& prob, const Tensor3& zstar_dilated, const Tensor3& calib,
                const Tensor3& w_reg, const Tensor4& y_std, const Tensor4& yprime_std,
                double lambda) {
    const Tensor3 gam = gamma_map_from_calibration(calib);
    return focal_loss(prob, zstar_dilated, &gam) + reg_term(w_reg, y_std, yprime_std, lambda);
}

AttackResult run_attack(const FieldSequence& orig, const Tensor3& z, const Tensor3& zstar,
                        const SurrogateModel& model, const AttackConfig& cfg,
                        double gravity) {
    orig.validate();
    const int T = orig.data.t, r = orig.data.r, c = orig.data.c;
    if (zstar.t != T || zstar.r != r || zstar.c != c)
        throw std::invalid_argument("target mask shape mismatch");
    const MethodFlags fl = flags_for(cfg.method);

    // perturbable variables present in the sequence
    std::vector<int> pvars;          // index into orig.vars
    std::vector<double> psd;         // attack-space scale per variable
    for (const auto& name : perturbable_variables()) {
        const int idx = orig.var_index(name);
        if (idx < 0) continue;
        pvars.push_back(idx);
        psd.push_back(model.var_stats.get(name).second);
    }
    if (pvars.empty()) throw std::invalid_argument("no perturbable variables in field");
    const int iu = orig.var_index("u10"), iv = orig.var_index("v10");

    // target label (possibly dilated) and loss weights
    const Tensor3 target = fl.dilate_target
                               ? dilate(zstar, cfg.dilation, orig.geom.lon_wraps())
                               : zstar;

    FieldSequence work = orig;  // physical iterate
    DetectorInputs dinp0 = derive_inputs(work, gravity);
    const Tensor4 x0 = standardized_inputs(dinp0, model.channel_stats);
    const Tensor3 prob0 = forward(model, x0);

    Tensor3 calib(T, r, c, 0.0);
    if (fl.calibration) calib = calibration_mask(zstar, z, prob0);
    const Tensor3 gamma_map = gamma_map_from_calibration(calib);

    DistanceWeights dw;
    if (fl.weighting) {
        dw = distance_weights(zstar, orig.geom, cfg.sigma_grad, cfg.sigma_reg);
    } else {
        dw.w_grad = Tensor3(T, r, c, 1.0);
        dw.w_reg = Tensor3(T, r, c, 0.0);
    }

    const int nvar = static_cast<int>(pvars.size());
    Tensor4 delta(T, nvar, r, c, 0.0);
    std::vector<double> adam_m(delta.v.size(), 0.0), adam_v(delta.v.size(), 0.0);

    const auto [wm_mean, wm_sd] = model.channel_stats.get("msl");
    const auto [ww_mean, ww_sd] = model.channel_stats.get("wind10");
    const auto [wt_mean, wt_sd] = model.channel_stats.get("thickness");
    (void)wm_mean; (void)ww_mean; (void)wt_mean;

    AttackResult res;
    res.trace.reserve(cfg.iters);

    for (int k = 0; k < cfg.iters; ++k) {
        // physical iterate = orig + sigma_v * delta
        for (int t = 0; t < T; ++t)
            for (int vi = 0; vi < nvar; ++vi) {
                const int d = pvars[vi];
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < c; ++j)
                        work.data(t, d, i, j) =
                            orig.data(t, d, i, j) + psd[vi] * delta(t, vi, i, j);
            }
        DetectorInputs dinp = derive_inputs(work, gravity);
        const Tensor4 x = standardized_inputs(dinp, model.channel_stats);
        InputGrad ig = grad_input(model, x, target, &gamma_map);

        // regularizer on the standardized perturbation
        double reg = 0.0;
        for (int t = 0; t < T; ++t)
            for (int vi = 0; vi < nvar; ++vi)
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < c; ++j) {
                        const double wd = dw.w_reg(t, i, j) * delta(t, vi, i, j);
                        reg += wd * wd;
                    }
        const double loss = ig.loss + cfg.lambda_reg * reg / T;
        if (!std::isfinite(loss))
            throw std::runtime_error("attack diverged: non-finite loss at iteration " +
                                     std::to_string(k));

        double linf = 0.0;
        for (double dv : delta.v) linf = std::max(linf, std::abs(dv));
        res.trace.push_back({k, loss, linf});

        const double eta_k = fl.cosine_schedule
                                 ? cfg.eta * 0.5 * (1.0 + std::cos(M_PI * k / cfg.iters))
                                 : cfg.eta;

        // chain rule from surrogate channels to the perturbed variables,
        // then the (weighted) update with l-inf projection
        #pragma omp parallel for schedule(static)
        for (int t = 0; t < T; ++t) {
            for (int vi = 0; vi < nvar; ++vi) {
                const int d = pvars[vi];
                const std::string& name = orig.vars[d];
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < c; ++j) {
                        double g = 0.0;
                        if (name == "msl") {
                            g = ig.grad(t, 0, i, j) * psd[vi] / wm_sd;
                        } else if (name == "u10" || name == "v10") {
                            const double w = dinp.wind10(t, i, j);
                            if (w > 1e-12) {
                                const double comp = name == "u10" ? work.data(t, iu, i, j)
                                                                  : work.data(t, iv, i, j);
                                g = ig.grad(t, 1, i, j) * (comp / w) * psd[vi] / ww_sd;
                            }
                        } else if (name == "z300") {
                            g = ig.grad(t, 2, i, j) * psd[vi] / wt_sd;
                        } else if (name == "z500") {
                            g = -ig.grad(t, 2, i, j) * psd[vi] / wt_sd;
                        }
                        // regularizer gradient
                        const double wr = dw.w_reg(t, i, j);
                        g += 2.0 * cfg.lambda_reg * wr * wr * delta(t, vi, i, j) / T;

                        double& dv = delta(t, vi, i, j);
                        if (fl.adam) {
                            const size_t idx =
                                ((static_cast<size_t>(t) * nvar + vi) * r + i) * c + j;
                            adam_m[idx] = 0.9 * adam_m[idx] + 0.1 * g;
                            adam_v[idx] = 0.999 * adam_v[idx] + 0.001 * g * g;
                            const double bc1 = 1.0 - std::pow(0.9, k + 1);
                            const double bc2 = 1.0 - std::pow(0.999, k + 1);
                            dv -= eta_k * (adam_m[idx] / bc1) /
                                  (std::sqrt(adam_v[idx] / bc2) + 1e-8);
                        } else {
                            const double sg = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
                            dv -= eta_k * dw.w_grad(t, i, j) * sg;
                        }
                        dv = std::clamp(dv, -cfg.delta, cfg.delta);
                    }
            }
        }
    }

    res.adversarial = orig;
    for (int t = 0; t < T; ++t)
        for (int vi = 0; vi < nvar; ++vi) {
            const int d = pvars[vi];
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j)
                    res.adversarial.data(t, d, i, j) =
                        orig.data(t, d, i, j) + psd[vi] * delta(t, vi, i, j);
        }
    res.delta_std = std::move(delta);
    return res;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "iteration,loss,linf\n";
    for (const auto& row : trace)
        out << row.iter << "," << row.loss << "," << row.linf << "\n";
}

}  // namespace cyclab
