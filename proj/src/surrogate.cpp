#include "cyclab/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "cyclab/rng.hpp"

namespace cyclab {

using nlohmann::json;

size_t SurrogateModel::param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

std::vector<double> SurrogateModel::flatten_params() const {
    std::vector<double> p;
    p.reserve(param_count());
    for (const auto& l : layers) {
        p.insert(p.end(), l.w.begin(), l.w.end());
        p.insert(p.end(), l.b.begin(), l.b.end());
    }
    return p;
}

void SurrogateModel::load_params(const std::vector<double>& p) {
    if (p.size() != param_count()) throw std::invalid_argument("parameter count mismatch");
    size_t off = 0;
    for (auto& l : layers) {
        std::copy(p.begin() + off, p.begin() + off + l.w.size(), l.w.begin());
        off += l.w.size();
        std::copy(p.begin() + off, p.begin() + off + l.b.size(), l.b.begin());
        off += l.b.size();
    }
}

SurrogateModel make_surrogate(int hidden, uint64_t seed) {
    SurrogateModel m;
    Rng rng(seed ^ 0x57709a7eULL);
    auto mk = [&](int in, int out) {
        ConvLayer l;
        l.in_ch = in;
        l.out_ch = out;
        l.w.resize(static_cast<size_t>(out) * in * 9);
        l.b.assign(out, 0.0);
        const double scale = std::sqrt(2.0 / (in * 9.0));
        for (auto& x : l.w) x = scale * rng.normal();
        return l;
    };
    m.layers = {mk(4, hidden), mk(hidden, hidden), mk(hidden, 1)};
    return m;
}

Tensor4 standardized_inputs(const DetectorInputs& inp, const StandardizationStats& s) {
    const int T = inp.msl.t, r = inp.msl.r, c = inp.msl.c;
    Tensor4 x(T, 4, r, c);
    const Tensor3* chans[4] = {&inp.msl, &inp.wind10, &inp.thickness, &inp.elevation};
    for (int ch = 0; ch < 4; ++ch) {
        auto [mean, sd] = s.get(kSurrogateChannels[ch]);
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j)
                    x(t, ch, i, j) = ((*chans[ch])(t, i, j) - mean) / sd;
    }
    return x;
}

namespace {

inline int wrapc(int j, int c) { return ((j % c) + c) % c; }

// y[o] = b[o] + sum_ci conv3x3(x[ci]); lat zero-pad, lon wrap. Row-blocked
// so each input row stays hot in cache across the three taps.
void conv_forward(const ConvLayer& l, const double* x, int r, int c, double* y) {
    const size_t plane = static_cast<size_t>(r) * c;
    for (int o = 0; o < l.out_ch; ++o)
        std::fill(y + o * plane, y + (o + 1) * plane, l.b[o]);
    for (int i = 0; i < r; ++i)
        for (int o = 0; o < l.out_ch; ++o) {
            double* __restrict yrow = y + o * plane + static_cast<size_t>(i) * c;
            for (int ci = 0; ci < l.in_ch; ++ci) {
                const double* xi = x + ci * plane;
                for (int ky = 0; ky < 3; ++ky) {
                    const int ii = i + ky - 1;
                    if (ii < 0 || ii >= r) continue;
                    const double* __restrict xrow = xi + static_cast<size_t>(ii) * c;
                    const double w0 = l.wt(o, ci, ky, 0);
                    const double w1 = l.wt(o, ci, ky, 1);
                    const double w2 = l.wt(o, ci, ky, 2);
                    #pragma omp simd
                    for (int j = 1; j < c - 1; ++j)
                        yrow[j] += w0 * xrow[j - 1] + w1 * xrow[j] + w2 * xrow[j + 1];
                    yrow[0] += w0 * xrow[c - 1] + w1 * xrow[0] + w2 * xrow[1];
                    yrow[c - 1] += w0 * xrow[c - 2] + w1 * xrow[c - 1] + w2 * xrow[0];
                }
            }
        }
}

// dx += conv-transpose(dy); also accumulates dw/db when requested. Same
// row-blocked structure as the forward pass.
void conv_backward(const ConvLayer& l, const double* x, const double* dy, int r, int c,
                   double* dx, double* dw, double* db) {
    const size_t plane = static_cast<size_t>(r) * c;
    for (int o = 0; o < l.out_ch; ++o) {
        const double* dyo = dy + o * plane;
        if (db) {
            double s = 0.0;
            for (size_t p = 0; p < plane; ++p) s += dyo[p];
            db[o] += s;
        }
    }
    for (int i = 0; i < r; ++i)
        for (int o = 0; o < l.out_ch; ++o) {
            const double* dyrow = dy + o * plane + static_cast<size_t>(i) * c;
            for (int ci = 0; ci < l.in_ch; ++ci) {
                const double* xi = x + ci * plane;
                double* dxi = dx ? dx + ci * plane : nullptr;
                for (int ky = 0; ky < 3; ++ky) {
                    const int ii = i + ky - 1;
                    if (ii < 0 || ii >= r) continue;
                    const double w0 = l.wt(o, ci, ky, 0);
                    const double w1 = l.wt(o, ci, ky, 1);
                    const double w2 = l.wt(o, ci, ky, 2);
                    if (dxi) {
                        // gather form of the conv-transpose: each dx cell pulls
                        // from the three dy cells it fed in the forward pass
                        double* __restrict dxrow = dxi + static_cast<size_t>(ii) * c;
                        const double* __restrict dyr = dyrow;
                        #pragma omp simd
                        for (int j = 1; j < c - 1; ++j)
                            dxrow[j] += w0 * dyr[j + 1] + w1 * dyr[j] + w2 * dyr[j - 1];
                        dxrow[0] += w0 * dyr[1] + w1 * dyr[0] + w2 * dyr[c - 1];
                        dxrow[c - 1] += w0 * dyr[0] + w1 * dyr[c - 1] + w2 * dyr[c - 2];
                    }
                    if (dw) {
                        const double* __restrict xrow = xi + static_cast<size_t>(ii) * c;
                        double g0 = 0.0, g1 = 0.0, g2 = 0.0;
                        #pragma omp simd reduction(+ : g0, g1, g2)
                        for (int j = 1; j < c - 1; ++j) {
                            const double g = dyrow[j];
                            g0 += g * xrow[j - 1];
                            g1 += g * xrow[j];
                            g2 += g * xrow[j + 1];
                        }
                        g0 += dyrow[0] * xrow[c - 1] + dyrow[c - 1] * xrow[c - 2];
                        g1 += dyrow[0] * xrow[0] + dyrow[c - 1] * xrow[c - 1];
                        g2 += dyrow[0] * xrow[1] + dyrow[c - 1] * xrow[0];
                        double* w =
                            dw + ((static_cast<size_t>(o) * l.in_ch + ci) * 3 + ky) * 3;
                        w[0] += g0;
                        w[1] += g1;
                        w[2] += g2;
                    }
                }
            }
        }
}

struct SnapshotCache {
    std::vector<double> a1, a2, logits, prob;  // post-activation / outputs
};

void forward_snapshot(const SurrogateModel& m, const double* x, int r, int c,
                      SnapshotCache& cache) {
    const size_t plane = static_cast<size_t>(r) * c;
    const int h = m.layers[0].out_ch;
    cache.a1.assign(h * plane, 0.0);
    cache.a2.assign(h * plane, 0.0);
    cache.logits.assign(plane, 0.0);
    cache.prob.assign(plane, 0.0);

    conv_forward(m.layers[0], x, r, c, cache.a1.data());
    for (auto& v : cache.a1) v = std::tanh(v);
    conv_forward(m.layers[1], cache.a1.data(), r, c, cache.a2.data());
    for (auto& v : cache.a2) v = std::tanh(v);
    conv_forward(m.layers[2], cache.a2.data(), r, c, cache.logits.data());
    for (size_t p = 0; p < plane; ++p)
        cache.prob[p] = 1.0 / (1.0 + std::exp(-cache.logits[p]));
}

// Focal loss cell value and derivative wrt the logit, with probability clamp.
// gamma is 2 for focal cells, 0 for plain cross-entropy cells.
void focal_cell(double p_raw, double z, double gamma, double* loss, double* dlogit) {
    const double lo = kProbClamp, hi = 1.0 - kProbClamp;
    const bool clamped = p_raw < lo || p_raw > hi;
    const double p = std::clamp(p_raw, lo, hi);
    const double q = 1.0 - p;
    const double logp = std::log(p), logq = std::log(q);
    double l, dldp;
    if (gamma == 0.0) {
        l = -(z * logp + (1.0 - z) * logq);
        dldp = -(z / p - (1.0 - z) / q);
    } else {
        const double qg = std::pow(q, gamma), pg = std::pow(p, gamma);
        l = -(qg * z * logp + pg * (1.0 - z) * logq);
        dldp = -(-gamma * std::pow(q, gamma - 1.0) * z * logp + qg * z / p +
                 gamma * std::pow(p, gamma - 1.0) * (1.0 - z) * logq - pg * (1.0 - z) / q);
    }
    *loss = l;
    *dlogit = clamped ? 0.0 : dldp * p_raw * (1.0 - p_raw);
}

}  // namespace

Tensor3 forward(const SurrogateModel& m, const Tensor4& x) {
    if (x.d != m.layers[0].in_ch) throw std::invalid_argument("channel count mismatch");
    Tensor3 out(x.t, x.r, x.c);
    const size_t plane = static_cast<size_t>(x.r) * x.c;
    #pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < x.t; ++t) {
        SnapshotCache cache;
        forward_snapshot(m, &x.v[static_cast<size_t>(t) * x.d * plane], x.r, x.c, cache);
        std::copy(cache.prob.begin(), cache.prob.end(),
                  out.v.begin() + static_cast<size_t>(t) * plane);
    }
    return out;
}

double focal_loss(const Tensor3& prob, const Tensor3& label, const Tensor3* gamma_map) {
    require_same_shape(prob, label, "focal_loss");
    double total = 0.0;
    for (int t = 0; t < prob.t; ++t) {
        double snap = 0.0;
        for (int i = 0; i < prob.r; ++i)
            for (int j = 0; j < prob.c; ++j) {
                const double g = gamma_map ? (*gamma_map)(t, i, j) : 2.0;
                double l, d;
                focal_cell(prob(t, i, j), label(t, i, j), g, &l, &d);
                snap += l;
            }
        total += snap;
    }
    return total / prob.t;
}

InputGrad grad_input(const SurrogateModel& m, const Tensor4& x, const Tensor3& target,
                     const Tensor3* gamma_map) {
    if (x.t != target.t || x.r != target.r || x.c != target.c)
        throw std::invalid_argument("shape mismatch: grad_input");
    const int r = x.r, c = x.c, C = x.d;
    const size_t plane = static_cast<size_t>(r) * c;
    const int h = m.layers[0].out_ch;

    InputGrad res;
    res.grad = Tensor4(x.t, C, r, c);
    std::vector<double> losses(x.t, 0.0);

    #pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < x.t; ++t) {
        const double* xt = &x.v[static_cast<size_t>(t) * C * plane];
        SnapshotCache cache;
        forward_snapshot(m, xt, r, c, cache);

        std::vector<double> dlogit(plane);
        double snap_loss = 0.0;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                const double g = gamma_map ? (*gamma_map)(t, i, j) : 2.0;
                double l, d;
                focal_cell(cache.prob[i * c + j], target(t, i, j), g, &l, &d);
                snap_loss += l;
                dlogit[i * c + j] = d / x.t;  // 1/beta factor
            }
        losses[t] = snap_loss;

        std::vector<double> da2(h * plane, 0.0), da1(h * plane, 0.0);
        conv_backward(m.layers[2], cache.a2.data(), dlogit.data(), r, c, da2.data(),
                      nullptr, nullptr);
        for (size_t p = 0; p < da2.size(); ++p)
            da2[p] *= 1.0 - cache.a2[p] * cache.a2[p];
        conv_backward(m.layers[1], cache.a1.data(), da2.data(), r, c, da1.data(),
                      nullptr, nullptr);
        for (size_t p = 0; p < da1.size(); ++p)
            da1[p] *= 1.0 - cache.a1[p] * cache.a1[p];
        conv_backward(m.layers[0], xt, da1.data(), r, c,
                      &res.grad.v[static_cast<size_t>(t) * C * plane], nullptr, nullptr);
    }
    double total = 0.0;
    for (double l : losses) total += l;  // fixed order, thread-count independent
    res.loss = total / x.t;
    return res;
}

namespace {

// Loss + parameter gradient for one snapshot (gradient not divided by the
// batch size; caller normalizes).
double param_grad_snapshot(const SurrogateModel& m, const Tensor3& x, const Tensor3& label,
                           double gamma, std::vector<double>& grad) {
    const int r = x.r, c = x.c;
    const size_t plane = static_cast<size_t>(r) * c;
    const int h = m.layers[0].out_ch;
    SnapshotCache cache;
    forward_snapshot(m, x.v.data(), r, c, cache);

    std::vector<double> dlogit(plane);
    double loss = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            double l, d;
            focal_cell(cache.prob[i * c + j], label(0, i, j), gamma, &l, &d);
            loss += l;
            dlogit[i * c + j] = d;
        }

    const size_t n0 = m.layers[0].w.size(), b0 = m.layers[0].b.size();
    const size_t n1 = m.layers[1].w.size(), b1 = m.layers[1].b.size();
    const size_t n2 = m.layers[2].w.size(), b2 = m.layers[2].b.size();
    double* dw0 = grad.data();
    double* db0 = dw0 + n0;
    double* dw1 = db0 + b0;
    double* db1 = dw1 + n1;
    double* dw2 = db1 + b1;
    double* db2 = dw2 + n2;
    (void)b2;

    std::vector<double> da2(h * plane, 0.0), da1(h * plane, 0.0);
    conv_backward(m.layers[2], cache.a2.data(), dlogit.data(), r, c, da2.data(), dw2, db2);
    for (size_t p = 0; p < da2.size(); ++p) da2[p] *= 1.0 - cache.a2[p] * cache.a2[p];
    conv_backward(m.layers[1], cache.a1.data(), da2.data(), r, c, da1.data(), dw1, db1);
    for (size_t p = 0; p < da1.size(); ++p) da1[p] *= 1.0 - cache.a1[p] * cache.a1[p];
    conv_backward(m.layers[0], x.v.data(), da1.data(), r, c, nullptr, dw0, db0);
    return loss;
}

double eval_loss(const SurrogateModel& m, const std::vector<Snapshot>& set, double gamma) {
    if (set.empty()) return 0.0;
    std::vector<double> losses(set.size());
    #pragma omp parallel for schedule(dynamic)
    for (size_t s = 0; s < set.size(); ++s) {
        SnapshotCache cache;
        forward_snapshot(m, set[s].x.v.data(), set[s].x.r, set[s].x.c, cache);
        double loss = 0.0;
        for (int i = 0; i < set[s].x.r; ++i)
            for (int j = 0; j < set[s].x.c; ++j) {
                double l, d;
                focal_cell(cache.prob[i * set[s].x.c + j], set[s].label(0, i, j), gamma, &l, &d);
                loss += l;
            }
        losses[s] = loss;
    }
    double total = 0.0;
    for (double l : losses) total += l;
    return total / set.size();
}

}  // namespace

TrainConfig TrainConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json j;
    in >> j;
    TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.gamma = j.value("gamma", c.gamma);
    c.seed = j.value("seed", uint64_t{0});
    return c;
}

SurrogateModel train_surrogate(const std::vector<Snapshot>& train_set,
                               const std::vector<Snapshot>& val_set, const TrainConfig& cfg,
                               int hidden, std::vector<TrainReportRow>* report) {
    if (train_set.empty()) throw std::invalid_argument("empty training set");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
    if (cfg.adam_beta1 <= 0.0 || cfg.adam_beta1 >= 1.0 || cfg.adam_beta2 <= 0.0 ||
        cfg.adam_beta2 >= 1.0)
        throw std::invalid_argument("adam betas must be in (0,1)");

    SurrogateModel m = make_surrogate(hidden, cfg.seed);
    std::vector<double> params = m.flatten_params();
    const size_t P = params.size();
    std::vector<double> adam_m(P, 0.0), adam_v(P, 0.0);
    Rng rng(cfg.seed + 1);
    int64_t step = 0;

    const std::vector<Snapshot>& val = val_set.empty() ? train_set : val_set;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = params;

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t bs = std::min<size_t>(cfg.batch_size, order.size() - start);
            std::vector<std::vector<double>> grads(bs, std::vector<double>(P, 0.0));
            std::vector<double> losses(bs, 0.0);
            #pragma omp parallel for schedule(dynamic)
            for (size_t b = 0; b < bs; ++b) {
                const Snapshot& s = train_set[order[start + b]];
                losses[b] = param_grad_snapshot(m, s.x, s.label, cfg.gamma, grads[b]);
            }
            std::vector<double> g(P, 0.0);
            double batch_loss = 0.0;
            for (size_t b = 0; b < bs; ++b) {  // fixed order for reproducibility
                batch_loss += losses[b];
                for (size_t p = 0; p < P; ++p) g[p] += grads[b][p];
            }
            batch_loss /= bs;
            epoch_loss += batch_loss * bs;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch));

            ++step;
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            for (size_t p = 0; p < P; ++p) {
                const double gp = g[p] / bs + cfg.weight_decay * params[p];
                adam_m[p] = cfg.adam_beta1 * adam_m[p] + (1.0 - cfg.adam_beta1) * gp;
                adam_v[p] = cfg.adam_beta2 * adam_v[p] + (1.0 - cfg.adam_beta2) * gp * gp;
                params[p] -= cfg.learning_rate * (adam_m[p] / bc1) /
                             (std::sqrt(adam_v[p] / bc2) + 1e-8);
            }
            m.load_params(params);
        }
        const double val_loss = eval_loss(m, val, cfg.gamma);
        if (report)
            report->push_back({epoch, epoch_loss / train_set.size(), val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            best_params = params;
        }
    }
    m.load_params(best_params);
    return m;
}

void save_model(const SurrogateModel& m, const std::string& path) {
    json layers = json::array();
    for (const auto& l : m.layers)
        layers.push_back({{"in", l.in_ch}, {"out", l.out_ch}, {"k", l.k}});
    json stats_c, stats_v;
    for (const auto& [k, v] : m.channel_stats.moments)
        stats_c[k] = {v.first, v.second};
    for (const auto& [k, v] : m.var_stats.moments)
        stats_v[k] = {v.first, v.second};
    json hdr{{"magic", "CYCM1"}, {"layers", layers}, {"activation", "tanh"},
             {"channel_stats", stats_c}, {"var_stats", stats_v}, {"dtype", "f64le"}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << hdr.dump() << "\n";
    const std::vector<double> p = m.flatten_params();
    out.write(reinterpret_cast<const char*>(p.data()),
              static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

SurrogateModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty model file: " + path);
    json hdr = json::parse(line, nullptr, false);
    if (hdr.is_discarded() || hdr.value("magic", "") != "CYCM1")
        throw std::runtime_error("magic mismatch: not a CYCM1 checkpoint: " + path);

    SurrogateModel m;
    for (const auto& lj : hdr.at("layers")) {
        ConvLayer l;
        l.in_ch = lj.at("in").get<int>();
        l.out_ch = lj.at("out").get<int>();
        l.k = lj.at("k").get<int>();
        l.w.assign(static_cast<size_t>(l.out_ch) * l.in_ch * l.k * l.k, 0.0);
        l.b.assign(l.out_ch, 0.0);
        m.layers.push_back(std::move(l));
    }
    for (auto& [k, v] : hdr.at("channel_stats").items())
        m.channel_stats.set(k, v[0].get<double>(), v[1].get<double>());
    for (auto& [k, v] : hdr.at("var_stats").items())
        m.var_stats.set(k, v[0].get<double>(), v[1].get<double>());

    std::vector<double> p(m.param_count());
    in.read(reinterpret_cast<char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (static_cast<size_t>(in.gcount()) != p.size() * sizeof(double))
        throw std::runtime_error("payload size mismatch: " + path);
    m.load_params(p);
    return m;
}

}  // namespace cyclab
