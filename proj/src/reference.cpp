#include "cyclab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cyclab::ref {

Tensor3 dilate(const Tensor3& mask, const DilationParams& p, bool lon_wrap) {
    if (p.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    if (p.radius < 0) throw std::invalid_argument("radius must be non-negative");
    for (double x : mask.v)
        if (x != 0.0 && x != 1.0) throw std::invalid_argument("mask must be binary");
    if (p.radius == 0) return mask;

    Tensor3 out(mask.t, mask.r, mask.c);
    const int R = p.radius;
    for (int t = 0; t < mask.t; ++t)
        for (int i = 0; i < mask.r; ++i)
            for (int j = 0; j < mask.c; ++j) {
                if (mask(t, i, j) == 1.0) {
                    out(t, i, j) = 1.0;
                    continue;
                }
                double best = -1.0;  // min over inducing neighborhoods
                for (int du = -R; du <= R; ++du) {
                    const int si = i - du;
                    if (si < 0 || si >= mask.r) continue;
                    for (int dv = -R; dv <= R; ++dv) {
                        if (du * du + dv * dv > R * R) continue;
                        int sj = j - dv;
                        if (lon_wrap)
                            sj = ((sj % mask.c) + mask.c) % mask.c;
                        else if (sj < 0 || sj >= mask.c)
                            continue;
                        if (mask(t, si, sj) != 1.0) continue;
                        const double k = dilation_kernel(du, dv, p);
                        best = best < 0.0 ? k : std::min(best, k);
                    }
                }
                out(t, i, j) = best < 0.0 ? 0.0 : best;
            }
    return out;
}

namespace {

// Padded fetch: zero beyond the latitude edges, wraparound in longitude.
double at(const std::vector<double>& plane, int r, int c, int i, int j) {
    if (i < 0 || i >= r) return 0.0;
    j = ((j % c) + c) % c;
    return plane[static_cast<size_t>(i) * c + j];
}

std::vector<double> conv_serial(const ConvLayer& l, const std::vector<std::vector<double>>& x,
                                int r, int c) {
    std::vector<double> y(static_cast<size_t>(l.out_ch) * r * c, 0.0);
    for (int o = 0; o < l.out_ch; ++o)
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double s = l.b[o];
                for (int ci = 0; ci < l.in_ch; ++ci)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx)
                            s += l.wt(o, ci, ky, kx) *
                                 at(x[ci], r, c, i + ky - 1, j + kx - 1);
                y[(static_cast<size_t>(o) * r + i) * c + j] = s;
            }
    return y;
}

std::vector<std::vector<double>> split_channels(const std::vector<double>& flat, int ch,
                                                int r, int c) {
    const size_t plane = static_cast<size_t>(r) * c;
    std::vector<std::vector<double>> out(ch);
    for (int o = 0; o < ch; ++o)
        out[o].assign(flat.begin() + o * plane, flat.begin() + (o + 1) * plane);
    return out;
}

}  // namespace

Tensor3 forward(const SurrogateModel& m, const Tensor4& x) {
    if (x.d != m.layers[0].in_ch) throw std::invalid_argument("channel count mismatch");
    const int r = x.r, c = x.c;
    const size_t plane = static_cast<size_t>(r) * c;
    Tensor3 out(x.t, r, c);

    for (int t = 0; t < x.t; ++t) {
        std::vector<std::vector<double>> cur(x.d);
        for (int d = 0; d < x.d; ++d) {
            const size_t off = (static_cast<size_t>(t) * x.d + d) * plane;
            cur[d].assign(x.v.begin() + off, x.v.begin() + off + plane);
        }
        for (size_t li = 0; li < m.layers.size(); ++li) {
            std::vector<double> flat = conv_serial(m.layers[li], cur, r, c);
            if (li + 1 < m.layers.size())
                for (auto& v : flat) v = std::tanh(v);
            cur = split_channels(flat, m.layers[li].out_ch, r, c);
        }
        for (size_t p = 0; p < plane; ++p)
            out.v[static_cast<size_t>(t) * plane + p] = 1.0 / (1.0 + std::exp(-cur[0][p]));
    }
    return out;
}

double regional_max_wind(const DetectorInputs& inp, int t, int i, int j,
                         const DetectorConfig& cfg) {
    const GridGeometry& g = inp.geom;
    const GeoPoint center = g.point_at(i, j);
    const double radius = cfg.regional_wind_radius_deg + cfg.epsilon;
    bool found = false;
    double best = 0.0;
    for (int ii = 0; ii < g.rows; ++ii)
        for (int jj = 0; jj < g.cols; ++jj) {
            const double w = inp.wind10(t, ii, jj);
            if (wind_is_missing(w)) continue;
            if (great_circle_deg(center, g.point_at(ii, jj)) <= radius) {
                if (!found || w > best) best = w;
                found = true;
            }
        }
    return found ? best : inp.wind10(t, i, j);
}

DistanceWeights distance_weights(const Tensor3& zstar, const GridGeometry& geom,
                                 double sigma_grad, double sigma_reg) {
    DistanceWeights w;
    w.w_grad = Tensor3(zstar.t, zstar.r, zstar.c, 1.0);
    w.w_reg = Tensor3(zstar.t, zstar.r, zstar.c, 0.0);
    for (int t = 0; t < zstar.t; ++t) {
        bool any = false;
        for (int i = 0; i < zstar.r && !any; ++i)
            for (int j = 0; j < zstar.c; ++j)
                if (zstar(t, i, j) != 0.0) {
                    any = true;
                    break;
                }
        if (!any) continue;
        for (int i = 0; i < zstar.r; ++i)
            for (int j = 0; j < zstar.c; ++j) {
                if (zstar(t, i, j) != 0.0) continue;
                double dmin = 1e30;
                for (int ti = 0; ti < zstar.r; ++ti)
                    for (int tj = 0; tj < zstar.c; ++tj)
                        if (zstar(t, ti, tj) != 0.0)
                            dmin = std::min(dmin, great_circle_deg(geom.point_at(i, j),
                                                                   geom.point_at(ti, tj)));
                const double d = dmin * kDegToRad;
                w.w_grad(t, i, j) = std::exp(-d * d / (2.0 * sigma_grad * sigma_grad));
                w.w_reg(t, i, j) = 1.0 - std::exp(-d * d / (2.0 * sigma_reg * sigma_reg));
            }
    }
    return w;
}

}  // namespace cyclab::ref
