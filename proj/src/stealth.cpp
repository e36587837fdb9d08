#include "cyclab/stealth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "cyclab/rng.hpp"

namespace cyclab {

StealthKind stealth_kind_from_string(const std::string& s) {
    if (s == "pca") return StealthKind::Pca;
    if (s == "iforest") return StealthKind::IForest;
    if (s == "lof") return StealthKind::Lof;
    throw std::invalid_argument("unknown stealth detector: " + s);
}

std::string to_string(StealthKind k) {
    switch (k) {
        case StealthKind::Pca: return "pca";
        case StealthKind::IForest: return "iforest";
        case StealthKind::Lof: return "lof";
    }
    return "?";
}

std::vector<double> extract_features(const FieldSequence& f, int block) {
    if (block <= 0) throw std::invalid_argument("block size must be positive");
    const int T = f.data.t, r = f.data.r, c = f.data.c;
    const int br = (r + block - 1) / block, bc = (c + block - 1) / block;

    std::vector<double> out;
    out.reserve(static_cast<size_t>(f.vars.size()) * T * 4);
    std::vector<double> blocks(static_cast<size_t>(br) * bc);

    for (size_t d = 0; d < f.vars.size(); ++d)
        for (int t = 0; t < T; ++t) {
            for (int bi = 0; bi < br; ++bi)
                for (int bj = 0; bj < bc; ++bj) {
                    double sum = 0.0;
                    int n = 0;
                    for (int i = bi * block; i < std::min((bi + 1) * block, r); ++i)
                        for (int j = bj * block; j < std::min((bj + 1) * block, c); ++j) {
                            sum += f.data(t, static_cast<int>(d), i, j);
                            ++n;
                        }
                    blocks[static_cast<size_t>(bi) * bc + bj] = sum / n;
                }
            double mean = 0.0;
            for (double b : blocks) mean += b;
            mean /= blocks.size();
            double var = 0.0, mn = blocks[0], mx = blocks[0];
            for (double b : blocks) {
                var += (b - mean) * (b - mean);
                mn = std::min(mn, b);
                mx = std::max(mx, b);
            }
            out.push_back(mean);
            out.push_back(std::sqrt(var / blocks.size()));
            out.push_back(mn);
            out.push_back(mx);
        }
    return out;
}

double iforest_c(int n) {
    if (n <= 1) return 0.0;
    const double h = std::log(n - 1.0) + 0.5772156649015329;  // harmonic approx
    return 2.0 * h - 2.0 * (n - 1.0) / n;
}

namespace {

std::vector<double> zscore(const StealthModel& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.dim)
        throw std::invalid_argument("feature dimension mismatch");
    std::vector<double> z(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        z[i] = (x[i] - m.feat_mean[i]) / m.feat_std[i];
    return z;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// ---- isolation forest -------------------------------------------------------

int build_iso(IsoTree& tree, std::vector<std::vector<double>>& pts, std::vector<int>& idx,
              int lo, int hi, int depth, int max_depth, Rng& rng) {
    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    const int n = hi - lo;
    if (n <= 1 || depth >= max_depth) {
        tree.nodes[node].size = n;
        return node;
    }
    const int dim = static_cast<int>(pts[0].size());
    // pick a split dimension with nonzero spread
    int sd = -1;
    double lo_v = 0.0, hi_v = 0.0;
    for (int attempt = 0; attempt < 2 * dim; ++attempt) {
        const int d = rng.uniform_int(dim);
        double mn = pts[idx[lo]][d], mx = mn;
        for (int i = lo + 1; i < hi; ++i) {
            mn = std::min(mn, pts[idx[i]][d]);
            mx = std::max(mx, pts[idx[i]][d]);
        }
        if (mx > mn) {
            sd = d;
            lo_v = mn;
            hi_v = mx;
            break;
        }
    }
    if (sd < 0) {  // all remaining points identical
        tree.nodes[node].size = n;
        return node;
    }
    const double sv = lo_v + rng.uniform() * (hi_v - lo_v);
    auto mid_it = std::partition(idx.begin() + lo, idx.begin() + hi,
                                 [&](int i) { return pts[i][sd] < sv; });
    const int mid = static_cast<int>(mid_it - idx.begin());
    if (mid == lo || mid == hi) {  // degenerate split; stop here
        tree.nodes[node].size = n;
        return node;
    }
    tree.nodes[node].split_dim = sd;
    tree.nodes[node].split_val = sv;
    const int l = build_iso(tree, pts, idx, lo, mid, depth + 1, max_depth, rng);
    tree.nodes[node].left = l;
    const int r = build_iso(tree, pts, idx, mid, hi, depth + 1, max_depth, rng);
    tree.nodes[node].right = r;
    return node;
}

double iso_path_length(const IsoTree& tree, const std::vector<double>& x) {
    int node = 0;
    double depth = 0.0;
    while (tree.nodes[node].split_dim >= 0) {
        node = x[tree.nodes[node].split_dim] < tree.nodes[node].split_val
                   ? tree.nodes[node].left
                   : tree.nodes[node].right;
        depth += 1.0;
    }
    return depth + iforest_c(tree.nodes[node].size);
}

// ---- per-kind scoring on an already z-scored point --------------------------

double score_z(const StealthModel& m, const std::vector<double>& z) {
    switch (m.params.kind) {
        case StealthKind::Pca: {
            Eigen::Map<const Eigen::VectorXd> x(z.data(), m.dim);
            Eigen::Map<const Eigen::MatrixXd> basis(m.basis.data(), m.dim, m.pca_k);
            const Eigen::VectorXd resid = x - basis * (basis.transpose() * x);
            return resid.norm();
        }
        case StealthKind::IForest: {
            double mean_path = 0.0;
            for (const auto& t : m.trees) mean_path += iso_path_length(t, z);
            mean_path /= m.trees.size();
            return std::pow(2.0, -mean_path / iforest_c(m.subsample_used));
        }
        case StealthKind::Lof: {
            const int n = static_cast<int>(m.train.size());
            const int k = std::min(m.params.k_neighbors, n - 1);
            // k nearest training points (a training duplicate excludes itself
            // only by distance ties; scoring treats every query as external)
            std::vector<std::pair<double, int>> d(n);
            for (int i = 0; i < n; ++i) d[i] = {sq_dist(z, m.train[i]), i};
            std::partial_sort(d.begin(), d.begin() + k, d.end());
            double reach_sum = 0.0, lrd_sum = 0.0;
            for (int i = 0; i < k; ++i) {
                const double dist = std::sqrt(d[i].first);
                reach_sum += std::max(m.kdist[d[i].second], dist);
                lrd_sum += m.lrd[d[i].second];
            }
            const double lrd_x = reach_sum > 0.0 ? k / reach_sum
                                                 : std::numeric_limits<double>::infinity();
            if (!std::isfinite(lrd_x)) return 1.0;  // duplicate of a dense point
            return (lrd_sum / k) / lrd_x;
        }
    }
    return 0.0;
}

}  // namespace

StealthModel fit_stealth(const std::vector<std::vector<double>>& clean_features,
                         const StealthParams& params) {
    const int n = static_cast<int>(clean_features.size());
    if (n < 20) throw std::invalid_argument("need at least 20 clean samples");
    const int dim = static_cast<int>(clean_features[0].size());
    for (const auto& f : clean_features)
        if (static_cast<int>(f.size()) != dim)
            throw std::invalid_argument("inconsistent feature dimensions");

    StealthModel m;
    m.params = params;
    m.dim = dim;
    m.feat_mean.assign(dim, 0.0);
    m.feat_std.assign(dim, 0.0);
    for (const auto& f : clean_features)
        for (int i = 0; i < dim; ++i) m.feat_mean[i] += f[i];
    for (int i = 0; i < dim; ++i) m.feat_mean[i] /= n;
    for (const auto& f : clean_features)
        for (int i = 0; i < dim; ++i) {
            const double d = f[i] - m.feat_mean[i];
            m.feat_std[i] += d * d;
        }
    for (int i = 0; i < dim; ++i)
        m.feat_std[i] = std::max(std::sqrt(m.feat_std[i] / n), 1e-12);

    std::vector<std::vector<double>> z(n);
    for (int i = 0; i < n; ++i) z[i] = zscore(m, clean_features[i]);

    switch (params.kind) {
        case StealthKind::Pca: {
            Eigen::MatrixXd X(n, dim);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < dim; ++j) X(i, j) = z[i][j];
            const Eigen::MatrixXd cov = X.transpose() * X / n;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
            const Eigen::VectorXd evals = es.eigenvalues();  // ascending
            const double total = std::max(evals.sum(), 1e-300);
            double acc = 0.0;
            int k = 0;
            for (int i = dim - 1; i >= 0; --i) {
                acc += std::max(evals(i), 0.0);
                ++k;
                if (acc / total >= params.pca_variance) break;
            }
            m.pca_k = k;
            m.basis.resize(static_cast<size_t>(dim) * k);
            Eigen::Map<Eigen::MatrixXd> basis(m.basis.data(), dim, k);
            for (int i = 0; i < k; ++i) basis.col(i) = es.eigenvectors().col(dim - 1 - i);
            break;
        }
        case StealthKind::IForest: {
            m.subsample_used = std::min(params.subsample, n);
            const int max_depth =
                static_cast<int>(std::ceil(std::log2(std::max(2, m.subsample_used))));
            Rng rng(params.seed ^ 0x1f0515f0ULL);
            std::vector<int> all(n);
            std::iota(all.begin(), all.end(), 0);
            for (int t = 0; t < params.n_trees; ++t) {
                std::vector<int> pick = all;
                rng.shuffle(pick);
                pick.resize(m.subsample_used);
                IsoTree tree;
                build_iso(tree, z, pick, 0, m.subsample_used, 0, max_depth, rng);
                m.trees.push_back(std::move(tree));
            }
            break;
        }
        case StealthKind::Lof: {
            m.train = z;
            const int k = std::min(params.k_neighbors, n - 1);
            m.kdist.assign(n, 0.0);
            m.lrd.assign(n, 0.0);
            std::vector<std::vector<std::pair<double, int>>> nbrs(n);
            for (int i = 0; i < n; ++i) {
                std::vector<std::pair<double, int>> d;
                d.reserve(n - 1);
                for (int j = 0; j < n; ++j)
                    if (j != i) d.emplace_back(sq_dist(z[i], z[j]), j);
                std::partial_sort(d.begin(), d.begin() + k, d.end());
                d.resize(k);
                m.kdist[i] = std::sqrt(d.back().first);
                nbrs[i] = std::move(d);
            }
            for (int i = 0; i < n; ++i) {
                double reach = 0.0;
                for (const auto& [dsq, j] : nbrs[i])
                    reach += std::max(m.kdist[j], std::sqrt(dsq));
                m.lrd[i] = reach > 0.0 ? k / reach
                                       : std::numeric_limits<double>::infinity();
            }
            break;
        }
    }

    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) scores[i] = score_z(m, z[i]);
    std::sort(scores.begin(), scores.end());
    const int rank = std::min(
        n - 1, static_cast<int>(std::ceil((1.0 - params.contamination) * n)) - 1);
    m.threshold = scores[std::max(0, rank)];
    return m;
}

double stealth_score(const StealthModel& m, const std::vector<double>& features) {
    return score_z(m, zscore(m, features));
}

bool is_anomalous(const StealthModel& m, const std::vector<double>& features) {
    return stealth_score(m, features) > m.threshold;
}

StealthReport evaluate_stealth(const StealthModel& m,
                               const std::vector<std::vector<double>>& clean,
                               const std::vector<std::vector<double>>& adversarial) {
    if (clean.empty() || adversarial.empty())
        throw std::invalid_argument("evaluate_stealth needs nonempty sample lists");
    StealthReport r;
    r.n_clean = static_cast<int>(clean.size());
    r.n_adv = static_cast<int>(adversarial.size());
    for (const auto& f : clean)
        if (is_anomalous(m, f)) ++r.flagged_clean;
    for (const auto& f : adversarial)
        if (is_anomalous(m, f)) ++r.flagged_adv;

    const int flagged = r.flagged_clean + r.flagged_adv;
    r.recall = static_cast<double>(r.flagged_adv) / r.n_adv;
    if (flagged == 0) {
        r.degenerate = true;
        r.precision = 0.0;
        r.f1 = 0.0;
    } else {
        r.precision = static_cast<double>(r.flagged_adv) / flagged;
        r.f1 = (r.precision + r.recall) > 0.0
                   ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                   : 0.0;
    }
    return r;
}

}  // namespace cyclab
