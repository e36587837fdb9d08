#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclab/field.hpp"

namespace cyclab {

enum class StealthKind { Pca, IForest, Lof };

StealthKind stealth_kind_from_string(const std::string& s);
std::string to_string(StealthKind k);

// Per-variable, per-timestep statistics (mean, std, min, max) over an
// 8x8-block-mean downsampling of each field. Fixed dimension for a geometry.
std::vector<double> extract_features(const FieldSequence& f, int block = 8);

struct StealthParams {
    StealthKind kind = StealthKind::Pca;
    double contamination = 0.05;
    double pca_variance = 0.95;  // cumulative explained-variance cutoff
    int n_trees = 100;
    int subsample = 256;         // capped at n
    int k_neighbors = 20;        // capped at n - 1
    uint64_t seed = 0;
};

struct IsoNode {
    int split_dim = -1;          // -1 = leaf
    double split_val = 0.0;
    int left = -1, right = -1;
    int size = 0;                // samples reaching a leaf
};

struct IsoTree {
    std::vector<IsoNode> nodes;  // node 0 is the root
};

struct StealthModel {
    StealthParams params;
    int dim = 0;
    std::vector<double> feat_mean, feat_std;  // z-scoring fitted on clean data
    double threshold = 0.0;                   // flag when score > threshold

    // pca: principal basis, column-major dim x k
    int pca_k = 0;
    std::vector<double> basis;

    // iforest
    std::vector<IsoTree> trees;
    int subsample_used = 0;

    // lof: z-scored training matrix plus cached k-distances and local
    // reachability densities
    std::vector<std::vector<double>> train;
    std::vector<double> kdist, lrd;
};

// Average unsuccessful-search path length of a BST with n nodes.
double iforest_c(int n);

// Fits the chosen detector on clean samples and sets the threshold at the
// (1 - contamination) quantile of the clean scores. Deterministic given seed.
// Throws when fewer than 20 clean samples are supplied.
StealthModel fit_stealth(const std::vector<std::vector<double>>& clean_features,
                         const StealthParams& params);

// Higher score = more anomalous for every kind. Throws on dimension mismatch.
double stealth_score(const StealthModel& m, const std::vector<double>& features);
bool is_anomalous(const StealthModel& m, const std::vector<double>& features);

struct StealthReport {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    int flagged_clean = 0, flagged_adv = 0;
    int n_clean = 0, n_adv = 0;
    bool degenerate = false;  // nothing flagged: precision reported as 0
};

StealthReport evaluate_stealth(const StealthModel& m,
                               const std::vector<std::vector<double>>& clean,
                               const std::vector<std::vector<double>>& adversarial);

}  // namespace cyclab
