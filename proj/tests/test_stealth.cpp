#include <doctest.h>

#include <cmath>
#include <vector>

#include "cyclab/rng.hpp"
#include "cyclab/stealth.hpp"

using namespace cyclab;

namespace {

std::vector<std::vector<double>> gaussian_cloud(int n, int dim, uint64_t seed,
                                                double scale = 1.0) {
    Rng rng(seed);
    std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
    for (auto& x : xs)
        for (double& v : x) v = scale * rng.normal();
    return xs;
}

// PCA model with a known 1-D basis along the first axis: the anomaly score of
// (x1, x2) is exactly |x2|.
StealthModel handmade_pca() {
    StealthModel m;
    m.params.kind = StealthKind::Pca;
    m.dim = 2;
    m.feat_mean = {0.0, 0.0};
    m.feat_std = {1.0, 1.0};
    m.pca_k = 1;
    m.basis = {1.0, 0.0};
    m.threshold = 2.0;
    return m;
}

}  // namespace

TEST_CASE("pca scoring: residual norm against a handmade basis") {
    const StealthModel m = handmade_pca();
    CHECK(stealth_score(m, {7.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(stealth_score(m, {-3.0, 4.0}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(is_anomalous(m, {0.0, 5.0}));
    CHECK(!is_anomalous(m, {100.0, 1.0}));
    CHECK_THROWS(static_cast<void>(stealth_score(m, {1.0, 2.0, 3.0})));
}

TEST_CASE("evaluate_stealth: exact precision/recall/f1 on a handmade model") {
    const StealthModel m = handmade_pca();
    // 9 clean inliers plus one clean point at x2 = 5 (a false positive)
    std::vector<std::vector<double>> clean;
    for (int k = 0; k < 9; ++k) clean.push_back({static_cast<double>(k), 0.5});
    clean.push_back({0.0, 5.0});
    // 8 adversarial points at x2 = 10 plus 2 hiding at the origin
    std::vector<std::vector<double>> adv;
    for (int k = 0; k < 8; ++k) adv.push_back({static_cast<double>(k), 10.0});
    adv.push_back({0.0, 0.0});
    adv.push_back({1.0, 0.0});

    const StealthReport r = evaluate_stealth(m, clean, adv);
    CHECK(r.n_clean == 10);
    CHECK(r.n_adv == 10);
    CHECK(r.flagged_clean == 1);
    CHECK(r.flagged_adv == 8);
    CHECK(r.precision == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.8).epsilon(1e-12));
    const double p = 8.0 / 9.0, q = 0.8;
    CHECK(r.f1 == doctest::Approx(2.0 * p * q / (p + q)).epsilon(1e-12));
    CHECK(!r.degenerate);
}

TEST_CASE("evaluate_stealth: nothing flagged is reported as degenerate") {
    StealthModel m = handmade_pca();
    m.threshold = 1e12;
    std::vector<std::vector<double>> clean, adv;
    for (int k = 0; k < 5; ++k) {
        clean.push_back({0.0, 0.1 * k});
        adv.push_back({1.0, 0.2 * k});
    }
    const StealthReport r = evaluate_stealth(m, clean, adv);
    CHECK(r.degenerate);
    CHECK(r.precision == doctest::Approx(0.0));
    CHECK(r.recall == doctest::Approx(0.0));
}

TEST_CASE("fit_stealth: rejects fewer than 20 clean samples") {
    StealthParams p;
    for (StealthKind k : {StealthKind::Pca, StealthKind::IForest, StealthKind::Lof}) {
        p.kind = k;
        CHECK_THROWS_WITH_AS(static_cast<void>(fit_stealth(gaussian_cloud(19, 3, 1), p)),
                             doctest::Contains("at least 20"), std::exception);
        CHECK_NOTHROW(static_cast<void>(fit_stealth(gaussian_cloud(20, 3, 1), p)));
    }
}

TEST_CASE("fit_stealth: deterministic for a fixed seed") {
    const auto clean = gaussian_cloud(60, 5, 2);
    const auto probe = gaussian_cloud(10, 5, 3);
    StealthParams p;
    p.seed = 99;
    for (StealthKind k : {StealthKind::Pca, StealthKind::IForest, StealthKind::Lof}) {
        p.kind = k;
        const StealthModel a = fit_stealth(clean, p);
        const StealthModel b = fit_stealth(clean, p);
        CHECK(a.threshold == b.threshold);
        for (const auto& x : probe) CHECK(stealth_score(a, x) == stealth_score(b, x));
    }
}

TEST_CASE("iforest_c matches the exact harmonic-number formula within 5%") {
    // c(n) = 2 H(n-1) - 2 (n-1) / n with H the harmonic number
    for (int n : {16, 64, 256, 1024}) {
        double h = 0.0;
        for (int k = 1; k < n; ++k) h += 1.0 / k;
        const double exact = 2.0 * h - 2.0 * (n - 1) / n;
        CHECK(std::abs(iforest_c(n) - exact) / exact < 0.05);
    }
    CHECK(iforest_c(1) == doctest::Approx(0.0));
    CHECK(iforest_c(2) <= iforest_c(256));
}

TEST_CASE("iforest: an average point has mean path length near c(subsample)") {
    StealthParams p;
    p.kind = StealthKind::IForest;
    p.seed = 7;
    const auto clean = gaussian_cloud(300, 4, 11);
    const StealthModel m = fit_stealth(clean, p);
    // score = 2^(-meanpath / c(subsample)); invert it at the training centroid
    std::vector<double> centroid(4, 0.0);
    for (const auto& x : clean)
        for (int d = 0; d < 4; ++d) centroid[d] += x[d] / clean.size();
    const double s = stealth_score(m, centroid);
    const double mean_path = -std::log2(s) * iforest_c(m.subsample_used);
    CHECK(mean_path > 0.95 * iforest_c(m.subsample_used));
    // an extreme outlier has a much shorter path and a higher score
    const double s_out = stealth_score(m, {100.0, -100.0, 100.0, -100.0});
    CHECK(s_out > s);
    CHECK(s_out > 0.6);
}

TEST_CASE("pca: data confined to a subspace gives a tiny threshold and the "
          "detector flags a far-off-plane point") {
    Rng rng(13);
    std::vector<std::vector<double>> clean;
    for (int k = 0; k < 50; ++k) {
        const double a = rng.normal(), b = rng.normal();
        // 4-D points on a 2-D plane
        clean.push_back({a, b, a + b, a - b});
    }
    StealthParams p;
    p.kind = StealthKind::Pca;
    const StealthModel m = fit_stealth(clean, p);
    CHECK(m.threshold < 1e-6);
    CHECK(is_anomalous(m, {0.0, 0.0, 100.0, 0.0}));
}

TEST_CASE("every detector flags a 100-sigma outlier and passes the bulk") {
    const auto clean = gaussian_cloud(100, 3, 17);
    StealthParams p;
    p.seed = 5;
    for (StealthKind k : {StealthKind::Pca, StealthKind::IForest, StealthKind::Lof}) {
        p.kind = k;
        const StealthModel m = fit_stealth(clean, p);
        CHECK(is_anomalous(m, {100.0, 100.0, 100.0}));
        // with contamination 0.05 at most ~10 of 100 clean points are flagged
        int flagged = 0;
        for (const auto& x : clean) flagged += is_anomalous(m, x) ? 1 : 0;
        CHECK(flagged <= 10);
    }
}

TEST_CASE("lof: an exact duplicate of training data is not anomalous") {
    auto clean = gaussian_cloud(40, 3, 19);
    clean[1] = clean[0];  // duplicate pair inside the training set
    StealthParams p;
    p.kind = StealthKind::Lof;
    const StealthModel m = fit_stealth(clean, p);
    const double s = stealth_score(m, clean[0]);
    CHECK(std::isfinite(s));
    CHECK(s <= m.threshold);
}

TEST_CASE("stealth_kind_from_string round-trips and rejects junk") {
    for (StealthKind k : {StealthKind::Pca, StealthKind::IForest, StealthKind::Lof})
        CHECK(stealth_kind_from_string(to_string(k)) == k);
    CHECK_THROWS(static_cast<void>(stealth_kind_from_string("svm")));
}
