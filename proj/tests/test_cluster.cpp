#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <terpscape/cluster/agglomerative.hpp>
#include <terpscape/cluster/benchmark.hpp>
#include <terpscape/cluster/kmeans.hpp>
#include <terpscape/cluster/metrics.hpp>

#include "oracles.hpp"
#include "synthetic.hpp"

using namespace terpscape;

// --- kmeans -----------------------------------------------------------------

TEST_CASE("kmeans trivial two-pair case", "[cluster][kmeans]") {
    Matrix x(4, 2);
    x.data = {0, 0, 0, 0, 10, 10, 10, 10};
    auto res = kmeans(x, 2, 1);
    CHECK(res.inertia == 0.0);
    CHECK(res.labels[0] == res.labels[1]);
    CHECK(res.labels[2] == res.labels[3]);
    CHECK(res.labels[0] != res.labels[2]);
    std::set<double> cx{res.centroids.at(0, 0), res.centroids.at(1, 0)};
    CHECK(cx == std::set<double>{0.0, 10.0});
}

TEST_CASE("kmeans k equal to n gives singletons with zero inertia", "[cluster][kmeans]") {
    Rng rng(2);
    Matrix x(7, 3);
    for (auto& v : x.data) v = rng.normal();
    auto res = kmeans(x, 7, 5);
    CHECK(res.inertia == Catch::Approx(0.0).margin(1e-18));
    std::set<int> distinct(res.labels.begin(), res.labels.end());
    CHECK(distinct.size() == 7);
}

TEST_CASE("kmeans guards", "[cluster][kmeans]") {
    Matrix x(3, 2, 1.0);
    CHECK_THROWS_AS(kmeans(x, 0, 1), UsageError);
    CHECK_THROWS_AS(kmeans(x, 4, 1), UsageError);
}

TEST_CASE("kmeans inertia trace is non-increasing and final state is a fixed point",
          "[cluster][kmeans]") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed * 31 + 7);
        Matrix x(200, 5);
        for (auto& v : x.data) v = rng.normal();
        auto res = kmeans(x, 4, seed, 3);
        for (size_t i = 1; i < res.inertia_trace.size(); ++i)
            REQUIRE(res.inertia_trace[i] <= res.inertia_trace[i - 1] + 1e-9);

        // reassignment changes nothing
        for (size_t i = 0; i < x.rows; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = -1;
            for (size_t c = 0; c < res.k; ++c) {
                double d = sq_dist(x.row(i), res.centroids.row(c), x.cols);
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(c);
                }
            }
            REQUIRE(sq_dist(x.row(i), res.centroids.row(res.labels[i]), x.cols) ==
                    Catch::Approx(best).margin(1e-12));
            (void)arg;
        }
    }
}

TEST_CASE("kmeans recovers separable blobs", "[cluster][kmeans]") {
    Matrix centers(3, 4, 0.0);
    centers.at(1, 0) = 10.0;
    centers.at(2, 1) = 10.0;
    for (uint64_t seed : {1ULL, 2ULL}) {
        auto blobs = synth::make_blobs({40, 40, 40}, centers, 0.5, seed + 100);
        auto res = kmeans(blobs.x, 3, seed);
        auto scores = external_metrics(blobs.labels, res.labels);
        CHECK(scores.adjusted_rand >= 0.95);
    }
}

TEST_CASE("kmeans deterministic under seed", "[cluster][kmeans]") {
    Rng rng(3);
    Matrix x(60, 3);
    for (auto& v : x.data) v = rng.normal();
    auto a = kmeans(x, 3, 17);
    auto b = kmeans(x, 3, 17);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    CHECK(a.centroids.data == b.centroids.data);
}

// --- agglomerative ----------------------------------------------------------

namespace {

// Naive reference: recompute every inter-cluster linkage distance from raw
// points at each step. Ward uses the merge-cost form scaled to match
// Lance-Williams initial squared distances (order-equivalent).
std::vector<int> naive_agglomerative(const Matrix& x, size_t k, Linkage linkage) {
    std::vector<std::vector<size_t>> clusters;
    for (size_t i = 0; i < x.rows; ++i) clusters.push_back({i});

    auto linkage_dist = [&](const std::vector<size_t>& a, const std::vector<size_t>& b) {
        if (linkage == Linkage::ward) {
            std::vector<double> ca(x.cols, 0.0), cb(x.cols, 0.0);
            for (size_t i : a)
                for (size_t j = 0; j < x.cols; ++j) ca[j] += x.at(i, j) / a.size();
            for (size_t i : b)
                for (size_t j = 0; j < x.cols; ++j) cb[j] += x.at(i, j) / b.size();
            double d2 = 0;
            for (size_t j = 0; j < x.cols; ++j) d2 += (ca[j] - cb[j]) * (ca[j] - cb[j]);
            double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
            return 2.0 * na * nb / (na + nb) * d2;
        }
        double best = linkage == Linkage::complete ? 0.0
                                                   : std::numeric_limits<double>::infinity();
        double sum = 0;
        for (size_t i : a)
            for (size_t j : b) {
                double d = euclidean(x.row(i), x.row(j), x.cols);
                sum += d;
                if (linkage == Linkage::single) best = std::min(best, d);
                if (linkage == Linkage::complete) best = std::max(best, d);
            }
        if (linkage == Linkage::average) return sum / static_cast<double>(a.size() * b.size());
        return best;
    };

    while (clusters.size() > k) {
        // order clusters by smallest member (slot order)
        std::sort(clusters.begin(), clusters.end(),
                  [](const auto& a, const auto& b) { return a[0] < b[0]; });
        size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < clusters.size(); ++i)
            for (size_t j = i + 1; j < clusters.size(); ++j) {
                double d = linkage_dist(clusters[i], clusters[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        std::sort(clusters[bi].begin(), clusters[bi].end());
        clusters.erase(clusters.begin() + bj);
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    std::vector<int> labels(x.rows, -1);
    for (size_t c = 0; c < clusters.size(); ++c)
        for (size_t i : clusters[c]) labels[i] = static_cast<int>(c);
    return labels;
}

}  // namespace

TEST_CASE("agglomerative two far pairs under every linkage", "[cluster][agglo]") {
    Matrix x(4, 2);
    x.data = {0, 0, 0.5, 0, 30, 30, 30.5, 30};
    for (Linkage l : {Linkage::ward, Linkage::average, Linkage::complete, Linkage::single}) {
        auto res = agglomerative(x, 2, l);
        CHECK(res.labels == std::vector<int>{0, 0, 1, 1});
        CHECK(res.k == 2);
    }
}

TEST_CASE("agglomerative k=n and k=1", "[cluster][agglo]") {
    Rng rng(4);
    Matrix x(6, 2);
    for (auto& v : x.data) v = rng.normal();
    auto all = agglomerative(x, 6, Linkage::ward);
    CHECK(all.labels == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(all.merges.empty());
    for (Linkage l : {Linkage::ward, Linkage::average, Linkage::complete, Linkage::single}) {
        auto one = agglomerative(x, 1, l);
        CHECK(std::set<int>(one.labels.begin(), one.labels.end()).size() == 1);
    }
    CHECK_THROWS_AS(agglomerative(x, 7, Linkage::ward), UsageError);
    CHECK_THROWS_AS(agglomerative(x, 0, Linkage::ward), UsageError);
}

TEST_CASE("single linkage on an equidistant chain splits deterministically", "[cluster][agglo]") {
    // chain 0-1-2-3-4-5 spaced exactly 1 apart; all merges tie at distance 1.
    // ties resolve to the smallest slot pair, so merging proceeds left to
    // right: after 4 merges clusters are {0..4} and {5}.
    Matrix x(6, 1);
    for (size_t i = 0; i < 6; ++i) x.at(i, 0) = static_cast<double>(i);
    auto res = agglomerative(x, 2, Linkage::single);
    CHECK(res.labels == std::vector<int>{0, 0, 0, 0, 0, 1});

    // with a true maximal gap the split lands there instead
    Matrix g(6, 1);
    g.data = {0, 1, 2, 10, 11, 12};
    auto gap = agglomerative(g, 2, Linkage::single);
    CHECK(gap.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("agglomerative matches the naive reference on random data", "[cluster][agglo]") {
    for (Linkage l : {Linkage::ward, Linkage::average, Linkage::complete, Linkage::single}) {
        for (uint64_t seed = 0; seed < 4; ++seed) {
            Rng rng(seed * 13 + 1);
            Matrix x(14, 3);
            for (auto& v : x.data) v = rng.normal();
            for (size_t k : {2UL, 3UL, 5UL}) {
                auto fast = agglomerative(x, k, l);
                auto ref = naive_agglomerative(x, k, l);
                INFO("linkage " << linkage_name(l) << " seed " << seed << " k " << k);
                CHECK(fast.labels == ref);
            }
        }
    }
}

TEST_CASE("agglomerative merge log is monotone for ward", "[cluster][agglo]") {
    Rng rng(6);
    Matrix x(20, 2);
    for (auto& v : x.data) v = rng.normal();
    auto res = agglomerative(x, 1, Linkage::ward);
    REQUIRE(res.merges.size() == 19);
    for (size_t i = 1; i < res.merges.size(); ++i)
        CHECK(res.merges[i].height >= res.merges[i - 1].height - 1e-12);
    CHECK(res.merges.back().size == 20);
}

TEST_CASE("agglomerative respects the size guard", "[cluster][agglo]") {
    Matrix x(10, 1);
    for (size_t i = 0; i < 10; ++i) x.at(i, 0) = static_cast<double>(i);
    CHECK_THROWS_AS(agglomerative(x, 2, Linkage::ward, 5), UsageError);
}

TEST_CASE("parse_linkage", "[cluster][agglo]") {
    CHECK(parse_linkage("ward") == Linkage::ward);
    CHECK(parse_linkage("average") == Linkage::average);
    CHECK(parse_linkage("complete") == Linkage::complete);
    CHECK(parse_linkage("single") == Linkage::single);
    CHECK_THROWS_AS(parse_linkage("AVERAGE"), UsageError);  // spec strings are lowercase
    CHECK_THROWS_AS(parse_linkage("median"), UsageError);
}

// --- external metrics --------------------------------------------------------

TEST_CASE("metric hand cases", "[cluster][metrics]") {
    std::vector<int> t{0, 0, 1, 1};
    auto s = external_metrics(t, {0, 1, 0, 1});
    CHECK(s.rand_index == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(s.adjusted_rand == Catch::Approx(-0.5).margin(1e-15));

    auto single = external_metrics(t, {0, 0, 0, 0});
    CHECK(single.homogeneity == Catch::Approx(0.0).margin(1e-15));
    CHECK(single.completeness == 1.0);
    CHECK(single.v_measure == Catch::Approx(0.0).margin(1e-15));

    auto perm = external_metrics(t, {1, 1, 0, 0});  // same partition, renamed
    CHECK(perm.homogeneity == Catch::Approx(1.0));
    CHECK(perm.completeness == Catch::Approx(1.0));
    CHECK(perm.v_measure == Catch::Approx(1.0));
    CHECK(perm.rand_index == 1.0);
    CHECK(perm.adjusted_rand == Catch::Approx(1.0));
    CHECK(perm.adjusted_mutual_info == Catch::Approx(1.0));
}

TEST_CASE("metrics match brute-force oracles on random labelings", "[cluster][metrics]") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const size_t n = 5 + rng.below(5);
        std::vector<int> t(n), p(n);
        for (size_t i = 0; i < n; ++i) {
            t[i] = static_cast<int>(rng.below(3));
            p[i] = static_cast<int>(rng.below(3));
        }
        auto s = external_metrics(t, p);
        REQUIRE(s.homogeneity == Catch::Approx(oracle::homogeneity(t, p)).margin(1e-9));
        REQUIRE(s.completeness == Catch::Approx(oracle::completeness(t, p)).margin(1e-9));
        REQUIRE(s.v_measure == Catch::Approx(oracle::v_measure(t, p)).margin(1e-9));
        REQUIRE(s.rand_index == Catch::Approx(oracle::rand_index(t, p)).margin(1e-9));
        REQUIRE(s.adjusted_rand == Catch::Approx(oracle::adjusted_rand(t, p)).margin(1e-9));
        REQUIRE(s.adjusted_mutual_info ==
                Catch::Approx(oracle::adjusted_mutual_info(t, p)).margin(1e-9));

        // symmetry: homogeneity(t,p) = completeness(p,t)
        auto flipped = external_metrics(p, t);
        REQUIRE(s.homogeneity == Catch::Approx(flipped.completeness).margin(1e-12));

        // V is the harmonic mean
        if (s.homogeneity + s.completeness > 0)
            REQUIRE(s.v_measure == Catch::Approx(2 * s.homogeneity * s.completeness /
                                                 (s.homogeneity + s.completeness))
                                       .margin(1e-12));
    }
}

TEST_CASE("hypergeometric expected MI equals the permutation average", "[cluster][metrics]") {
    // tiny cases where averaging MI over all n! permutations is feasible
    const std::vector<std::pair<std::vector<int>, std::vector<int>>> cases = {
        {{0, 0, 1, 1}, {0, 1, 0, 1}},
        {{0, 0, 1, 1, 2}, {0, 1, 1, 2, 2}},
        {{0, 0, 0, 1, 1, 2}, {0, 1, 2, 0, 1, 2}},
        {{0, 1, 2, 0, 1, 2, 0}, {0, 0, 1, 1, 2, 2, 2}},
    };
    for (const auto& [t, p] : cases) {
        double lgamma_form = oracle::emi_hypergeometric(t, p);
        double permutation_form = oracle::emi_permutation(t, p);
        CHECK(lgamma_form == Catch::Approx(permutation_form).margin(1e-10));
    }
}

TEST_CASE("expected ARI under random labelings is near zero", "[cluster][metrics]") {
    Rng rng(8);
    double sum = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        std::vector<int> t(8), p(8);
        for (size_t j = 0; j < 8; ++j) {
            t[j] = static_cast<int>(rng.below(3));
            p[j] = static_cast<int>(rng.below(3));
        }
        sum += external_metrics(t, p).adjusted_rand;
    }
    CHECK(std::abs(sum / draws) < 0.05);
}

TEST_CASE("metric input guards", "[cluster][metrics]") {
    CHECK_THROWS_AS(external_metrics({0, 1}, {0}), DataError);
    CHECK_THROWS_AS(external_metrics({0}, {0}), DataError);
}

// --- silhouette ---------------------------------------------------------------

TEST_CASE("silhouette four-point hand case", "[cluster][silhouette]") {
    Matrix x(4, 1);
    x.data = {0.0, 0.1, 10.0, 10.1};
    double s = silhouette(x, {0, 0, 1, 1});
    CHECK(s == Catch::Approx(0.990).margin(1e-3));
}

TEST_CASE("silhouette stays in bounds over random labelings", "[cluster][silhouette]") {
    Rng rng(9);
    Matrix x(20, 3);
    for (auto& v : x.data) v = rng.normal();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> labels(20);
        size_t k = 2 + rng.below(4);
        for (auto& l : labels) l = static_cast<int>(rng.below(k));
        std::set<int> distinct(labels.begin(), labels.end());
        if (distinct.size() < 2) continue;
        double s = silhouette(x, labels);
        REQUIRE(s >= -1.0);
        REQUIRE(s <= 1.0);
        REQUIRE(s == Catch::Approx(oracle::silhouette(x, labels)).margin(1e-9));
    }
}

TEST_CASE("silhouette of a randomly split blob is near zero", "[cluster][silhouette]") {
    Rng rng(10);
    Matrix x(40, 2);
    for (auto& v : x.data) v = rng.normal() * 0.3;
    std::vector<int> labels(40);
    for (size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 2);
    CHECK(silhouette(x, labels) < 0.1);
}

TEST_CASE("identical points in different clusters score zero", "[cluster][silhouette]") {
    Matrix x(4, 1);
    x.data = {1.0, 1.0, 1.0, 1.0};
    double s = silhouette(x, {0, 0, 1, 1});
    CHECK(s == 0.0);
}

TEST_CASE("silhouette guards and subsampling", "[cluster][silhouette]") {
    Matrix x(4, 1);
    x.data = {0, 1, 2, 3};
    CHECK_THROWS_AS(silhouette(x, {0, 0, 0, 0}), DataError);
    Matrix two(2, 1);
    two.data = {0, 1};
    CHECK_THROWS_AS(silhouette(two, {0, 1}), DataError);

    Rng rng(11);
    Matrix big(200, 2);
    for (auto& v : big.data) v = rng.normal();
    std::vector<int> labels(200);
    for (size_t i = 0; i < 200; ++i) labels[i] = i < 100 ? 0 : 1;
    double exact = silhouette(big, labels);
    double sub = silhouette(big, labels, 80, 3);
    CHECK(std::abs(exact - sub) < 0.25);  // rough agreement, not equality
}

// --- benchmark grid -----------------------------------------------------------

namespace {

BenchmarkGrid small_grid() {
    BenchmarkGrid g;
    g.reducers = {{"none", json::object()}, {"pca", {{"p", 2}}}};
    g.clusterers = {{"kmeans", {{"n_init", 2}}}, {"agglomerative", json::object()}};
    g.balances = {"imbalanced", "ros"};
    return g;
}

synth::Blobs bench_blobs(uint64_t seed) {
    Matrix centers(3, 4, 0.0);
    centers.at(1, 0) = 12.0;
    centers.at(2, 1) = 12.0;
    return synth::make_blobs({30, 20, 10}, centers, 0.5, seed);
}

}  // namespace

TEST_CASE("benchmark produces one row per grid cell", "[cluster][benchmark]") {
    auto blobs = bench_blobs(31);
    auto fm = synth::wrap_features(blobs.x);
    auto runs = run_benchmark(fm, blobs.labels, small_grid(), 42);
    REQUIRE(runs.size() == 8);  // 2 reducers × 2 clusterers × 2 balances

    // grouping: clusterer label (with params)/balance, reducers in config
    // order inside groups
    CHECK(runs[0].group == "kmeans:n_init=2/imbalanced");
    CHECK(runs[0].reducer == "none");
    CHECK(runs[1].reducer == "pca:p=2");
    CHECK(runs[2].group == "kmeans:n_init=2/ros");
    CHECK(runs[4].group == "agglomerative/imbalanced");
    CHECK(runs[7].group == "agglomerative/ros");

    for (const auto& run : runs) {
        REQUIRE_FALSE(run.failed);
        CHECK(run.scores.adjusted_rand >= 0.95);  // separable blobs
        CHECK(run.silhouette > 0.5);
        CHECK(run.wall_seconds >= 0.0);
    }
}

TEST_CASE("benchmark on an empty grid is empty", "[cluster][benchmark]") {
    auto blobs = bench_blobs(32);
    auto fm = synth::wrap_features(blobs.x);
    BenchmarkGrid g;
    g.reducers.clear();
    g.clusterers.clear();
    auto runs = run_benchmark(fm, blobs.labels, g, 1);
    CHECK(runs.empty());
}

TEST_CASE("a failing cell records its error and the grid continues", "[cluster][benchmark]") {
    auto blobs = bench_blobs(33);
    auto fm = synth::wrap_features(blobs.x);
    BenchmarkGrid g;
    g.reducers = {{"none", json::object()}};
    g.clusterers = {{"agglomerative", {{"max_n", 5}}}, {"kmeans", json::object()}};
    g.balances = {"imbalanced"};
    auto runs = run_benchmark(fm, blobs.labels, g, 1);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].failed);
    CHECK_FALSE(runs[0].error.empty());
    CHECK_FALSE(runs[1].failed);
}

TEST_CASE("balanced input makes imbalanced and ros rows identical", "[cluster][benchmark]") {
    Matrix centers(2, 3, 0.0);
    centers.at(1, 2) = 15.0;
    auto blobs = synth::make_blobs({25, 25}, centers, 0.4, 34);
    auto fm = synth::wrap_features(blobs.x);
    BenchmarkGrid g;
    g.reducers = {{"none", json::object()}};
    g.clusterers = {{"kmeans", json::object()}};
    g.balances = {"imbalanced", "ros"};
    auto runs = run_benchmark(fm, blobs.labels, g, 9);
    REQUIRE(runs.size() == 2);
    // ROS on balanced data adds nothing and the cell seeds match by design
    CHECK(runs[0].scores.v_measure == runs[1].scores.v_measure);
    CHECK(runs[0].silhouette == runs[1].silhouette);
}

TEST_CASE("benchmark csv layout", "[cluster][benchmark]") {
    auto blobs = bench_blobs(35);
    auto fm = synth::wrap_features(blobs.x);
    BenchmarkGrid g;
    g.reducers = {{"none", json::object()}};
    g.clusterers = {{"kmeans", json::object()}, {"agglomerative", {{"max_n", 2}}}};
    g.balances = {"imbalanced"};
    auto runs = run_benchmark(fm, blobs.labels, g, 2);

    std::ostringstream csv;
    benchmark_csv(csv, runs);
    std::istringstream in(csv.str());
    CsvReader r(in);
    std::vector<std::string> f;
    REQUIRE(r.next_record(f));
    CHECK(f == std::vector<std::string>{"group", "reducer", "clusterer", "balance", "time_s",
                                        "homo", "compl", "v_meas", "ari", "ami", "silhouette"});
    REQUIRE(r.next_record(f));
    CHECK(f[0] == "kmeans/imbalanced");
    CHECK_FALSE(f[5].empty());
    REQUIRE(r.next_record(f));  // failed agglomerative row: empty metric cells
    CHECK(f[0] == "agglomerative:max_n=2/imbalanced");
    CHECK(f[5].empty());
    CHECK(f[10].empty());

    json twin = benchmark_json(runs);
    REQUIRE(twin.size() == 2);
    CHECK_FALSE(twin[0].contains("time_s"));  // timings stay out of the JSON twin
    CHECK(twin[0]["v_measure"].is_number());
    CHECK(twin[1]["failed"] == true);
    CHECK(twin[1].contains("error"));
}

TEST_CASE("benchmark import reducer feeds an external embedding through", "[cluster][benchmark]") {
    auto blobs = bench_blobs(36);
    auto fm = synth::wrap_features(blobs.x);
    auto pca = pca_fit_transform(fm, 2);
    std::string path = "import_test_embedding.csv";
    {
        std::ofstream out(path);
        write_embedding(pca.embedding, out);
    }
    BenchmarkGrid g;
    g.reducers = {{"import", {{"path", path}}}};
    g.clusterers = {{"kmeans", json::object()}};
    g.balances = {"imbalanced", "ros"};
    auto runs = run_benchmark(fm, blobs.labels, g, 3);
    std::remove(path.c_str());
    REQUIRE(runs.size() == 2);
    CHECK_FALSE(runs[0].failed);
    CHECK_FALSE(runs[1].failed);  // ros expands the imported rows via the duplication map
    CHECK(runs[0].scores.adjusted_rand >= 0.9);
    CHECK(runs[1].scores.adjusted_rand >= 0.9);
}
