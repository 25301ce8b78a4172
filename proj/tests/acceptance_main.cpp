// Acceptance gate: one PASS/FAIL line per criterion. Criteria B.11-B.13 need a
// real COCONUT export (and an externally computed UMAP embedding) and print
// SKIP when those inputs are not supplied:
//
//   acceptance [--coconut EXPORT] [--umap EMBEDDING] [--seed N]
//
// Exit status is nonzero iff any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <terpscape/terpscape.hpp>

#include "oracles.hpp"
#include "synthetic.hpp"

using namespace terpscape;

namespace {

struct Gate {
    int failures = 0;

    void pass(const std::string& name, const std::string& detail) {
        std::cout << "PASS  " << name << "  — " << detail << "\n";
    }
    void fail(const std::string& name, const std::string& detail) {
        std::cout << "FAIL  " << name << "  — " << detail << "\n";
        ++failures;
    }
    void skip(const std::string& name, const std::string& reason) {
        std::cout << "SKIP  " << name << "  — " << reason << "\n";
    }
    void check(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            auto [ok, detail] = fn();
            ok ? pass(name, detail) : fail(name, detail);
        } catch (const std::exception& e) {
            fail(name, std::string("exception: ") + e.what());
        }
    }
};

std::string fmt(double v, int prec = 6) { return fmt_fixed(v, prec); }

// ---------------------------------------------------------------------------
// A.1 metric-oracle equivalence over every ≤3-cluster labeling of 8 points

std::vector<std::vector<int>> dedup_labelings(size_t n, int max_k) {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> out;
    std::vector<int> code(n, 0);
    while (true) {
        // canonical form: clusters renamed in order of first appearance
        std::vector<int> canon(n);
        std::map<int, int> remap;
        for (size_t i = 0; i < n; ++i) {
            auto [it, fresh] = remap.emplace(code[i], static_cast<int>(remap.size()));
            canon[i] = it->second;
            (void)fresh;
        }
        if (seen.insert(canon).second) out.push_back(std::move(canon));
        size_t pos = 0;
        while (pos < n && code[pos] == max_k - 1) code[pos++] = 0;
        if (pos == n) break;
        ++code[pos];
    }
    return out;
}

std::pair<bool, std::string> criterion_a1() {
    const auto parts = dedup_labelings(8, 3);
    double worst = 0.0;
    std::string worst_at;
    size_t pairs = 0;
    for (const auto& t : parts) {
        for (const auto& p : parts) {
            ++pairs;
            const ExternalScores s = external_metrics(t, p);
            const double dev = std::max(
                {std::abs(s.homogeneity - oracle::homogeneity(t, p)),
                 std::abs(s.completeness - oracle::completeness(t, p)),
                 std::abs(s.v_measure - oracle::v_measure(t, p)),
                 std::abs(s.rand_index - oracle::rand_index(t, p)),
                 std::abs(s.adjusted_rand - oracle::adjusted_rand(t, p)),
                 std::abs(s.adjusted_mutual_info - oracle::adjusted_mutual_info(t, p))});
            if (dev > worst) {
                worst = dev;
                std::ostringstream at;
                for (int v : t) at << v;
                at << " vs ";
                for (int v : p) at << v;
                worst_at = at.str();
            }
        }
    }
    if (worst > 1e-9)
        return {false, "max oracle deviation " + fmt(worst, 12) + " at " + worst_at};

    const std::vector<int> ht{0, 0, 1, 1}, hp{0, 1, 0, 1};
    const ExternalScores hand = external_metrics(ht, hp);
    if (std::abs(hand.rand_index - 1.0 / 3.0) > 1e-15)
        return {false, "hand case RI " + fmt(hand.rand_index, 12) + " != 1/3"};
    if (std::abs(hand.adjusted_rand - (-0.5)) > 1e-15)
        return {false, "hand case ARI " + fmt(hand.adjusted_rand, 12) + " != -0.5"};
    return {true, std::to_string(parts.size()) + " partitions, " + std::to_string(pairs) +
                      " true/pred pairs, max deviation " + fmt(worst, 12) +
                      "; hand RI=1/3, ARI=-0.5 exact"};
}

// ---------------------------------------------------------------------------
// A.2 k-means: Lloyd monotonicity + blob recovery

std::pair<bool, std::string> criterion_a2(uint64_t seed) {
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(Rng::derive(seed, 200 + trial));
        Matrix x(200, 5);
        for (auto& v : x.data) v = rng.uniform01();
        const size_t k = 2 + trial % 5;
        const KmeansResult r = kmeans(x, k, Rng::derive(seed, 300 + trial), 1);
        for (size_t i = 1; i < r.inertia_trace.size(); ++i) {
            if (r.inertia_trace[i] > r.inertia_trace[i - 1] * (1.0 + 1e-12) + 1e-12)
                return {false, "inertia rose at trial " + std::to_string(trial) + " step " +
                                   std::to_string(i) + ": " + fmt(r.inertia_trace[i - 1], 9) +
                                   " -> " + fmt(r.inertia_trace[i], 9)};
        }
    }

    Matrix centers(3, 2, 0.0);
    centers.at(1, 0) = 10.0;
    centers.at(2, 1) = 10.0;
    double min_ari = 1.0;
    for (int s = 0; s < 20; ++s) {
        const auto blobs = synth::make_blobs({100, 100, 100}, centers, 0.5,
                                             Rng::derive(seed, 400 + s));
        const KmeansResult r = kmeans(blobs.x, 3, Rng::derive(seed, 500 + s));
        const double ari = external_metrics(blobs.labels, r.labels).adjusted_rand;
        min_ari = std::min(min_ari, ari);
        if (ari < 0.95)
            return {false, "blob seed " + std::to_string(s) + " gave ARI " + fmt(ari, 4)};
    }
    return {true, "inertia non-increasing on 100 random 200x5 sets; blob ARI >= " +
                      fmt(min_ari, 4) + " over 20 seeds"};
}

// ---------------------------------------------------------------------------
// A.3 PCA orthonormality, reconstruction, rank-1 ratio

std::pair<bool, std::string> criterion_a3(uint64_t seed) {
    Rng rng(Rng::derive(seed, 3));
    const size_t n = 300, d = 12;
    Matrix raw(n, d);
    for (auto& v : raw.data) v = rng.normal();
    // correlate the columns so components are non-trivial
    Matrix mix(d, d);
    for (auto& v : mix.data) v = rng.normal();
    const FeatureMatrix fm = synth::wrap_features(matmul(raw, mix));

    const PcaResult full = pca_fit_transform(fm, d);
    double ortho_dev = 0.0;
    for (size_t a = 0; a < d; ++a) {
        for (size_t b = 0; b < d; ++b) {
            double dot = 0.0;
            for (size_t j = 0; j < d; ++j)
                dot += full.model.components.at(a, j) * full.model.components.at(b, j);
            ortho_dev = std::max(ortho_dev, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    }
    if (ortho_dev > 1e-8) return {false, "orthonormality deviation " + fmt(ortho_dev, 12)};

    // X ≈ scores · components + means with the full component set
    double recon_dev = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) {
            double v = full.model.means[j];
            for (size_t c = 0; c < d; ++c)
                v += full.embedding.points.at(i, c) * full.model.components.at(c, j);
            recon_dev = std::max(recon_dev, std::abs(v - fm.values.at(i, j)));
        }
    }
    if (recon_dev > 1e-8) return {false, "reconstruction error " + fmt(recon_dev, 12)};

    Matrix line(40, 3);
    for (size_t i = 0; i < 40; ++i) {
        const double t = rng.uniform(-2.0, 2.0);
        line.at(i, 0) = t;
        line.at(i, 1) = 2.0 * t;
        line.at(i, 2) = -0.5 * t;
    }
    const PcaResult rank1 = pca_fit_transform(synth::wrap_features(line), 1);
    const double ratio = rank1.model.explained_variance_ratio[0];
    if (std::abs(ratio - 1.0) > 1e-12)
        return {false, "rank-1 first ratio " + fmt(ratio, 15) + " != 1"};
    return {true, "orthonormality dev " + fmt(ortho_dev, 12) + ", reconstruction dev " +
                      fmt(recon_dev, 12) + ", rank-1 ratio exact"};
}

// ---------------------------------------------------------------------------
// A.4 FastICA source recovery

std::pair<bool, std::string> criterion_a4(uint64_t seed) {
    const size_t n = 2000;
    int good = 0;
    for (int s = 0; s < 20; ++s) {
        Rng rng(Rng::derive(seed, 600 + s));
        Matrix sources(n, 2);
        for (auto& v : sources.data) v = rng.uniform(-1.0, 1.0);
        Matrix mix(2, 2);
        mix.data = {0.8, 0.3, -0.4, 0.9};
        const Matrix x = matmul(sources, mix);

        const FastIcaResult r = fast_ica(synth::wrap_features(x), 2, Rng::derive(seed, 700 + s));
        // |corr| between each true source and its best recovered match
        double best_assignment = 0.0;
        for (int perm = 0; perm < 2; ++perm) {
            double worst = 1.0;
            for (size_t c = 0; c < 2; ++c) {
                const size_t rc = perm == 0 ? c : 1 - c;
                double num = 0, da = 0, db = 0, ma = 0, mb = 0;
                for (size_t i = 0; i < n; ++i) {
                    ma += sources.at(i, c);
                    mb += r.embedding.points.at(i, rc);
                }
                ma /= n;
                mb /= n;
                for (size_t i = 0; i < n; ++i) {
                    const double a = sources.at(i, c) - ma;
                    const double b = r.embedding.points.at(i, rc) - mb;
                    num += a * b;
                    da += a * a;
                    db += b * b;
                }
                worst = std::min(worst, std::abs(num / std::sqrt(da * db)));
            }
            best_assignment = std::max(best_assignment, worst);
        }
        if (best_assignment >= 0.95) ++good;
    }
    if (good < 18)
        return {false, "only " + std::to_string(good) + "/20 seeds recovered both sources"};
    return {true, std::to_string(good) + "/20 seeds recovered both sources with |corr| >= 0.95"};
}

// ---------------------------------------------------------------------------
// A.5 t-SNE affinities and KL descent

std::pair<bool, std::string> criterion_a5(uint64_t seed) {
    Matrix centers(2, 5, 0.0);
    centers.at(1, 0) = 10.0;
    const auto blobs = synth::make_blobs({60, 60}, centers, 1.0, Rng::derive(seed, 5));
    const double perplexity = 20.0;

    const Matrix cond = tsne_conditional(blobs.x, perplexity);
    double entropy_dev = 0.0;
    for (size_t i = 0; i < cond.rows; ++i) {
        double h = 0.0;
        for (size_t j = 0; j < cond.cols; ++j) {
            const double p = cond.at(i, j);
            if (p > 0) h -= p * std::log(p);
        }
        entropy_dev = std::max(entropy_dev, std::abs(h - std::log(perplexity)));
    }
    if (entropy_dev > 1e-4)
        return {false, "conditional entropy off log(perplexity) by " + fmt(entropy_dev, 8)};

    const Matrix P = tsne_symmetrize(cond);
    double total = 0.0;
    for (double v : P.data) total += v;
    if (std::abs(total - 1.0) > 1e-9)
        return {false, "symmetrized P sums to " + fmt(total, 12)};

    TsneOptions opt;
    opt.perplexity = perplexity;
    opt.iters = 320;
    const TsneResult r = tsne(synth::wrap_features(blobs.x), opt, Rng::derive(seed, 55));
    const double kl_260 = r.kl_trace[259];
    const double kl_final = r.kl_trace.back();
    if (!(kl_final < kl_260))
        return {false, "KL(final)=" + fmt(kl_final, 8) + " not below KL(260)=" + fmt(kl_260, 8)};
    return {true, "entropy dev " + fmt(entropy_dev, 8) + ", P sum dev " +
                      fmt(std::abs(total - 1.0), 12) + ", KL " + fmt(kl_260, 5) + " -> " +
                      fmt(kl_final, 5)};
}

// ---------------------------------------------------------------------------
// A.6 silhouette hand case and bounds

std::pair<bool, std::string> criterion_a6(uint64_t seed) {
    Matrix hand(4, 2);
    hand.data = {0.0, 0.0, 0.0, 0.1, 10.0, 0.0, 10.0, 0.1};
    const double s_hand = silhouette(hand, {0, 0, 1, 1});
    if (std::abs(s_hand - 0.990) > 1e-3)
        return {false, "hand case silhouette " + fmt(s_hand, 6) + " != 0.990"};

    Rng rng(Rng::derive(seed, 6));
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 4 + rng.below(9);
        Matrix x(n, 2);
        for (auto& v : x.data) v = rng.uniform(-5.0, 5.0);
        const size_t k = 2 + rng.below(3);
        std::vector<int> labels(n);
        labels[0] = 0;
        labels[1] = 1;  // at least two clusters
        for (size_t i = 2; i < n; ++i) labels[i] = static_cast<int>(rng.below(k));
        const double s = silhouette(x, labels);
        if (!(s >= -1.0 - 1e-12 && s <= 1.0 + 1e-12))
            return {false, "silhouette " + fmt(s, 6) + " out of [-1,1] at trial " +
                               std::to_string(trial)};
    }
    return {true, "hand case " + fmt(s_hand, 4) + "; bounds held on 1000 random labelings"};
}

// ---------------------------------------------------------------------------
// A.7 classification metric identities

std::pair<bool, std::string> criterion_a7(uint64_t seed) {
    double worst_auc_dev = 0.0;
    for (int s = 0; s < 100; ++s) {
        Rng rng(Rng::derive(seed, 800 + s));
        const size_t n = 6 + rng.below(25);  // n <= 30
        const size_t k = 3 + rng.below(2);
        std::vector<int> y(n);
        for (size_t i = 0; i < n; ++i) y[i] = static_cast<int>(rng.below(k));
        Matrix scores(n, k);
        for (auto& v : scores.data) v = rng.uniform01();
        if (s % 3 == 0 && n > 2)  // exercise tie handling as well
            for (size_t c = 0; c < k; ++c) scores.at(1, c) = scores.at(0, c);
        const double lib = ovo_auc_score(y, scores, k, nullptr);
        const double brute = oracle::ovo_auc_brute(y, scores, k);
        if (std::isnan(brute) || std::isnan(lib)) {
            if (std::isnan(brute) != std::isnan(lib))
                return {false, "NaN disagreement at seed " + std::to_string(s)};
            continue;
        }
        const double dev = std::abs(lib - brute);
        worst_auc_dev = std::max(worst_auc_dev, dev);
        if (dev > 1e-12)
            return {false, "OVO AUC off brute force by " + fmt(dev, 15) + " at seed " +
                               std::to_string(s)};
    }

    Rng rng(Rng::derive(seed, 7));
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 10 + rng.below(40);
        const size_t k = 2 + rng.below(3);
        std::vector<int> y(n), p(n);
        bool two = false;
        for (size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rng.below(k));
            p[i] = static_cast<int>(rng.below(k));
            if (y[i] != y[0]) two = true;
        }
        if (!two) y[n - 1] = (y[0] + 1) % static_cast<int>(k);
        Matrix scores(n, k, 1.0 / static_cast<double>(k));
        const ClassMetrics m = classification_metrics(y, p, scores, k);
        if (std::abs(m.weighted_recall - m.accuracy) > 1e-12)
            return {false, "weighted recall " + fmt(m.weighted_recall, 15) + " != accuracy " +
                               fmt(m.accuracy, 15)};

        // duplicate every sample of one class: balanced accuracy must not move
        const int dup = y[0];
        std::vector<int> y2 = y, p2 = p;
        for (size_t i = 0; i < n; ++i)
            if (y[i] == dup) {
                y2.push_back(y[i]);
                p2.push_back(p[i]);
            }
        Matrix scores2(y2.size(), k, 1.0 / static_cast<double>(k));
        const ClassMetrics m2 = classification_metrics(y2, p2, scores2, k);
        if (std::abs(m2.balanced_accuracy - m.balanced_accuracy) > 1e-12)
            return {false, "balanced accuracy moved under duplication: " +
                               fmt(m.balanced_accuracy, 15) + " -> " +
                               fmt(m2.balanced_accuracy, 15)};
    }
    return {true, "OVO AUC == brute force (max dev " + fmt(worst_auc_dev, 15) +
                      ", 100 seeds); recall==accuracy and duplication invariance held"};
}

// ---------------------------------------------------------------------------
// A.8 six-class imbalanced benchmark for GBDT and random forest

std::pair<bool, std::string> criterion_a8(uint64_t seed) {
    // class counts proportional to the six modeled subclasses, scaled to 6000
    const std::vector<size_t> counts{1357, 1210, 942, 524, 789, 1178};
    const size_t k = counts.size();
    const double sep = 5.0;  // pairwise center distance; tuned for Bayes ~ 0.97
    Matrix centers(k, k, 0.0);
    for (size_t c = 0; c < k; ++c) centers.at(c, c) = sep / std::sqrt(2.0);
    const auto blobs = synth::make_blobs(counts, centers, 1.0, Rng::derive(seed, 8));
    const size_t n = blobs.labels.size();

    // Bayes rule on the known generative model
    std::vector<double> log_prior(k);
    for (size_t c = 0; c < k; ++c)
        log_prior[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
    size_t bayes_correct = 0;
    for (size_t i = 0; i < n; ++i) {
        int arg = 0;
        double best = -1e300;
        for (size_t c = 0; c < k; ++c) {
            const double score = log_prior[c] - 0.5 * sq_dist(blobs.x.row(i), centers.row(c), k);
            if (score > best) {
                best = score;
                arg = static_cast<int>(c);
            }
        }
        bayes_correct += arg == blobs.labels[i];
    }
    const double bayes = static_cast<double>(bayes_correct) / static_cast<double>(n);
    if (bayes < 0.955 || bayes > 0.985)
        return {false, "Bayes accuracy " + fmt(bayes, 4) + " not ~ 0.97; retune separation"};

    ModelSpec gbdt;
    gbdt.algorithm = "gbdt";
    gbdt.params = {{"rounds", 120}, {"leaves", 31}, {"min_samples_leaf", 20}};
    gbdt.seed = Rng::derive(seed, 80);
    const CvReport gr = cross_validate(gbdt, blobs.x, blobs.labels, k, 5, Rng::derive(seed, 81));

    ModelSpec rf;
    rf.algorithm = "random_forest";
    rf.params = {{"trees", 60}};
    rf.seed = Rng::derive(seed, 82);
    const CvReport rr = cross_validate(rf, blobs.x, blobs.labels, k, 5, Rng::derive(seed, 81));

    std::ostringstream detail;
    detail << "Bayes " << fmt(bayes, 3) << "; gbdt F1 " << fmt(gr.mean.weighted_f1, 4)
           << " balacc " << fmt(gr.mean.balanced_accuracy, 4) << "; rf F1 "
           << fmt(rr.mean.weighted_f1, 4) << " balacc " << fmt(rr.mean.balanced_accuracy, 4);
    if (gr.mean.weighted_f1 < 0.90 || rr.mean.weighted_f1 < 0.90)
        return {false, "cv weighted F1 below 0.90 (" + detail.str() + ")"};
    if (gr.mean.balanced_accuracy < 0.88 || rr.mean.balanced_accuracy < 0.88)
        return {false, "cv balanced accuracy below 0.88 (" + detail.str() + ")"};
    if (gr.mean.weighted_f1 < rr.mean.weighted_f1 - 0.02)
        return {false, "gbdt trails rf by more than 0.02 (" + detail.str() + ")"};
    return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// A.9 Lipinski rule grid and histogram shares

std::pair<bool, std::string> criterion_a9() {
    const double mw_vals[] = {400.0, 600.0};
    const double logp_vals[] = {4.0, 6.0};
    const double hbd_vals[] = {4.0, 7.0};
    const double hba_vals[] = {8.0, 12.0};
    for (int mask = 0; mask < 16; ++mask) {
        const double mw = mw_vals[mask & 1];
        const double lp = logp_vals[(mask >> 1) & 1];
        const double hbd = hbd_vals[(mask >> 2) & 1];
        const double hba = hba_vals[(mask >> 3) & 1];
        const int expected = (mask & 1) + ((mask >> 1) & 1) + ((mask >> 2) & 1) +
                             ((mask >> 3) & 1);
        const int got = lipinski_violations(mw, lp, hbd, hba);
        if (got != expected)
            return {false, "violations(" + fmt(mw, 0) + "," + fmt(lp, 0) + "," + fmt(hbd, 0) +
                               "," + fmt(hba, 0) + ") = " + std::to_string(got) + ", expected " +
                               std::to_string(expected)};
    }
    // rule boundaries are compliant (strict > comparisons)
    if (lipinski_violations(500.0, 5.0, 5.0, 10.0) != 0)
        return {false, "boundary values (500, 5, 5, 10) counted as violations"};

    // shares over a synthetic population with every violation count present
    Rng rng(9);
    LipinskiProfile prof;
    for (int i = 0; i < 977; ++i) {
        const double mw = mw_vals[rng.below(2)];
        const double lp = logp_vals[rng.below(2)];
        const double hbd = hbd_vals[rng.below(2)];
        const double hba = hba_vals[rng.below(2)];
        ++prof.histogram[static_cast<size_t>(lipinski_violations(mw, lp, hbd, hba))];
        ++prof.counted;
    }
    const auto shares = prof.shares();
    double sum = 0.0;
    for (double s : shares) sum += s;
    if (std::abs(sum - 1.0) > 1e-12)
        return {false, "histogram shares sum to " + fmt(sum, 15)};
    return {true, "2^4 rule grid exact; boundary compliant; shares sum dev " +
                      fmt(std::abs(sum - 1.0), 15)};
}

// ---------------------------------------------------------------------------
// A.10 determinism: repeating seeded runs yields byte-identical reports

std::string seeded_reports(uint64_t seed) {
    std::ostringstream out;

    // clustering benchmark report
    Matrix centers(3, 4, 0.0);
    centers.at(1, 0) = 8.0;
    centers.at(2, 1) = 8.0;
    const auto blobs = synth::make_blobs({120, 90, 60}, centers, 1.0, Rng::derive(seed, 1));
    FeatureMatrix fm = synth::wrap_features(blobs.x);
    BenchmarkGrid grid;
    grid.reducers = {ReducerSpec{"none", json::object()}, ReducerSpec{"pca", json{{"p", 2}}}};
    grid.clusterers = {ClustererSpec{"kmeans", json::object()}};
    const auto runs = run_benchmark(fm, blobs.labels, grid, Rng::derive(seed, 2));
    out << benchmark_json(runs).dump() << "\n";

    // classification report
    ModelSpec spec;
    spec.algorithm = "random_forest";
    spec.params = {{"trees", 15}};
    spec.seed = Rng::derive(seed, 3);
    const CvReport cv = cross_validate(spec, blobs.x, blobs.labels, 3, 3, Rng::derive(seed, 4));
    json folds = json::array();
    for (const auto& fold : cv.folds)
        folds.push_back(json{{"weighted_f1", fold.metrics.weighted_f1},
                             {"balanced_accuracy", fold.metrics.balanced_accuracy},
                             {"ovo_auc", fold.metrics.ovo_auc}});
    out << json{{"folds", folds}, {"mean_f1", cv.mean.weighted_f1}}.dump() << "\n";

    // an embedding artifact (text round-trip of seeded floats)
    Rng rng(Rng::derive(seed, 5));
    Matrix sources(200, 2);
    for (auto& v : sources.data) v = rng.uniform(-1.0, 1.0);
    Matrix mix(2, 2);
    mix.data = {0.7, 0.4, -0.3, 0.8};
    const FastIcaResult ica =
        fast_ica(synth::wrap_features(matmul(sources, mix)), 2, Rng::derive(seed, 6));
    write_embedding(ica.embedding, out);
    return out.str();
}

std::pair<bool, std::string> criterion_a10(uint64_t seed) {
    const std::string first = seeded_reports(seed);
    const std::string second = seeded_reports(seed);
    if (first != second) {
        size_t at = 0;
        while (at < first.size() && at < second.size() && first[at] == second[at]) ++at;
        return {false, "reports diverge at byte " + std::to_string(at)};
    }
    const std::string other = seeded_reports(seed + 1);
    if (first == other)
        return {false, "different seeds produced identical reports (seeding inert?)"};
    return {true, std::to_string(first.size()) +
                      " bytes of benchmark/cv/embedding reports identical across reruns"};
}

// ---------------------------------------------------------------------------
// B.11-B.13: conditional on a user-supplied COCONUT export

RecordSet load_coconut(const std::string& path) {
    RecordSet rs = parse_dataset_file(path, SchemaConfig{});
    std::vector<Subclass> all;
    for (size_t i = 0; i < kSubclassCount; ++i) all.push_back(static_cast<Subclass>(i));
    return filter_taxonomy(rs, "Lipids and lipid-like molecules", all);
}

std::pair<bool, std::string> criterion_b11(const RecordSet& rs) {
    if (rs.records.size() != 59833)
        return {false, "subset has " + std::to_string(rs.records.size()) +
                           " records, expected 59833 (export vintage mismatch?)"};
    const auto counts = subclass_counts(rs);
    const auto expect = [&](Subclass sc, size_t want) -> std::string {
        const size_t got = counts[static_cast<size_t>(sc)];
        if (got == want) return "";
        return subclass_names()[static_cast<size_t>(sc)] + " " + std::to_string(got) +
               " != " + std::to_string(want) + "; ";
    };
    std::string bad = expect(Subclass::Triterpenoids, 13245) +
                      expect(Subclass::Diterpenoids, 11814) +
                      expect(Subclass::Polyterpenoids, 48);
    if (!bad.empty()) return {false, bad};
    return {true, "59833 records; triterpenoids 13245, diterpenoids 11814, polyterpenoids 48"};
}

std::pair<bool, std::string> criterion_b12(const RecordSet& rs) {
    const ProfileReport rep = profile_report(rs);
    const auto& mw = rep.overall.mw.stats;
    const auto& npl = rep.overall.np_likeness.stats;
    const auto& lip = rep.overall.lipinski;
    const auto shares = lip.shares();
    std::ostringstream got;
    got << "MW mean " << fmt(mw.mean, 1) << " [" << fmt(mw.min, 1) << ", " << fmt(mw.max, 1)
        << "], NPL mean " << fmt(npl.mean, 2) << ", HBA<=10 " << fmt(lip.hba_le_10_share * 100, 1)
        << "pp, HBD<=5 " << fmt(lip.hbd_le_5_share * 100, 1) << "pp, viol0 "
        << fmt(shares[0] * 100, 1) << "pp, viol1 " << fmt(shares[1] * 100, 1) << "pp";
    const bool ok = std::abs(mw.mean - 534.9) <= 0.1 && std::abs(mw.min - 94.2) <= 0.1 &&
                    std::abs(mw.max - 2680.1) <= 0.1 && std::abs(npl.mean - 2.1) <= 0.05 &&
                    std::abs(lip.hba_le_10_share - 0.787) <= 0.002 &&
                    std::abs(lip.hbd_le_5_share - 0.81) <= 0.005 &&
                    std::abs(shares[0] - 0.416) <= 0.002 && std::abs(shares[1] - 0.228) <= 0.002;
    return {ok, got.str()};
}

std::pair<bool, std::string> criterion_b13(const RecordSet& rs, const std::string& umap_path,
                                           uint64_t seed) {
    RecordSet three = filter_taxonomy(
        rs, "", {Subclass::Triterpenoids, Subclass::Diterpenoids, Subclass::Monoterpenoids});
    DropResult dropped = drop_sparse_columns(three, 0.70);
    RecordSet expanded = expand_categoricals(dropped.rs);
    LabeledData data = to_labeled_data(expanded);
    SplitDataset prepped = preprocess_full(data.features, data.labels, seed);

    BenchmarkGrid grid;
    grid.reducers = {ReducerSpec{"none", json::object()},
                     ReducerSpec{"pca", json{{"p", 11}}},
                     ReducerSpec{"import", json{{"path", umap_path}}}};
    grid.clusterers = {ClustererSpec{"kmeans", json::object()}};
    grid.balances = {"imbalanced"};
    grid.silhouette_subsample = 4000;
    const auto runs = run_benchmark(prepped.train, prepped.train_labels, grid, seed);

    double v_none = -1, v_pca = -1, v_umap = -1;
    for (const auto& run : runs) {
        if (run.failed) return {false, run.reducer + " cell failed: " + run.error};
        if (run.reducer.rfind("none", 0) == 0) v_none = run.scores.v_measure;
        if (run.reducer.rfind("pca", 0) == 0) v_pca = run.scores.v_measure;
        if (run.reducer.rfind("import", 0) == 0) v_umap = run.scores.v_measure;
    }
    std::ostringstream got;
    got << "v-measure raw " << fmt(v_none, 3) << ", pca " << fmt(v_pca, 3) << ", umap "
        << fmt(v_umap, 3);
    if (!(v_umap > v_none && v_umap > v_pca))
        return {false, got.str() + " — imported UMAP is not the best"};
    return {true, got.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gate"};
    std::string coconut_path, umap_path;
    uint64_t seed = 20260813;
    app.add_option("--coconut", coconut_path, "COCONUT export (csv/jsonl) for B.11-B.13");
    app.add_option("--umap", umap_path, "imported UMAP embedding csv for B.13");
    app.add_option("--seed", seed, "base seed for the seeded criteria");
    CLI11_PARSE(app, argc, argv);

    Gate gate;
    gate.check("A.1  metric-oracle equivalence", criterion_a1);
    gate.check("A.2  k-means monotonic + blobs", [&] { return criterion_a2(seed); });
    gate.check("A.3  PCA invariants", [&] { return criterion_a3(seed); });
    gate.check("A.4  FastICA recovery", [&] { return criterion_a4(seed); });
    gate.check("A.5  t-SNE affinities + KL", [&] { return criterion_a5(seed); });
    gate.check("A.6  silhouette hand case + bounds", [&] { return criterion_a6(seed); });
    gate.check("A.7  classification metric identities", [&] { return criterion_a7(seed); });
    gate.check("A.8  six-class GBDT/RF benchmark", [&] { return criterion_a8(seed); });
    gate.check("A.9  Lipinski rule grid", criterion_a9);
    gate.check("A.10 seeded determinism", [&] { return criterion_a10(seed); });

    if (coconut_path.empty()) {
        gate.skip("B.11 subset size + subclass counts", "no --coconut export provided");
        gate.skip("B.12 profiling numbers", "no --coconut export provided");
        gate.skip("B.13 UMAP benchmark ordering", "no --coconut export provided");
    } else {
        try {
            const RecordSet rs = load_coconut(coconut_path);
            gate.check("B.11 subset size + subclass counts", [&] { return criterion_b11(rs); });
            gate.check("B.12 profiling numbers", [&] { return criterion_b12(rs); });
            if (umap_path.empty())
                gate.skip("B.13 UMAP benchmark ordering", "no --umap embedding provided");
            else
                gate.check("B.13 UMAP benchmark ordering",
                           [&] { return criterion_b13(rs, umap_path, seed); });
        } catch (const std::exception& e) {
            gate.fail("B.11 subset size + subclass counts",
                      std::string("loading export failed: ") + e.what());
            gate.fail("B.12 profiling numbers", "export unavailable");
            gate.fail("B.13 UMAP benchmark ordering", "export unavailable");
        }
    }

    if (gate.failures) {
        std::cout << gate.failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed (or were skipped pending external data)\n";
    return 0;
}
