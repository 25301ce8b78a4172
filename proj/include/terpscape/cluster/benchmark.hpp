#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "terpscape/cluster/agglomerative.hpp"
#include "terpscape/cluster/kmeans.hpp"
#include "terpscape/cluster/metrics.hpp"
#include "terpscape/csv.hpp"
#include "terpscape/dimred/embedding.hpp"
#include "terpscape/dimred/fast_ica.hpp"
#include "terpscape/dimred/kernel_pca.hpp"
#include "terpscape/dimred/pca.hpp"
#include "terpscape/dimred/tsne.hpp"
#include "terpscape/feature_matrix.hpp"
#include "terpscape/preprocess.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

namespace detail {

inline std::string json_scalar_brief(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v.get<double>());
        return buf;
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "none";
    return v.dump();
}

inline std::string spec_label(const std::string& method, const json& params) {
    if (params.contains("name")) return params.at("name").get<std::string>();
    std::string out = method;
    bool first = true;
    for (auto it = params.begin(); it != params.end(); ++it) {
        out += first ? ":" : ",";
        out += it.key() + "=" + json_scalar_brief(it.value());
        first = false;
    }
    return out;
}

inline long param_int(const json& params, const char* key, long fallback) {
    auto it = params.find(key);
    if (it == params.end() || it->is_null()) return fallback;
    return it->get<long>();
}

inline double param_real(const json& params, const char* key, double fallback) {
    auto it = params.find(key);
    if (it == params.end() || it->is_null()) return fallback;
    return it->get<double>();
}

inline std::string param_str(const json& params, const char* key, const std::string& fallback) {
    auto it = params.find(key);
    if (it == params.end() || it->is_null()) return fallback;
    return it->get<std::string>();
}

}  // namespace detail

struct ReducerSpec {
    std::string method = "none";  // none | pca | fastica | kpca | tsne | import
    json params = json::object();
    std::string label() const { return detail::spec_label(method, params); }
};

struct ClustererSpec {
    std::string method = "kmeans";  // kmeans | agglomerative
    json params = json::object();
    std::string label() const { return detail::spec_label(method, params); }
};

struct BenchmarkGrid {
    std::vector<ReducerSpec> reducers;
    std::vector<ClustererSpec> clusterers;
    std::vector<std::string> balances{"imbalanced", "ros"};
    size_t silhouette_subsample = 0;  // 0 = exact over all pairs
};

struct ClusterRun {
    std::string group;  // "<clusterer>/<balance>"
    std::string reducer;
    std::string clusterer;
    std::string balance;
    ExternalScores scores{};
    double silhouette = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;  // reduce + cluster only; lives in the CSV, not the JSON
    bool failed = false;
    std::string error;
};

// Reduces one grid cell's data. Computed reducers see the (possibly
// oversampled) matrix; an imported embedding is matched against the original
// row ids and then expanded through the oversampling map.
inline Matrix reduce_for_cell(const ReducerSpec& r, const FeatureMatrix& data,
                              const std::vector<std::string>& base_ids,
                              const std::vector<size_t>* expansion, uint64_t seed) {
    using detail::param_int;
    using detail::param_real;
    using detail::param_str;
    const json& p = r.params;
    if (r.method == "none") return data.values;
    if (r.method == "pca") {
        if (p.contains("variance_fraction"))
            return pca_fit_transform_fraction(data, p.at("variance_fraction").get<double>())
                .embedding.points;
        return pca_fit_transform(data, static_cast<size_t>(param_int(p, "p", 11)))
            .embedding.points;
    }
    if (r.method == "fastica") {
        return fast_ica(data, static_cast<size_t>(param_int(p, "components", 11)), seed,
                        static_cast<size_t>(param_int(p, "max_iter", 200)),
                        param_real(p, "tol", 1e-4))
            .embedding.points;
    }
    if (r.method == "kpca") {
        const double gamma =
            param_real(p, "gamma", 1.0 / static_cast<double>(data.n_cols()));
        const Kernel kernel =
            iequals(param_str(p, "kernel", "rbf"), "linear") ? Kernel::linear : Kernel::rbf;
        return kernel_pca(data, gamma, static_cast<size_t>(param_int(p, "p", 11)), kernel,
                          static_cast<size_t>(param_int(p, "max_n", 20000)))
            .points;
    }
    if (r.method == "tsne") {
        TsneOptions opt;
        opt.perplexity = param_real(p, "perplexity", opt.perplexity);
        opt.d_out = static_cast<size_t>(param_int(p, "d_out", 2));
        opt.iters = static_cast<size_t>(param_int(p, "iters", 1000));
        opt.learning_rate = param_real(p, "learning_rate", opt.learning_rate);
        opt.max_n = static_cast<size_t>(param_int(p, "max_n", 5000));
        return tsne(data, opt, seed).embedding.points;
    }
    if (r.method == "import") {
        if (!p.contains("path"))
            throw UsageError("import reducer needs a 'path' parameter");
        Embedding e = import_embedding_file(p.at("path").get<std::string>(), base_ids);
        if (!expansion) return e.points;
        Matrix expanded(expansion->size(), e.points.cols);
        for (size_t i = 0; i < expansion->size(); ++i) {
            const double* src = e.points.row((*expansion)[i]);
            std::copy(src, src + e.points.cols, expanded.row(i));
        }
        return expanded;
    }
    throw UsageError("unknown reducer '" + r.method +
                     "' (expected none, pca, fastica, kpca, tsne, or import)");
}

inline std::vector<int> cluster_for_cell(const ClustererSpec& c, const Matrix& reduced, size_t k,
                                         uint64_t seed) {
    using detail::param_int;
    using detail::param_real;
    const json& p = c.params;
    if (c.method == "kmeans") {
        return kmeans(reduced, k, seed, static_cast<size_t>(param_int(p, "n_init", 10)),
                      static_cast<size_t>(param_int(p, "max_iter", 300)),
                      param_real(p, "tol", 1e-4))
            .labels;
    }
    if (c.method == "agglomerative") {
        const Linkage linkage = parse_linkage(detail::param_str(p, "linkage", "ward"));
        return agglomerative(reduced, k, linkage,
                             static_cast<size_t>(param_int(p, "max_n", 8000)))
            .labels;
    }
    throw UsageError("unknown clusterer '" + c.method + "' (expected kmeans or agglomerative)");
}

// Table-1 style grid: rows grouped by clusterer and balance, reducers in
// config order inside each group. The cell seed depends only on the
// (clusterer, reducer) pair, so imbalanced and ROS variants share seeds.
inline std::vector<ClusterRun> run_benchmark(const FeatureMatrix& fm,
                                             const std::vector<int>& labels,
                                             const BenchmarkGrid& grid, uint64_t seed) {
    if (fm.n_rows() != labels.size())
        throw DataError("run_benchmark: labels length does not match row count");
    for (const auto& b : grid.balances)
        if (b != "imbalanced" && b != "ros")
            throw UsageError("unknown balance mode '" + b + "' (expected imbalanced or ros)");

    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    std::vector<bool> seen(static_cast<size_t>(max_label) + 1, false);
    size_t k = 0;
    for (int l : labels) {
        if (l < 0) throw DataError("run_benchmark: negative label");
        if (!seen[l]) {
            seen[l] = true;
            ++k;
        }
    }

    bool needs_ros = false;
    for (const auto& b : grid.balances) needs_ros |= b == "ros";
    std::optional<OversampleResult> ros;
    if (needs_ros && !grid.clusterers.empty() && !grid.reducers.empty())
        ros = random_oversample(fm, labels, Rng::derive(seed, 999983));

    std::vector<ClusterRun> runs;
    for (size_t ci = 0; ci < grid.clusterers.size(); ++ci) {
        const ClustererSpec& cl = grid.clusterers[ci];
        for (const auto& balance : grid.balances) {
            const bool resampled = balance == "ros";
            const FeatureMatrix& data = resampled ? ros->features : fm;
            const std::vector<int>& truth = resampled ? ros->labels : labels;
            const std::vector<size_t>* expansion = resampled ? &ros->source_rows : nullptr;
            for (size_t ri = 0; ri < grid.reducers.size(); ++ri) {
                const ReducerSpec& red = grid.reducers[ri];
                const uint64_t cell_seed =
                    Rng::derive(seed, ci * grid.reducers.size() + ri);
                ClusterRun run;
                run.clusterer = cl.label();
                run.reducer = red.label();
                run.balance = balance;
                run.group = run.clusterer + "/" + balance;
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    Matrix reduced = reduce_for_cell(red, data, fm.row_ids, expansion,
                                                     Rng::derive(cell_seed, 1));
                    std::vector<int> pred =
                        cluster_for_cell(cl, reduced, k, Rng::derive(cell_seed, 2));
                    run.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    run.scores = external_metrics(truth, pred);
                    run.silhouette = silhouette(reduced, pred, grid.silhouette_subsample,
                                                Rng::derive(cell_seed, 3));
                } catch (const Error& e) {
                    run.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    run.failed = true;
                    run.error = e.what();
                }
                runs.push_back(std::move(run));
            }
        }
    }
    return runs;
}

inline void benchmark_csv(std::ostream& out, const std::vector<ClusterRun>& runs) {
    out << "group,reducer,clusterer,balance,time_s,homo,compl,v_meas,ari,ami,silhouette\n";
    for (const auto& run : runs) {
        auto cell = [&](double v) {
            return run.failed || !std::isfinite(v) ? std::string() : fmt_fixed(v, 6);
        };
        write_csv_row(out, {run.group, run.reducer, run.clusterer, run.balance,
                            fmt_fixed(run.wall_seconds, 3), cell(run.scores.homogeneity),
                            cell(run.scores.completeness), cell(run.scores.v_measure),
                            cell(run.scores.adjusted_rand),
                            cell(run.scores.adjusted_mutual_info), cell(run.silhouette)});
    }
}

// JSON twin of the CSV; timings stay out so repeat runs are byte-identical
inline json benchmark_json(const std::vector<ClusterRun>& runs) {
    json arr = json::array();
    for (const auto& run : runs) {
        json row{{"group", run.group},
                 {"reducer", run.reducer},
                 {"clusterer", run.clusterer},
                 {"balance", run.balance},
                 {"failed", run.failed}};
        if (run.failed) {
            row["error"] = run.error;
        } else {
            row["homogeneity"] = run.scores.homogeneity;
            row["completeness"] = run.scores.completeness;
            row["v_measure"] = run.scores.v_measure;
            row["rand_index"] = run.scores.rand_index;
            row["adjusted_rand"] = run.scores.adjusted_rand;
            row["adjusted_mutual_info"] = run.scores.adjusted_mutual_info;
            row["silhouette"] = run.silhouette;
        }
        arr.push_back(std::move(row));
    }
    return arr;
}

}  // namespace terpscape
