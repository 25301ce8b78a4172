#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "terpscape/classify/cv.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct ParamDist {
    enum class Kind { int_uniform, real_uniform, log_uniform, choice, optional_int };
    Kind kind = Kind::int_uniform;
    long lo_i = 0, hi_i = 0;  // inclusive bounds
    double lo_r = 0.0, hi_r = 0.0;
    std::vector<json> choices;

    static ParamDist ints(long lo, long hi) {
        if (hi < lo) throw UsageError("search space: empty integer range");
        ParamDist d;
        d.kind = Kind::int_uniform;
        d.lo_i = lo;
        d.hi_i = hi;
        return d;
    }
    static ParamDist reals(double lo, double hi) {
        if (!(hi > lo)) throw UsageError("search space: empty real range");
        ParamDist d;
        d.kind = Kind::real_uniform;
        d.lo_r = lo;
        d.hi_r = hi;
        return d;
    }
    static ParamDist log_reals(double lo, double hi) {
        if (!(lo > 0.0) || !(hi > lo)) throw UsageError("search space: bad log-uniform range");
        ParamDist d;
        d.kind = Kind::log_uniform;
        d.lo_r = lo;
        d.hi_r = hi;
        return d;
    }
    static ParamDist pick(std::vector<json> options) {
        if (options.empty()) throw UsageError("search space: empty choice list");
        ParamDist d;
        d.kind = Kind::choice;
        d.choices = std::move(options);
        return d;
    }
    // null is one extra equally likely option alongside lo..hi
    static ParamDist optional_ints(long lo, long hi) {
        if (hi < lo) throw UsageError("search space: empty integer range");
        ParamDist d;
        d.kind = Kind::optional_int;
        d.lo_i = lo;
        d.hi_i = hi;
        return d;
    }

    json sample(Rng& rng) const {
        switch (kind) {
            case Kind::int_uniform:
                return lo_i + static_cast<long>(rng.below(static_cast<uint64_t>(hi_i - lo_i + 1)));
            case Kind::real_uniform:
                return rng.uniform(lo_r, hi_r);
            case Kind::log_uniform:
                return std::exp(rng.uniform(std::log(lo_r), std::log(hi_r)));
            case Kind::choice:
                return choices[rng.below(choices.size())];
            case Kind::optional_int: {
                const uint64_t r = rng.below(static_cast<uint64_t>(hi_i - lo_i + 2));
                if (r == 0) return nullptr;
                return lo_i + static_cast<long>(r - 1);
            }
        }
        return nullptr;
    }
};

// map keeps keys ordered, which fixes the sampling order
using ParamSpace = std::map<std::string, ParamDist>;

inline ParamSpace default_search_space(const std::string& algorithm) {
    if (algorithm == "gbdt") {
        return {{"learning_rate", ParamDist::log_reals(0.01, 0.3)},
                {"leaves", ParamDist::ints(15, 255)},
                {"min_samples_leaf", ParamDist::ints(5, 50)},
                {"rounds", ParamDist::ints(50, 500)}};
    }
    if (algorithm == "random_forest") {
        return {{"features", ParamDist::pick({"sqrt", "log2", "all"})},
                {"max_depth", ParamDist::optional_ints(4, 32)},
                {"trees", ParamDist::ints(50, 500)}};
    }
    throw UsageError("no declared search space for algorithm '" + algorithm + "'");
}

struct SearchCandidate {
    json params;
    double score = std::numeric_limits<double>::quiet_NaN();  // mean CV weighted F1
    bool failed = false;
    std::string error;
};

struct SearchResult {
    ModelSpec best;
    double best_score = 0.0;
    size_t best_index = 0;
    std::vector<SearchCandidate> trace;
};

inline SearchResult randomized_search(const std::string& algorithm, const ParamSpace& space,
                                      const Matrix& x, const std::vector<int>& y,
                                      size_t n_classes, size_t n_iter, size_t folds,
                                      uint64_t seed,
                                      const std::vector<std::string>& class_names = {}) {
    if (n_iter < 1) throw UsageError("randomized search: n_iter must be at least 1");
    if (space.empty()) throw UsageError("randomized search: empty parameter space");

    const uint64_t fold_seed = Rng::derive(seed, 777);  // same folds for every candidate
    SearchResult result;
    result.trace.resize(n_iter);
    parallel_for(n_iter, [&](size_t iter) {
        Rng rng(Rng::derive(seed, iter));
        ModelSpec spec;
        spec.algorithm = algorithm;
        for (const auto& [name, dist] : space) spec.params[name] = dist.sample(rng);
        spec.seed = Rng::derive(seed, 1000 + iter);
        SearchCandidate& cand = result.trace[iter];
        cand.params = spec.params;
        try {
            CvReport report =
                cross_validate(spec, x, y, n_classes, folds, fold_seed, class_names);
            cand.score = report.mean.weighted_f1;
        } catch (const Error& e) {
            cand.failed = true;
            cand.error = e.what();
        }
    });

    bool found = false;
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n_iter; ++i) {
        const SearchCandidate& cand = result.trace[i];
        if (cand.failed || std::isnan(cand.score)) continue;
        if (cand.score > best) {  // strict: ties keep the earliest candidate
            best = cand.score;
            result.best_index = i;
            found = true;
        }
    }
    if (!found) {
        std::string causes;
        for (size_t i = 0; i < n_iter; ++i) {
            causes += "\n  candidate " + std::to_string(i) + ": ";
            causes += result.trace[i].failed ? result.trace[i].error : "score was NaN";
        }
        throw Error("randomized search: every candidate failed to fit" + causes);
    }
    result.best_score = best;
    result.best.algorithm = algorithm;
    result.best.params = result.trace[result.best_index].params;
    result.best.seed = Rng::derive(seed, 1000 + result.best_index);
    return result;
}

}  // namespace terpscape
