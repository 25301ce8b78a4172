#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "terpscape/classify/model.hpp"
#include "terpscape/cluster/benchmark.hpp"
#include "terpscape/common.hpp"
#include "terpscape/dataset.hpp"
#include "terpscape/profile.hpp"

namespace terpscape {

namespace detail {

inline bool is_integer_token(const std::string& t) {
    size_t i = (t.size() > 1 && (t[0] == '+' || t[0] == '-')) ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
}

inline json parse_scalar_token(const std::string& raw) {
    const std::string t = trim(raw);
    if (t == "true") return true;
    if (t == "false") return false;
    if (is_integer_token(t)) return std::stoll(t);
    double v;
    if (try_parse_double(t, v)) return v;
    return t;
}

// split on sep, but not inside double quotes
inline std::vector<std::string> split_outside_quotes(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : s) {
        if (ch == '"') quoted = !quoted;
        if (ch == sep && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline json parse_toml_value(const std::string& raw, int lineno) {
    const std::string t = trim(raw);
    if (t.empty()) throw UsageError("config: missing value at line " + std::to_string(lineno));
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            throw UsageError("config: unterminated string at line " + std::to_string(lineno));
        return t.substr(1, t.size() - 2);
    }
    if (t.front() == '[') {
        if (t.back() != ']')
            throw UsageError("config: unterminated array at line " + std::to_string(lineno));
        json arr = json::array();
        const std::string body = trim(t.substr(1, t.size() - 2));
        if (body.empty()) return arr;
        for (const auto& item : split_outside_quotes(body, ','))
            arr.push_back(parse_toml_value(item, lineno));
        return arr;
    }
    return parse_scalar_token(t);
}

inline std::string strip_toml_comment(const std::string& line) {
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

}  // namespace detail

// Minimal TOML-style reader: [section] headers, key = value lines, one-line
// arrays, quoted or bare scalars, # comments.
inline json parse_toml_subset(std::istream& in) {
    json root = json::object();
    json* cur = &root;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(detail::strip_toml_comment(line));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3)
                throw UsageError("config: bad section header at line " + std::to_string(lineno));
            const std::string name = trim(text.substr(1, text.size() - 2));
            if (name.empty())
                throw UsageError("config: empty section name at line " + std::to_string(lineno));
            if (!root.contains(name)) root[name] = json::object();
            cur = &root[name];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw UsageError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(text.substr(0, eq));
        if (key.empty())
            throw UsageError("config: empty key at line " + std::to_string(lineno));
        (*cur)[key] = detail::parse_toml_value(text.substr(eq + 1), lineno);
    }
    return root;
}

// "method" or "method:key=value,key=value", e.g. "pca:p=11"
inline std::pair<std::string, json> parse_spec_string(const std::string& s) {
    const auto colon = s.find(':');
    std::string method = trim(s.substr(0, colon));
    if (method.empty()) throw UsageError("empty method in spec '" + s + "'");
    json params = json::object();
    if (colon != std::string::npos) {
        for (const auto& kv : detail::split_outside_quotes(s.substr(colon + 1), ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw UsageError("bad parameter '" + trim(kv) + "' in spec '" + s +
                                 "' (expected key=value)");
            std::string key = trim(kv.substr(0, eq));
            if (key.empty()) throw UsageError("empty parameter name in spec '" + s + "'");
            params[key] = detail::parse_scalar_token(kv.substr(eq + 1));
        }
    }
    return {std::move(method), std::move(params)};
}

inline ModelSpec parse_model_spec(const std::string& s) {
    auto [method, params] = parse_spec_string(s);
    ModelSpec spec;
    spec.algorithm = std::move(method);
    spec.params = std::move(params);
    return spec;
}

inline ReducerSpec parse_reducer_spec(const std::string& s) {
    auto [method, params] = parse_spec_string(s);
    return ReducerSpec{std::move(method), std::move(params)};
}

inline ClustererSpec parse_clusterer_spec(const std::string& s) {
    auto [method, params] = parse_spec_string(s);
    return ClustererSpec{std::move(method), std::move(params)};
}

struct RunConfig {
    std::string input;
    std::string out_dir = "out";
    uint64_t seed = 42;
    size_t workers = 1;

    // ingest
    std::string schema_path;
    SchemaConfig schema;
    std::string superclass = "Lipids and lipid-like molecules";
    std::vector<Subclass> ingest_subclasses;  // empty = keep all nine
    double drop_threshold = 0.70;
    bool expand = true;

    // profile
    ProfileOptions profile;

    // cluster
    std::vector<Subclass> cluster_subclasses{Subclass::Triterpenoids, Subclass::Diterpenoids,
                                             Subclass::Monoterpenoids};
    BenchmarkGrid grid;

    // classify
    std::vector<Subclass> classify_subclasses{
        Subclass::Monoterpenoids,  Subclass::Sesquiterpenoids, Subclass::Diterpenoids,
        Subclass::Triterpenoids,   Subclass::TerpeneGlycosides, Subclass::TerpeneLactones};
    std::vector<ModelSpec> models;
    size_t folds = 5;
    double train_ratio = 0.75;
    bool oversample = true;
    std::string search_algorithm;  // empty = no hyperparameter search
    size_t search_iters = 10;

    RunConfig() {
        grid.reducers = {ReducerSpec{"none", json::object()},
                         ReducerSpec{"pca", json{{"p", 11}}}};
        grid.clusterers = {ClustererSpec{"kmeans", json::object()},
                           ClustererSpec{"agglomerative", json::object()}};
        for (const char* name : {"knn", "gaussian_nb", "random_forest", "gbdt", "mlp"}) {
            ModelSpec spec;
            spec.algorithm = name;
            models.push_back(std::move(spec));
        }
    }
};

namespace detail {

inline std::vector<Subclass> subclass_list(const json& arr, const char* where) {
    std::vector<Subclass> out;
    for (const auto& item : arr) {
        const std::string name = item.get<std::string>();
        auto sc = parse_subclass(name);
        if (!sc)
            throw UsageError(std::string("config: unknown subclass '") + name + "' in " + where);
        out.push_back(*sc);
    }
    return out;
}

template <typename Spec, typename Parse>
inline std::vector<Spec> spec_list(const json& arr, Parse parse) {
    std::vector<Spec> out;
    for (const auto& item : arr) {
        if (item.is_string()) {
            out.push_back(parse(item.get<std::string>()));
        } else {
            Spec s;
            s.method = item.at("method").get<std::string>();
            if (item.contains("params")) s.params = item.at("params");
            out.push_back(std::move(s));
        }
    }
    return out;
}

inline void read_clip(const json& section, const char* key,
                      std::optional<std::pair<double, double>>& clip) {
    if (!section.contains(key)) return;
    const json& v = section.at(key);
    if (v.is_null()) {
        clip.reset();
        return;
    }
    if (!v.is_array() || v.size() != 2)
        throw UsageError(std::string("config: ") + key + " must be [lo, hi] or null");
    clip = std::make_pair(v.at(0).get<double>(), v.at(1).get<double>());
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("input")) c.input = j.at("input").get<std::string>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<size_t>();

    if (j.contains("ingest")) {
        const json& s = j.at("ingest");
        if (s.contains("schema")) c.schema_path = s.at("schema").get<std::string>();
        if (s.contains("superclass")) c.superclass = s.at("superclass").get<std::string>();
        if (s.contains("subclasses"))
            c.ingest_subclasses = detail::subclass_list(s.at("subclasses"), "[ingest]");
        if (s.contains("drop_threshold"))
            c.drop_threshold = s.at("drop_threshold").get<double>();
        if (s.contains("expand")) c.expand = s.at("expand").get<bool>();
    }
    if (j.contains("profile")) {
        const json& s = j.at("profile");
        if (s.contains("mw_bins")) c.profile.mw.bins = s.at("mw_bins").get<int>();
        if (s.contains("logp_bins")) c.profile.log_p.bins = s.at("logp_bins").get<int>();
        if (s.contains("npl_bins")) c.profile.np_likeness.bins = s.at("npl_bins").get<int>();
        detail::read_clip(s, "mw_clip", c.profile.mw.clip);
        detail::read_clip(s, "logp_clip", c.profile.log_p.clip);
        detail::read_clip(s, "npl_clip", c.profile.np_likeness.clip);
    }
    if (j.contains("cluster")) {
        const json& s = j.at("cluster");
        if (s.contains("subclasses"))
            c.cluster_subclasses = detail::subclass_list(s.at("subclasses"), "[cluster]");
        if (s.contains("reducers"))
            c.grid.reducers =
                detail::spec_list<ReducerSpec>(s.at("reducers"), parse_reducer_spec);
        if (s.contains("clusterers"))
            c.grid.clusterers =
                detail::spec_list<ClustererSpec>(s.at("clusterers"), parse_clusterer_spec);
        if (s.contains("balances")) {
            c.grid.balances.clear();
            for (const auto& b : s.at("balances"))
                c.grid.balances.push_back(b.get<std::string>());
        }
        if (s.contains("silhouette_subsample"))
            c.grid.silhouette_subsample = s.at("silhouette_subsample").get<size_t>();
    }
    if (j.contains("classify")) {
        const json& s = j.at("classify");
        if (s.contains("subclasses"))
            c.classify_subclasses = detail::subclass_list(s.at("subclasses"), "[classify]");
        if (s.contains("models")) {
            c.models.clear();
            for (const auto& item : s.at("models")) {
                if (item.is_string()) {
                    c.models.push_back(parse_model_spec(item.get<std::string>()));
                } else {
                    ModelSpec spec;
                    spec.algorithm = item.at("algorithm").get<std::string>();
                    if (item.contains("params")) spec.params = item.at("params");
                    c.models.push_back(std::move(spec));
                }
            }
        }
        if (s.contains("folds")) c.folds = s.at("folds").get<size_t>();
        if (s.contains("train_ratio")) c.train_ratio = s.at("train_ratio").get<double>();
        if (s.contains("oversample")) c.oversample = s.at("oversample").get<bool>();
        if (s.contains("search")) c.search_algorithm = s.at("search").get<std::string>();
        if (s.contains("search_iters")) c.search_iters = s.at("search_iters").get<size_t>();
    }
    return c;
}

inline json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    char first = 0;
    while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
    }
    in.clear();
    in.seekg(0);
    if (first == '{') {
        try {
            return json::parse(in);
        } catch (const json::parse_error& e) {
            throw UsageError(std::string("config: ") + e.what());
        }
    }
    return parse_toml_subset(in);
}

// Canonical echo of everything that affects results; hashed into artifacts.
inline json config_to_json(const RunConfig& c) {
    auto names = [](const std::vector<Subclass>& list) {
        json arr = json::array();
        for (Subclass sc : list) arr.push_back(subclass_names()[static_cast<size_t>(sc)]);
        return arr;
    };
    json grid_reducers = json::array();
    for (const auto& r : c.grid.reducers)
        grid_reducers.push_back(json{{"method", r.method}, {"params", r.params}});
    json grid_clusterers = json::array();
    for (const auto& cl : c.grid.clusterers)
        grid_clusterers.push_back(json{{"method", cl.method}, {"params", cl.params}});
    json model_list = json::array();
    for (const auto& m : c.models)
        model_list.push_back(json{{"algorithm", m.algorithm}, {"params", m.params}});
    auto clip_json = [](const std::optional<std::pair<double, double>>& v) -> json {
        if (!v) return nullptr;
        return json::array({v->first, v->second});
    };

    json out{
        {"input", c.input},
        {"out", c.out_dir},
        {"seed", c.seed},
        {"ingest",
         {{"schema", c.schema_path},
          {"superclass", c.superclass},
          {"subclasses", names(c.ingest_subclasses)},
          {"drop_threshold", c.drop_threshold},
          {"expand", c.expand}}},
        {"profile",
         {{"mw_bins", c.profile.mw.bins},
          {"mw_clip", clip_json(c.profile.mw.clip)},
          {"logp_bins", c.profile.log_p.bins},
          {"logp_clip", clip_json(c.profile.log_p.clip)},
          {"npl_bins", c.profile.np_likeness.bins},
          {"npl_clip", clip_json(c.profile.np_likeness.clip)}}},
        {"cluster",
         {{"subclasses", names(c.cluster_subclasses)},
          {"reducers", grid_reducers},
          {"clusterers", grid_clusterers},
          {"balances", c.grid.balances},
          {"silhouette_subsample", c.grid.silhouette_subsample}}},
        {"classify",
         {{"subclasses", names(c.classify_subclasses)},
          {"models", model_list},
          {"folds", c.folds},
          {"train_ratio", c.train_ratio},
          {"oversample", c.oversample},
          {"search", c.search_algorithm},
          {"search_iters", c.search_iters}}}};
    return out;
}

// Hash of the analysis-relevant configuration. File locations (input, out)
// are excluded: they say where data lives, not what gets computed, and the
// dataset itself is pinned separately by dataset_hash.
inline std::string config_hash(const RunConfig& c) {
    json j = config_to_json(c);
    j.erase("input");
    j.erase("out");
    return hex64(fnv1a64(j.dump()));
}

}  // namespace terpscape
