#include <CLI11.hpp>

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>

#include <terpscape/terpscape.hpp>

namespace fs = std::filesystem;
using namespace terpscape;

namespace {

struct CliFlags {
    std::string config_path;
    std::string input;
    std::string out;
    uint64_t seed = 0;
    bool seed_given = false;
    int workers = 0;
    bool workers_given = false;
};

void add_common_options(CLI::App* sub, CliFlags& f) {
    sub->add_option("--config", f.config_path, "config file (TOML-style or JSON)");
    sub->add_option("--input", f.input, "input path (overrides config)");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "seed (overrides TERPSCAPE_SEED and config)")
        ->each([&f](const std::string&) { f.seed_given = true; });
    sub->add_option("--workers", f.workers, "worker threads (default 1)")
        ->each([&f](const std::string&) { f.workers_given = true; });
}

// one invocation owns the output directory
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
        std::FILE* f = std::fopen(path_.string().c_str(), "wx");
        if (!f)
            throw UsageError("output directory '" + dir.string() +
                             "' is locked by another run (remove " + path_.string() +
                             " if stale)");
        std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
        std::fclose(f);
    }
    ~DirLock() { std::remove(path_.string().c_str()); }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    fs::path path_;
};

std::string iso_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
    return buf;
}

void append_run_log(const fs::path& out_dir, const std::string& command, uint64_t seed,
                    double wall_seconds, const std::vector<std::string>& notes) {
    std::ofstream log(out_dir / "run.log", std::ios::app);
    log << iso_now() << " " << command << " seed=" << seed << " wall=" << fmt_fixed(wall_seconds, 3)
        << "s\n";
    for (const auto& n : notes) log << "  " << n << "\n";
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_json_artifact(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a64(ss.str()));
}

json load_json_artifact(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing upstream artifact: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// seed + provenance hashes go first in every JSON artifact
json wrap_artifact(const RunConfig& cfg, const std::string& dataset_hash, const json& payload) {
    json j;
    j["seed"] = cfg.seed;
    j["config_hash"] = config_hash(cfg);
    if (!dataset_hash.empty()) j["dataset_hash"] = dataset_hash;
    for (const auto& [key, value] : payload.items()) j[key] = value;
    return j;
}

std::vector<Subclass> all_subclasses() {
    std::vector<Subclass> out;
    for (size_t i = 0; i < kSubclassCount; ++i) out.push_back(static_cast<Subclass>(i));
    return out;
}

void print_subclass_counts(const RecordSet& rs, std::ostream& os) {
    const auto counts = subclass_counts(rs);
    size_t width = 0;
    for (const auto& name : subclass_names()) width = std::max(width, name.size());
    os << "subclass counts (" << rs.records.size() << " records):\n";
    for (size_t i = 0; i < kSubclassCount; ++i) {
        os << "  " << subclass_names()[i]
           << std::string(width - subclass_names()[i].size() + 2, ' ') << counts[i] << "\n";
    }
}

fs::path canonical_path(const RunConfig& cfg, const CliFlags& flags) {
    if (!flags.input.empty()) return flags.input;
    return fs::path(cfg.out_dir) / "canonical.csv";
}

RecordSet load_canonical(const fs::path& path) {
    if (!fs::exists(path))
        throw DataError("missing upstream artifact: " + path.string() +
                        " (run `terpscape ingest` first)");
    return parse_dataset_file(path.string(), canonical_schema());
}

RecordSet filter_canonical(const RecordSet& rs, const std::vector<Subclass>& subclasses) {
    return filter_taxonomy(rs, "", subclasses);
}

// --- commands -------------------------------------------------------------

int cmd_ingest(const RunConfig& cfg, const CliFlags& flags) {
    const std::string input = flags.input.empty() ? cfg.input : flags.input;
    if (input.empty()) throw UsageError("ingest: no input file (use --input or config `input`)");

    RecordSet rs = parse_dataset_file(input, cfg.schema);
    const auto wanted = cfg.ingest_subclasses.empty() ? all_subclasses() : cfg.ingest_subclasses;
    rs = filter_taxonomy(rs, cfg.superclass, wanted);
    DropResult dropped = drop_sparse_columns(rs, cfg.drop_threshold);
    RecordSet out = cfg.expand ? expand_categoricals(dropped.rs) : std::move(dropped.rs);

    const fs::path out_dir(cfg.out_dir);
    {
        std::ofstream csv(out_dir / "canonical.csv", std::ios::binary);
        if (!csv) throw Error("cannot write " + (out_dir / "canonical.csv").string());
        write_canonical_csv(out, csv);
    }
    const std::string dhash = file_hash(out_dir / "canonical.csv");
    write_json_artifact(out_dir / "ingest_sidecar.json",
                        wrap_artifact(cfg, dhash, ingest_sidecar(out, cfg.schema, dropped.dropped)));
    print_subclass_counts(out, std::cout);
    return 0;
}

int cmd_profile(const RunConfig& cfg, const CliFlags& flags) {
    const fs::path source = canonical_path(cfg, flags);
    RecordSet rs = load_canonical(source);
    const std::string dhash = file_hash(source);

    ProfileReport rep = profile_report(rs, cfg.profile);
    const fs::path out_dir(cfg.out_dir);
    write_json_artifact(out_dir / "profile.json", wrap_artifact(cfg, dhash, profile_json(rep)));
    {
        std::ostringstream txt;
        profile_text(rep, txt);
        write_text_file(out_dir / "profile.txt", txt.str());
        std::cout << txt.str();
    }
    {
        std::ostringstream csv;
        profile_histograms_csv(rep, csv);
        write_text_file(out_dir / "profile_histograms.csv", csv.str());
    }
    return 0;
}

int cmd_cluster(const RunConfig& cfg, const CliFlags& flags) {
    const fs::path source = canonical_path(cfg, flags);
    RecordSet rs = filter_canonical(load_canonical(source), cfg.cluster_subclasses);
    if (rs.records.empty()) throw DataError("cluster: no records left after the subclass filter");
    const std::string dhash = file_hash(source);

    LabeledData data = to_labeled_data(rs);
    SplitDataset prepped = preprocess_full(data.features, data.labels, cfg.seed);
    std::vector<ClusterRun> runs =
        run_benchmark(prepped.train, prepped.train_labels, cfg.grid, cfg.seed);

    const fs::path out_dir(cfg.out_dir);
    {
        std::ostringstream csv;
        benchmark_csv(csv, runs);
        write_text_file(out_dir / "cluster_benchmark.csv", csv.str());
    }
    json payload{{"k", data.class_names.size()},
                 {"subclasses", json::array()},
                 {"rows", data.features.n_rows()},
                 {"runs", benchmark_json(runs)}};
    for (const auto& name : data.class_names) payload["subclasses"].push_back(name);
    write_json_artifact(out_dir / "cluster_benchmark.json", wrap_artifact(cfg, dhash, payload));

    std::cout << "benchmark (" << runs.size() << " cells):\n";
    for (const auto& run : runs) {
        std::cout << "  " << run.group << " + " << run.reducer << ": ";
        if (run.failed)
            std::cout << "failed (" << run.error << ")\n";
        else
            std::cout << "v_meas=" << fmt_fixed(run.scores.v_measure, 3)
                      << " ari=" << fmt_fixed(run.scores.adjusted_rand, 3)
                      << " silhouette=" << fmt_fixed(run.silhouette, 3) << "\n";
    }
    return 0;
}

json metrics_json(const ClassMetrics& m) {
    return json{{"weighted_precision", m.weighted_precision},
                {"weighted_recall", m.weighted_recall},
                {"weighted_f1", m.weighted_f1},
                {"balanced_accuracy", m.balanced_accuracy},
                {"ovo_auc", m.ovo_auc},
                {"accuracy", m.accuracy}};
}

json summary_json(const MetricSummary& s) {
    return json{{"weighted_precision", s.weighted_precision},
                {"weighted_recall", s.weighted_recall},
                {"weighted_f1", s.weighted_f1},
                {"balanced_accuracy", s.balanced_accuracy},
                {"ovo_auc", s.ovo_auc},
                {"accuracy", s.accuracy}};
}

json confusion_json(const std::vector<std::vector<size_t>>& confusion) {
    json rows = json::array();
    for (const auto& row : confusion) {
        json r = json::array();
        for (size_t v : row) r.push_back(v);
        rows.push_back(std::move(r));
    }
    return rows;
}

int cmd_classify(const RunConfig& cfg, const CliFlags& flags) {
    const fs::path source = canonical_path(cfg, flags);
    RecordSet rs = filter_canonical(load_canonical(source), cfg.classify_subclasses);
    if (rs.records.empty()) throw DataError("classify: no records left after the subclass filter");
    const std::string dhash = file_hash(source);

    LabeledData data = to_labeled_data(rs);
    const size_t n_classes = data.class_names.size();
    SplitDataset split = fit_apply_scaler(fit_apply_imputer(
        train_test_split(data.features, data.labels, cfg.train_ratio, cfg.seed)));

    const Matrix* train_x = &split.train.values;
    const std::vector<int>* train_y = &split.train_labels;
    OversampleResult ros;
    if (cfg.oversample) {
        ros = random_oversample(split.train, split.train_labels, Rng::derive(cfg.seed, 555));
        train_x = &ros.features.values;
        train_y = &ros.labels;
    }

    const uint64_t fold_seed = Rng::derive(cfg.seed, 7);
    const fs::path out_dir(cfg.out_dir);
    json models = json::array();
    std::vector<std::string> log_notes;
    for (size_t i = 0; i < cfg.models.size(); ++i) {
        ModelSpec spec = cfg.models[i];
        spec.seed = Rng::derive(cfg.seed, 100 + i);
        CvReport cv = cross_validate(spec, *train_x, *train_y, n_classes, cfg.folds, fold_seed,
                                     data.class_names);

        auto model = fit_model(spec, *train_x, *train_y, n_classes);
        Matrix scores = model->predict_scores(split.test.values);
        std::vector<int> pred = model->predict(split.test.values);
        ClassMetrics test = classification_metrics(split.test_labels, pred, scores, n_classes);

        json folds = json::array();
        for (const auto& fold : cv.folds) folds.push_back(metrics_json(fold.metrics));
        json block{{"algorithm", spec.algorithm},
                   {"params", spec.params},
                   {"cv",
                    {{"folds", folds},
                     {"mean", summary_json(cv.mean)},
                     {"std", summary_json(cv.stddev)},
                     {"confusion", confusion_json(cv.confusion)}}},
                   {"test", metrics_json(test)}};
        block["test"]["confusion"] = confusion_json(test.confusion);
        json warnings = json::array();
        for (const auto& w : cv.warnings) warnings.push_back(w);
        for (const auto& w : test.warnings) warnings.push_back(w);
        block["warnings"] = warnings;
        models.push_back(std::move(block));

        std::ostringstream csv;
        confusion_to_csv(csv, test.confusion, data.class_names);
        write_text_file(out_dir / ("confusion_" + spec.algorithm + ".csv"), csv.str());
        log_notes.push_back(spec.algorithm + " cv_wall=" + fmt_fixed(cv.wall_seconds, 3) + "s");

        std::cout << "  " << spec.algorithm
                  << ": cv weighted F1 " << fmt_fixed(cv.mean.weighted_f1, 3) << " ± "
                  << fmt_fixed(cv.stddev.weighted_f1, 3) << ", test weighted F1 "
                  << fmt_fixed(test.weighted_f1, 3) << ", balanced acc "
                  << fmt_fixed(test.balanced_accuracy, 3) << "\n";
    }

    json payload{{"class_names", json::array()},
                 {"folds", cfg.folds},
                 {"train_rows", split.train.n_rows()},
                 {"test_rows", split.test.n_rows()},
                 {"oversampled_train_rows", train_x->rows},
                 {"models", models}};
    for (const auto& name : data.class_names) payload["class_names"].push_back(name);

    if (!cfg.search_algorithm.empty()) {
        SearchResult sr = randomized_search(cfg.search_algorithm,
                                            default_search_space(cfg.search_algorithm), *train_x,
                                            *train_y, n_classes, cfg.search_iters, cfg.folds,
                                            Rng::derive(cfg.seed, 40), data.class_names);
        json trace = json::array();
        for (const auto& cand : sr.trace) {
            json c{{"params", cand.params}, {"failed", cand.failed}};
            if (cand.failed)
                c["error"] = cand.error;
            else
                c["score"] = cand.score;
            trace.push_back(std::move(c));
        }
        payload["search"] = json{{"algorithm", cfg.search_algorithm},
                                 {"best_params", sr.best.params},
                                 {"best_score", sr.best_score},
                                 {"best_index", sr.best_index},
                                 {"trace", trace}};
        std::cout << "  search(" << cfg.search_algorithm << "): best cv weighted F1 "
                  << fmt_fixed(sr.best_score, 3) << "\n";
    }

    write_json_artifact(out_dir / "classify_report.json", wrap_artifact(cfg, dhash, payload));
    append_run_log(out_dir, "classify-models", cfg.seed, 0.0, log_notes);
    return 0;
}

int cmd_report(const RunConfig& cfg, const CliFlags& flags) {
    const fs::path out_dir(cfg.out_dir);
    const fs::path source = canonical_path(cfg, flags);
    if (!fs::exists(source))
        throw DataError("missing upstream artifact: " + source.string() +
                        " (run `terpscape ingest` first)");
    const std::string dhash = file_hash(source);

    json bundle;
    bundle["seed"] = cfg.seed;
    bundle["config_hash"] = config_hash(cfg);
    bundle["dataset_hash"] = dhash;

    struct Part {
        const char* key;
        const char* file;
        bool required;
    };
    const Part parts[] = {{"ingest", "ingest_sidecar.json", true},
                          {"profile", "profile.json", false},
                          {"cluster", "cluster_benchmark.json", false},
                          {"classify", "classify_report.json", false}};
    bool any_optional = false;
    for (const Part& part : parts) {
        const fs::path path = out_dir / part.file;
        if (!fs::exists(path)) {
            if (part.required)
                throw DataError("missing upstream artifact: " + path.string() +
                                " (run `terpscape ingest` first)");
            continue;
        }
        json artifact = load_json_artifact(path);
        if (artifact.value("dataset_hash", "") != dhash)
            throw DataError("stale artifact: " + path.string() +
                            " was produced from a different canonical dataset; rerun it");
        bundle[part.key] = std::move(artifact);
        any_optional |= !part.required;
    }
    if (!any_optional)
        throw DataError("missing upstream artifact: " + (out_dir / "profile.json").string() +
                        " (run at least one of profile/cluster/classify before report)");

    write_json_artifact(out_dir / "report_bundle.json", bundle);

    std::ostringstream sum;
    sum << "run summary (seed " << cfg.seed << ", dataset " << dhash << ")\n";
    if (bundle.contains("ingest")) {
        const json& g = bundle["ingest"];
        sum << "\nrecords: " << g.value("record_count", 0) << "\n";
        if (g.contains("subclass_counts")) {
            for (const auto& [name, count] : g["subclass_counts"].items())
                sum << "  " << name << ": " << count.get<size_t>() << "\n";
        }
    }
    if (bundle.contains("profile")) {
        const json& p = bundle["profile"]["overall"];
        sum << "\nprofile (all records):\n";
        if (p.contains("molecular_weight"))
            sum << "  molecular weight mean "
                << fmt_fixed(p["molecular_weight"]["mean"].get<double>(), 1) << " ["
                << fmt_fixed(p["molecular_weight"]["min"].get<double>(), 1) << ", "
                << fmt_fixed(p["molecular_weight"]["max"].get<double>(), 1) << "]\n";
        if (p.contains("np_likeness"))
            sum << "  np-likeness mean " << fmt_fixed(p["np_likeness"]["mean"].get<double>(), 2)
                << "\n";
        const json& lip = p["lipinski"];
        sum << "  lipinski: hba_le_10 " << fmt_fixed(lip["hba_le_10_share"].get<double>() * 100, 1)
            << "%, hbd_le_5 " << fmt_fixed(lip["hbd_le_5_share"].get<double>() * 100, 1) << "%\n";
        sum << "  violations:";
        double total_share = 0.0;
        for (size_t v = 0; v < lip["shares"].size(); ++v) {
            const double share = lip["shares"][v].get<double>() * 100.0;
            total_share += share;
            sum << " " << v << ":" << fmt_fixed(share, 1) << "%";
        }
        sum << " (sum " << fmt_fixed(total_share, 1) << "%)\n";
    }
    if (bundle.contains("cluster")) {
        sum << "\nclustering (best v-measure per group):\n";
        std::map<std::string, std::pair<std::string, double>> best;
        for (const auto& run : bundle["cluster"]["runs"]) {
            if (run.value("failed", false)) continue;
            const std::string group = run["group"].get<std::string>();
            const double v = run["v_measure"].get<double>();
            auto it = best.find(group);
            if (it == best.end() || v > it->second.second)
                best[group] = {run["reducer"].get<std::string>(), v};
        }
        for (const auto& [group, entry] : best)
            sum << "  " << group << ": " << entry.first << " (v_meas "
                << fmt_fixed(entry.second, 3) << ")\n";
    }
    if (bundle.contains("classify")) {
        sum << "\nclassification (cv mean ± std weighted F1, test weighted F1):\n";
        for (const auto& block : bundle["classify"]["models"]) {
            sum << "  " << block["algorithm"].get<std::string>() << ": "
                << fmt_fixed(block["cv"]["mean"]["weighted_f1"].get<double>(), 3) << " ± "
                << fmt_fixed(block["cv"]["std"]["weighted_f1"].get<double>(), 3) << ", "
                << fmt_fixed(block["test"]["weighted_f1"].get<double>(), 3) << "\n";
        }
        if (bundle["classify"].contains("search"))
            sum << "  tuned " << bundle["classify"]["search"]["algorithm"].get<std::string>()
                << ": " << fmt_fixed(bundle["classify"]["search"]["best_score"].get<double>(), 3)
                << "\n";
    }
    write_text_file(out_dir / "report_summary.txt", sum.str());
    std::cout << sum.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"terpscape: chemical-space profiling and clustering/classification benchmarks"};
    app.require_subcommand(1);
    CliFlags flags;
    const std::pair<const char*, const char*> subcommands[] = {
        {"ingest", "parse an export into canonical.csv + sidecar"},
        {"profile", "descriptor distributions, extremes and rule-of-five shares"},
        {"cluster", "reducer x clusterer x balance benchmark grid"},
        {"classify", "cross-validated subclass classification benchmark"},
        {"report", "bundle upstream artifacts into a single report"},
    };
    for (const auto& [name, desc] : subcommands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        add_common_options(sub, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        json file_cfg = json::object();
        if (!flags.config_path.empty()) file_cfg = load_config_json(flags.config_path);
        RunConfig cfg;
        try {
            cfg = config_from_json(file_cfg);
        } catch (const json::exception& e) {
            throw UsageError(std::string("config: ") + e.what());
        }
        if (!cfg.schema_path.empty()) {
            std::ifstream in(cfg.schema_path);
            if (!in) throw UsageError("cannot open schema file: " + cfg.schema_path);
            try {
                cfg.schema = SchemaConfig::from_json(json::parse(in));
            } catch (const json::exception& e) {
                throw UsageError("schema: " + std::string(e.what()));
            }
        }

        if (!file_cfg.contains("seed")) {
            if (const char* env = std::getenv("TERPSCAPE_SEED")) {
                double parsed = 0.0;
                if (!try_parse_double(env, parsed) || parsed < 0 ||
                    parsed != std::floor(parsed))
                    throw UsageError("TERPSCAPE_SEED must be a non-negative integer");
                cfg.seed = static_cast<uint64_t>(parsed);
            }
        }
        if (flags.seed_given) cfg.seed = flags.seed;
        if (!flags.out.empty()) cfg.out_dir = flags.out;
        if (flags.workers_given) {
            if (flags.workers < 1) throw UsageError("--workers must be at least 1");
            cfg.workers = static_cast<size_t>(flags.workers);
        }
        if (cfg.workers < 1) throw UsageError("config: workers must be at least 1");
        set_worker_count(cfg.workers);

        fs::create_directories(cfg.out_dir);
        DirLock lock(cfg.out_dir);

        const auto t0 = std::chrono::steady_clock::now();
        int rc = 0;
        std::string command;
        if (app.got_subcommand("ingest")) {
            command = "ingest";
            rc = cmd_ingest(cfg, flags);
        } else if (app.got_subcommand("profile")) {
            command = "profile";
            rc = cmd_profile(cfg, flags);
        } else if (app.got_subcommand("cluster")) {
            command = "cluster";
            rc = cmd_cluster(cfg, flags);
        } else if (app.got_subcommand("classify")) {
            command = "classify";
            rc = cmd_classify(cfg, flags);
        } else {
            command = "report";
            rc = cmd_report(cfg, flags);
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        append_run_log(cfg.out_dir, command, cfg.seed, wall, {});
        return rc;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
