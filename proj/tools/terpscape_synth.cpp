// Generates a synthetic natural-product export shaped like the raw input the
// ingest command expects: same column names, null tokens, taxa/bcut/parent
// blobs, plus a couple of extra columns the schema ignores. Class-conditional
// descriptor means keep the subclasses separable so the downstream commands
// exercise meaningfully.

#include <CLI11.hpp>

#include <array>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <terpscape/csv.hpp>
#include <terpscape/dataset.hpp>
#include <terpscape/rng.hpp>

using namespace terpscape;

namespace {

struct ClassShape {
    const char* subclass;
    double weight;      // relative population
    double mw_mu;       // mean molecular weight
    double mw_sd;
    double logp_mu;
    double npl_mu;
    double hba_mu;
    double hbd_mu;
    double bcut_mu;     // base offset for the 6 bcut values
};

// population mix loosely follows a real terpene export: tri > di > sesqui >
// mono, tiny poly tail, plus glycosides/lactones and a few non-terpene rows
const std::array<ClassShape, 9> kShapes = {{
    {"Triterpenoids", 0.320, 620.0, 110.0, 5.8, 2.4, 7.0, 3.2, 2.1},
    {"Diterpenoids", 0.285, 425.0, 90.0, 4.1, 2.1, 5.2, 2.3, 1.6},
    {"Sesquiterpenoids", 0.222, 310.0, 70.0, 3.2, 1.9, 3.8, 1.6, 1.1},
    {"Monoterpenoids", 0.124, 230.0, 60.0, 2.4, 1.7, 3.0, 1.2, 0.7},
    {"Terpene glycosides", 0.022, 740.0, 150.0, 0.4, 2.6, 12.5, 6.8, 2.6},
    {"Terpene lactones", 0.016, 355.0, 80.0, 2.2, 2.0, 5.6, 1.4, 1.3},
    {"Sesterterpenoids", 0.006, 470.0, 85.0, 4.6, 2.2, 5.5, 2.1, 1.8},
    {"Hemiterpenoids", 0.004, 150.0, 40.0, 1.4, 1.3, 2.2, 0.9, 0.4},
    {"Polyterpenoids", 0.001, 980.0, 220.0, 7.5, 1.5, 4.5, 1.8, 3.0},
}};

const std::array<const char*, 6> kParents = {
    "Oleanane triterpenoids", "Labdane diterpenoids",  "Guaiane sesquiterpenoids",
    "Menthane monoterpenoids", "Saponins",              "Clerodane diterpenoids",
};

struct Row {
    std::string coconut_id, oid, superclass, subclass, taxa, bcut, parent, sugar;
    std::string mw, logp, npl, hba, hbd, framework, smiles;
};

std::string maybe_null(Rng& rng, double null_rate, const std::string& value) {
    if (rng.uniform01() < null_rate) return rng.below(2) ? "" : "NULL";
    return value;
}

Row make_row(Rng& rng, size_t index, double null_rate, double taxa_null_rate) {
    Row row;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "CNP%07zu", index + 1);
    row.coconut_id = idbuf;
    row.oid = hex64(fnv1a64(row.coconut_id));

    // ~6% of rows belong to other superclasses and must be filtered out
    const bool terpene = rng.uniform01() >= 0.06;
    row.superclass = terpene ? "Lipids and lipid-like molecules"
                             : (rng.below(2) ? "Benzenoids" : "Alkaloids and derivatives");

    double pick = rng.uniform01();
    size_t cls = 0;
    double acc = 0.0;
    for (size_t i = 0; i < kShapes.size(); ++i) {
        acc += kShapes[i].weight;
        if (pick <= acc) {
            cls = i;
            break;
        }
        cls = i;
    }
    const ClassShape& shape = kShapes[cls];
    row.subclass = terpene ? shape.subclass : "Phenols";
    // a sliver of lipid rows carry a non-terpene subclass (filtered later)
    if (terpene && rng.uniform01() < 0.01) row.subclass = "Steroids and steroid derivatives";

    const double mw = std::max(60.0, shape.mw_mu + shape.mw_sd * rng.normal());
    const double logp = shape.logp_mu + 1.3 * rng.normal();
    const double npl = shape.npl_mu + 0.8 * rng.normal();
    const double hba = std::max(0.0, std::round(shape.hba_mu + 1.8 * rng.normal()));
    const double hbd = std::max(0.0, std::round(shape.hbd_mu + 1.2 * rng.normal()));
    row.mw = maybe_null(rng, null_rate, fmt_g17(mw));
    row.logp = maybe_null(rng, null_rate, fmt_g17(logp));
    row.npl = maybe_null(rng, null_rate * 2, fmt_g17(npl));
    row.hba = maybe_null(rng, null_rate, fmt_g17(hba));
    row.hbd = maybe_null(rng, null_rate, fmt_g17(hbd));

    if (rng.uniform01() < taxa_null_rate) {
        row.taxa = rng.below(2) ? "" : "[notax]";
    } else {
        std::string taxa = "[plants";
        if (rng.uniform01() < 0.15) taxa += ", marine";
        if (rng.uniform01() < 0.10) taxa += ", bacteria";
        if (rng.uniform01() < 0.12) taxa += ", fungi";
        row.taxa = taxa + "]";
    }

    if (rng.uniform01() < null_rate * 2) {
        row.bcut = "";
    } else {
        std::ostringstream b;
        b << "[";
        for (int k = 0; k < 6; ++k) {
            if (k) b << ", ";
            b << fmt_g17(shape.bcut_mu + 0.4 * rng.normal());
        }
        b << "]";
        row.bcut = b.str();
    }

    row.parent = maybe_null(rng, null_rate * 3, kParents[rng.below(kParents.size())]);
    row.sugar = rng.uniform01() < (cls == 4 ? 0.9 : 0.15) ? "1" : "0";
    row.framework = "fw" + std::to_string(rng.below(400));
    row.smiles = "CC(C)=CCC" + std::string(rng.below(4), 'C') + "O";
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic natural-product export generator"};
    std::string out_path = "synthetic_export.csv";
    std::string format = "csv";
    size_t rows = 2000;
    uint64_t seed = 42;
    double null_rate = 0.02;
    double taxa_null_rate = 0.25;
    app.add_option("--out", out_path, "output file");
    app.add_option("--rows", rows, "rows to generate");
    app.add_option("--seed", seed, "rng seed");
    app.add_option("--format", format, "csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--null-rate", null_rate, "descriptor null fraction");
    app.add_option("--taxa-null-rate", taxa_null_rate, "taxa null fraction");
    CLI11_PARSE(app, argc, argv);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 1;
    }

    Rng rng(seed);
    if (format == "csv") {
        write_csv_row(out, {"coconut_id", "_id", "chemicalSuperClass", "chemicalSubClass",
                            "textTaxa", "bcutDescriptor", "directParentClassification",
                            "contains_sugar", "molecular_weight", "log_p", "np_likeness",
                            "hba_count", "hbd_count", "murcko_framework", "smiles"});
        for (size_t i = 0; i < rows; ++i) {
            Row r = make_row(rng, i, null_rate, taxa_null_rate);
            write_csv_row(out, {r.coconut_id, r.oid, r.superclass, r.subclass, r.taxa, r.bcut,
                                r.parent, r.sugar, r.mw, r.logp, r.npl, r.hba, r.hbd,
                                r.framework, r.smiles});
        }
    } else {
        for (size_t i = 0; i < rows; ++i) {
            Row r = make_row(rng, i, null_rate, taxa_null_rate);
            json j;
            j["coconut_id"] = r.coconut_id;
            j["_id"] = r.oid;
            j["chemicalSuperClass"] = r.superclass;
            j["chemicalSubClass"] = r.subclass;
            j["textTaxa"] = r.taxa;
            j["bcutDescriptor"] = r.bcut;
            j["directParentClassification"] = r.parent;
            j["contains_sugar"] = r.sugar;
            auto num = [&](const char* key, const std::string& text) {
                double v = 0.0;
                if (try_parse_double(text, v))
                    j[key] = v;
                else
                    j[key] = nullptr;
            };
            num("molecular_weight", r.mw);
            num("log_p", r.logp);
            num("np_likeness", r.npl);
            num("hba_count", r.hba);
            num("hbd_count", r.hbd);
            j["murcko_framework"] = r.framework;
            j["smiles"] = r.smiles;
            out << j.dump() << "\n";
        }
    }
    std::cout << "wrote " << rows << " rows to " << out_path << "\n";
    return 0;
}
