#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/csv.hpp"
#include "terpscape/dataset.hpp"

namespace terpscape {

struct DistributionSummary {
    std::string name;
    size_t count = 0;  // non-missing values inside the clip range
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> bin_edges;   // bins + 1
    std::vector<size_t> bin_counts;  // bins
    bool clipped = false;
    double clip_lo = 0.0;
    double clip_hi = 0.0;
    double suppressed_fraction = 0.0;  // non-missing values outside the clip
    bool empty = false;                // nothing to summarize
};

inline DistributionSummary summarize(const std::vector<double>& values,
                                     std::optional<std::pair<double, double>> clip, int bins,
                                     const std::string& name = "") {
    if (bins < 1) throw UsageError("summarize: bins must be >= 1");
    DistributionSummary s;
    s.name = name;
    if (clip) {
        s.clipped = true;
        s.clip_lo = clip->first;
        s.clip_hi = clip->second;
    }
    std::vector<double> kept;
    size_t present = 0;
    for (double v : values) {
        if (is_missing(v)) continue;
        ++present;
        if (clip && (v < clip->first || v > clip->second)) continue;
        kept.push_back(v);
    }
    if (present > 0)
        s.suppressed_fraction = static_cast<double>(present - kept.size()) / present;
    if (kept.empty()) {
        s.empty = true;
        return s;
    }
    s.count = kept.size();
    double sum = 0.0;
    s.min = kept[0];
    s.max = kept[0];
    for (double v : kept) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(kept.size());
    double ss = 0.0;
    for (double v : kept) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(kept.size()));

    double lo = clip ? clip->first : s.min;
    double hi = clip ? clip->second : s.max;
    if (!std::isfinite(lo)) lo = s.min;
    if (!std::isfinite(hi)) hi = s.max;
    s.bin_edges.resize(static_cast<size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        s.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    s.bin_counts.assign(static_cast<size_t>(bins), 0);
    double width = hi - lo;
    for (double v : kept) {
        size_t b = 0;
        if (width > 0) {
            b = static_cast<size_t>((v - lo) / width * bins);
            if (b >= static_cast<size_t>(bins)) b = static_cast<size_t>(bins) - 1;
        }
        ++s.bin_counts[b];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Lipinski rule of five

// Count of rules broken, strict inequality: a value exactly at the threshold
// complies.
inline int lipinski_violations(double mw, double log_p, double hbd, double hba) {
    int v = 0;
    if (hbd > 5.0) ++v;
    if (hba > 10.0) ++v;
    if (mw > 500.0) ++v;
    if (log_p > 5.0) ++v;
    return v;
}

struct LipinskiProfile {
    std::array<size_t, 5> histogram{};  // violation count 0..4
    size_t counted = 0;                 // records with all four descriptors
    size_t skipped = 0;                 // records missing any of the four
    double hba_le_10_share = 0.0;       // over records where hba is present
    double hbd_le_5_share = 0.0;

    std::array<double, 5> shares() const {
        std::array<double, 5> out{};
        if (counted)
            for (size_t i = 0; i < 5; ++i)
                out[i] = static_cast<double>(histogram[i]) / counted;
        return out;
    }
};

// ---------------------------------------------------------------------------
// extremes

struct ExtremeRecord {
    std::string id;
    double value = 0.0;
};

struct Extremes {
    ExtremeRecord min;
    ExtremeRecord max;
};

// Ties go to the lexicographically first id.
inline Extremes extremes(const RecordSet& rs, const std::string& descriptor) {
    int col = rs.column_index(descriptor);
    if (col < 0) throw DataError("extremes: no column named '" + descriptor + "'");
    Extremes e;
    bool found = false;
    for (const auto& r : rs.records) {
        double v = r.values[col];
        if (is_missing(v)) continue;
        if (!found) {
            e.min = {r.id, v};
            e.max = {r.id, v};
            found = true;
            continue;
        }
        if (v < e.min.value || (v == e.min.value && r.id < e.min.id)) e.min = {r.id, v};
        if (v > e.max.value || (v == e.max.value && r.id < e.max.id)) e.max = {r.id, v};
    }
    if (!found)
        throw DataError("extremes: descriptor '" + descriptor + "' is missing in every record");
    return e;
}

// ---------------------------------------------------------------------------
// full profile report

struct HistSpec {
    std::optional<std::pair<double, double>> clip;
    int bins = 40;
};

struct ProfileOptions {
    HistSpec mw{std::make_pair(0.0, 3000.0), 60};
    HistSpec log_p{std::make_pair(-12.0, 20.0), 64};
    HistSpec np_likeness{std::nullopt, 40};
};

struct DescriptorBlock {
    DistributionSummary stats;      // no clip: faithful mean/min/max
    DistributionSummary histogram;  // clipped per options, for plotting
    bool present = false;
};

struct SubclassReport {
    std::string name;
    size_t count = 0;
    double share = 0.0;  // of total records
    DescriptorBlock mw, log_p, np_likeness;
    LipinskiProfile lipinski;
};

struct ProfileReport {
    size_t total_records = 0;
    SubclassReport overall;
    std::vector<SubclassReport> subclasses;  // present subclasses, declaration order
    std::vector<std::pair<std::string, Extremes>> extreme_records;
};

namespace detail {

inline std::vector<double> column_values(const RecordSet& rs, int col,
                                         std::optional<Subclass> only) {
    std::vector<double> out;
    if (col < 0) return out;
    for (const auto& r : rs.records) {
        if (only && r.subclass != only) continue;
        out.push_back(r.values[col]);
    }
    return out;
}

inline SubclassReport profile_block(const RecordSet& rs, std::optional<Subclass> only,
                                    const std::string& name, const ProfileOptions& opt) {
    SubclassReport rep;
    rep.name = name;
    int mw_col = rs.column_index("molecular_weight");
    int logp_col = rs.column_index("log_p");
    int npl_col = rs.column_index("np_likeness");
    int hba_col = rs.column_index("hba_count");
    int hbd_col = rs.column_index("hbd_count");

    auto block = [&](int col, const HistSpec& spec, const std::string& dname) {
        DescriptorBlock b;
        if (col < 0) return b;
        b.present = true;
        auto vals = column_values(rs, col, only);
        b.stats = summarize(vals, std::nullopt, spec.bins, dname);
        b.histogram = summarize(vals, spec.clip, spec.bins, dname);
        return b;
    };
    rep.mw = block(mw_col, opt.mw, "molecular_weight");
    rep.log_p = block(logp_col, opt.log_p, "log_p");
    rep.np_likeness = block(npl_col, opt.np_likeness, "np_likeness");

    size_t hba_present = 0, hba_ok = 0, hbd_present = 0, hbd_ok = 0;
    for (const auto& r : rs.records) {
        if (only && r.subclass != only) continue;
        ++rep.count;
        double mw = mw_col >= 0 ? r.values[mw_col] : kMissing;
        double lp = logp_col >= 0 ? r.values[logp_col] : kMissing;
        double hba = hba_col >= 0 ? r.values[hba_col] : kMissing;
        double hbd = hbd_col >= 0 ? r.values[hbd_col] : kMissing;
        if (!is_missing(hba)) {
            ++hba_present;
            if (hba <= 10.0) ++hba_ok;
        }
        if (!is_missing(hbd)) {
            ++hbd_present;
            if (hbd <= 5.0) ++hbd_ok;
        }
        if (is_missing(mw) || is_missing(lp) || is_missing(hba) || is_missing(hbd)) {
            ++rep.lipinski.skipped;
        } else {
            ++rep.lipinski.counted;
            ++rep.lipinski.histogram[lipinski_violations(mw, lp, hbd, hba)];
        }
    }
    if (hba_present) rep.lipinski.hba_le_10_share = static_cast<double>(hba_ok) / hba_present;
    if (hbd_present) rep.lipinski.hbd_le_5_share = static_cast<double>(hbd_ok) / hbd_present;
    return rep;
}

}  // namespace detail

inline ProfileReport profile_report(const RecordSet& rs, const ProfileOptions& opt = {}) {
    if (rs.records.empty()) throw DataError("profile: record set is empty");
    ProfileReport rep;
    rep.total_records = rs.records.size();
    rep.overall = detail::profile_block(rs, std::nullopt, "all", opt);
    rep.overall.share = 1.0;
    auto counts = subclass_counts(rs);
    for (size_t i = 0; i < kSubclassCount; ++i) {
        if (!counts[i]) continue;
        auto sc = static_cast<Subclass>(i);
        SubclassReport block = detail::profile_block(rs, sc, subclass_name(sc), opt);
        block.share = static_cast<double>(block.count) / rep.total_records;
        rep.subclasses.push_back(std::move(block));
    }
    for (const char* d : {"molecular_weight", "log_p", "np_likeness"}) {
        if (rs.column_index(d) < 0) continue;
        try {
            rep.extreme_records.emplace_back(d, extremes(rs, d));
        } catch (const DataError&) {
            // descriptor missing everywhere: skip
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// serialization

inline json summary_json(const DistributionSummary& s) {
    json j;
    j["count"] = s.count;
    if (s.empty) {
        j["empty"] = true;
        return j;
    }
    j["mean"] = s.mean;
    j["std"] = s.stddev;
    j["min"] = s.min;
    j["max"] = s.max;
    if (s.clipped) {
        j["clip"] = {s.clip_lo, s.clip_hi};
        j["suppressed_fraction"] = s.suppressed_fraction;
    }
    return j;
}

inline json profile_json(const ProfileReport& rep) {
    auto block_json = [](const SubclassReport& b) {
        json j;
        j["name"] = b.name;
        j["count"] = b.count;
        j["share"] = b.share;
        auto desc = [&](const char* key, const DescriptorBlock& d) {
            if (!d.present) return;
            j[key] = summary_json(d.stats);
            j[key]["histogram_clip"] = summary_json(d.histogram);
        };
        desc("molecular_weight", b.mw);
        desc("log_p", b.log_p);
        desc("np_likeness", b.np_likeness);
        json lip;
        lip["counted"] = b.lipinski.counted;
        lip["skipped"] = b.lipinski.skipped;
        lip["histogram"] = b.lipinski.histogram;
        lip["shares"] = b.lipinski.shares();
        lip["hba_le_10_share"] = b.lipinski.hba_le_10_share;
        lip["hbd_le_5_share"] = b.lipinski.hbd_le_5_share;
        j["lipinski"] = lip;
        return j;
    };
    json j;
    j["total_records"] = rep.total_records;
    j["overall"] = block_json(rep.overall);
    json subs = json::array();
    for (const auto& b : rep.subclasses) subs.push_back(block_json(b));
    j["subclasses"] = subs;
    json ext = json::object();
    for (const auto& [name, e] : rep.extreme_records) {
        ext[name] = {{"min", {{"id", e.min.id}, {"value", e.min.value}}},
                     {"max", {{"id", e.max.id}, {"value", e.max.value}}}};
    }
    j["extremes"] = ext;
    return j;
}

inline void profile_text(const ProfileReport& rep, std::ostream& os) {
    auto pct = [](double v) { return fmt_fixed(100.0 * v, 1) + "%"; };
    os << "records: " << rep.total_records << "\n\n";
    os << std::left << std::setw(22) << "subclass" << std::right << std::setw(8) << "count"
       << std::setw(8) << "share" << std::setw(10) << "mw_mean" << std::setw(10) << "logp_mean"
       << std::setw(10) << "npl_mean" << std::setw(9) << "hba_ok" << std::setw(9) << "hbd_ok"
       << std::setw(8) << "viol0" << "\n";
    auto row = [&](const SubclassReport& b) {
        os << std::left << std::setw(22) << b.name << std::right << std::setw(8) << b.count
           << std::setw(8) << pct(b.share);
        auto cell = [&](const DescriptorBlock& d) {
            os << std::setw(10) << (d.present && !d.stats.empty ? fmt_fixed(d.stats.mean, 1) : "-");
        };
        cell(b.mw);
        cell(b.log_p);
        cell(b.np_likeness);
        os << std::setw(9) << pct(b.lipinski.hba_le_10_share) << std::setw(9)
           << pct(b.lipinski.hbd_le_5_share) << std::setw(8) << pct(b.lipinski.shares()[0])
           << "\n";
    };
    row(rep.overall);
    for (const auto& b : rep.subclasses) row(b);
    os << "\nlipinski violation shares (overall):";
    auto shares = rep.overall.lipinski.shares();
    for (int k = 0; k < 5; ++k) os << "  " << k << ":" << pct(shares[k]);
    os << "  (skipped " << rep.overall.lipinski.skipped << ")\n";
    if (!rep.extreme_records.empty()) {
        os << "\nextremes:\n";
        for (const auto& [name, e] : rep.extreme_records) {
            os << "  " << std::left << std::setw(18) << name << " min " << fmt_fixed(e.min.value, 1)
               << " (" << e.min.id << ")  max " << fmt_fixed(e.max.value, 1) << " (" << e.max.id
               << ")\n";
        }
    }
}

inline void profile_histograms_csv(const ProfileReport& rep, std::ostream& os) {
    write_csv_row(os, {"descriptor", "subclass", "bin_lo", "bin_hi", "count"});
    auto emit = [&](const SubclassReport& b, const char* dname, const DescriptorBlock& d) {
        if (!d.present || d.histogram.empty) return;
        for (size_t k = 0; k < d.histogram.bin_counts.size(); ++k) {
            write_csv_row(os, {dname, b.name, fmt_g17(d.histogram.bin_edges[k]),
                               fmt_g17(d.histogram.bin_edges[k + 1]),
                               std::to_string(d.histogram.bin_counts[k])});
        }
    };
    auto all = [&](const SubclassReport& b) {
        emit(b, "molecular_weight", b.mw);
        emit(b, "log_p", b.log_p);
        emit(b, "np_likeness", b.np_likeness);
    };
    all(rep.overall);
    for (const auto& b : rep.subclasses) all(b);
}

}  // namespace terpscape
