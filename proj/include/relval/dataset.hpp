#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relval/csv.hpp"
#include "relval/error.hpp"

namespace relval {

// One row of a defect dataset: a source-code unit of a release with static
// metrics as features and a defect label.
struct CodeUnit {
    std::string unit_name;
    std::vector<double> features;
    long defect_count = 0;
    bool defective = false;
};

struct ReleaseTable {
    int release_id = 1; // ordinal position within the project, 1-based
    std::string release_label;
    std::vector<std::string> feature_names;
    std::vector<CodeUnit> rows;

    long defective_count() const {
        long n = 0;
        for (const auto& r : rows) n += r.defective ? 1 : 0;
        return n;
    }
};

// Ordered releases of one project plus the derived EPV
// (defective units across all releases / number of features).
struct ProjectDataset {
    std::string project_name;
    std::vector<ReleaseTable> releases;
    std::vector<std::string> feature_names;
    double epv = 0.0;

    long total_units() const {
        long n = 0;
        for (const auto& rel : releases) n += static_cast<long>(rel.rows.size());
        return n;
    }
    long total_defective() const {
        long n = 0;
        for (const auto& rel : releases) n += rel.defective_count();
        return n;
    }
};

struct ColumnMapping {
    std::vector<std::string> id_columns;
    std::optional<std::string> release_column;
    std::vector<std::string> feature_columns;
    std::string label_column;
    long label_threshold = 0;     // defective iff label > threshold
    bool impute_median = false;   // opt-in: replace missing/non-finite cells
};

struct DatasetManifest {
    std::string project_name;
    std::vector<std::pair<std::string, std::string>> releases; // (label, path)
    ColumnMapping mapping;
};

// The 20 CK/OO metric columns of the PROMISE class-level datasets.
inline ColumnMapping promise_mapping() {
    ColumnMapping m;
    m.id_columns = {"name", "version"};
    m.feature_columns = {"wmc",  "dit",   "noc", "cbo", "rfc",  "lcom", "ca",
                         "ce",   "npm",   "lcom3", "loc", "dam", "moa",
                         "mfa",  "cam",   "ic",  "cbm", "amc",  "max_cc",
                         "avg_cc"};
    m.label_column = "bug";
    return m;
}

namespace detail {

inline double parse_finite(const std::string& cell, const std::string& col, size_t row) {
    if (cell.empty())
        throw BadValueError("missing value in column '" + col + "', data row " +
                            std::to_string(row + 1));
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw BadValueError("non-numeric value '" + cell + "' in column '" + col +
                            "', data row " + std::to_string(row + 1));
    }
    while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\t')) ++pos;
    if (pos != cell.size())
        throw BadValueError("non-numeric value '" + cell + "' in column '" + col +
                            "', data row " + std::to_string(row + 1));
    if (!std::isfinite(v))
        throw BadValueError("non-finite value '" + cell + "' in column '" + col +
                            "', data row " + std::to_string(row + 1));
    return v;
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

// Parse one release CSV per the column mapping. Every mapped feature must be
// a finite real; the label column an integer-valued count. Columns not named
// by the mapping are ignored. Default policy for missing or non-finite cells
// is rejection; mapping.impute_median switches to per-column median impute.
inline ReleaseTable parse_release_csv(std::string_view raw, const ColumnMapping& mapping) {
    const csv::Table table = csv::parse(raw);
    if (table.header.empty()) throw MissingColumnError("CSV has no header row");
    if (mapping.feature_columns.empty())
        throw MissingColumnError("column mapping names no feature columns");

    std::map<std::string, size_t> col_index;
    for (size_t i = 0; i < table.header.size(); ++i) col_index[table.header[i]] = i;

    auto require = [&](const std::string& name) -> size_t {
        auto it = col_index.find(name);
        if (it == col_index.end())
            throw MissingColumnError("header lacks mapped column '" + name + "'");
        return it->second;
    };

    std::vector<size_t> feat_idx;
    feat_idx.reserve(mapping.feature_columns.size());
    for (const auto& name : mapping.feature_columns) feat_idx.push_back(require(name));
    const size_t label_idx = require(mapping.label_column);
    std::vector<size_t> id_idx;
    for (const auto& name : mapping.id_columns) id_idx.push_back(require(name));

    ReleaseTable rel;
    rel.feature_names = mapping.feature_columns;
    rel.rows.reserve(table.rows.size());

    // cells that failed to parse, to be imputed when the flag is on
    std::vector<std::pair<size_t, size_t>> holes; // (row, feature position)

    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        if (cells.size() != table.header.size())
            throw BadValueError("data row " + std::to_string(r + 1) + " has " +
                                std::to_string(cells.size()) + " cells, header has " +
                                std::to_string(table.header.size()));
        CodeUnit unit;
        for (size_t k = 0; k < id_idx.size(); ++k) {
            if (k) unit.unit_name += ':';
            unit.unit_name += cells[id_idx[k]];
        }
        unit.features.resize(feat_idx.size());
        for (size_t f = 0; f < feat_idx.size(); ++f) {
            const std::string& cell = cells[feat_idx[f]];
            if (mapping.impute_median) {
                try {
                    unit.features[f] = detail::parse_finite(cell, mapping.feature_columns[f], r);
                } catch (const BadValueError&) {
                    unit.features[f] = std::numeric_limits<double>::quiet_NaN();
                    holes.emplace_back(r, f);
                }
            } else {
                unit.features[f] = detail::parse_finite(cell, mapping.feature_columns[f], r);
            }
        }
        const double label = detail::parse_finite(cells[label_idx], mapping.label_column, r);
        unit.defect_count = std::lround(std::max(0.0, label));
        unit.defective = label > static_cast<double>(mapping.label_threshold);
        rel.rows.push_back(std::move(unit));
    }

    if (!holes.empty()) {
        for (size_t f = 0; f < feat_idx.size(); ++f) {
            std::vector<double> finite;
            for (const auto& u : rel.rows)
                if (std::isfinite(u.features[f])) finite.push_back(u.features[f]);
            if (finite.empty())
                throw BadValueError("column '" + mapping.feature_columns[f] +
                                    "' has no finite values to impute from");
            const double med = detail::median_of(std::move(finite));
            for (auto& u : rel.rows)
                if (!std::isfinite(u.features[f])) u.features[f] = med;
        }
    }
    return rel;
}

// Merge ordered release tables into one project dataset; tables must share an
// identical ordered feature-name list. Assigns release ids 1..n and computes
// EPV.
inline ProjectDataset merge_releases(std::vector<ReleaseTable> tables,
                                     std::string project_name) {
    if (tables.empty()) throw EmptyError("merge_releases: no release tables");
    for (size_t i = 1; i < tables.size(); ++i) {
        if (tables[i].feature_names != tables[0].feature_names)
            throw SchemaMismatchError("release '" + tables[i].release_label +
                                      "' has a different feature list than '" +
                                      tables[0].release_label + "'");
    }
    ProjectDataset ds;
    ds.project_name = std::move(project_name);
    ds.feature_names = tables[0].feature_names;
    ds.releases = std::move(tables);
    for (size_t i = 0; i < ds.releases.size(); ++i)
        ds.releases[i].release_id = static_cast<int>(i) + 1;
    ds.epv = static_cast<double>(ds.total_defective()) /
             static_cast<double>(ds.feature_names.size());
    return ds;
}

// A dataset enters the experiment only with three or more releases.
inline bool eligible_for_experiment(const ProjectDataset& ds) {
    return ds.releases.size() >= 3;
}

// Part A = releases 1..n-1 (training/validation), part B = release n (the
// ground-truth test release).
inline std::pair<ProjectDataset, ReleaseTable>
split_last_release(const ProjectDataset& ds) {
    if (ds.releases.size() < 2)
        throw TooFewReleasesError("split_last_release needs at least 2 releases, has " +
                                  std::to_string(ds.releases.size()));
    ProjectDataset a;
    a.project_name = ds.project_name;
    a.feature_names = ds.feature_names;
    a.releases.assign(ds.releases.begin(), ds.releases.end() - 1);
    a.epv = static_cast<double>(a.total_defective()) /
            static_cast<double>(a.feature_names.size());
    return {std::move(a), ds.releases.back()};
}

struct HalfSplit {
    std::vector<const ReleaseTable*> first;
    std::vector<const ReleaseTable*> second;

    static long units(const std::vector<const ReleaseTable*>& rels) {
        long n = 0;
        for (const auto* r : rels) n += static_cast<long>(r->rows.size());
        return n;
    }
    static long defective(const std::vector<const ReleaseTable*>& rels) {
        long n = 0;
        for (const auto* r : rels) n += r->defective_count();
        return n;
    }
};

// Tag release m "second" iff m > ceil(n/2), "first" otherwise. With n=5 this
// puts releases 1-3 first and 4-5 second.
inline HalfSplit split_halves(const ProjectDataset& ds) {
    const int n = static_cast<int>(ds.releases.size());
    if (n < 2) throw TooFewReleasesError("split_halves needs at least 2 releases");
    const int cut = (n + 1) / 2;
    HalfSplit out;
    for (const auto& rel : ds.releases)
        (rel.release_id > cut ? out.second : out.first).push_back(&rel);
    return out;
}

enum class EpvGroup { Low, High };

inline const char* to_string(EpvGroup g) { return g == EpvGroup::Low ? "Low" : "High"; }

// Sort datasets by EPV (ties by project name ascending); lower half Low,
// upper half High. On odd counts the median dataset goes Low.
inline std::map<std::string, EpvGroup>
epv_group(const std::vector<const ProjectDataset*>& datasets) {
    std::vector<const ProjectDataset*> order(datasets);
    std::sort(order.begin(), order.end(), [](const ProjectDataset* a, const ProjectDataset* b) {
        if (a->epv != b->epv) return a->epv < b->epv;
        return a->project_name < b->project_name;
    });
    std::map<std::string, EpvGroup> out;
    const size_t low_count = (order.size() + 1) / 2;
    for (size_t i = 0; i < order.size(); ++i)
        out[order[i]->project_name] = i < low_count ? EpvGroup::Low : EpvGroup::High;
    return out;
}

// Canonical CSV emission: unit name, release id and label, features, bug
// count. Re-parsing an emitted file round-trips to an identical dataset.
inline std::string to_canonical_csv(const ProjectDataset& ds) {
    std::vector<std::string> header = {"name", "release_id", "release_label"};
    header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
    header.push_back("bug");
    std::string out = csv::write_row(header);
    char buf[64];
    for (const auto& rel : ds.releases) {
        for (const auto& u : rel.rows) {
            std::vector<std::string> row;
            row.reserve(header.size());
            row.push_back(u.unit_name);
            row.push_back(std::to_string(rel.release_id));
            row.push_back(rel.release_label);
            for (double v : u.features) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                row.emplace_back(buf);
            }
            row.push_back(std::to_string(u.defect_count));
            out += csv::write_row(row);
        }
    }
    return out;
}

inline ProjectDataset from_canonical_csv(std::string_view raw, std::string project_name) {
    const csv::Table table = csv::parse(raw);
    if (table.header.size() < 4 || table.header[0] != "name" ||
        table.header[1] != "release_id" || table.header[2] != "release_label" ||
        table.header.back() != "bug")
        throw MissingColumnError("not a canonical dataset CSV");
    std::vector<std::string> feats(table.header.begin() + 3, table.header.end() - 1);

    std::vector<ReleaseTable> rels;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const int rid = static_cast<int>(detail::parse_finite(cells[1], "release_id", r));
        if (rels.empty() || rels.back().release_id != rid) {
            if (!rels.empty() && rid != rels.back().release_id + 1)
                throw BadValueError("release ids are not contiguous at data row " +
                                    std::to_string(r + 1));
            ReleaseTable rel;
            rel.release_id = rid;
            rel.release_label = cells[2];
            rel.feature_names = feats;
            rels.push_back(std::move(rel));
        }
        CodeUnit u;
        u.unit_name = cells[0];
        for (size_t f = 0; f < feats.size(); ++f)
            u.features.push_back(detail::parse_finite(cells[3 + f], feats[f], r));
        u.defect_count = std::lround(detail::parse_finite(cells.back(), "bug", r));
        u.defective = u.defect_count > 0;
        rels.back().rows.push_back(std::move(u));
    }
    return merge_releases(std::move(rels), std::move(project_name));
}

// --- manifest JSON ---

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    auto reject_unknown = [](const nlohmann::json& obj,
                             std::initializer_list<const char*> known,
                             const char* where) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                    return it.key() == k;
                }) == known.end())
                throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
        }
    };
    reject_unknown(j, {"project_name", "releases", "columns"}, "manifest");

    DatasetManifest m;
    m.project_name = j.at("project_name").get<std::string>();
    for (const auto& r : j.at("releases")) {
        reject_unknown(r, {"label", "path"}, "manifest release");
        m.releases.emplace_back(r.at("label").get<std::string>(),
                                r.at("path").get<std::string>());
    }
    if (m.releases.empty()) throw ConfigError("manifest lists no releases");
    {
        std::vector<std::string> paths;
        for (const auto& [label, path] : m.releases) paths.push_back(path);
        std::sort(paths.begin(), paths.end());
        if (std::adjacent_find(paths.begin(), paths.end()) != paths.end())
            throw ConfigError("manifest release file paths are not distinct");
    }

    const auto& cols = j.at("columns");
    reject_unknown(cols, {"id", "release", "features", "label", "label_threshold", "impute_median"},
                   "manifest columns");
    for (const auto& c : cols.at("id")) m.mapping.id_columns.push_back(c.get<std::string>());
    if (cols.contains("release"))
        m.mapping.release_column = cols.at("release").get<std::string>();
    for (const auto& c : cols.at("features"))
        m.mapping.feature_columns.push_back(c.get<std::string>());
    if (m.mapping.feature_columns.empty())
        throw ConfigError("manifest names no feature columns");
    m.mapping.label_column = cols.at("label").get<std::string>();
    if (cols.contains("label_threshold"))
        m.mapping.label_threshold = cols.at("label_threshold").get<long>();
    if (cols.contains("impute_median"))
        m.mapping.impute_median = cols.at("impute_median").get<bool>();

    // predictor hygiene: ids and the release column must not be features
    for (const auto& f : m.mapping.feature_columns) {
        if (std::find(m.mapping.id_columns.begin(), m.mapping.id_columns.end(), f) !=
                m.mapping.id_columns.end() ||
            (m.mapping.release_column && f == *m.mapping.release_column) ||
            f == m.mapping.label_column)
            throw ConfigError("column '" + f + "' is both a feature and an id/release/label column");
    }
    return m;
}

} // namespace relval
