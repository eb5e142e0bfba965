#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relval/csv.hpp"
#include "relval/dataset.hpp"
#include "relval/metaval.hpp"
#include "relval/stats/tests.hpp"

namespace relval {

// locale-independent number formatting for every emitted artifact
inline std::string fmt_g(double v, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}
inline std::string fmt_f(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// --- sanity check (defect-rate drift between project halves) ---

struct SanityRow {
    std::string dataset;
    long first_defective = 0, first_total = 0;
    long second_defective = 0, second_total = 0;
    double first_rate = 0.0, second_rate = 0.0;
    double difference = 0.0;          // second - first
    double relative_difference = 0.0; // (second - first) / first
    stats::StatReport fisher;
    bool significant = false;
    bool computed = false;
    std::string failure;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"dataset", dataset}, {"computed", computed}};
        if (!computed) {
            j["failure"] = failure;
            return j;
        }
        j["first_defective"] = first_defective;
        j["first_total"] = first_total;
        j["second_defective"] = second_defective;
        j["second_total"] = second_total;
        j["first_rate"] = first_rate;
        j["second_rate"] = second_rate;
        j["difference"] = difference;
        j["relative_difference"] = relative_difference;
        j["fisher"] = fisher.to_json();
        j["significant"] = significant;
        return j;
    }

    static SanityRow from_json(const nlohmann::json& j) {
        SanityRow r;
        r.dataset = j.at("dataset").get<std::string>();
        r.computed = j.at("computed").get<bool>();
        if (!r.computed) {
            r.failure = j.at("failure").get<std::string>();
            return r;
        }
        r.first_defective = j.at("first_defective").get<long>();
        r.first_total = j.at("first_total").get<long>();
        r.second_defective = j.at("second_defective").get<long>();
        r.second_total = j.at("second_total").get<long>();
        r.first_rate = j.at("first_rate").get<double>();
        r.second_rate = j.at("second_rate").get<double>();
        r.difference = j.at("difference").get<double>();
        r.relative_difference = j.at("relative_difference").get<double>();
        r.fisher = stats::StatReport::from_json(j.at("fisher"));
        r.significant = j.at("significant").get<bool>();
        return r;
    }
};

// Fisher exact test on defective counts of the later half versus the earlier
// half; the odds ratio then reads "odds of defectiveness in the second half
// relative to the first".
inline SanityRow sanity_check_dataset(const ProjectDataset& ds) {
    SanityRow row;
    row.dataset = ds.project_name;
    const HalfSplit halves = split_halves(ds);
    row.first_total = HalfSplit::units(halves.first);
    row.first_defective = HalfSplit::defective(halves.first);
    row.second_total = HalfSplit::units(halves.second);
    row.second_defective = HalfSplit::defective(halves.second);
    if (row.first_total == 0 || row.second_total == 0)
        throw EmptyError(ds.project_name + ": a half has no observations");

    row.first_rate = static_cast<double>(row.first_defective) /
                     static_cast<double>(row.first_total);
    row.second_rate = static_cast<double>(row.second_defective) /
                      static_cast<double>(row.second_total);
    row.difference = row.second_rate - row.first_rate;
    row.relative_difference = row.first_rate > 0.0
                                  ? row.difference / row.first_rate
                                  : std::numeric_limits<double>::infinity();

    stats::ContingencyTable2x2 t;
    t.a = row.second_defective;
    t.b = row.second_total - row.second_defective;
    t.c = row.first_defective;
    t.d = row.first_total - row.first_defective;
    row.fisher = stats::fisher_exact(t);
    row.significant = row.fisher.p_value < 0.05;
    row.computed = true;
    return row;
}

// --- experiment report ---

struct ExclusionRecord {
    std::string cell; // "dataset/technique/classifier" style id
    std::string reason;

    nlohmann::json to_json() const { return {{"cell", cell}, {"reason", reason}}; }
};

struct ExperimentReport {
    nlohmann::json config_echo;
    std::vector<Rq1Row> rq1;
    std::optional<stats::AnovaResult> anova; // H01, factors classifier x EPV
    std::vector<TechniqueEvaluation> evaluations;
    std::map<std::string, BaselineTriple> baselines; // by dataset
    std::map<std::string, stats::StatReport> hypotheses; // H02a, H02b, ...
    std::vector<SanityRow> sanity;
    std::vector<ExclusionRecord> exclusions;
    nlohmann::json runtime = nlohmann::json::object(); // deterministic fields only

    nlohmann::json to_json() const;
    static ExperimentReport from_json(const nlohmann::json& j);
};

// --- directional findings (replication targets, reported not asserted) ---

struct DirectionalChecks {
    bool have_walk_forward = false;
    double walk_forward_mean_auc = 0.0;
    double medium_mean_auc = 0.0;
    double improvement_over_medium_pct = 0.0;
    bool walk_forward_beats_medium_mean = false;
    int walk_forward_beats_medium_datasets = 0;
    int datasets_total = 0;
    std::map<std::string, double> median_bias; // by technique
    bool all_median_bias_positive = false;

    nlohmann::json to_json() const {
        return {{"have_walk_forward", have_walk_forward},
                {"walk_forward_mean_auc", walk_forward_mean_auc},
                {"medium_mean_auc", medium_mean_auc},
                {"improvement_over_medium_pct", improvement_over_medium_pct},
                {"walk_forward_beats_medium_mean", walk_forward_beats_medium_mean},
                {"walk_forward_beats_medium_datasets", walk_forward_beats_medium_datasets},
                {"datasets_total", datasets_total},
                {"median_bias", median_bias},
                {"all_median_bias_positive", all_median_bias_positive}};
    }
};

namespace detail {
inline double median_value(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
} // namespace detail

inline DirectionalChecks directional_checks(const ExperimentReport& rep) {
    DirectionalChecks d;
    d.datasets_total = static_cast<int>(rep.baselines.size());

    std::map<std::string, std::vector<double>> bias_by_technique;
    double wf_sum = 0.0;
    int wf_count = 0;
    for (const auto& ev : rep.evaluations) {
        bias_by_technique[ev.technique].push_back(ev.bias);
        if (ev.technique == "walk-forward") {
            d.have_walk_forward = true;
            wf_sum += ev.actual_auc;
            ++wf_count;
            auto it = rep.baselines.find(ev.dataset);
            if (it != rep.baselines.end() && ev.actual_auc > it->second.medium_auc)
                ++d.walk_forward_beats_medium_datasets;
        }
    }
    if (wf_count > 0) d.walk_forward_mean_auc = wf_sum / wf_count;

    double med_sum = 0.0;
    for (const auto& [name, b] : rep.baselines) med_sum += b.medium_auc;
    if (!rep.baselines.empty())
        d.medium_mean_auc = med_sum / static_cast<double>(rep.baselines.size());
    if (d.medium_mean_auc > 0.0)
        d.improvement_over_medium_pct =
            100.0 * (d.walk_forward_mean_auc - d.medium_mean_auc) / d.medium_mean_auc;
    d.walk_forward_beats_medium_mean = d.walk_forward_mean_auc > d.medium_mean_auc;

    d.all_median_bias_positive = !bias_by_technique.empty();
    for (auto& [tech, biases] : bias_by_technique) {
        const double med = detail::median_value(biases);
        d.median_bias[tech] = med;
        if (med <= 0.0) d.all_median_bias_positive = false;
    }
    return d;
}

inline nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j;
    j["config"] = config_echo;
    j["rq1"] = nlohmann::json::array();
    for (const auto& r : rq1) j["rq1"].push_back(r.to_json());
    if (anova) {
        j["anova"] = {{"classifier", anova->factor_a.to_json()},
                      {"epv", anova->factor_b.to_json()},
                      {"eta_sq_residual", anova->eta_sq_residual}};
    }
    j["evaluations"] = nlohmann::json::array();
    for (const auto& e : evaluations) j["evaluations"].push_back(e.to_json());
    j["baselines"] = nlohmann::json::object();
    for (const auto& [name, b] : baselines) j["baselines"][name] = b.to_json();
    j["hypotheses"] = nlohmann::json::object();
    for (const auto& [name, r] : hypotheses) j["hypotheses"][name] = r.to_json();
    j["sanity"] = nlohmann::json::array();
    for (const auto& s : sanity) j["sanity"].push_back(s.to_json());
    j["exclusions"] = nlohmann::json::array();
    for (const auto& e : exclusions) j["exclusions"].push_back(e.to_json());
    j["directional"] = directional_checks(*this).to_json();
    j["runtime"] = runtime;
    return j;
}

inline ExperimentReport ExperimentReport::from_json(const nlohmann::json& j) {
    ExperimentReport rep;
    rep.config_echo = j.at("config");
    for (const auto& r : j.at("rq1")) rep.rq1.push_back(Rq1Row::from_json(r));
    if (j.contains("anova")) {
        stats::AnovaResult a;
        a.factor_a = stats::StatReport::from_json(j.at("anova").at("classifier"));
        a.factor_b = stats::StatReport::from_json(j.at("anova").at("epv"));
        a.eta_sq_residual = j.at("anova").at("eta_sq_residual").get<double>();
        rep.anova = std::move(a);
    }
    for (const auto& e : j.at("evaluations"))
        rep.evaluations.push_back(TechniqueEvaluation::from_json(e));
    for (auto it = j.at("baselines").begin(); it != j.at("baselines").end(); ++it)
        rep.baselines[it.key()] = BaselineTriple::from_json(it.value());
    for (auto it = j.at("hypotheses").begin(); it != j.at("hypotheses").end(); ++it)
        rep.hypotheses[it.key()] = stats::StatReport::from_json(it.value());
    for (const auto& s : j.at("sanity")) rep.sanity.push_back(SanityRow::from_json(s));
    for (const auto& e : j.at("exclusions"))
        rep.exclusions.push_back({e.at("cell").get<std::string>(),
                                  e.at("reason").get<std::string>()});
    rep.runtime = j.at("runtime");
    return rep;
}

// --- CSV emission (machine interface; full precision) ---

inline std::string rq1_csv(const ExperimentReport& rep) {
    std::string out = csv::write_row(
        {"dataset", "classifier", "epv_group", "auc", "precision", "recall", "mcc", "failure"});
    for (const auto& r : rep.rq1) {
        if (r.computed)
            out += csv::write_row({r.dataset, r.classifier, r.epv_group, fmt_g(r.auc),
                                   fmt_g(r.precision), fmt_g(r.recall), fmt_g(r.mcc), ""});
        else
            out += csv::write_row({r.dataset, r.classifier, r.epv_group, "", "", "", "",
                                   r.failure});
    }
    return out;
}

inline std::string evaluations_csv(const ExperimentReport& rep) {
    std::string out = csv::write_row({"dataset", "technique", "selected", "estimated_auc",
                                      "actual_auc", "bias", "absolute_bias"});
    for (const auto& e : rep.evaluations)
        out += csv::write_row({e.dataset, e.technique, e.selected, fmt_g(e.estimated_auc),
                               fmt_g(e.actual_auc), fmt_g(e.bias), fmt_g(e.absolute_bias)});
    return out;
}

// Long-format table: one row per dataset x technique x classifier, with the
// technique-independent actual AUC, the selected flag, and baseline columns.
inline std::string rq2_long_csv(const ExperimentReport& rep) {
    std::string out = csv::write_row({"dataset", "technique", "classifier", "estimated_auc",
                                      "actual_auc", "bias", "absolute_bias", "selected",
                                      "best_auc", "medium_auc", "worst_auc"});
    for (const auto& e : rep.evaluations) {
        const auto bit = rep.baselines.find(e.dataset);
        for (const auto& [name, est] : e.selection.estimates) {
            std::string actual, bias, abs_bias;
            std::string best, medium, worst;
            if (bit != rep.baselines.end()) {
                best = fmt_g(bit->second.best_auc);
                medium = fmt_g(bit->second.medium_auc);
                worst = fmt_g(bit->second.worst_auc);
                auto ait = bit->second.actual_aucs.find(name);
                if (ait != bit->second.actual_aucs.end()) {
                    actual = fmt_g(ait->second);
                    bias = fmt_g(est - ait->second);
                    abs_bias = fmt_g(std::fabs(est - ait->second));
                }
            }
            out += csv::write_row({e.dataset, e.technique, name, fmt_g(est), actual, bias,
                                   abs_bias, name == e.selected ? "1" : "0", best, medium,
                                   worst});
        }
    }
    return out;
}

inline std::string sanity_csv(const std::vector<SanityRow>& rows) {
    std::string out = csv::write_row(
        {"dataset", "first_defective", "first_total", "second_defective", "second_total",
         "first_rate", "second_rate", "difference", "relative_difference", "p_value",
         "odds_ratio", "significant", "failure"});
    for (const auto& r : rows) {
        if (r.computed)
            out += csv::write_row({r.dataset, std::to_string(r.first_defective),
                                   std::to_string(r.first_total),
                                   std::to_string(r.second_defective),
                                   std::to_string(r.second_total), fmt_g(r.first_rate),
                                   fmt_g(r.second_rate), fmt_g(r.difference),
                                   fmt_g(r.relative_difference), fmt_g(r.fisher.p_value),
                                   fmt_g(r.fisher.effect_size), r.significant ? "1" : "0", ""});
        else
            out += csv::write_row({r.dataset, "", "", "", "", "", "", "", "", "", "", "",
                                   r.failure});
    }
    return out;
}

// --- box / bar figure data ---

struct BoxStats {
    double q1 = 0.0, median = 0.0, q3 = 0.0;
    double whisker_lo = 0.0, whisker_hi = 0.0; // Tukey 1.5*IQR
    std::vector<double> outliers;
};

namespace detail {
// linear-interpolation quantile of a sorted sample
inline double quantile_sorted(const std::vector<double>& v, double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}
} // namespace detail

inline BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw EmptyError("box_stats of empty sample");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.q1 = detail::quantile_sorted(values, 0.25);
    b.median = detail::quantile_sorted(values, 0.5);
    b.q3 = detail::quantile_sorted(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q3;
    b.whisker_hi = b.q1;
    bool any_in = false;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            if (!any_in) {
                b.whisker_lo = b.whisker_hi = v;
                any_in = true;
            }
            b.whisker_lo = std::min(b.whisker_lo, v);
            b.whisker_hi = std::max(b.whisker_hi, v);
        }
    }
    if (!any_in) { // everything flagged (pathological); fall back to the box
        b.whisker_lo = b.q1;
        b.whisker_hi = b.q3;
    }
    return b;
}

// --- SVG emission (deterministic byte-for-byte for a fixed report) ---

namespace detail {

inline std::string svg_header(int w, int h, const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(w) + "\" height=\"" + std::to_string(h) +
                    "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
                    "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + std::to_string(w / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         title + "</text>\n";
    return s;
}

inline std::string svg_num(double v) { return fmt_g(v, 6); }

} // namespace detail

// Box plot, one box per (label, sample) group, Tukey 1.5*IQR whiskers,
// outliers drawn as circles.
inline std::string svg_boxplot(const std::string& title,
                               const std::vector<std::pair<std::string, std::vector<double>>>&
                                   groups) {
    if (groups.empty()) throw EmptyError("svg_boxplot with no groups");
    const int w = 160 + 140 * static_cast<int>(groups.size());
    const int h = 420;
    const double top = 50.0, bottom = h - 60.0, left = 70.0;

    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (const auto& [label, vals] : groups)
        for (double v : vals) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    if (vmin == vmax) { vmin -= 0.5; vmax += 0.5; }
    const double pad = 0.05 * (vmax - vmin);
    vmin -= pad;
    vmax += pad;
    auto y_of = [&](double v) {
        return bottom - (v - vmin) / (vmax - vmin) * (bottom - top);
    };

    std::string s = detail::svg_header(w, h, title);
    // axis with min/zero/max gridlines
    for (double gv : {vmin, 0.0, vmax}) {
        if (gv < vmin || gv > vmax) continue;
        const double y = y_of(gv);
        s += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(y) +
             "\" x2=\"" + detail::svg_num(w - 30.0) + "\" y2=\"" + detail::svg_num(y) +
             "\" stroke=\"#cccccc\"/>\n";
        s += "<text x=\"" + detail::svg_num(left - 6.0) + "\" y=\"" +
             detail::svg_num(y + 4.0) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             fmt_f(gv, 3) + "</text>\n";
    }

    for (size_t g = 0; g < groups.size(); ++g) {
        const auto& [label, vals] = groups[g];
        const double cx = left + 70.0 + 140.0 * static_cast<double>(g);
        const double bw = 60.0;
        const BoxStats b = box_stats(vals);

        auto line = [&](double x1, double y1, double x2, double y2) {
            s += "<line x1=\"" + detail::svg_num(x1) + "\" y1=\"" + detail::svg_num(y1) +
                 "\" x2=\"" + detail::svg_num(x2) + "\" y2=\"" + detail::svg_num(y2) +
                 "\" stroke=\"black\"/>\n";
        };
        // whiskers
        line(cx, y_of(b.whisker_lo), cx, y_of(b.q1));
        line(cx, y_of(b.q3), cx, y_of(b.whisker_hi));
        line(cx - bw / 4, y_of(b.whisker_lo), cx + bw / 4, y_of(b.whisker_lo));
        line(cx - bw / 4, y_of(b.whisker_hi), cx + bw / 4, y_of(b.whisker_hi));
        // box + median
        s += "<rect x=\"" + detail::svg_num(cx - bw / 2) + "\" y=\"" +
             detail::svg_num(y_of(b.q3)) + "\" width=\"" + detail::svg_num(bw) +
             "\" height=\"" + detail::svg_num(y_of(b.q1) - y_of(b.q3)) +
             "\" fill=\"#dce9f6\" stroke=\"black\"/>\n";
        line(cx - bw / 2, y_of(b.median), cx + bw / 2, y_of(b.median));
        for (double o : b.outliers)
            s += "<circle cx=\"" + detail::svg_num(cx) + "\" cy=\"" +
                 detail::svg_num(y_of(o)) + "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
        s += "<text x=\"" + detail::svg_num(cx) + "\" y=\"" + detail::svg_num(bottom + 20.0) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + label +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

// Simple labeled bar chart (used for the per-technique mean AUC figure).
inline std::string svg_bars(const std::string& title,
                            const std::vector<std::pair<std::string, double>>& bars) {
    if (bars.empty()) throw EmptyError("svg_bars with no bars");
    const int w = 160 + 110 * static_cast<int>(bars.size());
    const int h = 420;
    const double top = 50.0, bottom = h - 60.0, left = 70.0;
    double vmax = 0.0;
    for (const auto& [label, v] : bars) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
    vmax *= 1.1;

    auto y_of = [&](double v) { return bottom - v / vmax * (bottom - top); };
    std::string s = detail::svg_header(w, h, title);
    for (size_t i = 0; i < bars.size(); ++i) {
        const auto& [label, v] = bars[i];
        const double cx = left + 55.0 + 110.0 * static_cast<double>(i);
        const double bw = 70.0;
        s += "<rect x=\"" + detail::svg_num(cx - bw / 2) + "\" y=\"" +
             detail::svg_num(y_of(v)) + "\" width=\"" + detail::svg_num(bw) +
             "\" height=\"" + detail::svg_num(bottom - y_of(v)) +
             "\" fill=\"#9fc5e8\" stroke=\"black\"/>\n";
        s += "<text x=\"" + detail::svg_num(cx) + "\" y=\"" +
             detail::svg_num(y_of(v) - 6.0) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             fmt_f(v, 3) + "</text>\n";
        s += "<text x=\"" + detail::svg_num(cx) + "\" y=\"" + detail::svg_num(bottom + 20.0) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + label +
             "</text>\n";
    }
    s += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(bottom) +
         "\" x2=\"" + detail::svg_num(w - 30.0) + "\" y2=\"" + detail::svg_num(bottom) +
         "\" stroke=\"black\"/>\n";
    s += "</svg>\n";
    return s;
}

// --- markdown (human summary) ---

inline std::string markdown_report(const ExperimentReport& rep) {
    const DirectionalChecks dir = directional_checks(rep);
    std::string md = "# Experiment report\n\n";

    md += "## Sanity check: defect-rate drift between project halves\n\n";
    md += "| dataset | first rate | second rate | diff | rel. diff | p | odds ratio | significant |\n";
    md += "|---|---|---|---|---|---|---|---|\n";
    int sig = 0, computed = 0;
    for (const auto& r : rep.sanity) {
        if (!r.computed) {
            md += "| " + r.dataset + " | (failed: " + r.failure + ") | | | | | | |\n";
            continue;
        }
        ++computed;
        sig += r.significant ? 1 : 0;
        md += "| " + r.dataset + " | " + fmt_f(r.first_rate) + " | " + fmt_f(r.second_rate) +
              " | " + fmt_f(r.difference) + " | " +
              fmt_f(100.0 * r.relative_difference, 0) + "% | " + fmt_g(r.fisher.p_value, 3) +
              " | " + fmt_f(r.fisher.effect_size, 2) + " | " +
              (r.significant ? "yes" : "no") + " |\n";
    }
    md += "\nDatasets with p < 0.05: " + std::to_string(sig) + " of " +
          std::to_string(computed) + "\n\n";

    if (rep.anova) {
        md += "## RQ1: does accuracy vary among classifiers and EPV groups?\n\n";
        md += "| factor | F | p | eta^2 |\n|---|---|---|---|\n";
        md += "| classifier | " + fmt_f(rep.anova->factor_a.statistic) + " | " +
              fmt_g(rep.anova->factor_a.p_value, 3) + " | " +
              fmt_f(rep.anova->factor_a.effect_size) + " |\n";
        md += "| EPV | " + fmt_f(rep.anova->factor_b.statistic) + " | " +
              fmt_g(rep.anova->factor_b.p_value, 3) + " | " +
              fmt_f(rep.anova->factor_b.effect_size) + " |\n";
        md += "| residual | | | " + fmt_f(rep.anova->eta_sq_residual) + " |\n\n";
    }

    md += "## RQ2: technique evaluations\n\n";
    md += "| dataset | technique | selected | estimated AUC | actual AUC | bias | abs. bias |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& e : rep.evaluations)
        md += "| " + e.dataset + " | " + e.technique + " | " + e.selected + " | " +
              fmt_f(e.estimated_auc) + " | " + fmt_f(e.actual_auc) + " | " + fmt_f(e.bias) +
              " | " + fmt_f(e.absolute_bias) + " |\n";

    md += "\n## Baselines (actual last-release AUC)\n\n";
    md += "| dataset | worst | medium | best |\n|---|---|---|---|\n";
    for (const auto& [name, b] : rep.baselines)
        md += "| " + name + " | " + fmt_f(b.worst_auc) + " | " + fmt_f(b.medium_auc) + " | " +
              fmt_f(b.best_auc) + " |\n";

    if (!rep.hypotheses.empty()) {
        md += "\n## Hypothesis tests\n\n";
        md += "| hypothesis | method | statistic | p | effect size |\n|---|---|---|---|---|\n";
        for (const auto& [name, r] : rep.hypotheses)
            md += "| " + name + " | " + r.method + " | " + fmt_f(r.statistic) + " | " +
                  fmt_g(r.p_value, 3) + " | " + fmt_f(r.effect_size) + " (" + r.effect_kind +
                  ") |\n";
    }

    md += "\n## Directional findings\n\n";
    if (dir.have_walk_forward) {
        md += "- Walk-forward mean technique AUC " + fmt_f(dir.walk_forward_mean_auc) +
              (dir.walk_forward_beats_medium_mean ? " exceeds" : " does not exceed") +
              " the medium-baseline mean " + fmt_f(dir.medium_mean_auc) + " (" +
              fmt_f(dir.improvement_over_medium_pct, 1) + "% relative).\n";
        md += "- Walk-forward beats the medium baseline on " +
              std::to_string(dir.walk_forward_beats_medium_datasets) + " of " +
              std::to_string(dir.datasets_total) + " datasets.\n";
    }
    md += "- Median bias per technique:";
    for (const auto& [tech, b] : dir.median_bias) md += " " + tech + "=" + fmt_f(b);
    md += "; all positive: ";
    md += dir.all_median_bias_positive ? "yes" : "no";
    md += ".\n";

    if (!rep.exclusions.empty()) {
        md += "\n## Excluded / skipped cells\n\n";
        for (const auto& e : rep.exclusions)
            md += "- `" + e.cell + "`: " + e.reason + "\n";
    }
    return md;
}

} // namespace relval
