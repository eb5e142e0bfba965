// Command-line workbench: ingest datasets, run the sanity check, execute the
// full meta-validation experiment, and re-render persisted reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relval/relval.hpp"

namespace fs = std::filesystem;
using namespace relval;

namespace {

int cmd_ingest(const std::vector<std::string>& manifests, const std::string& out_dir,
               const std::string& format) {
    int failures = 0;
    nlohmann::json all = nlohmann::json::array();
    for (const auto& path : manifests) {
        try {
            const ProjectDataset ds = load_dataset_from_manifest_file(path);
            const IngestSummary s = summarize(ds);
            if (!out_dir.empty())
                write_file(fs::path(out_dir) / (ds.project_name + ".csv"),
                           to_canonical_csv(ds));
            if (format == "json")
                all.push_back(s.to_json());
            else
                std::cout << s.to_text() << "\n";
        } catch (const std::exception& e) {
            std::cerr << "error: " << path << ": " << e.what() << "\n";
            ++failures;
        }
    }
    if (format == "json") std::cout << all.dump(2) << "\n";
    return failures ? 1 : 0;
}

int cmd_sanity_check(const std::vector<std::string>& manifests, const std::string& out_path,
                     const std::string& format) {
    std::vector<SanityRow> rows;
    for (const auto& path : manifests) {
        SanityRow row;
        try {
            row = sanity_check_dataset(load_dataset_from_manifest_file(path));
        } catch (const std::exception& e) {
            row.dataset = path;
            row.failure = e.what();
            std::cerr << "error: " << path << ": " << e.what() << "\n";
        }
        rows.push_back(std::move(row));
    }

    std::string rendered;
    if (format == "csv") {
        rendered = sanity_csv(rows);
    } else if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) j.push_back(r.to_json());
        rendered = j.dump(2) + "\n";
    } else if (format == "markdown") {
        ExperimentReport stub;
        stub.sanity = rows;
        // reuse the report renderer's sanity section only
        rendered = "| dataset | first rate | second rate | diff | rel. diff | p | odds ratio |"
                   " significant |\n|---|---|---|---|---|---|---|---|\n";
        int sig = 0, computed = 0;
        for (const auto& r : rows) {
            if (!r.computed) {
                rendered += "| " + r.dataset + " | (failed) | | | | | | |\n";
                continue;
            }
            ++computed;
            sig += r.significant ? 1 : 0;
            rendered += "| " + r.dataset + " | " + fmt_f(r.first_rate) + " | " +
                        fmt_f(r.second_rate) + " | " + fmt_f(r.difference) + " | " +
                        fmt_f(100.0 * r.relative_difference, 0) + "% | " +
                        fmt_g(r.fisher.p_value, 3) + " | " + fmt_f(r.fisher.effect_size, 2) +
                        " | " + (r.significant ? "yes" : "no") + " |\n";
        }
        rendered += "\nDatasets with p < 0.05: " + std::to_string(sig) + " of " +
                    std::to_string(computed) + "\n";
    } else {
        throw UnknownFormatError("unknown format '" + format + "' for sanity-check");
    }

    if (out_path.empty())
        std::cout << rendered;
    else
        write_file(out_path, rendered);

    for (const auto& r : rows)
        if (!r.computed) return 1;
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<uint64_t> seed_override,
            std::optional<int> workers_override, const std::string& out_override,
            const std::vector<std::string>& format_override) {
    nlohmann::json cfg_json = nlohmann::json::parse(read_file(config_path));
    RunConfig cfg = run_config_from_json(cfg_json);
    if (seed_override) cfg.seed = *seed_override;
    if (workers_override) cfg.workers = *workers_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (!format_override.empty()) cfg.formats = format_override;
    cfg.validate();

    const fs::path base = fs::path(config_path).parent_path();
    std::vector<ProjectDataset> datasets;
    for (const auto& mp : cfg.manifest_paths) {
        fs::path p(mp);
        if (p.is_relative()) p = base / p;
        datasets.push_back(load_dataset_from_manifest_file(p));
    }

    const ExperimentReport rep = run_experiment(cfg, datasets);
    const auto written = write_report_files(rep, cfg.formats, cfg.output_dir);
    for (const auto& f : written) std::cerr << "wrote " << f << "\n";
    std::cerr << rep.runtime.dump() << "\n";

    if (has_fatal_failure(cfg, rep)) {
        std::cerr << "error: a configured technique produced no evaluation\n";
        return 1;
    }
    return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir,
               const std::vector<std::string>& formats) {
    const ExperimentReport rep =
        ExperimentReport::from_json(nlohmann::json::parse(read_file(report_path)));
    const auto written = write_report_files(
        rep, formats.empty() ? std::vector<std::string>{"markdown", "svg"} : formats, out_dir);
    for (const auto& f : written) std::cerr << "wrote " << f << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Release-ordered model-validation workbench"};
    app.require_subcommand(1);

    std::vector<std::string> manifests;
    std::string ingest_out, sanity_out, run_out, report_out = "out";
    std::vector<std::string> formats;
    std::string ingest_format = "text", sanity_format = "markdown";
    std::string config_path;
    std::string report_path;
    std::optional<uint64_t> seed_override;
    std::optional<int> workers_override;

    auto* ingest = app.add_subcommand("ingest", "Parse manifests, write canonical CSVs, "
                                                "print release/observation/EPV summaries");
    ingest->add_option("manifests", manifests, "dataset manifest JSON files")->required();
    ingest->add_option("--out", ingest_out, "directory for canonical CSVs");
    ingest->add_option("--format", ingest_format, "text|json");

    auto* sanity = app.add_subcommand("sanity-check",
                                      "Defect-rate drift between project halves");
    sanity->add_option("manifests", manifests, "dataset manifest JSON files")->required();
    sanity->add_option("--out", sanity_out, "output file (stdout when omitted)");
    sanity->add_option("--format", sanity_format, "markdown|csv|json");

    auto* run = app.add_subcommand("run", "Execute the full experiment from a config");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--workers", workers_override, "override the worker count");
    run->add_option("--out", run_out, "override the output directory");
    run->add_option("--format", formats, "override report formats (repeatable)");

    auto* report = app.add_subcommand("report", "Re-render a persisted report.json");
    report->add_option("report", report_path, "path to report.json")->required();
    report->add_option("--out", report_out, "output directory");
    report->add_option("--format", formats, "formats to render (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(manifests, ingest_out, ingest_format);
        if (*sanity) return cmd_sanity_check(manifests, sanity_out, sanity_format);
        if (*run) return cmd_run(config_path, seed_override, workers_override, run_out, formats);
        if (*report) return cmd_report(report_path, report_out, formats);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
