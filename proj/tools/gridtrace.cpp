#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gridtrace/fidelity.hpp"
#include "gridtrace/ingest.hpp"
#include "gridtrace/kpi.hpp"
#include "gridtrace/report.hpp"
#include "gridtrace/simulator.hpp"
#include "gridtrace/smote.hpp"

namespace fs = std::filesystem;
using namespace gridtrace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TraceBundle load_jobs(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return parse_jobs(in);
    } catch (const HeaderMissing& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const EmptyInput& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::map<std::string, SiteProfile> load_sites(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return parse_sites(in);
    } catch (const std::runtime_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::vector<GenRecord> load_gen(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return read_gen_csv(in);
    } catch (const std::runtime_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void report_rejects(const TraceBundle& bundle) {
    if (bundle.rejects.empty()) return;
    std::cerr << "warning: " << bundle.rejects.size()
              << " rejected row(s):\n";
    std::size_t shown = 0;
    for (const auto& r : bundle.rejects) {
        if (shown++ == 10) {
            std::cerr << "  ...\n";
            break;
        }
        std::cerr << "  line " << r.line << ": " << r.reason << '\n';
    }
}

int cmd_ingest_check(const fs::path& jobs_path,
                     const std::optional<fs::path>& sites_path) {
    TraceBundle bundle = load_jobs(jobs_path);
    report_rejects(bundle);
    std::cout << "jobs: " << bundle.jobs.size()
              << "\nrejects: " << bundle.rejects.size() << '\n';
    if (sites_path) {
        auto sites = load_sites(*sites_path);
        std::cout << "sites: " << sites.size() << '\n';
        std::size_t unknown = 0;
        for (const auto& j : bundle.jobs)
            if (!sites.count(j.computing_site)) ++unknown;
        std::cout << "jobs at unlisted sites: " << unknown << '\n';
    }
    if (bundle.jobs.empty())
        throw InputError("all rows rejected");
    return kExitOk;
}

int cmd_analyze(const fs::path& jobs_path, const fs::path& sites_path,
                const fs::path& out_dir, double threshold,
                const std::string& wasted_metric, std::size_t bins) {
    TraceBundle bundle = load_jobs(jobs_path);
    report_rejects(bundle);
    if (bundle.jobs.empty()) throw InputError("all rows rejected");
    auto sites = load_sites(sites_path);

    fs::create_directories(out_dir);
    kpi::WastedMetric metric = wasted_metric == "cpu"
                                   ? kpi::WastedMetric::CpuTime
                                   : kpi::WastedMetric::WallClockCores;

    report::write_status_json(out_dir / "status_distribution.json",
                              kpi::status_distribution(bundle.jobs));
    report::write_error_breakdown_json(out_dir / "error_breakdown.json",
                                       kpi::error_breakdown(bundle.jobs));
    report::write_histogram_csv(
        out_dir / "queue_time_histogram.csv",
        kpi::queue_time_histogram(bundle.jobs, kpi::default_queue_bins(bins)));
    report::write_wasted_csv(out_dir / "wasted_core_hours.csv",
                             kpi::wasted_core_hours(bundle.jobs, metric));
    report::write_site_share_csv(
        out_dir / "site_share_jobcount.csv",
        kpi::site_share(bundle.jobs, kpi::ShareWeight::JobCount, threshold));
    // A trace may record no input bytes at all; the bytes-weighted share
    // is then undefined and the table is emitted empty.
    kpi::SiteShare by_bytes;
    by_bytes.threshold = threshold;
    try {
        by_bytes =
            kpi::site_share(bundle.jobs, kpi::ShareWeight::InputBytes, threshold);
    } catch (const kpi::KpiEmptyInput&) {
    }
    report::write_site_share_csv(out_dir / "site_share_bytes.csv", by_bytes);

    report::write_manifest(
        out_dir / "run_manifest.json", "analyze",
        {{"jobs", jobs_path}, {"sites", sites_path}},
        {{"threshold_others", std::to_string(threshold)},
         {"wasted_metric", wasted_metric},
         {"bins", std::to_string(bins)}},
        0,
        {"status_distribution.json", "error_breakdown.json",
         "queue_time_histogram.csv", "wasted_core_hours.csv",
         "site_share_jobcount.csv", "site_share_bytes.csv"});
    return kExitOk;
}

std::vector<GenRecord> jobs_to_gen(const TraceBundle& bundle,
                                   const std::map<std::string, SiteProfile>&
                                       sites,
                                   std::size_t& skipped) {
    std::vector<GenRecord> records;
    for (const auto& j : bundle.jobs) {
        auto it = sites.find(j.computing_site);
        if (it == sites.end() || !j.cpu_time) {
            ++skipped;
            continue;
        }
        records.push_back(to_gen_record(j, it->second));
    }
    return records;
}

int cmd_synth(const fs::path& jobs_path, const fs::path& sites_path,
              const fs::path& out_dir, int k, std::uint64_t seed,
              bool zscore, bool log_space) {
    TraceBundle bundle = load_jobs(jobs_path);
    report_rejects(bundle);
    auto sites = load_sites(sites_path);
    std::size_t skipped = 0;
    auto records = jobs_to_gen(bundle, sites, skipped);
    if (skipped)
        std::cerr << "warning: " << skipped
                  << " job(s) skipped (unlisted site or missing cputime)\n";

    smote::SmoteOptions options;
    if (zscore) options.normalization = smote::Normalization::ZScore;
    if (log_space) options.log_features = {"inputfilebytes", "workload"};

    smote::SmoteModel model;
    try {
        model = smote::fit(records, k, seed, options);
    } catch (const smote::TooFewRows& e) {
        throw InputError(std::string("TooFewRows: ") + e.what());
    }

    auto synthetic = smote::synthesize_matching(model);
    std::stable_sort(synthetic.begin(), synthetic.end(),
                     [](const GenRecord& a, const GenRecord& b) {
                         return a.creation_time < b.creation_time;
                     });

    fs::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "synthetic.csv", std::ios::binary);
        write_gen_csv(out, synthetic);
    }
    {
        std::ofstream out(out_dir / "model.json", std::ios::binary);
        smote::save_model(out, model);
    }
    auto rep = fidelity::compare(records, synthetic);
    report::write_fidelity_json(out_dir / "fidelity.json", rep);
    report::write_overlays_csv(out_dir / "overlays.csv", rep);

    report::write_manifest(
        out_dir / "run_manifest.json", "synth",
        {{"jobs", jobs_path}, {"sites", sites_path}},
        {{"k", std::to_string(k)},
         {"normalization", zscore ? "zscore" : "minmax"},
         {"log_space", log_space ? "true" : "false"}},
        seed, {"synthetic.csv", "model.json", "fidelity.json", "overlays.csv"});
    return kExitOk;
}

int cmd_evaluate(const fs::path& real_path, const fs::path& synth_path,
                 const fs::path& out_dir) {
    auto real = load_gen(real_path);
    auto synth = load_gen(synth_path);
    if (real.empty() || synth.empty())
        throw InputError("evaluate needs nonempty tables");
    auto rep = fidelity::compare(real, synth);
    fs::create_directories(out_dir);
    report::write_fidelity_json(out_dir / "fidelity.json", rep);
    report::write_overlays_csv(out_dir / "overlays.csv", rep);
    report::write_manifest(out_dir / "run_manifest.json", "evaluate",
                           {{"real", real_path}, {"synth", synth_path}}, {}, 0,
                           {"fidelity.json", "overlays.csv"});
    std::cout << "overall: " << rep.overall << '\n';
    return kExitOk;
}

int cmd_simulate(const fs::path& scenario_path, const fs::path& out_dir,
                 const std::optional<std::string>& policy_override,
                 const std::optional<std::uint64_t>& seed_override) {
    sim::Scenario scenario;
    try {
        scenario = report::load_scenario(scenario_path);
    } catch (const sim::InvalidScenario& e) {
        throw InputError(e.what());
    }
    if (policy_override) {
        auto p = sim::parse_policy(*policy_override);
        if (!p) throw InputError("unknown policy '" + *policy_override + "'");
        scenario.policy = *p;
    }
    if (seed_override) scenario.seed = *seed_override;

    sim::SimResult result;
    try {
        result = sim::run(scenario);
    } catch (const sim::InvalidScenario& e) {
        throw InputError(e.what());
    } catch (const sim::InvalidPolicyParams& e) {
        throw InputError(e.what());
    } catch (const sim::InfeasibleJob& e) {
        throw InputError(e.what());
    }

    fs::create_directories(out_dir);
    report::write_sim_summary_json(out_dir / "summary.json", scenario, result);
    report::write_events_csv(out_dir / "events.csv", result.event_log);
    {
        // Simulated trace in the jobs-CSV schema so `analyze` can consume it.
        std::ofstream out(out_dir / "sim_jobs.csv", std::ios::binary);
        write_jobs_csv(out, sim::events_to_jobs(result.event_log));
    }
    report::write_manifest(out_dir / "run_manifest.json", "simulate",
                           {{"scenario", scenario_path}},
                           {{"policy", sim::to_string(scenario.policy)}},
                           scenario.seed,
                           {"summary.json", "events.csv", "sim_jobs.csv"});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workload-trace introspection toolkit: KPI analysis, "
                 "synthetic workload generation, and what-if scheduling "
                 "simulation"};
    app.require_subcommand(1);

    fs::path jobs_path, sites_path, out_dir = ".", scenario_path;
    fs::path real_path, synth_path;
    std::optional<fs::path> check_sites;
    double threshold = 0.019;
    std::string wasted_metric = "wall";
    std::size_t bins = 30;
    int k = 5;
    std::uint64_t seed = 0;
    bool zscore = false, log_space = false;
    std::optional<std::string> policy_override;
    std::optional<std::uint64_t> seed_override;

    auto* check = app.add_subcommand("ingest-check",
                                     "Validate a jobs CSV and report rejects");
    check->add_option("jobs", jobs_path, "jobs CSV")->required();
    check->add_option("--sites", check_sites, "sites CSV to cross-check");

    auto* analyze =
        app.add_subcommand("analyze", "Compute KPI reports from a trace");
    analyze->add_option("jobs", jobs_path, "jobs CSV")->required();
    analyze->add_option("sites", sites_path, "sites CSV")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--threshold-others", threshold,
                        "site-share folding threshold");
    analyze->add_option("--wasted-metric", wasted_metric,
                        "wall (cores x runtime) or cpu");
    analyze->add_option("--bins", bins, "queue-time histogram bin count");

    auto* synth = app.add_subcommand(
        "synth", "Fit the generator and write a size-matched synthetic table");
    synth->add_option("jobs", jobs_path, "jobs CSV")->required();
    synth->add_option("sites", sites_path, "sites CSV")->required();
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--k", k, "neighbor count");
    synth->add_option("--seed", seed, "random seed");
    synth->add_flag("--zscore", zscore, "z-score normalization");
    synth->add_flag("--log-space", log_space,
                    "interpolate heavy-tailed columns in log space");

    auto* evaluate = app.add_subcommand(
        "evaluate", "Per-feature fidelity between two GenRecord tables");
    evaluate->add_option("real", real_path, "reference CSV")->required();
    evaluate->add_option("synth", synth_path, "candidate CSV")->required();
    evaluate->add_option("--out", out_dir, "output directory")->required();

    auto* simulate =
        app.add_subcommand("simulate", "Replay a workload through the "
                                       "discrete-event grid simulator");
    simulate->add_option("scenario", scenario_path, "scenario JSON")
        ->required();
    simulate->add_option("--out", out_dir, "output directory")->required();
    simulate->add_option("--policy", policy_override,
                         "override the scenario's policy");
    simulate->add_option("--seed", seed_override,
                         "override the scenario's seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_ingest_check(jobs_path, check_sites);
        if (analyze->parsed())
            return cmd_analyze(jobs_path, sites_path, out_dir, threshold,
                               wasted_metric, bins);
        if (synth->parsed())
            return cmd_synth(jobs_path, sites_path, out_dir, k, seed, zscore,
                             log_space);
        if (evaluate->parsed())
            return cmd_evaluate(real_path, synth_path, out_dir);
        if (simulate->parsed())
            return cmd_simulate(scenario_path, out_dir, policy_override,
                                seed_override);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
