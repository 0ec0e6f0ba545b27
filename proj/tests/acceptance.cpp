// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails or exceeds its runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridtrace/fidelity.hpp"
#include "gridtrace/ingest.hpp"
#include "gridtrace/kpi.hpp"
#include "gridtrace/report.hpp"
#include "gridtrace/rng.hpp"
#include "gridtrace/simulator.hpp"
#include "gridtrace/smote.hpp"
#include "test_support.hpp"

using namespace gridtrace;
using gridtrace::testing::TempDir;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& msg) { g_notes.push_back(msg); }

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Runs one criterion, timing it against its budget (seconds; 0 = none).
void criterion(int id, const std::string& name, double budget,
               bool (*body)()) {
    g_notes.clear();
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body();
    } catch (const std::exception& e) {
        note(std::string("exception: ") + e.what());
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (budget > 0 && secs > budget) {
        ok = false;
        note("runtime " + std::to_string(secs) + " s exceeds budget " +
             std::to_string(budget) + " s");
    }
    std::printf("criterion %2d: %-38s %s (%.2f s)\n", id, name.c_str(),
                ok ? "PASS" : "FAIL", secs);
    if (!ok) {
        ++g_failures;
        for (const auto& m : g_notes) std::printf("    - %s\n", m.c_str());
    }
}

// ---------------------------------------------------------------------------

bool c1_multi_error_accounting() {
    std::vector<JobRecord> jobs;
    for (int i = 0; i < 83; ++i)
        jobs.push_back(testing::make_job("s" + std::to_string(i), 0, 10, 20,
                                         "S1", JobStatus::Failed, {1305}));
    for (int i = 0; i < 17; ++i)
        jobs.push_back(testing::make_job("d" + std::to_string(i), 0, 10, 20,
                                         "S1", JobStatus::Failed,
                                         {1305, 1361}));
    auto b = kpi::error_breakdown(jobs);
    if (b.total_failed != 100) {
        note("total_failed != 100");
        return false;
    }
    if (b.multi_reason_failed != 17) {
        note("multi_reason_failed != 17");
        return false;
    }
    if (b.percent_sum != 1.17) {
        note("percent_sum " + std::to_string(b.percent_sum) + " != 1.17");
        return false;
    }
    return true;
}

bool c2_others_folding() {
    // 50 major sites (100 jobs each) and 150 minor sites (1 job each):
    // major share = 100/5150 ~ 0.0194 >= 0.019, minor ~ 0.00019 < 0.019.
    std::vector<JobRecord> jobs;
    int id = 0;
    for (int s = 0; s < 200; ++s) {
        char name[16];
        std::snprintf(name, sizeof name, "site%03d", s);
        int count = s < 50 ? 100 : 1;
        for (int i = 0; i < count; ++i)
            jobs.push_back(testing::make_job("j" + std::to_string(id++), 0, 1,
                                             2, name));
    }
    auto s = kpi::site_share(jobs, kpi::ShareWeight::JobCount, 0.019);
    if (s.shares.size() != 50) {
        note("expected 50 named sites, got " +
             std::to_string(s.shares.size()));
        return false;
    }
    double total = s.others_bucket;
    for (const auto& [site, frac] : s.shares) {
        if (frac < 0.019) {
            note("named site below threshold: " + site);
            return false;
        }
        total += frac;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        note("shares sum to " + std::to_string(total));
        return false;
    }
    return true;
}

bool c3_endpoint_exactness() {
    Rng rng(31);
    auto records = testing::random_gen_records(rng, 300, 4);
    auto model = smote::fit(records, 5, 7);
    const char* num_names[] = {"creationtime", "ninputdatafiles",
                               "inputfilebytes", "workload"};
    auto numeric = [](const GenRecord& r) {
        return std::vector<double>{r.creation_time, r.n_input_files,
                                   r.input_file_bytes, r.workload};
    };
    for (double lambda : {0.0, 1.0}) {
        smote::SampleTrace trace;
        auto synth = smote::sample(model, 1000, 0, lambda, &trace);
        if (synth.size() != 1000 || trace.picks.size() != 1000) {
            note("unexpected sample size");
            return false;
        }
        for (std::size_t i = 0; i < synth.size(); ++i) {
            std::size_t src = lambda == 0.0 ? trace.picks[i].base
                                            : trace.picks[i].neighbor;
            auto want = numeric(smote::training_record(model, src));
            auto got = numeric(synth[i]);
            for (int f = 0; f < 4; ++f) {
                if (!close(got[f], want[f], 1e-9)) {
                    note(std::string(num_names[f]) + " row " +
                         std::to_string(i) + ": " + std::to_string(got[f]) +
                         " vs " + std::to_string(want[f]));
                    return false;
                }
            }
        }
    }
    return true;
}

bool c4_neighbor_correctness() {
    Rng rng(41);
    for (int table = 0; table < 50; ++table) {
        auto records = testing::random_gen_records(rng, 200, 3);
        for (int k : {1, 5, 10}) {
            auto model = smote::fit(records, k, 1);
            std::vector<smote::EncodedRow> rows;
            rows.reserve(200);
            for (std::size_t i = 0; i < 200; ++i)
                rows.push_back(smote::encoded_row(model, i));
            for (std::size_t i = 0; i < 200; ++i) {
                // exhaustive (distance, index) sort
                std::vector<std::pair<double, std::uint32_t>> all;
                for (std::uint32_t j = 0; j < 200; ++j) {
                    if (j == i) continue;
                    all.emplace_back(
                        smote::mixed_distance(rows[i], rows[j], model), j);
                }
                std::sort(all.begin(), all.end());
                auto got = smote::neighbors_of(model, i);
                for (int j = 0; j < k; ++j) {
                    if (got[j] != all[j].second) {
                        note("table " + std::to_string(table) + " k=" +
                             std::to_string(k) + " row " + std::to_string(i) +
                             " neighbor " + std::to_string(j) + ": " +
                             std::to_string(got[j]) + " vs " +
                             std::to_string(all[j].second));
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

// Known mixture: 5 sites with fixed frequencies, log-normal
// input_file_bytes, geometric n_input_files, site-dependent log-normal
// workload.
std::vector<GenRecord> known_generator(std::uint64_t seed, std::size_t n) {
    static const char* sites[] = {"A", "B", "C", "D", "E"};
    static const double cdf[] = {0.40, 0.65, 0.80, 0.92, 1.00};
    static const double mu[] = {10.0, 11.0, 12.0, 13.0, 14.0};
    Rng rng(seed);
    std::vector<GenRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        GenRecord r;
        double u = rng.uniform01();
        int s = 0;
        while (u >= cdf[s]) ++s;
        r.computing_site = sites[s];
        r.creation_time = 1.7e9 + rng.uniform01() * 1e6;
        r.project = "mc23";
        r.prod_step = "simul";
        r.data_type = "AOD";
        // geometric, p = 0.5
        r.n_input_files = std::floor(std::log(rng.uniform01_open_low()) /
                                     std::log(1.0 - 0.5));
        r.input_file_bytes = std::exp(20.0 + rng.normal());
        r.job_status = rng.uniform01() < 0.85 ? "finished" : "failed";
        r.workload = std::exp(mu[s] + 0.5 * rng.normal());
        out.push_back(std::move(r));
    }
    return out;
}

bool c5_marginal_fidelity() {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto real = known_generator(seed, 10000);
        smote::SmoteOptions options;
        options.log_features = {"inputfilebytes", "workload"};
        auto model = smote::fit(real, 5, seed, options);
        auto synth = smote::synthesize_matching(model);
        auto rep = fidelity::compare(real, synth);
        for (const auto& [name, score] : rep.per_feature) {
            if (score >= 0.05) {
                note("seed " + std::to_string(seed) + " feature " + name +
                     " score " + std::to_string(score));
                return false;
            }
        }
    }
    return true;
}

bool c6_kpi_oracle() {
    Rng rng(61);
    auto bins = kpi::default_queue_bins();
    for (int trace = 0; trace < 100; ++trace) {
        auto jobs = testing::random_jobs(rng, 1 + rng.uniform_index(1000));

        // status distribution
        std::map<JobStatus, std::uint64_t> status{{JobStatus::Finished, 0},
                                                  {JobStatus::Failed, 0},
                                                  {JobStatus::Closed, 0},
                                                  {JobStatus::Cancelled, 0}};
        for (const auto& j : jobs) ++status[j.job_status];
        if (kpi::status_distribution(jobs) != status) {
            note("status_distribution mismatch");
            return false;
        }

        // error breakdown
        std::map<int, std::uint64_t> per_code;
        std::uint64_t failed = 0, multi = 0, stray = 0, codes = 0;
        for (const auto& j : jobs) {
            if (j.job_status == JobStatus::Failed) {
                ++failed;
                if (j.error_codes.size() > 1) ++multi;
                for (int c : j.error_codes) ++per_code[c], ++codes;
            } else if (!j.error_codes.empty()) {
                ++stray;
            }
        }
        auto eb = kpi::error_breakdown(jobs);
        double psum = failed ? static_cast<double>(codes) / failed : 0.0;
        if (eb.per_code != per_code || eb.total_failed != failed ||
            eb.multi_reason_failed != multi ||
            eb.non_failed_with_codes != stray ||
            !close(eb.percent_sum, psum, 1e-12)) {
            note("error_breakdown mismatch");
            return false;
        }

        // queue-time histogram
        std::vector<std::uint64_t> counts(bins.size() - 1, 0);
        std::uint64_t under = 0, over = 0, excl = 0;
        for (const auto& j : jobs) {
            if (!j.start_time) {
                ++excl;
                continue;
            }
            double q = static_cast<double>(*j.start_time - j.creation_time);
            if (q < bins.front()) {
                ++under;
            } else if (q >= bins.back()) {
                ++over;
            } else {
                std::size_t b = 0;
                while (q >= bins[b + 1]) ++b;
                ++counts[b];
            }
        }
        auto h = kpi::queue_time_histogram(jobs, bins);
        if (h.counts != counts || h.underflow != under || h.overflow != over ||
            h.excluded != excl) {
            note("queue_time_histogram mismatch");
            return false;
        }

        // wasted core-hours, both metrics
        for (auto metric :
             {kpi::WastedMetric::WallClockCores, kpi::WastedMetric::CpuTime}) {
            std::map<std::vector<int>, std::vector<double>> want;
            for (const auto& j : jobs) {
                if (j.job_status != JobStatus::Failed || !j.start_time ||
                    !j.end_time)
                    continue;
                double hours =
                    metric == kpi::WastedMetric::WallClockCores
                        ? j.cores *
                              static_cast<double>(*j.end_time - *j.start_time) /
                              3600.0
                        : j.cpu_time.value_or(0.0) / 3600.0;
                want[{j.error_codes.begin(), j.error_codes.end()}].push_back(
                    hours);
            }
            auto got = kpi::wasted_core_hours(jobs, metric);
            if (got.size() != want.size()) {
                note("wasted_core_hours key mismatch");
                return false;
            }
            for (const auto& [key, vals] : want) {
                auto it = got.find(key);
                if (it == got.end() || it->second.size() != vals.size()) {
                    note("wasted_core_hours entry mismatch");
                    return false;
                }
                for (std::size_t i = 0; i < vals.size(); ++i)
                    if (!close(it->second[i], vals[i], 1e-9)) {
                        note("wasted_core_hours value mismatch");
                        return false;
                    }
            }
        }

        // site shares, both weights
        for (auto weight :
             {kpi::ShareWeight::JobCount, kpi::ShareWeight::InputBytes}) {
            std::map<std::string, double> totals;
            double grand = 0.0;
            for (const auto& j : jobs) {
                double w = weight == kpi::ShareWeight::JobCount
                               ? 1.0
                               : static_cast<double>(j.input_file_bytes);
                totals[j.computing_site] += w;
                grand += w;
            }
            if (grand <= 0.0) continue;
            std::map<std::string, double> named;
            double others = 0.0;
            for (const auto& [site, w] : totals) {
                double frac = w / grand;
                (frac >= 0.019 ? named[site] : others) += frac;
            }
            auto s = kpi::site_share(jobs, weight);
            if (s.shares.size() != named.size() ||
                !close(s.others_bucket, others, 1e-12)) {
                note("site_share mismatch");
                return false;
            }
            for (const auto& [site, frac] : named)
                if (!close(s.shares.at(site), frac, 1e-12)) {
                    note("site_share fraction mismatch");
                    return false;
                }
        }
    }
    return true;
}

bool c7_sim_conservation_capacity() {
    Rng rng(71);
    for (int rep = 0; rep < 100; ++rep) {
        sim::Scenario sc;
        std::size_t n_sites = 1 + rng.uniform_index(5);
        for (std::size_t s = 0; s < n_sites; ++s)
            sc.sites.push_back({"site" + std::to_string(s),
                                static_cast<int>(1 + rng.uniform_index(16)),
                                0.5 + rng.uniform01() * 4});
        auto records = testing::random_gen_records(
            rng, 1 + rng.uniform_index(500), n_sites);
        std::stable_sort(records.begin(), records.end(),
                         [](const GenRecord& a, const GenRecord& b) {
                             return a.creation_time < b.creation_time;
                         });
        sc.workload = records;
        sc.policy = static_cast<sim::PolicyKind>(rng.uniform_index(4));
        sc.seed = rng.next_u64();
        sc.replay_failures = rep % 2 == 0;
        if (rep % 3 == 0) sc.site_failure_prob[sc.sites[0].site_name] = 0.3;
        auto res = sim::run(sc);

        // conservation: every job has exactly one terminal state
        if (res.per_job.size() != records.size()) {
            note("rep " + std::to_string(rep) + ": job count mismatch");
            return false;
        }
        std::size_t arrivals = 0, terminals = 0;
        std::map<std::uint64_t, int> term_count;
        for (const auto& ev : res.event_log) {
            if (ev.kind == sim::EventKind::Arrival) ++arrivals;
            if (ev.kind == sim::EventKind::Finish ||
                ev.kind == sim::EventKind::Fail)
                ++term_count[ev.job_id], ++terminals;
        }
        for (const auto& [id, out] : res.per_job) {
            int expect = out.outcome == sim::Outcome::Queued ? 0 : 1;
            if (term_count[id] != expect) {
                note("rep " + std::to_string(rep) + ": job " +
                     std::to_string(id) + " terminal event count " +
                     std::to_string(term_count[id]));
                return false;
            }
        }
        if (arrivals != records.size()) {
            note("rep " + std::to_string(rep) + ": arrival count mismatch");
            return false;
        }

        // capacity: replay allocations against core counts
        std::map<std::string, int> cap, used;
        for (const auto& s : sc.sites) cap[s.site_name] = s.core_count;
        double prev = -1e300;
        for (const auto& ev : res.event_log) {
            if (ev.time < prev) {
                note("rep " + std::to_string(rep) + ": event order violated");
                return false;
            }
            prev = ev.time;
            int cores = res.per_job.at(ev.job_id).cores;
            if (ev.kind == sim::EventKind::Start) used[ev.site] += cores;
            if (ev.kind == sim::EventKind::Finish ||
                ev.kind == sim::EventKind::Fail)
                used[ev.site] -= cores;
            for (const auto& [site, u] : used)
                if (u < 0 || u > cap.at(site)) {
                    note("rep " + std::to_string(rep) + ": capacity at " +
                         site);
                    return false;
                }
        }
    }
    return true;
}

bool c8_sim_determinism_hand_oracle() {
    Rng rng(81);
    auto records = testing::random_gen_records(rng, 300, 4);
    std::stable_sort(records.begin(), records.end(),
                     [](const GenRecord& a, const GenRecord& b) {
                         return a.creation_time < b.creation_time;
                     });
    sim::Scenario sc;
    sc.sites = {{"A", 4, 1.0}, {"B", 8, 2.0}, {"C", 2, 0.5}, {"D", 6, 3.0}};
    sc.workload = records;
    sc.policy = sim::PolicyKind::Random;
    sc.seed = 1234;
    sc.replay_failures = true;
    auto first = sim::run(sc);
    for (int rep = 0; rep < 2; ++rep) {
        auto again = sim::run(sc);
        if (again.event_log != first.event_log ||
            again.per_job != first.per_job ||
            again.horizon != first.horizon) {
            note("repeated run diverged");
            return false;
        }
        for (const auto& [site, stats] : first.per_site) {
            const auto& other = again.per_site.at(site);
            if (other.busy_core_seconds != stats.busy_core_seconds ||
                other.utilization != stats.utilization) {
                note("per-site stats diverged");
                return false;
            }
        }
    }

    // hand oracle: one 4-core site, two simultaneous 4-core jobs with
    // service T = 400 / (4 * 1.0) = 100 -> second job waits exactly T
    sim::Scenario two;
    two.sites = {{"S1", 4, 1.0}};
    GenRecord j;
    j.computing_site = "S1";
    j.project = "p";
    j.prod_step = "simul";
    j.data_type = "d";
    j.job_status = "finished";
    j.workload = 400;
    two.workload = {j, j};
    two.cores_by_prod_step["simul"] = 4;
    auto res = sim::run(two);
    if (*res.per_job.at(0).queue_time != 0.0 ||
        *res.per_job.at(1).queue_time != 100.0) {
        note("two-job schedule mismatch");
        return false;
    }
    return true;
}

bool c9_end_to_end() {
    const char* bin = std::getenv("GRIDTRACE_BIN");
    if (!bin) {
        note("GRIDTRACE_BIN not set");
        return false;
    }
    TempDir tmp;
    Rng rng(91);
    auto jobs = testing::random_jobs(rng, 10000);
    {
        std::ofstream out(tmp.path() / "jobs.csv", std::ios::binary);
        write_jobs_csv(out, jobs);
    }
    testing::write_file(
        tmp.path() / "sites.csv",
        "site,cores,gflops_per_core\n"
        "S1,100,10\nS2,50,8\nS3,200,12\nBNL,400,15\nCERN,300,14\n");
    auto run_cmd = [&](const std::string& args) {
        std::string cmd =
            std::string(bin) + " " + args + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };

    auto synth_dir = tmp.path() / "synth";
    if (run_cmd("synth " + (tmp.path() / "jobs.csv").string() + " " +
                (tmp.path() / "sites.csv").string() + " --seed 9 --out " +
                synth_dir.string()) != 0) {
        note("synth failed");
        return false;
    }
    testing::write_file(tmp.path() / "scenario.json",
                        "{\"sites\":\"sites.csv\","
                        "\"workload\":\"synth/synthetic.csv\","
                        "\"policy\":\"least_queued\",\"seed\":5,"
                        "\"replay_failures\":true}");
    auto sim_dir = tmp.path() / "sim";
    if (run_cmd("simulate " + (tmp.path() / "scenario.json").string() +
                " --out " + sim_dir.string()) != 0) {
        note("simulate failed");
        return false;
    }
    if (run_cmd("analyze " + (sim_dir / "sim_jobs.csv").string() + " " +
                (tmp.path() / "sites.csv").string() + " --out " +
                (tmp.path() / "kpi").string()) != 0) {
        note("analyze failed");
        return false;
    }

    // the event log binned by kpi must equal the simulator's own queue
    // times binned identically
    auto log = report::read_events_csv(sim_dir / "events.csv");
    auto from_log = sim::events_to_queue_times(log);
    auto res = sim::run(report::load_scenario(tmp.path() / "scenario.json"));
    std::vector<double> own;
    for (const auto& [id, out] : res.per_job)
        if (out.queue_time) own.push_back(*out.queue_time);
    auto bins = kpi::default_queue_bins();
    if (kpi::histogram(from_log, bins) != kpi::histogram(own, bins)) {
        note("event-log histogram differs from per-job histogram");
        return false;
    }
    if (from_log.size() != own.size()) {
        note("started-job count mismatch");
        return false;
    }
    return true;
}

bool c10_throughput() {
    auto records = known_generator(101, 100000);
    auto model = smote::fit(records, 5, 3);
    auto t0 = std::chrono::steady_clock::now();
    auto synth = smote::sample(model, 100000);
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    note("generation took " + std::to_string(secs) + " s");
    if (synth.size() != 100000) {
        note("wrong output size");
        return false;
    }
    if (secs >= 60.0) return false;
    g_notes.clear();
    return true;
}

}  // namespace

int main() {
    criterion(1, "multi-error accounting", 1, c1_multi_error_accounting);
    criterion(2, "site-share Others folding", 1, c2_others_folding);
    criterion(3, "interpolation endpoint exactness", 5, c3_endpoint_exactness);
    criterion(4, "k-NN matches exhaustive search", 30, c4_neighbor_correctness);
    criterion(5, "marginal fidelity on known mixture", 60,
              c5_marginal_fidelity);
    criterion(6, "KPI brute-force equivalence", 30, c6_kpi_oracle);
    criterion(7, "simulator conservation & capacity", 60,
              c7_sim_conservation_capacity);
    criterion(8, "simulator determinism & hand oracle", 0,
              c8_sim_determinism_hand_oracle);
    criterion(9, "end-to-end synth/simulate/analyze", 120, c9_end_to_end);
    criterion(10, "100k-row generation throughput", 0, c10_throughput);

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
