#include "gridtrace/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridtrace/ingest.hpp"

namespace gridtrace::report {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

const char* event_kind_name(sim::EventKind k) {
    switch (k) {
        case sim::EventKind::Arrival: return "arrival";
        case sim::EventKind::Start: return "start";
        case sim::EventKind::Finish: return "finish";
        case sim::EventKind::Fail: return "fail";
    }
    return "?";
}

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(h));
    return hex;
}

void write_status_json(const std::filesystem::path& path,
                       const std::map<JobStatus, std::uint64_t>& dist) {
    nlohmann::json j;
    for (const auto& [status, n] : dist) j[to_string(status)] = n;
    open_out(path) << j.dump(2) << '\n';
}

void write_error_breakdown_json(const std::filesystem::path& path,
                                const kpi::ErrorBreakdown& b) {
    nlohmann::json j;
    j["total_failed"] = b.total_failed;
    j["multi_reason_failed"] = b.multi_reason_failed;
    j["non_failed_with_codes"] = b.non_failed_with_codes;
    j["percent_sum"] = b.percent_sum;
    auto& codes = j["per_code"] = nlohmann::json::object();
    for (const auto& [code, n] : b.per_code) codes[std::to_string(code)] = n;
    open_out(path) << j.dump(2) << '\n';
}

void write_histogram_csv(const std::filesystem::path& path,
                         const kpi::Histogram& h) {
    auto out = open_out(path);
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << format_double(h.bin_edges[b]) << ','
            << format_double(h.bin_edges[b + 1]) << ',' << h.counts[b] << '\n';
    out << "underflow,," << h.underflow << '\n';
    out << "overflow,," << h.overflow << '\n';
    out << "excluded,," << h.excluded << '\n';
}

void write_site_share_csv(const std::filesystem::path& path,
                          const kpi::SiteShare& s) {
    auto out = open_out(path);
    out << "site,share\n";
    for (const auto& [site, frac] : s.shares)
        out << site << ',' << format_double(frac) << '\n';
    out << "Others," << format_double(s.others_bucket) << '\n';
}

void write_wasted_csv(
    const std::filesystem::path& path,
    const std::map<std::vector<int>, std::vector<double>>& wasted) {
    auto out = open_out(path);
    out << "error_combination,core_hours\n";
    for (const auto& [codes, hours] : wasted) {
        std::string key;
        for (int c : codes) {
            if (!key.empty()) key += ';';
            key += std::to_string(c);
        }
        for (double h : hours) out << key << ',' << format_double(h) << '\n';
    }
}

void write_fidelity_json(const std::filesystem::path& path,
                         const fidelity::FidelityReport& rep) {
    nlohmann::json j;
    j["n_real"] = rep.n_real;
    j["n_synth"] = rep.n_synth;
    j["overall"] = rep.overall;
    auto& pf = j["per_feature"] = nlohmann::json::object();
    for (const auto& [name, score] : rep.per_feature) pf[name] = score;
    open_out(path) << j.dump(2) << '\n';
}

void write_overlays_csv(const std::filesystem::path& path,
                        const fidelity::FidelityReport& rep) {
    auto out = open_out(path);
    out << "feature,bin,real_freq,synth_freq\n";
    for (const auto& t : rep.overlays)
        for (std::size_t i = 0; i < t.labels.size(); ++i) {
            std::string label = t.labels[i];
            // labels may carry commas from bin ranges
            out << t.feature << ",\"" << label << "\","
                << format_double(t.real_freq[i]) << ','
                << format_double(t.synth_freq[i]) << '\n';
        }
}

void write_sim_summary_json(const std::filesystem::path& path,
                            const sim::Scenario& scenario,
                            const sim::SimResult& result) {
    nlohmann::json j;
    j["policy"] = sim::to_string(scenario.policy);
    j["seed"] = scenario.seed;
    j["jobs"] = scenario.workload.size();
    j["horizon_seconds"] = result.horizon;
    std::uint64_t finished = 0, failed = 0, queued = 0;
    double qt_sum = 0.0, qt_max = 0.0;
    std::uint64_t started = 0;
    for (const auto& [id, out] : result.per_job) {
        switch (out.outcome) {
            case sim::Outcome::Finished: ++finished; break;
            case sim::Outcome::Failed: ++failed; break;
            case sim::Outcome::Queued: ++queued; break;
        }
        if (out.queue_time) {
            ++started;
            qt_sum += *out.queue_time;
            qt_max = std::max(qt_max, *out.queue_time);
        }
    }
    j["finished"] = finished;
    j["failed"] = failed;
    j["queued_at_horizon"] = queued;
    j["mean_queue_time"] = started ? qt_sum / started : 0.0;
    j["max_queue_time"] = qt_max;
    auto& ps = j["per_site"] = nlohmann::json::object();
    for (const auto& [site, st] : result.per_site) {
        ps[site] = {{"busy_core_seconds", st.busy_core_seconds},
                    {"utilization", st.utilization}};
    }
    open_out(path) << j.dump(2) << '\n';
}

void write_events_csv(const std::filesystem::path& path,
                      const std::vector<sim::SimEvent>& log) {
    auto out = open_out(path);
    out << "time,kind,job_id,site\n";
    for (const auto& ev : log)
        out << format_double(ev.time) << ',' << event_kind_name(ev.kind) << ','
            << ev.job_id << ',' << ev.site << '\n';
}

std::vector<sim::SimEvent> read_events_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::size_t line = 0;
    auto header = read_csv_row(in, line);
    if (!header) throw HeaderMissing("no header row in event log");
    std::vector<sim::SimEvent> log;
    while (auto row = read_csv_row(in, line)) {
        if (row->size() < 4) continue;
        sim::SimEvent ev;
        ev.time = std::stod((*row)[0]);
        const std::string& k = (*row)[1];
        if (k == "arrival") ev.kind = sim::EventKind::Arrival;
        else if (k == "start") ev.kind = sim::EventKind::Start;
        else if (k == "finish") ev.kind = sim::EventKind::Finish;
        else if (k == "fail") ev.kind = sim::EventKind::Fail;
        else throw std::runtime_error("unknown event kind " + k);
        ev.job_id = std::stoull((*row)[2]);
        ev.site = (*row)[3];
        log.push_back(std::move(ev));
    }
    return log;
}

void write_manifest(const std::filesystem::path& path,
                    const std::string& command,
                    const std::map<std::string, std::filesystem::path>& inputs,
                    const std::map<std::string, std::string>& params,
                    std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["seed"] = seed;
    auto& in = j["inputs"] = nlohmann::json::object();
    for (const auto& [name, p] : inputs)
        in[name] = {{"path", p.string()}, {"digest", file_digest(p)}};
    auto& pj = j["params"] = nlohmann::json::object();
    for (const auto& [k, v] : params) pj[k] = v;
    j["outputs"] = outputs;
    open_out(path) << j.dump(2) << '\n';
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read scenario " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw sim::InvalidScenario(std::string("scenario: bad JSON: ") +
                                   e.what());
    }
    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key))
            throw sim::InvalidScenario(std::string("scenario: missing key '") +
                                       key + "'");
        return j.at(key);
    };

    auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    sim::Scenario sc;
    {
        auto sites_path = resolve(require("sites").get<std::string>());
        std::ifstream sf(sites_path);
        if (!sf)
            throw sim::InvalidScenario("scenario: sites file unreadable: " +
                                       sites_path.string());
        for (auto& [name, profile] : parse_sites(sf))
            sc.sites.push_back(profile);
    }
    {
        auto wl_path = resolve(require("workload").get<std::string>());
        std::ifstream wf(wl_path);
        if (!wf)
            throw sim::InvalidScenario("scenario: workload file unreadable: " +
                                       wl_path.string());
        sc.workload = read_gen_csv(wf);
        std::stable_sort(sc.workload.begin(), sc.workload.end(),
                         [](const GenRecord& a, const GenRecord& b) {
                             return a.creation_time < b.creation_time;
                         });
    }
    {
        auto name = require("policy").get<std::string>();
        auto p = sim::parse_policy(name);
        if (!p)
            throw sim::InvalidScenario("scenario: unknown policy '" + name +
                                       "'");
        sc.policy = *p;
    }
    sc.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("cutoff")) sc.cutoff = j.at("cutoff").get<double>();
    sc.default_cores = j.value("default_cores", 1);
    if (j.contains("cores_by_prod_step"))
        for (const auto& [step, cores] :
             j.at("cores_by_prod_step").items())
            sc.cores_by_prod_step[step] = cores.get<int>();
    if (j.contains("site_failure_prob"))
        for (const auto& [site, p] : j.at("site_failure_prob").items())
            sc.site_failure_prob[site] = p.get<double>();
    sc.replay_failures = j.value("replay_failures", false);
    return sc;
}

}  // namespace gridtrace::report
