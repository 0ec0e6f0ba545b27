#include "gridtrace/simulator.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>

#include "gridtrace/rng.hpp"

namespace gridtrace::sim {

std::optional<PolicyKind> parse_policy(const std::string& name) {
    if (name == "round_robin") return PolicyKind::RoundRobin;
    if (name == "least_queued") return PolicyKind::LeastQueued;
    if (name == "fastest_service") return PolicyKind::FastestService;
    if (name == "random") return PolicyKind::Random;
    return std::nullopt;
}

const char* to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::RoundRobin: return "round_robin";
        case PolicyKind::LeastQueued: return "least_queued";
        case PolicyKind::FastestService: return "fastest_service";
        case PolicyKind::Random: return "random";
    }
    return "?";
}

std::size_t policy_select(PolicyKind policy, const PolicyInput& job,
                          const std::vector<SiteView>& sites,
                          std::size_t round_robin_cursor, std::uint64_t draw) {
    auto feasible = [&](std::size_t i) {
        return sites[i].core_count >= job.cores_required;
    };
    std::size_t n = sites.size();
    switch (policy) {
        case PolicyKind::RoundRobin:
            for (std::size_t t = 0; t < n; ++t) {
                std::size_t i = (round_robin_cursor + t) % n;
                if (feasible(i)) return i;
            }
            break;
        case PolicyKind::LeastQueued: {
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!feasible(i)) continue;
                if (best == n || sites[i].queued < sites[best].queued) best = i;
            }
            if (best < n) return best;
            break;
        }
        case PolicyKind::FastestService: {
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!feasible(i)) continue;
                if (best == n ||
                    sites[i].gflops_per_core > sites[best].gflops_per_core)
                    best = i;
            }
            if (best < n) return best;
            break;
        }
        case PolicyKind::Random: {
            std::vector<std::size_t> ok;
            for (std::size_t i = 0; i < n; ++i)
                if (feasible(i)) ok.push_back(i);
            if (!ok.empty()) return ok[draw % ok.size()];
            break;
        }
    }
    throw NoFeasibleSite("no site can host " +
                         std::to_string(job.cores_required) + " cores");
}

namespace {

struct QueuedEvent {
    double time;
    int rank;  // departures before arrivals at equal times
    std::uint64_t job_id;
    EventKind kind;
    std::size_t site_idx;

    bool operator>(const QueuedEvent& o) const {
        if (time != o.time) return time > o.time;
        if (rank != o.rank) return rank > o.rank;
        return job_id > o.job_id;
    }
};

struct JobState {
    double arrival = 0.0;
    int cores = 1;
    std::size_t site_idx = 0;
    double service = 0.0;
    double occupancy = 0.0;  // service, or a fraction of it on failure
    bool fails = false;
};

}  // namespace

SimResult run(const Scenario& scenario) {
    const auto& sites = scenario.sites;
    if (sites.empty()) throw InvalidScenario("scenario has no sites");
    for (const auto& s : sites)
        if (s.core_count <= 0 || s.gflops_per_core <= 0)
            throw InvalidScenario("non-positive capacity at " + s.site_name);
    for (const auto& [site, p] : scenario.site_failure_prob)
        if (p < 0.0 || p > 1.0)
            throw InvalidPolicyParams("failure probability out of [0,1] for " +
                                      site);
    if (scenario.default_cores < 1)
        throw InvalidPolicyParams("default_cores must be >= 1");
    for (const auto& [step, c] : scenario.cores_by_prod_step)
        if (c < 1)
            throw InvalidPolicyParams("cores for prod_step " + step +
                                      " must be >= 1");
    for (std::size_t i = 1; i < scenario.workload.size(); ++i)
        if (scenario.workload[i].creation_time <
            scenario.workload[i - 1].creation_time)
            throw InvalidScenario("workload not sorted by creation_time");

    int max_cores = 0;
    for (const auto& s : sites) max_cores = std::max(max_cores, s.core_count);

    const std::size_t n = scenario.workload.size();
    std::vector<JobState> jobs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = scenario.workload[i];
        if (r.workload < 0)
            throw InvalidScenario("negative workload for job " +
                                  std::to_string(i));
        auto it = scenario.cores_by_prod_step.find(r.prod_step);
        jobs[i].cores = (it != scenario.cores_by_prod_step.end())
                            ? it->second
                            : scenario.default_cores;
        jobs[i].arrival = r.creation_time;
        if (jobs[i].cores > max_cores)
            throw InfeasibleJob("job " + std::to_string(i) + " needs " +
                                std::to_string(jobs[i].cores) +
                                " cores, largest site has " +
                                std::to_string(max_cores));
    }

    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>,
                        std::greater<QueuedEvent>>
        events;
    for (std::size_t i = 0; i < n; ++i)
        events.push({jobs[i].arrival, 1, i, EventKind::Arrival, 0});

    std::vector<int> free_cores(sites.size());
    std::vector<std::deque<std::uint64_t>> fifo(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s)
        free_cores[s] = sites[s].core_count;

    SimResult result;
    std::vector<double> busy(sites.size(), 0.0);
    std::size_t rr_cursor = 0;
    double first_arrival = n ? jobs[0].arrival : 0.0;
    double last_event = first_arrival;

    auto log = [&](double t, EventKind k, std::uint64_t id, std::size_t s) {
        result.event_log.push_back({t, k, id, sites[s].site_name});
        last_event = std::max(last_event, t);
    };

    auto try_start = [&](std::size_t s, double now) {
        if (scenario.cutoff && now > *scenario.cutoff) return;
        while (!fifo[s].empty()) {
            std::uint64_t id = fifo[s].front();
            if (jobs[id].cores > free_cores[s]) break;  // FIFO head blocks
            fifo[s].pop_front();
            free_cores[s] -= jobs[id].cores;

            const auto& rec = scenario.workload[id];
            double service =
                rec.workload / (jobs[id].cores * sites[s].gflops_per_core);
            bool fails = false;
            if (scenario.replay_failures && rec.job_status == "failed")
                fails = true;
            if (auto it = scenario.site_failure_prob.find(sites[s].site_name);
                it != scenario.site_failure_prob.end()) {
                double u =
                    (hash_combine(hash_combine(scenario.seed, id), 0xFA11) >>
                     11) *
                    0x1.0p-53;
                if (u < it->second) fails = true;
            }
            double occupancy = service;
            if (fails) {
                double u =
                    (hash_combine(hash_combine(scenario.seed, id), 0xF7AC) >>
                     11) *
                    0x1.0p-53;
                occupancy = (1.0 - u) * service;  // u on (0,1]
            }
            jobs[id].service = service;
            jobs[id].occupancy = occupancy;
            jobs[id].fails = fails;

            auto& out = result.per_job[id];
            out.queue_time = now - jobs[id].arrival;
            log(now, EventKind::Start, id, s);
            events.push({now + occupancy, 0, id,
                         fails ? EventKind::Fail : EventKind::Finish, s});
        }
    };

    while (!events.empty()) {
        QueuedEvent ev = events.top();
        events.pop();
        switch (ev.kind) {
            case EventKind::Arrival: {
                std::vector<SiteView> views(sites.size());
                for (std::size_t s = 0; s < sites.size(); ++s)
                    views[s] = {sites[s].site_name, sites[s].core_count,
                                sites[s].gflops_per_core, free_cores[s],
                                fifo[s].size()};
                PolicyInput in;
                in.job = split_features(scenario.workload[ev.job_id]).first;
                in.cores_required = jobs[ev.job_id].cores;
                std::uint64_t draw = hash_combine(
                    hash_combine(scenario.seed, ev.job_id), 0x5E1);
                std::size_t s = policy_select(scenario.policy, in, views,
                                              rr_cursor, draw);
                if (scenario.policy == PolicyKind::RoundRobin)
                    rr_cursor = s + 1;
                jobs[ev.job_id].site_idx = s;
                auto& out = result.per_job[ev.job_id];
                out.site = sites[s].site_name;
                out.cores = jobs[ev.job_id].cores;
                out.outcome = Outcome::Queued;
                log(ev.time, EventKind::Arrival, ev.job_id, s);
                fifo[s].push_back(ev.job_id);
                try_start(s, ev.time);
                break;
            }
            case EventKind::Finish:
            case EventKind::Fail: {
                std::size_t s = ev.site_idx;
                free_cores[s] += jobs[ev.job_id].cores;
                busy[s] += jobs[ev.job_id].cores * jobs[ev.job_id].occupancy;
                result.per_job[ev.job_id].outcome =
                    ev.kind == EventKind::Fail ? Outcome::Failed
                                               : Outcome::Finished;
                log(ev.time, ev.kind, ev.job_id, s);
                try_start(s, ev.time);
                break;
            }
            case EventKind::Start:
                break;  // starts are synchronous, never queued
        }
    }

    result.horizon = last_event - first_arrival;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        SiteStats st;
        st.busy_core_seconds = busy[s];
        if (result.horizon > 0.0)
            st.utilization =
                busy[s] / (sites[s].core_count * result.horizon);
        result.per_site[sites[s].site_name] = st;
    }
    return result;
}

std::vector<JobRecord> events_to_jobs(const std::vector<SimEvent>& log) {
    std::map<std::uint64_t, JobRecord> by_id;
    for (const auto& ev : log) {
        auto& j = by_id[ev.job_id];
        j.job_id = std::to_string(ev.job_id);
        switch (ev.kind) {
            case EventKind::Arrival:
                j.creation_time = static_cast<std::int64_t>(ev.time);
                j.computing_site = ev.site;
                break;
            case EventKind::Start:
                j.start_time = static_cast<std::int64_t>(ev.time);
                break;
            case EventKind::Finish:
                j.end_time = static_cast<std::int64_t>(ev.time);
                j.job_status = JobStatus::Finished;
                break;
            case EventKind::Fail:
                j.end_time = static_cast<std::int64_t>(ev.time);
                j.job_status = JobStatus::Failed;
                j.error_codes = {1};  // outcome marker; no causal model
                break;
        }
    }
    std::vector<JobRecord> jobs;
    jobs.reserve(by_id.size());
    for (auto& [id, j] : by_id) jobs.push_back(std::move(j));
    return jobs;
}

std::vector<double> events_to_queue_times(const std::vector<SimEvent>& log) {
    std::map<std::uint64_t, std::pair<std::optional<double>,
                                      std::optional<double>>>
        times;  // job -> (arrival, start)
    for (const auto& ev : log) {
        if (ev.kind == EventKind::Arrival) times[ev.job_id].first = ev.time;
        if (ev.kind == EventKind::Start) times[ev.job_id].second = ev.time;
    }
    std::vector<double> qt;
    for (const auto& [id, t] : times)
        if (t.first && t.second) qt.push_back(*t.second - *t.first);
    return qt;
}

}  // namespace gridtrace::sim
