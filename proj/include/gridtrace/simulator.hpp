#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridtrace/ingest.hpp"
#include "gridtrace/trace_model.hpp"

namespace gridtrace::sim {

struct InfeasibleJob : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidPolicyParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoFeasibleSite : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidScenario : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PolicyKind { RoundRobin, LeastQueued, FastestService, Random };

std::optional<PolicyKind> parse_policy(const std::string& name);
const char* to_string(PolicyKind p);

struct Scenario {
    std::vector<SiteProfile> sites;
    std::vector<GenRecord> workload;  // sorted by creation_time
    PolicyKind policy = PolicyKind::RoundRobin;
    std::uint64_t seed = 0;
    // Cores per job come from prod_step; records without a mapping use
    // default_cores (the nine-variable record carries no core count).
    std::map<std::string, int> cores_by_prod_step;
    int default_cores = 1;
    // Optional stochastic failures, per site, probability in [0,1].
    std::map<std::string, double> site_failure_prob;
    // Replay trace outcomes: records whose job_status is "failed" fail
    // after a seeded fraction of their service time.
    bool replay_failures = false;
    std::optional<double> cutoff;  // absolute time; no new starts after it
};

enum class EventKind { Arrival, Start, Finish, Fail };

struct SimEvent {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    std::uint64_t job_id = 0;  // index into scenario workload
    std::string site;

    bool operator==(const SimEvent&) const = default;
};

enum class Outcome { Finished, Failed, Queued };

struct JobOutcome {
    std::string site;
    Outcome outcome = Outcome::Queued;
    std::optional<double> queue_time;
    int cores = 1;

    bool operator==(const JobOutcome&) const = default;
};

struct SiteStats {
    double busy_core_seconds = 0.0;
    double utilization = 0.0;  // busy / (core_count * horizon)
};

struct SimResult {
    std::map<std::uint64_t, JobOutcome> per_job;
    std::map<std::string, SiteStats> per_site;
    std::vector<SimEvent> event_log;  // non-decreasing time
    double horizon = 0.0;             // last event time - first arrival
};

// What an allocation policy is allowed to see. Hidden features
// (workload, job_status) are deliberately absent.
struct SiteView {
    std::string name;
    int core_count = 0;
    double gflops_per_core = 0.0;
    int free_cores = 0;
    std::size_t queued = 0;
};

struct PolicyInput {
    VisibleFeatures job;
    int cores_required = 1;
};

// Returns an index into `sites`; only feasible sites (core_count >=
// cores_required) may be chosen. `draw` feeds the Random policy.
std::size_t policy_select(PolicyKind policy, const PolicyInput& job,
                          const std::vector<SiteView>& sites,
                          std::size_t round_robin_cursor, std::uint64_t draw);

// Deterministic event-driven replay: per-site FIFO queues, service time =
// workload / (cores * gflops_per_core). Identical scenarios give
// identical results.
SimResult run(const Scenario& scenario);

// Reconstructs job records from an event log so the kpi module can
// compute queue-time histograms on simulated traces.
std::vector<JobRecord> events_to_jobs(const std::vector<SimEvent>& log);

// Full-precision queue times (start - arrival) per started job, in
// job-id order; feeds kpi::histogram without the integer-second
// truncation of JobRecord timestamps.
std::vector<double> events_to_queue_times(const std::vector<SimEvent>& log);

}  // namespace gridtrace::sim
