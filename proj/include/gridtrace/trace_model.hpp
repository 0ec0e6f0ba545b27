#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace gridtrace {

enum class JobStatus { Finished, Failed, Closed, Cancelled };

const char* to_string(JobStatus s);

// Case-insensitive; accepts both "canceled" and "cancelled".
std::optional<JobStatus> parse_job_status(std::string_view text);

// One executed job as recorded in an operational trace. Timestamps are
// epoch seconds UTC; sub-second precision is truncated on ingest.
struct JobRecord {
    std::string job_id;
    std::int64_t creation_time = 0;
    std::optional<std::int64_t> start_time;
    std::optional<std::int64_t> end_time;
    std::string computing_site;
    JobStatus job_status = JobStatus::Finished;
    std::set<int> error_codes;
    int cores = 1;
    std::optional<double> cpu_time;
    std::int64_t n_input_files = 0;
    std::int64_t input_file_bytes = 0;
    std::string project;
    std::string prod_step;
    std::string data_type;
    std::optional<std::string> submitting_group;

    bool operator==(const JobRecord&) const = default;
};

// Checks every JobRecord invariant; returns a reason string for the first
// violation, or nullopt if the record is valid.
std::optional<std::string> validate(const JobRecord& job);

// A computing site's capacity.
struct SiteProfile {
    std::string site_name;
    int core_count = 0;
    double gflops_per_core = 0.0;

    double total_gflops() const { return core_count * gflops_per_core; }

    bool operator==(const SiteProfile&) const = default;
};

// The nine-variable row used for generative modeling and simulation.
// The first seven fields are known before execution; job_status and
// workload only after.
struct GenRecord {
    double creation_time = 0.0;
    std::string computing_site;
    std::string project;
    std::string prod_step;
    std::string data_type;
    double n_input_files = 0.0;
    double input_file_bytes = 0.0;
    std::string job_status;
    double workload = 0.0;  // total GFLOP

    bool operator==(const GenRecord&) const = default;
};

struct SiteMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingField : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// workload = cores * gflops_per_core * cpu_time (GFLOP/s per core times
// seconds of CPU time across all cores).
GenRecord to_gen_record(const JobRecord& job, const SiteProfile& site);

}  // namespace gridtrace
