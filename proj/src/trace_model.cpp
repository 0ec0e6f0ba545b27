#include "gridtrace/trace_model.hpp"

#include <algorithm>
#include <cctype>

namespace gridtrace {

const char* to_string(JobStatus s) {
    switch (s) {
        case JobStatus::Finished: return "finished";
        case JobStatus::Failed: return "failed";
        case JobStatus::Closed: return "closed";
        case JobStatus::Cancelled: return "cancelled";
    }
    return "?";
}

std::optional<JobStatus> parse_job_status(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "finished") return JobStatus::Finished;
    if (lower == "failed") return JobStatus::Failed;
    if (lower == "closed") return JobStatus::Closed;
    if (lower == "cancelled" || lower == "canceled") return JobStatus::Cancelled;
    return std::nullopt;
}

std::optional<std::string> validate(const JobRecord& job) {
    if (job.job_id.empty()) return "empty job_id";
    if (job.start_time && *job.start_time < job.creation_time)
        return "timestamp order";
    if (job.end_time) {
        if (!job.start_time) return "end_time without start_time";
        if (*job.end_time < *job.start_time) return "timestamp order";
    }
    if (job.job_status == JobStatus::Failed && job.error_codes.empty())
        return "failed without error code";
    if (job.job_status == JobStatus::Finished && !job.error_codes.empty())
        return "finished with error codes";
    if (job.cores < 1) return "cores < 1";
    if (job.cpu_time && *job.cpu_time < 0) return "negative cpu_time";
    if (job.n_input_files < 0) return "negative n_input_files";
    if (job.input_file_bytes < 0) return "negative input_file_bytes";
    return std::nullopt;
}

GenRecord to_gen_record(const JobRecord& job, const SiteProfile& site) {
    if (job.computing_site != site.site_name)
        throw SiteMismatch("site mismatch: job at '" + job.computing_site +
                           "', profile for '" + site.site_name + "'");
    if (!job.cpu_time)
        throw MissingField("cpu_time absent for job " + job.job_id);
    GenRecord r;
    r.creation_time = static_cast<double>(job.creation_time);
    r.computing_site = job.computing_site;
    r.project = job.project;
    r.prod_step = job.prod_step;
    r.data_type = job.data_type;
    r.n_input_files = static_cast<double>(job.n_input_files);
    r.input_file_bytes = static_cast<double>(job.input_file_bytes);
    r.job_status = to_string(job.job_status);
    r.workload = job.cores * site.gflops_per_core * *job.cpu_time;
    return r;
}

}  // namespace gridtrace
