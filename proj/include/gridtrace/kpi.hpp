#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridtrace/trace_model.hpp"

namespace gridtrace::kpi {

struct NotStarted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidBins : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KpiEmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Histogram {
    std::vector<double> bin_edges;        // strictly ascending, length B+1
    std::vector<std::uint64_t> counts;    // length B
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
    std::uint64_t excluded = 0;  // samples with no queue time (never started)

    bool operator==(const Histogram&) const = default;
};

struct ErrorBreakdown {
    std::map<int, std::uint64_t> per_code;  // failed jobs carrying each code
    std::uint64_t total_failed = 0;
    std::uint64_t multi_reason_failed = 0;
    // Jobs carrying codes despite a non-Failed status; diagnostic only,
    // excluded from per_code so percent_sum stays tied to failed jobs.
    std::uint64_t non_failed_with_codes = 0;
    double percent_sum = 0.0;  // sum(per_code) / total_failed, may exceed 1
};

struct SiteShare {
    std::map<std::string, double> shares;  // each >= threshold
    double others_bucket = 0.0;
    double threshold = 0.0;
};

enum class ShareWeight { JobCount, InputBytes };
enum class WastedMetric { WallClockCores, CpuTime };

// start_time - creation_time; throws NotStarted if the job never started.
std::int64_t queue_time(const JobRecord& job);

// Default binning: logarithmic from 60 s to 30 days (heavy-tailed waits).
std::vector<double> default_queue_bins(std::size_t bins = 30);

Histogram queue_time_histogram(const std::vector<JobRecord>& jobs,
                               const std::vector<double>& bin_edges);

// Generic numeric histogram over precomputed samples, same edge semantics.
Histogram histogram(const std::vector<double>& samples,
                    const std::vector<double>& bin_edges);

std::map<JobStatus, std::uint64_t> status_distribution(
    const std::vector<JobRecord>& jobs);

ErrorBreakdown error_breakdown(const std::vector<JobRecord>& jobs);

// Key: ascending distinct error codes of the failed job. Value: one
// core-hours entry per contributing job, so downstream plots can show the
// full distribution, not only the sum.
std::map<std::vector<int>, std::vector<double>> wasted_core_hours(
    const std::vector<JobRecord>& jobs,
    WastedMetric metric = WastedMetric::WallClockCores);

SiteShare site_share(const std::vector<JobRecord>& jobs, ShareWeight weight,
                     double threshold = 0.019);

}  // namespace gridtrace::kpi
