#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridtrace/trace_model.hpp"

namespace gridtrace {

struct Reject {
    std::size_t line;  // 1-based line number in the input
    std::string reason;

    bool operator==(const Reject&) const = default;
};

struct TraceBundle {
    std::vector<JobRecord> jobs;  // in file order
    std::map<std::string, SiteProfile> sites;
    std::vector<Reject> rejects;
};

struct HeaderMissing : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DuplicateSite : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositiveCapacity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maps logical field names to header column names. Defaults match the
// operational export schema.
using ColumnSchema = std::map<std::string, std::string>;

ColumnSchema default_job_schema();

// Epoch seconds, given either a bare integer or ISO-8601 with zone
// ("2024-01-15T10:00:00Z", "...+01:00"). Sub-second digits truncated.
std::optional<std::int64_t> parse_timestamp(const std::string& text);

// One CSV record (RFC-4180 quoting); empty optional at end of stream.
std::optional<std::vector<std::string>> read_csv_row(std::istream& in,
                                                     std::size_t& line);

// Reject-and-continue parsing: malformed rows land in rejects, never abort.
// Throws HeaderMissing on an empty stream, EmptyInput if no data row parses.
TraceBundle parse_jobs(std::istream& input,
                       const ColumnSchema& schema = default_job_schema());

// Columns: site, cores, gflops_per_core.
std::map<std::string, SiteProfile> parse_sites(std::istream& input);

// Re-serialization inverse of parse_jobs for accepted records.
void write_jobs_csv(std::ostream& out, const std::vector<JobRecord>& jobs);

// GenRecord table I/O; same schema as synthetic output, so generated
// workloads round-trip through kpi and simulator.
std::vector<GenRecord> read_gen_csv(std::istream& input);
void write_gen_csv(std::ostream& out, const std::vector<GenRecord>& records);

// Pre-execution view of a GenRecord: what an allocation policy may see.
struct VisibleFeatures {
    double creation_time = 0.0;
    std::string computing_site;
    std::string project;
    std::string prod_step;
    std::string data_type;
    double n_input_files = 0.0;
    double input_file_bytes = 0.0;

    bool operator==(const VisibleFeatures&) const = default;
};

// Post-execution view: determined only once the job has run.
struct HiddenFeatures {
    std::string job_status;
    double workload = 0.0;

    bool operator==(const HiddenFeatures&) const = default;
};

std::pair<VisibleFeatures, HiddenFeatures> split_features(const GenRecord& r);
GenRecord merge_features(const VisibleFeatures& v, const HiddenFeatures& h);

}  // namespace gridtrace
