#include "gridtrace/kpi.hpp"

#include <algorithm>
#include <cmath>

namespace gridtrace::kpi {

std::int64_t queue_time(const JobRecord& job) {
    if (!job.start_time)
        throw NotStarted("job " + job.job_id + " never started");
    return *job.start_time - job.creation_time;
}

std::vector<double> default_queue_bins(std::size_t bins) {
    const double lo = 60.0;
    const double hi = 30.0 * 24 * 3600;
    std::vector<double> edges(bins + 1);
    double log_lo = std::log(lo), log_hi = std::log(hi);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = std::exp(log_lo + (log_hi - log_lo) * i / bins);
    edges.front() = lo;
    edges.back() = hi;
    return edges;
}

Histogram histogram(const std::vector<double>& samples,
                    const std::vector<double>& bin_edges) {
    if (bin_edges.size() < 2 ||
        !std::is_sorted(bin_edges.begin(), bin_edges.end()) ||
        std::adjacent_find(bin_edges.begin(), bin_edges.end()) !=
            bin_edges.end())
        throw InvalidBins("bin edges must be strictly ascending");
    Histogram h;
    h.bin_edges = bin_edges;
    h.counts.assign(bin_edges.size() - 1, 0);
    for (double v : samples) {
        if (v < bin_edges.front()) {
            ++h.underflow;
        } else if (v >= bin_edges.back()) {
            ++h.overflow;
        } else {
            // bins are [e_i, e_{i+1}); last edge exclusive
            auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
            ++h.counts[(it - bin_edges.begin()) - 1];
        }
    }
    return h;
}

Histogram queue_time_histogram(const std::vector<JobRecord>& jobs,
                               const std::vector<double>& bin_edges) {
    std::vector<double> samples;
    std::uint64_t excluded = 0;
    for (const auto& j : jobs) {
        if (j.start_time)
            samples.push_back(static_cast<double>(*j.start_time -
                                                  j.creation_time));
        else
            ++excluded;
    }
    Histogram h = histogram(samples, bin_edges);
    h.excluded = excluded;
    return h;
}

std::map<JobStatus, std::uint64_t> status_distribution(
    const std::vector<JobRecord>& jobs) {
    std::map<JobStatus, std::uint64_t> dist{{JobStatus::Finished, 0},
                                            {JobStatus::Failed, 0},
                                            {JobStatus::Closed, 0},
                                            {JobStatus::Cancelled, 0}};
    for (const auto& j : jobs) ++dist[j.job_status];
    return dist;
}

ErrorBreakdown error_breakdown(const std::vector<JobRecord>& jobs) {
    ErrorBreakdown b;
    for (const auto& j : jobs) {
        if (j.job_status == JobStatus::Failed) {
            ++b.total_failed;
            if (j.error_codes.size() >= 2) ++b.multi_reason_failed;
            for (int c : j.error_codes) ++b.per_code[c];
        } else if (!j.error_codes.empty()) {
            ++b.non_failed_with_codes;
        }
    }
    if (b.total_failed > 0) {
        std::uint64_t total_codes = 0;
        for (const auto& [code, n] : b.per_code) total_codes += n;
        b.percent_sum = static_cast<double>(total_codes) /
                        static_cast<double>(b.total_failed);
    }
    return b;
}

std::map<std::vector<int>, std::vector<double>> wasted_core_hours(
    const std::vector<JobRecord>& jobs, WastedMetric metric) {
    std::map<std::vector<int>, std::vector<double>> wasted;
    for (const auto& j : jobs) {
        if (j.job_status != JobStatus::Failed) continue;
        if (!j.start_time || !j.end_time) continue;
        double hours;
        if (metric == WastedMetric::WallClockCores)
            hours = j.cores * static_cast<double>(*j.end_time - *j.start_time) /
                    3600.0;
        else
            hours = j.cpu_time.value_or(0.0) / 3600.0;
        // std::set iterates ascending, so the key is already canonical
        std::vector<int> key(j.error_codes.begin(), j.error_codes.end());
        wasted[std::move(key)].push_back(hours);
    }
    return wasted;
}

SiteShare site_share(const std::vector<JobRecord>& jobs, ShareWeight weight,
                     double threshold) {
    if (jobs.empty()) throw KpiEmptyInput("site_share on empty trace");
    std::map<std::string, double> totals;
    double grand = 0.0;
    for (const auto& j : jobs) {
        double w = (weight == ShareWeight::JobCount)
                       ? 1.0
                       : static_cast<double>(j.input_file_bytes);
        totals[j.computing_site] += w;
        grand += w;
    }
    if (grand <= 0.0) throw KpiEmptyInput("zero total weight");
    SiteShare s;
    s.threshold = threshold;
    for (const auto& [site, w] : totals) {
        double frac = w / grand;
        if (frac >= threshold)
            s.shares[site] = frac;
        else
            s.others_bucket += frac;
    }
    return s;
}

}  // namespace gridtrace::kpi
