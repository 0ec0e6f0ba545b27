#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridtrace/trace_model.hpp"

namespace gridtrace::fidelity {

struct EmptySample : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact two-sample KS statistic: supremum distance between empirical
// CDFs, by merge-scan over the sorted samples.
double ks_statistic(std::vector<double> real, std::vector<double> synth);

// Half the L1 distance between the two frequency tables, over the union
// of categories.
double total_variation(const std::vector<std::string>& real,
                       const std::vector<std::string>& synth);

// Overlay plot data for one feature: shared bins (or categories) with
// relative frequencies from both tables.
struct OverlayTable {
    std::string feature;
    bool numerical = true;
    std::vector<std::string> labels;  // bin "[lo,hi)" or category name
    std::vector<double> real_freq;
    std::vector<double> synth_freq;
};

struct FidelityReport {
    // KS statistic for numerical features, total variation for
    // categorical; all in [0,1].
    std::map<std::string, double> per_feature;
    double overall = 0.0;  // mean of per-feature scores
    std::size_t n_real = 0;
    std::size_t n_synth = 0;
    std::vector<OverlayTable> overlays;
};

FidelityReport compare(const std::vector<GenRecord>& real,
                       const std::vector<GenRecord>& synth);

}  // namespace gridtrace::fidelity
