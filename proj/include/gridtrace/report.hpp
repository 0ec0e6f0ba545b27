#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridtrace/fidelity.hpp"
#include "gridtrace/kpi.hpp"
#include "gridtrace/simulator.hpp"

namespace gridtrace::report {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the file's bytes, hex-encoded; used in run manifests.
std::string file_digest(const std::filesystem::path& path);

void write_status_json(const std::filesystem::path& path,
                       const std::map<JobStatus, std::uint64_t>& dist);
void write_error_breakdown_json(const std::filesystem::path& path,
                                const kpi::ErrorBreakdown& b);
void write_histogram_csv(const std::filesystem::path& path,
                         const kpi::Histogram& h);
void write_site_share_csv(const std::filesystem::path& path,
                          const kpi::SiteShare& s);
void write_wasted_csv(
    const std::filesystem::path& path,
    const std::map<std::vector<int>, std::vector<double>>& wasted);

void write_fidelity_json(const std::filesystem::path& path,
                         const fidelity::FidelityReport& rep);
void write_overlays_csv(const std::filesystem::path& path,
                        const fidelity::FidelityReport& rep);

void write_sim_summary_json(const std::filesystem::path& path,
                            const sim::Scenario& scenario,
                            const sim::SimResult& result);
void write_events_csv(const std::filesystem::path& path,
                      const std::vector<sim::SimEvent>& log);
std::vector<sim::SimEvent> read_events_csv(const std::filesystem::path& path);

// Every successful command emits one of these next to its outputs.
void write_manifest(const std::filesystem::path& path,
                    const std::string& command,
                    const std::map<std::string, std::filesystem::path>& inputs,
                    const std::map<std::string, std::string>& params,
                    std::uint64_t seed,
                    const std::vector<std::string>& outputs);

// Scenario config: JSON naming the sites/workload files (relative paths
// resolved against the scenario file), policy, seed, cutoff, core
// mapping, failure model.
sim::Scenario load_scenario(const std::filesystem::path& path);

}  // namespace gridtrace::report
