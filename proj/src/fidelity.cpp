#include "gridtrace/fidelity.hpp"

#include <algorithm>
#include <cmath>

namespace gridtrace::fidelity {

namespace {

struct FeatureView {
    const char* name;
    bool numerical;
    bool log_bins;  // heavy-tailed columns get log-width plot bins
    double (*num)(const GenRecord&);
    const std::string& (*cat)(const GenRecord&);
};

double get_ct(const GenRecord& r) { return r.creation_time; }
double get_nf(const GenRecord& r) { return r.n_input_files; }
double get_fb(const GenRecord& r) { return r.input_file_bytes; }
double get_wl(const GenRecord& r) { return r.workload; }
const std::string& get_site(const GenRecord& r) { return r.computing_site; }
const std::string& get_proj(const GenRecord& r) { return r.project; }
const std::string& get_step(const GenRecord& r) { return r.prod_step; }
const std::string& get_dt(const GenRecord& r) { return r.data_type; }
const std::string& get_st(const GenRecord& r) { return r.job_status; }

constexpr FeatureView kViews[9] = {
    {"creationtime", true, false, get_ct, nullptr},
    {"computingsite", false, false, nullptr, get_site},
    {"project", false, false, nullptr, get_proj},
    {"prodstep", false, false, nullptr, get_step},
    {"datatype", false, false, nullptr, get_dt},
    {"ninputdatafiles", true, false, get_nf, nullptr},
    {"inputfilebytes", true, true, get_fb, nullptr},
    {"jobstatus", false, false, nullptr, get_st},
    {"workload", true, true, get_wl, nullptr},
};

constexpr std::size_t kPlotBins = 50;

OverlayTable numeric_overlay(const char* name, bool log_bins,
                             const std::vector<double>& real,
                             const std::vector<double>& synth) {
    OverlayTable t;
    t.feature = name;
    t.numerical = true;
    double lo = real[0], hi = real[0];
    for (double v : real) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : synth) { lo = std::min(lo, v); hi = std::max(hi, v); }
    bool use_log = log_bins && lo >= 0.0;
    auto fwd = [&](double v) { return use_log ? std::log1p(v) : v; };
    double flo = fwd(lo), fhi = fwd(hi);
    if (fhi <= flo) fhi = flo + 1.0;
    std::vector<std::uint64_t> rc(kPlotBins, 0), sc(kPlotBins, 0);
    auto bin_of = [&](double v) {
        double x = (fwd(v) - flo) / (fhi - flo) * kPlotBins;
        auto b = static_cast<std::size_t>(std::max(0.0, x));
        return std::min(b, kPlotBins - 1);
    };
    for (double v : real) ++rc[bin_of(v)];
    for (double v : synth) ++sc[bin_of(v)];
    auto inv = [&](double x) { return use_log ? std::expm1(x) : x; };
    for (std::size_t b = 0; b < kPlotBins; ++b) {
        double e0 = inv(flo + (fhi - flo) * b / kPlotBins);
        double e1 = inv(flo + (fhi - flo) * (b + 1) / kPlotBins);
        t.labels.push_back("[" + std::to_string(e0) + "," +
                           std::to_string(e1) + ")");
        t.real_freq.push_back(static_cast<double>(rc[b]) / real.size());
        t.synth_freq.push_back(static_cast<double>(sc[b]) / synth.size());
    }
    return t;
}

std::map<std::string, double> freq_table(const std::vector<std::string>& xs) {
    std::map<std::string, double> f;
    for (const auto& x : xs) f[x] += 1.0;
    for (auto& [k, v] : f) v /= xs.size();
    return f;
}

}  // namespace

double ks_statistic(std::vector<double> real, std::vector<double> synth) {
    if (real.empty() || synth.empty())
        throw EmptySample("ks_statistic needs nonempty samples");
    std::sort(real.begin(), real.end());
    std::sort(synth.begin(), synth.end());
    const double nr = static_cast<double>(real.size());
    const double ns = static_cast<double>(synth.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < real.size() && j < synth.size()) {
        double x = std::min(real[i], synth[j]);
        while (i < real.size() && real[i] <= x) ++i;
        while (j < synth.size() && synth[j] <= x) ++j;
        sup = std::max(sup, std::abs(i / nr - j / ns));
    }
    return sup;
}

double total_variation(const std::vector<std::string>& real,
                       const std::vector<std::string>& synth) {
    if (real.empty() || synth.empty())
        throw EmptySample("total_variation needs nonempty samples");
    auto fr = freq_table(real);
    auto fs = freq_table(synth);
    // accumulate over the sorted union so the result is exactly symmetric
    std::map<std::string, std::pair<double, double>> both;
    for (const auto& [cat, f] : fr) both[cat].first = f;
    for (const auto& [cat, f] : fs) both[cat].second = f;
    double sum = 0.0;
    for (const auto& [cat, f] : both) sum += std::abs(f.first - f.second);
    return 0.5 * sum;
}

FidelityReport compare(const std::vector<GenRecord>& real,
                       const std::vector<GenRecord>& synth) {
    if (real.empty() || synth.empty())
        throw SchemaMismatch("compare needs nonempty tables");
    FidelityReport rep;
    rep.n_real = real.size();
    rep.n_synth = synth.size();
    double total = 0.0;
    for (const auto& view : kViews) {
        double score;
        if (view.numerical) {
            std::vector<double> rv, sv;
            rv.reserve(real.size());
            sv.reserve(synth.size());
            for (const auto& r : real) rv.push_back(view.num(r));
            for (const auto& s : synth) sv.push_back(view.num(s));
            rep.overlays.push_back(
                numeric_overlay(view.name, view.log_bins, rv, sv));
            score = ks_statistic(std::move(rv), std::move(sv));
        } else {
            std::vector<std::string> rv, sv;
            rv.reserve(real.size());
            sv.reserve(synth.size());
            for (const auto& r : real) rv.push_back(view.cat(r));
            for (const auto& s : synth) sv.push_back(view.cat(s));
            auto fr = freq_table(rv);
            auto fs = freq_table(sv);
            OverlayTable t;
            t.feature = view.name;
            t.numerical = false;
            for (const auto& [cat, f] : fr) {
                t.labels.push_back(cat);
                t.real_freq.push_back(f);
                auto it = fs.find(cat);
                t.synth_freq.push_back(it == fs.end() ? 0.0 : it->second);
            }
            for (const auto& [cat, f] : fs) {
                if (fr.count(cat)) continue;
                t.labels.push_back(cat);
                t.real_freq.push_back(0.0);
                t.synth_freq.push_back(f);
            }
            rep.overlays.push_back(std::move(t));
            score = total_variation(rv, sv);
        }
        rep.per_feature[view.name] = score;
        total += score;
    }
    rep.overall = total / 9.0;
    return rep;
}

}  // namespace gridtrace::fidelity
