#include "gridtrace/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <istream>
#include <ostream>
#include <sstream>

namespace gridtrace {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

void write_csv_field(std::ostream& out, const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        write_csv_field(out, fields[i]);
    }
    out << '\n';
}

std::optional<std::int64_t> parse_int64(const std::string& s) {
    std::int64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

std::string or_unknown(const std::string& s) {
    return s.empty() ? std::string("UNKNOWN") : s;
}

}  // namespace

ColumnSchema default_job_schema() {
    return {
        {"job_id", "job_id"},
        {"creation_time", "creationtime"},
        {"start_time", "starttime"},
        {"end_time", "endtime"},
        {"computing_site", "computingsite"},
        {"job_status", "jobstatus"},
        {"error_codes", "errorcodes"},
        {"cores", "cores"},
        {"cpu_time", "cputime"},
        {"n_input_files", "ninputdatafiles"},
        {"input_file_bytes", "inputfilebytes"},
        {"project", "project"},
        {"prod_step", "prodstep"},
        {"data_type", "datatype"},
        {"group", "group"},
    };
}

std::optional<std::int64_t> parse_timestamp(const std::string& text) {
    if (text.empty()) return std::nullopt;
    if (auto v = parse_int64(text)) return v;

    // ISO-8601: YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH[:MM])
    std::tm tm{};
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year,
                    &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                    &tm.tm_sec, &consumed) != 6)
        return std::nullopt;
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const char* p = text.c_str() + consumed;
    if (*p == '.') {  // truncate fractional seconds
        ++p;
        while (std::isdigit(static_cast<unsigned char>(*p))) ++p;
    }
    std::int64_t offset = 0;
    if (*p == 'Z') {
        ++p;
    } else if (*p == '+' || *p == '-') {
        int sign = (*p == '+') ? 1 : -1;
        ++p;
        int oh = 0, om = 0, n = 0;
        if (std::sscanf(p, "%2d%n", &oh, &n) != 1) return std::nullopt;
        p += n;
        if (*p == ':') ++p;
        if (std::isdigit(static_cast<unsigned char>(*p))) {
            if (std::sscanf(p, "%2d%n", &om, &n) != 1) return std::nullopt;
            p += n;
        }
        offset = sign * (oh * 3600 + om * 60);
    } else {
        return std::nullopt;  // zone required
    }
    if (*p != '\0') return std::nullopt;
    std::time_t utc = timegm(&tm);
    return static_cast<std::int64_t>(utc) - offset;
}

std::optional<std::vector<std::string>> read_csv_row(std::istream& in,
                                                     std::size_t& line) {
    int c = in.get();
    if (c == EOF) return std::nullopt;
    ++line;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    while (true) {
        if (c == EOF) break;
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    cur += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            cur += ch;
        }
        c = in.get();
    }
    fields.push_back(std::move(cur));
    return fields;
}

TraceBundle parse_jobs(std::istream& input, const ColumnSchema& schema) {
    std::size_t line = 0;
    auto header = read_csv_row(input, line);
    if (!header) throw HeaderMissing("no header row");

    std::map<std::string, std::size_t> col;  // logical name -> index
    for (const auto& [logical, name] : schema) {
        auto it = std::find(header->begin(), header->end(), name);
        if (it != header->end()) col[logical] = it - header->begin();
    }
    for (const char* required :
         {"job_id", "creation_time", "computing_site", "job_status"}) {
        if (!col.count(required))
            throw HeaderMissing(std::string("missing column for ") + required);
    }

    TraceBundle bundle;
    std::size_t data_rows = 0;
    while (true) {
        std::size_t row_line = line + 1;
        auto row = read_csv_row(input, line);
        if (!row) break;
        if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
        ++data_rows;
        auto field = [&](const char* logical) -> std::string {
            auto it = col.find(logical);
            if (it == col.end() || it->second >= row->size()) return "";
            return (*row)[it->second];
        };

        std::string reason;
        auto reject = [&](std::string why) { reason = std::move(why); };

        JobRecord job;
        job.job_id = field("job_id");
        if (auto t = parse_timestamp(field("creation_time")))
            job.creation_time = *t;
        else
            reject("bad creation_time");
        if (reason.empty()) {
            std::string s = field("start_time");
            if (!s.empty()) {
                if (auto t = parse_timestamp(s)) job.start_time = *t;
                else reject("bad start_time");
            }
        }
        if (reason.empty()) {
            std::string s = field("end_time");
            if (!s.empty()) {
                if (auto t = parse_timestamp(s)) job.end_time = *t;
                else reject("bad end_time");
            }
        }
        job.computing_site = or_unknown(field("computing_site"));
        if (reason.empty()) {
            if (auto st = parse_job_status(field("job_status")))
                job.job_status = *st;
            else
                reject("unknown job status");
        }
        if (reason.empty()) {
            std::string codes = field("error_codes");
            std::stringstream ss(codes);
            std::string tok;
            while (std::getline(ss, tok, ';')) {
                if (tok.empty()) continue;
                if (auto c = parse_int64(tok)) job.error_codes.insert(
                    static_cast<int>(*c));
                else { reject("bad error code"); break; }
            }
        }
        if (reason.empty()) {
            std::string s = field("cores");
            if (s.empty()) job.cores = 1;
            else if (auto v = parse_int64(s)) job.cores = static_cast<int>(*v);
            else reject("bad cores");
        }
        if (reason.empty()) {
            std::string s = field("cpu_time");
            if (!s.empty()) {
                if (auto v = parse_double(s)) job.cpu_time = *v;
                else reject("bad cputime");
            }
        }
        if (reason.empty()) {
            std::string s = field("n_input_files");
            if (!s.empty()) {
                if (auto v = parse_int64(s)) job.n_input_files = *v;
                else reject("bad ninputdatafiles");
            }
        }
        if (reason.empty()) {
            std::string s = field("input_file_bytes");
            if (!s.empty()) {
                if (auto v = parse_int64(s)) job.input_file_bytes = *v;
                else reject("bad inputfilebytes");
            }
        }
        job.project = or_unknown(field("project"));
        job.prod_step = or_unknown(field("prod_step"));
        job.data_type = or_unknown(field("data_type"));
        if (std::string g = field("group"); !g.empty()) job.submitting_group = g;

        if (reason.empty()) {
            if (auto why = validate(job)) reason = *why;
        }
        if (reason.empty())
            bundle.jobs.push_back(std::move(job));
        else
            bundle.rejects.push_back({row_line, std::move(reason)});
    }
    if (data_rows == 0) throw EmptyInput("no data rows");
    return bundle;
}

std::map<std::string, SiteProfile> parse_sites(std::istream& input) {
    std::size_t line = 0;
    auto header = read_csv_row(input, line);
    if (!header) throw HeaderMissing("no header row");
    auto idx = [&](const char* name) -> std::size_t {
        auto it = std::find(header->begin(), header->end(), name);
        if (it == header->end())
            throw HeaderMissing(std::string("missing column ") + name);
        return it - header->begin();
    };
    std::size_t i_site = idx("site");
    std::size_t i_cores = idx("cores");
    std::size_t i_gpc = idx("gflops_per_core");

    std::map<std::string, SiteProfile> sites;
    while (true) {
        auto row = read_csv_row(input, line);
        if (!row) break;
        if (row->size() == 1 && (*row)[0].empty()) continue;
        SiteProfile p;
        p.site_name = row->at(i_site);
        auto cores = parse_int64(row->at(i_cores));
        auto gpc = parse_double(row->at(i_gpc));
        if (!cores || !gpc)
            throw NonPositiveCapacity("unparseable capacity for site " +
                                      p.site_name);
        p.core_count = static_cast<int>(*cores);
        p.gflops_per_core = *gpc;
        if (p.core_count <= 0 || p.gflops_per_core <= 0)
            throw NonPositiveCapacity("non-positive capacity for site " +
                                      p.site_name);
        if (!sites.emplace(p.site_name, p).second)
            throw DuplicateSite("duplicate site " + p.site_name);
    }
    return sites;
}

void write_jobs_csv(std::ostream& out, const std::vector<JobRecord>& jobs) {
    out << "job_id,creationtime,starttime,endtime,computingsite,jobstatus,"
           "errorcodes,cores,cputime,ninputdatafiles,inputfilebytes,project,"
           "prodstep,datatype,group\n";
    for (const auto& j : jobs) {
        std::vector<std::string> f;
        f.push_back(j.job_id);
        f.push_back(std::to_string(j.creation_time));
        f.push_back(j.start_time ? std::to_string(*j.start_time) : "");
        f.push_back(j.end_time ? std::to_string(*j.end_time) : "");
        f.push_back(j.computing_site);
        f.push_back(to_string(j.job_status));
        std::string codes;
        for (int c : j.error_codes) {
            if (!codes.empty()) codes += ';';
            codes += std::to_string(c);
        }
        f.push_back(codes);
        f.push_back(std::to_string(j.cores));
        f.push_back(j.cpu_time ? format_double(*j.cpu_time) : "");
        f.push_back(std::to_string(j.n_input_files));
        f.push_back(std::to_string(j.input_file_bytes));
        f.push_back(j.project);
        f.push_back(j.prod_step);
        f.push_back(j.data_type);
        f.push_back(j.submitting_group.value_or(""));
        write_csv_row(out, f);
    }
}

std::vector<GenRecord> read_gen_csv(std::istream& input) {
    std::size_t line = 0;
    auto header = read_csv_row(input, line);
    if (!header) throw HeaderMissing("no header row");
    auto idx = [&](const char* name) -> std::size_t {
        auto it = std::find(header->begin(), header->end(), name);
        if (it == header->end())
            throw HeaderMissing(std::string("missing column ") + name);
        return it - header->begin();
    };
    std::size_t i_ct = idx("creationtime"), i_site = idx("computingsite"),
                i_proj = idx("project"), i_step = idx("prodstep"),
                i_dt = idx("datatype"), i_nf = idx("ninputdatafiles"),
                i_fb = idx("inputfilebytes"), i_st = idx("jobstatus"),
                i_wl = idx("workload");
    std::vector<GenRecord> out;
    while (true) {
        auto row = read_csv_row(input, line);
        if (!row) break;
        if (row->size() == 1 && (*row)[0].empty()) continue;
        GenRecord r;
        auto num = [&](std::size_t i) {
            auto v = parse_double(row->at(i));
            if (!v) throw EmptyInput("bad numeric field at line " +
                                     std::to_string(line));
            return *v;
        };
        r.creation_time = num(i_ct);
        r.computing_site = or_unknown(row->at(i_site));
        r.project = or_unknown(row->at(i_proj));
        r.prod_step = or_unknown(row->at(i_step));
        r.data_type = or_unknown(row->at(i_dt));
        r.n_input_files = num(i_nf);
        r.input_file_bytes = num(i_fb);
        r.job_status = or_unknown(row->at(i_st));
        r.workload = num(i_wl);
        out.push_back(std::move(r));
    }
    return out;
}

void write_gen_csv(std::ostream& out, const std::vector<GenRecord>& records) {
    out << "creationtime,computingsite,project,prodstep,datatype,"
           "ninputdatafiles,inputfilebytes,jobstatus,workload\n";
    for (const auto& r : records) {
        std::vector<std::string> f;
        f.push_back(format_double(r.creation_time));
        f.push_back(r.computing_site);
        f.push_back(r.project);
        f.push_back(r.prod_step);
        f.push_back(r.data_type);
        f.push_back(format_double(r.n_input_files));
        f.push_back(format_double(r.input_file_bytes));
        f.push_back(r.job_status);
        f.push_back(format_double(r.workload));
        write_csv_row(out, f);
    }
}

std::pair<VisibleFeatures, HiddenFeatures> split_features(const GenRecord& r) {
    VisibleFeatures v{r.creation_time, r.computing_site, r.project,
                      r.prod_step,     r.data_type,      r.n_input_files,
                      r.input_file_bytes};
    HiddenFeatures h{r.job_status, r.workload};
    return {std::move(v), std::move(h)};
}

GenRecord merge_features(const VisibleFeatures& v, const HiddenFeatures& h) {
    GenRecord r;
    r.creation_time = v.creation_time;
    r.computing_site = v.computing_site;
    r.project = v.project;
    r.prod_step = v.prod_step;
    r.data_type = v.data_type;
    r.n_input_files = v.n_input_files;
    r.input_file_bytes = v.input_file_bytes;
    r.job_status = h.job_status;
    r.workload = h.workload;
    return r;
}

}  // namespace gridtrace
