#include "gridtrace/smote.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "gridtrace/rng.hpp"

namespace gridtrace::smote {

namespace {

struct FieldSpec {
    const char* name;
    FeatureKind kind;
};

// GenRecord column order; 4 numerical, 5 categorical.
constexpr FieldSpec kFields[9] = {
    {"creationtime", FeatureKind::Numerical},
    {"computingsite", FeatureKind::Categorical},
    {"project", FeatureKind::Categorical},
    {"prodstep", FeatureKind::Categorical},
    {"datatype", FeatureKind::Categorical},
    {"ninputdatafiles", FeatureKind::Numerical},
    {"inputfilebytes", FeatureKind::Numerical},
    {"jobstatus", FeatureKind::Categorical},
    {"workload", FeatureKind::Numerical},
};

double num_value(const GenRecord& r, std::size_t col) {
    switch (col) {
        case 0: return r.creation_time;
        case 1: return r.n_input_files;
        case 2: return r.input_file_bytes;
        default: return r.workload;
    }
}

void set_num_value(GenRecord& r, std::size_t col, double v) {
    switch (col) {
        case 0: r.creation_time = v; break;
        case 1: r.n_input_files = v; break;
        case 2: r.input_file_bytes = v; break;
        default: r.workload = v; break;
    }
}

const std::string& cat_value(const GenRecord& r, std::size_t col) {
    switch (col) {
        case 0: return r.computing_site;
        case 1: return r.project;
        case 2: return r.prod_step;
        case 3: return r.data_type;
        default: return r.job_status;
    }
}

void set_cat_value(GenRecord& r, std::size_t col, const std::string& v) {
    switch (col) {
        case 0: r.computing_site = v; break;
        case 1: r.project = v; break;
        case 2: r.prod_step = v; break;
        case 3: r.data_type = v; break;
        default: r.job_status = v; break;
    }
}

// Sorted fixed-capacity top-k list ordered by (distance, index).
struct TopK {
    std::vector<std::pair<double, std::uint32_t>> items;
    std::size_t cap;

    explicit TopK(std::size_t k) : cap(k) { items.reserve(k); }

    bool full() const { return items.size() == cap; }
    double worst() const {
        return full() ? items.back().first
                      : std::numeric_limits<double>::infinity();
    }

    void offer(double d, std::uint32_t idx) {
        std::pair<double, std::uint32_t> p{d, idx};
        if (full()) {
            if (!(p < items.back())) return;
            items.pop_back();
        }
        auto pos = std::upper_bound(items.begin(), items.end(), p);
        items.insert(pos, p);
    }
};

// Exact k-NN under the mixed metric, grouping rows by categorical tuple.
// Rows sharing a tuple differ only in the numeric term; other groups are
// scanned only while their floor distance (cat_w * hamming between
// tuples) can still displace the current k-th neighbor.
void build_neighbors(SmoteModel& m) {
    const std::size_t n = m.n_rows;
    const std::size_t nd = m.n_num;
    const std::size_t nc = m.n_cat;
    const std::size_t k = static_cast<std::size_t>(m.k);
    const double nw = m.options.numeric_weight;
    const double cw = m.options.categorical_weight;

    std::map<std::vector<int>, std::uint32_t> group_of_tuple;
    std::vector<std::vector<std::uint32_t>> members;  // ascending row index
    std::vector<std::vector<int>> tuples;
    std::vector<std::uint32_t> row_group(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> t(m.cat_codes.begin() + i * nc,
                           m.cat_codes.begin() + (i + 1) * nc);
        auto [it, fresh] = group_of_tuple.try_emplace(
            t, static_cast<std::uint32_t>(members.size()));
        if (fresh) {
            members.emplace_back();
            tuples.push_back(std::move(t));
        }
        members[it->second].push_back(static_cast<std::uint32_t>(i));
        row_group[i] = it->second;
    }
    const std::size_t ng = members.size();

    // Contiguous per-group copies of the normalized numeric rows.
    std::vector<std::vector<double>> gnorm(ng);
    for (std::size_t g = 0; g < ng; ++g) {
        gnorm[g].resize(members[g].size() * nd);
        for (std::size_t r = 0; r < members[g].size(); ++r)
            std::copy_n(m.norm.begin() + members[g][r] * nd, nd,
                        gnorm[g].begin() + r * nd);
    }

    m.neighbors.assign(n * k, 0);

    std::vector<std::pair<int, std::uint32_t>> order(ng);  // (ham, group)
    for (std::size_t gi = 0; gi < ng; ++gi) {
        for (std::size_t g = 0; g < ng; ++g) {
            int ham = 0;
            for (std::size_t c = 0; c < nc; ++c)
                ham += tuples[gi][c] != tuples[g][c];
            order[g] = {ham, static_cast<std::uint32_t>(g)};
        }
        std::sort(order.begin(), order.end());

        for (std::uint32_t i : members[gi]) {
            const double* qi = m.norm.data() + i * nd;
            TopK top(k);
            for (const auto& [ham, g] : order) {
                double floor_d = cw * ham;
                if (top.full() && floor_d > top.worst()) break;
                const double* rows = gnorm[g].data();
                const auto& idxs = members[g];
                for (std::size_t r = 0; r < idxs.size(); ++r) {
                    std::uint32_t j = idxs[r];
                    if (j == i) continue;
                    const double* qj = rows + r * nd;
                    double se = 0.0;
                    for (std::size_t d = 0; d < nd; ++d) {
                        double diff = qi[d] - qj[d];
                        se += diff * diff;
                    }
                    if (top.full()) {
                        // cheap squared-distance prune with slack; the
                        // exact (d, idx) comparison decides admission
                        double slack = top.worst() - floor_d;
                        if (nw > 0.0) {
                            if (slack < 0.0) continue;
                            double t = slack / nw;
                            if (se > t * t * (1.0 + 1e-12) + 1e-300) continue;
                        } else if (slack < 0.0) {
                            continue;
                        }
                    }
                    double d = nw * std::sqrt(se) + floor_d;
                    top.offer(d, j);
                }
            }
            for (std::size_t r = 0; r < k; ++r)
                m.neighbors[i * k + r] = top.items[r].second;
        }
    }
}

void build_majorities(SmoteModel& m) {
    const std::size_t k = static_cast<std::size_t>(m.k);
    m.cat_majority.assign(m.n_rows * m.n_cat, 0);
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        for (std::size_t c = 0; c < m.n_cat; ++c) {
            std::map<int, int> votes;
            for (std::size_t r = 0; r < k; ++r)
                ++votes[m.cat_codes[m.neighbors[i * k + r] * m.n_cat + c]];
            int best_code = 0, best_votes = -1;
            for (const auto& [code, v] : votes) {
                if (v > best_votes) {  // map order = ascending code, so the
                    best_code = code;  // first max wins the tie
                    best_votes = v;
                }
            }
            m.cat_majority[i * m.n_cat + c] = best_code;
        }
    }
}

// Shared tail of fit() and load_model(): takes interpolation-space numeric
// columns and categorical codes, derives stats and the k-NN structure.
SmoteModel fit_encoded(std::vector<FeatureMeta> features,
                       std::vector<double> raw, std::vector<int> cat_codes,
                       std::size_t n_rows, int k, std::uint64_t seed,
                       const SmoteOptions& options) {
    SmoteModel m;
    m.features = std::move(features);
    m.k = k;
    m.options = options;
    m.rng_seed = seed;
    m.n_rows = n_rows;
    m.n_num = 0;
    m.n_cat = 0;
    for (const auto& f : m.features)
        (f.kind == FeatureKind::Numerical ? m.n_num : m.n_cat)++;
    m.raw = std::move(raw);
    m.cat_codes = std::move(cat_codes);

    if (k < 1) throw TooFewRows("k must be >= 1");
    if (n_rows < static_cast<std::size_t>(k) + 1)
        throw TooFewRows("need at least k+1 rows, have " +
                         std::to_string(n_rows));

    // Column stats in interpolation space.
    std::size_t nc = 0;
    for (auto& f : m.features) {
        if (f.kind != FeatureKind::Numerical) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n_rows; ++i) {
            double v = m.raw[i * m.n_num + nc];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        f.min = lo;
        f.max = hi;
        ++nc;
    }

    // Normalize; constant columns go to 0 and drop out of the distance.
    m.norm.assign(n_rows * m.n_num, 0.0);
    m.num_active.assign(m.n_num, false);
    std::size_t col = 0;
    for (const auto& f : m.features) {
        if (f.kind != FeatureKind::Numerical) continue;
        if (m.options.normalization == Normalization::MinMax) {
            double range = f.max - f.min;
            if (range > 0.0) {
                m.num_active[col] = true;
                for (std::size_t i = 0; i < n_rows; ++i)
                    m.norm[i * m.n_num + col] =
                        (m.raw[i * m.n_num + col] - f.min) / range;
            }
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < n_rows; ++i)
                mean += m.raw[i * m.n_num + col];
            mean /= n_rows;
            double var = 0.0;
            for (std::size_t i = 0; i < n_rows; ++i) {
                double d = m.raw[i * m.n_num + col] - mean;
                var += d * d;
            }
            double sd = std::sqrt(var / n_rows);
            if (sd > 0.0) {
                m.num_active[col] = true;
                for (std::size_t i = 0; i < n_rows; ++i)
                    m.norm[i * m.n_num + col] =
                        (m.raw[i * m.n_num + col] - mean) / sd;
            }
        }
        ++col;
    }
    // Inactive columns keep norm 0; zero them so distances ignore them
    // without per-dimension branching.

    build_neighbors(m);
    build_majorities(m);
    return m;
}

bool is_log_feature(const SmoteOptions& o, const std::string& name) {
    return o.log_features.count(name) > 0;
}

}  // namespace

double mixed_distance(const EncodedRow& a, const EncodedRow& b,
                      const SmoteModel& model) {
    if (a.num.size() != model.n_num || b.num.size() != model.n_num ||
        a.cat.size() != model.n_cat || b.cat.size() != model.n_cat)
        throw SchemaMismatch("encoded row does not match model schema");
    double se = 0.0;
    for (std::size_t d = 0; d < model.n_num; ++d) {
        if (!model.num_active[d]) continue;
        double diff = a.num[d] - b.num[d];
        se += diff * diff;
    }
    int ham = 0;
    for (std::size_t c = 0; c < model.n_cat; ++c) ham += a.cat[c] != b.cat[c];
    return model.options.numeric_weight * std::sqrt(se) +
           model.options.categorical_weight * ham;
}

SmoteModel fit(const std::vector<GenRecord>& records, int k,
               std::uint64_t seed, const SmoteOptions& options) {
    if (k < 1) throw TooFewRows("k must be >= 1");
    if (records.size() < static_cast<std::size_t>(k) + 1)
        throw TooFewRows("need at least k+1 rows, have " +
                         std::to_string(records.size()));

    std::vector<FeatureMeta> features(9);
    std::size_t n_num = 0, n_cat = 0;
    for (std::size_t f = 0; f < 9; ++f) {
        features[f].name = kFields[f].name;
        features[f].kind = kFields[f].kind;
        (kFields[f].kind == FeatureKind::Numerical ? n_num : n_cat)++;
    }
    const std::size_t n = records.size();

    std::vector<double> raw(n * n_num);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t col = 0;
        for (std::size_t f = 0; f < 9; ++f) {
            if (kFields[f].kind != FeatureKind::Numerical) continue;
            double v = num_value(records[i], col);
            if (is_log_feature(options, kFields[f].name)) v = std::log1p(v);
            raw[i * n_num + col] = v;
            ++col;
        }
    }

    // Vocabularies ordered by first appearance.
    std::vector<int> cat_codes(n * n_cat);
    {
        std::size_t col = 0;
        for (std::size_t f = 0; f < 9; ++f) {
            if (kFields[f].kind != FeatureKind::Categorical) continue;
            std::map<std::string, int> code_of;
            for (std::size_t i = 0; i < n; ++i) {
                const std::string& v = cat_value(records[i], col);
                auto it = code_of.find(v);
                if (it == code_of.end()) {
                    int code = static_cast<int>(features[f].vocabulary.size());
                    features[f].vocabulary.push_back(v);
                    it = code_of.emplace(v, code).first;
                }
                cat_codes[i * n_cat + col] = it->second;
            }
            ++col;
        }
    }

    return fit_encoded(std::move(features), std::move(raw),
                       std::move(cat_codes), n, k, seed, options);
}

std::vector<GenRecord> sample(const SmoteModel& model, std::size_t n,
                              std::uint64_t stream,
                              std::optional<double> forced_lambda,
                              SampleTrace* trace) {
    const std::size_t k = static_cast<std::size_t>(model.k);
    Rng rng(hash_combine(model.rng_seed, stream));
    std::vector<GenRecord> out;
    out.reserve(n);

    // Map numeric/categorical columns back to feature slots once.
    std::vector<std::size_t> num_feature(model.n_num), cat_feature(model.n_cat);
    {
        std::size_t nn = 0, nct = 0;
        for (std::size_t f = 0; f < model.features.size(); ++f) {
            if (model.features[f].kind == FeatureKind::Numerical)
                num_feature[nn++] = f;
            else
                cat_feature[nct++] = f;
        }
    }

    for (std::size_t t = 0; t < n; ++t) {
        std::size_t base = rng.uniform_index(model.n_rows);
        std::size_t pick = rng.uniform_index(k);
        std::size_t nb = model.neighbors[base * k + pick];
        double lambda = forced_lambda ? *forced_lambda : rng.uniform01();
        if (trace) trace->picks.push_back({base, nb, lambda});

        GenRecord r;
        for (std::size_t c = 0; c < model.n_num; ++c) {
            double vb = model.raw[base * model.n_num + c];
            double vn = model.raw[nb * model.n_num + c];
            double v = vb == vn ? vb : (1.0 - lambda) * vb + lambda * vn;
            const auto& meta = model.features[num_feature[c]];
            if (is_log_feature(model.options, meta.name)) v = std::expm1(v);
            set_num_value(r, c, v);
        }
        for (std::size_t c = 0; c < model.n_cat; ++c) {
            const auto& meta = model.features[cat_feature[c]];
            set_cat_value(r, c,
                          meta.vocabulary[model.cat_majority[base * model.n_cat +
                                                             c]]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<GenRecord> synthesize_matching(const SmoteModel& model) {
    return sample(model, model.n_rows);
}

EncodedRow encoded_row(const SmoteModel& model, std::size_t i) {
    EncodedRow row;
    row.num.assign(model.norm.begin() + i * model.n_num,
                   model.norm.begin() + (i + 1) * model.n_num);
    row.cat.assign(model.cat_codes.begin() + i * model.n_cat,
                   model.cat_codes.begin() + (i + 1) * model.n_cat);
    return row;
}

GenRecord training_record(const SmoteModel& model, std::size_t i) {
    GenRecord r;
    std::size_t nn = 0, nct = 0;
    for (const auto& f : model.features) {
        if (f.kind == FeatureKind::Numerical) {
            double v = model.raw[i * model.n_num + nn];
            if (is_log_feature(model.options, f.name)) v = std::expm1(v);
            set_num_value(r, nn, v);
            ++nn;
        } else {
            set_cat_value(r, nct,
                          f.vocabulary[model.cat_codes[i * model.n_cat + nct]]);
            ++nct;
        }
    }
    return r;
}

std::span<const std::uint32_t> neighbors_of(const SmoteModel& model,
                                            std::size_t i) {
    return {model.neighbors.data() + i * model.k,
            static_cast<std::size_t>(model.k)};
}

void save_model(std::ostream& out, const SmoteModel& model) {
    nlohmann::json j;
    j["format"] = "gridtrace-smote-model";
    j["version"] = 1;
    j["k"] = model.k;
    j["seed"] = model.rng_seed;
    j["options"] = {
        {"numeric_weight", model.options.numeric_weight},
        {"categorical_weight", model.options.categorical_weight},
        {"normalization",
         model.options.normalization == Normalization::MinMax ? "minmax"
                                                              : "zscore"},
        {"log_features", model.options.log_features},
    };
    j["n_rows"] = model.n_rows;
    auto& feats = j["features"] = nlohmann::json::array();
    for (const auto& f : model.features) {
        nlohmann::json fj;
        fj["name"] = f.name;
        if (f.kind == FeatureKind::Numerical) {
            fj["kind"] = "numerical";
            fj["min"] = f.min;
            fj["max"] = f.max;
        } else {
            fj["kind"] = "categorical";
            fj["vocabulary"] = f.vocabulary;
        }
        feats.push_back(std::move(fj));
    }
    // Training matrix in interpolation space, per column.
    auto& num_cols = j["num_columns"] = nlohmann::json::array();
    for (std::size_t c = 0; c < model.n_num; ++c) {
        std::vector<double> col(model.n_rows);
        for (std::size_t i = 0; i < model.n_rows; ++i)
            col[i] = model.raw[i * model.n_num + c];
        num_cols.push_back(std::move(col));
    }
    auto& cat_cols = j["cat_columns"] = nlohmann::json::array();
    for (std::size_t c = 0; c < model.n_cat; ++c) {
        std::vector<int> col(model.n_rows);
        for (std::size_t i = 0; i < model.n_rows; ++i)
            col[i] = model.cat_codes[i * model.n_cat + c];
        cat_cols.push_back(std::move(col));
    }
    out << j.dump();
}

SmoteModel load_model(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("bad model file: ") + e.what());
    }
    if (j.value("format", "") != "gridtrace-smote-model" ||
        j.value("version", 0) != 1)
        throw ModelFormatError("unrecognized model format/version");

    SmoteOptions options;
    const auto& oj = j.at("options");
    options.numeric_weight = oj.at("numeric_weight").get<double>();
    options.categorical_weight = oj.at("categorical_weight").get<double>();
    options.normalization = oj.at("normalization").get<std::string>() == "zscore"
                                ? Normalization::ZScore
                                : Normalization::MinMax;
    for (const auto& s : oj.at("log_features"))
        options.log_features.insert(s.get<std::string>());

    std::vector<FeatureMeta> features;
    for (const auto& fj : j.at("features")) {
        FeatureMeta f;
        f.name = fj.at("name").get<std::string>();
        if (fj.at("kind").get<std::string>() == "numerical") {
            f.kind = FeatureKind::Numerical;
        } else {
            f.kind = FeatureKind::Categorical;
            f.vocabulary = fj.at("vocabulary").get<std::vector<std::string>>();
        }
        features.push_back(std::move(f));
    }

    std::size_t n_rows = j.at("n_rows").get<std::size_t>();
    std::size_t n_num = 0, n_cat = 0;
    for (const auto& f : features)
        (f.kind == FeatureKind::Numerical ? n_num : n_cat)++;

    std::vector<double> raw(n_rows * n_num);
    const auto& num_cols = j.at("num_columns");
    if (num_cols.size() != n_num)
        throw ModelFormatError("numeric column count mismatch");
    for (std::size_t c = 0; c < n_num; ++c) {
        auto col = num_cols[c].get<std::vector<double>>();
        if (col.size() != n_rows) throw ModelFormatError("column length");
        for (std::size_t i = 0; i < n_rows; ++i) raw[i * n_num + c] = col[i];
    }
    std::vector<std::size_t> cat_feature;
    for (std::size_t f = 0; f < features.size(); ++f)
        if (features[f].kind == FeatureKind::Categorical)
            cat_feature.push_back(f);

    std::vector<int> cat_codes(n_rows * n_cat);
    const auto& cat_cols = j.at("cat_columns");
    if (cat_cols.size() != n_cat)
        throw ModelFormatError("categorical column count mismatch");
    for (std::size_t c = 0; c < n_cat; ++c) {
        auto col = cat_cols[c].get<std::vector<int>>();
        if (col.size() != n_rows) throw ModelFormatError("column length");
        int vocab_size =
            static_cast<int>(features[cat_feature[c]].vocabulary.size());
        for (std::size_t i = 0; i < n_rows; ++i) {
            if (col[i] < 0 || col[i] >= vocab_size)
                throw ModelFormatError("code out of vocabulary");
            cat_codes[i * n_cat + c] = col[i];
        }
    }

    return fit_encoded(std::move(features), std::move(raw),
                       std::move(cat_codes), n_rows, j.at("k").get<int>(),
                       j.at("seed").get<std::uint64_t>(), options);
}

}  // namespace gridtrace::smote
