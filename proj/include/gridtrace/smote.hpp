#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridtrace/trace_model.hpp"

namespace gridtrace::smote {

struct TooFewRows : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FeatureKind { Numerical, Categorical };
enum class Normalization { MinMax, ZScore };

struct FeatureMeta {
    std::string name;
    FeatureKind kind = FeatureKind::Numerical;
    // Numerical: observed range (in interpolation space, i.e. after an
    // optional log1p transform). Constant features normalize to 0 and are
    // excluded from the distance.
    double min = 0.0;
    double max = 0.0;
    // Categorical: vocabulary ordered by first appearance in training data.
    std::vector<std::string> vocabulary;
};

struct SmoteOptions {
    double numeric_weight = 1.0;
    double categorical_weight = 1.0;
    Normalization normalization = Normalization::MinMax;
    // Feature names interpolated in log1p space (heavy-tailed columns).
    std::set<std::string> log_features;
};

// One training row in distance space: normalized numericals plus
// categorical vocabulary codes.
struct EncodedRow {
    std::vector<double> num;
    std::vector<int> cat;
};

struct SmoteModel {
    std::vector<FeatureMeta> features;  // 9 entries, GenRecord order
    int k = 5;
    SmoteOptions options;
    std::uint64_t rng_seed = 0;

    std::size_t n_rows = 0;
    std::size_t n_num = 0;  // numerical feature count
    std::size_t n_cat = 0;

    // Row-major [n_rows x n_num]: interpolation-space values and their
    // normalized counterparts used for distances.
    std::vector<double> raw;
    std::vector<double> norm;
    std::vector<int> cat_codes;       // [n_rows x n_cat]
    std::vector<bool> num_active;     // distance participation per numerical

    // k nearest neighbors of each training row, ascending (distance, index).
    std::vector<std::uint32_t> neighbors;  // [n_rows x k]
    // Most frequent category among each row's k neighbors, per categorical
    // feature; ties resolved toward the lowest vocabulary index.
    std::vector<int> cat_majority;  // [n_rows x n_cat]
};

// Weighted Euclidean over active normalized numericals plus weighted
// Hamming over categorical codes.
double mixed_distance(const EncodedRow& a, const EncodedRow& b,
                      const SmoteModel& model);

SmoteModel fit(const std::vector<GenRecord>& records, int k,
               std::uint64_t seed, const SmoteOptions& options = {});

struct SampleTrace {
    struct Pick {
        std::size_t base;
        std::size_t neighbor;
        double lambda;
    };
    std::vector<Pick> picks;
};

// Per-row: uniform base row, uniform neighbor among its k nearest,
// lambda ~ U[0,1]; numericals interpolated as (1-l)*base + l*neighbor,
// categoricals from the precomputed neighbor majority. `stream`
// distinguishes concurrent sampling calls; `forced_lambda` and `trace`
// are test hooks.
std::vector<GenRecord> sample(const SmoteModel& model, std::size_t n,
                              std::uint64_t stream = 0,
                              std::optional<double> forced_lambda = {},
                              SampleTrace* trace = nullptr);

// sample() sized to the training set.
std::vector<GenRecord> synthesize_matching(const SmoteModel& model);

EncodedRow encoded_row(const SmoteModel& model, std::size_t i);
GenRecord training_record(const SmoteModel& model, std::size_t i);
std::span<const std::uint32_t> neighbors_of(const SmoteModel& model,
                                            std::size_t i);

// Version-tagged JSON persistence; loading rebuilds the k-NN structure
// deterministically from the stored training matrix.
void save_model(std::ostream& out, const SmoteModel& model);
SmoteModel load_model(std::istream& in);

}  // namespace gridtrace::smote
