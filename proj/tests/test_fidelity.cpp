#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gridtrace/fidelity.hpp"
#include "test_support.hpp"

using namespace gridtrace;
using namespace gridtrace::fidelity;

namespace {

// O(n^2) oracle: sup over all observed thresholds of |F_real - F_synth|.
double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> thresholds = a;
    thresholds.insert(thresholds.end(), b.begin(), b.end());
    double sup = 0.0;
    for (double t : thresholds) {
        double fa = std::count_if(a.begin(), a.end(),
                                  [&](double x) { return x <= t; }) /
                    static_cast<double>(a.size());
        double fb = std::count_if(b.begin(), b.end(),
                                  [&](double x) { return x <= t; }) /
                    static_cast<double>(b.size());
        sup = std::max(sup, std::abs(fa - fb));
    }
    return sup;
}

}  // namespace

TEST_CASE("ks_statistic basics") {
    std::vector<double> x{1, 2, 3, 4};
    CHECK(ks_statistic(x, x) == 0.0);
    CHECK(ks_statistic({0, 0, 0}, {1, 1, 1}) == 1.0);
    CHECK_THROWS_AS(ks_statistic({}, x), EmptySample);
    CHECK_THROWS_AS(ks_statistic(x, {}), EmptySample);
}

TEST_CASE("ks_statistic equals brute-force sup over thresholds") {
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(100), b(100);
        for (auto& v : a) v = rng.uniform01() * 10;
        for (auto& v : b) v = rng.uniform01() * 10 + rng.uniform01();
        CHECK(ks_statistic(a, b) ==
              doctest::Approx(brute_ks(a, b)).epsilon(1e-12));
        CHECK(ks_statistic(a, b) == ks_statistic(b, a));
    }
}

TEST_CASE("ks_statistic with unequal sample sizes") {
    Rng rng(2);
    std::vector<double> a(37), b(111);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal() + 0.3;
    CHECK(ks_statistic(a, b) == doctest::Approx(brute_ks(a, b)).epsilon(1e-12));
}

TEST_CASE("ks_statistic is invariant under strictly increasing transforms") {
    Rng rng(3);
    std::vector<double> a(80), b(80);
    for (auto& v : a) v = rng.uniform01() * 5;
    for (auto& v : b) v = rng.uniform01() * 6;
    double before = ks_statistic(a, b);
    auto f = [](double x) { return std::exp(x) + x * x * x; };
    for (auto& v : a) v = f(v);
    for (auto& v : b) v = f(v);
    CHECK(ks_statistic(a, b) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("total_variation basics") {
    std::vector<std::string> x{"a", "a", "b"};
    CHECK(total_variation(x, x) == 0.0);
    CHECK(total_variation({"a", "a"}, {"b", "c"}) == 1.0);
    CHECK_THROWS_AS(total_variation({}, x), EmptySample);
}

TEST_CASE("total_variation equals direct summation oracle") {
    Rng rng(4);
    const char* cats[] = {"a", "b", "c", "d", "e"};
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::string> x, y;
        for (int i = 0; i < 60; ++i) x.push_back(cats[rng.uniform_index(4)]);
        for (int i = 0; i < 90; ++i)
            y.push_back(cats[1 + rng.uniform_index(4)]);
        std::map<std::string, double> fx, fy;
        for (const auto& v : x) fx[v] += 1.0 / x.size();
        for (const auto& v : y) fy[v] += 1.0 / y.size();
        double sum = 0.0;
        for (const char* c : cats) sum += std::abs(fx[c] - fy[c]);
        CHECK(total_variation(x, y) == doctest::Approx(0.5 * sum).epsilon(1e-12));
        CHECK(total_variation(x, y) == total_variation(y, x));
    }
}

TEST_CASE("compare scores every feature and is symmetric") {
    Rng rng(5);
    auto real = gridtrace::testing::random_gen_records(rng, 200);
    auto synth = gridtrace::testing::random_gen_records(rng, 150);

    auto rep = compare(real, synth);
    CHECK(rep.per_feature.size() == 9);
    CHECK(rep.n_real == 200);
    CHECK(rep.n_synth == 150);
    for (const auto& [name, score] : rep.per_feature) {
        CHECK(score >= 0.0);
        CHECK(score <= 1.0);
    }
    CHECK(rep.overall >= 0.0);
    CHECK(rep.overall <= 1.0);
    CHECK(rep.overlays.size() == 9);

    auto rev = compare(synth, real);
    for (const auto& [name, score] : rep.per_feature)
        CHECK(rev.per_feature.at(name) == doctest::Approx(score).epsilon(1e-12));
}

TEST_CASE("compare of a table with itself is all zeros") {
    Rng rng(6);
    auto x = gridtrace::testing::random_gen_records(rng, 100);
    auto rep = compare(x, x);
    for (const auto& [name, score] : rep.per_feature) CHECK(score == 0.0);
    CHECK(rep.overall == 0.0);
}

TEST_CASE("constant feature with different constants scores 1") {
    Rng rng(7);
    auto real = gridtrace::testing::random_gen_records(rng, 50);
    auto synth = real;
    for (auto& r : real) r.workload = 5.0;
    for (auto& s : synth) s.workload = 9.0;
    auto rep = compare(real, synth);
    CHECK(rep.per_feature.at("workload") == 1.0);
}

TEST_CASE("scores are invariant under row permutation") {
    Rng rng(8);
    auto real = gridtrace::testing::random_gen_records(rng, 120);
    auto synth = gridtrace::testing::random_gen_records(rng, 120);
    auto before = compare(real, synth);
    // deterministic shuffle
    for (std::size_t i = synth.size() - 1; i > 0; --i)
        std::swap(synth[i], synth[rng.uniform_index(i + 1)]);
    auto after = compare(real, synth);
    for (const auto& [name, score] : before.per_feature)
        CHECK(after.per_feature.at(name) == score);
}
