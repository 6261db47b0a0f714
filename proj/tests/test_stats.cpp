#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfl/errors.hpp"
#include "mfl/fixedpoint.hpp"
#include "mfl/stats.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace mfl;

TEST_CASE("w2 basics") {
    CHECK(w2_empirical_1d({0.0, 1.0}, {0.0, 1.0}) == 0.0);
    CHECK(w2_empirical_1d({0.0}, {1.0}) == 1.0);
    CHECK_THROWS_AS(w2_empirical_1d({0.0}, {1.0, 2.0}), LengthMismatch);
    CHECK_THROWS_AS(w2_empirical_1d({}, {}), EmptyInput);
}

TEST_CASE("w2 equals the permutation brute force on small samples") {
    oracles::TestRng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.next() % 6;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform(-3.0, 3.0);
            b[i] = rng.uniform(-3.0, 3.0);
        }
        CHECK(std::abs(w2_empirical_1d(a, b) - oracles::w2_bruteforce(a, b)) <= 1e-12);
    }
}

TEST_CASE("w2 is a permutation-invariant metric") {
    oracles::TestRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.next() % 8;
        std::vector<double> a(n), b(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform(-2.0, 2.0);
            b[i] = rng.uniform(-2.0, 2.0);
            c[i] = rng.uniform(-2.0, 2.0);
        }
        CHECK(w2_empirical_1d(a, b) == w2_empirical_1d(b, a));
        CHECK(w2_empirical_1d(a, c) <=
              w2_empirical_1d(a, b) + w2_empirical_1d(b, c) + 1e-12);

        std::vector<double> shuffled = a;
        std::reverse(shuffled.begin(), shuffled.end());
        CHECK(w2_empirical_1d(shuffled, b) == w2_empirical_1d(a, b));
    }
}

TEST_CASE("w2 against a density via quantiles") {
    ModelParams p;
    p.sigma = 0.5;
    const double m_star = iterate_to_fixed_point(p, 1.0, 1e-10).m;
    const oracles::QuantileTable quantile(p, m_star, m_star - 6.0, m_star + 6.0);
    const auto qfn = [&](double prob) { return quantile(prob); };

    // Sample drawn from the density itself.
    oracles::TestRng rng(99);
    std::vector<double> sample(10000);
    for (double& v : sample) v = quantile(rng.uniform());
    CHECK(w2_sample_vs_density(sample, qfn, 2048) < 0.05);

    // Consistency under quantile refinement.
    const double d1 = w2_sample_vs_density(sample, qfn, 2048);
    const double d2 = w2_sample_vs_density(sample, qfn, 4096);
    CHECK(std::abs(d1 - d2) < 1e-3);

    // Point mass at zero vs a centered density: W2 = sqrt(second moment).
    const oracles::QuantileTable q0(p, 0.0, -6.0, 6.0);
    const auto q0fn = [&](double prob) { return q0(prob); };
    const std::vector<double> zeros(5000, 0.0);
    const double second_moment = 2.0 * p.sigma * std::tgamma(0.75) / std::tgamma(0.25);
    CHECK(std::abs(w2_sample_vs_density(zeros, q0fn, 8192) -
                   std::sqrt(second_moment)) < 1e-3);
}

TEST_CASE("ks against the unit exponential") {
    // Plug-in exponential quantiles are nearly perfect.
    std::vector<double> qs(1000);
    for (std::size_t i = 0; i < qs.size(); ++i) {
        qs[i] = -std::log(1.0 - (static_cast<double>(i) + 0.5) / 1000.0);
    }
    CHECK(ks_vs_unit_exponential(qs) < 0.01);

    // Degenerate all-equal sample: sup is 1 - e^{-1}.
    const std::vector<double> ones(50, 1.0);
    CHECK(std::abs(ks_vs_unit_exponential(ones) - (1.0 - std::exp(-1.0))) < 1e-12);

    // Single observation at ln 2: both one-sided gaps are 1/2.
    CHECK(std::abs(ks_vs_unit_exponential({std::log(2.0)}) - 0.5) < 1e-12);

    CHECK_THROWS_AS(ks_vs_unit_exponential({}), EmptyInput);
    CHECK_THROWS_AS(ks_vs_unit_exponential({1.0, -2.0}), BadRange);
}

TEST_CASE("ks stays in [0,1] and tolerates duplicates") {
    oracles::TestRng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> times(1 + rng.next() % 40);
        for (double& t : times) t = 0.01 + 5.0 * rng.uniform();
        times.push_back(times.front()); // duplicate
        const double d = ks_vs_unit_exponential(times);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("exit_report aggregates and normalizes") {
    std::vector<ExitOutcome> outcomes;
    oracles::TestRng rng(30); // a typical draw; the null mean of this KS is ~0.05
    for (std::size_t k = 0; k < 200; ++k) {
        ExitOutcome o;
        o.replica_index = k;
        o.exit_time = 40.0 * rng.exponential();
        o.exited = true;
        outcomes.push_back(o);
    }
    const auto report = exit_report(outcomes);
    CHECK(report.n_total == 200);
    CHECK(report.n_censored == 0);
    CHECK_FALSE(report.censoring_caveat);
    CHECK(report.mean_defined);
    CHECK(report.mean_exit > 0.0);
    CHECK(report.mean_ci_halfwidth > 0.0);
    CHECK(report.ks_distance < 0.06); // exponential input, n = 200

    // Scale invariance of the normalized statistic.
    auto scaled = outcomes;
    for (auto& o : scaled) o.exit_time *= 10.0;
    const auto r2 = exit_report(scaled);
    CHECK(std::abs(r2.ks_distance - report.ks_distance) <= 1e-12);

    // Censored outcomes are counted and flagged.
    outcomes[3].exited = false;
    outcomes[7].exited = false;
    const auto r3 = exit_report(outcomes);
    CHECK(r3.n_censored == 2);
    CHECK(r3.censoring_caveat);

    // Fully censored ensembles have no mean and no KS.
    std::vector<ExitOutcome> censored(5);
    const auto r4 = exit_report(censored);
    CHECK_FALSE(r4.mean_defined);
    CHECK(r4.n_censored == 5);
}

TEST_CASE("moments and histograms") {
    CHECK(moment_k({-1.0, 1.0}, 4) == 1.0);
    CHECK_THROWS_AS(moment_k({}, 2), EmptyInput);

    // Left-closed bins, last bin right-closed: [0, 0.5) and [0.5, 1].
    const auto h = histogram({0.0, 0.5, 1.0}, 2, 0.0, 1.0);
    REQUIRE(h.counts.size() == 2);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[1] == 2);
    CHECK(h.total == 3);
    CHECK_THROWS_AS(histogram({1.0}, 0, 0.0, 1.0), BadRange);
    CHECK_THROWS_AS(histogram({1.0}, 2, 1.0, 0.0), BadRange);
}

TEST_CASE("tv distance of a density against itself is tiny") {
    ModelParams p;
    p.sigma = 0.5;
    const Gibbs1Density density(p);
    const auto fn = [&](double x) { return density(x); };

    // Bin the density itself at high resolution.
    Histogram h;
    const std::size_t bins = 50;
    h.edges.resize(bins + 1);
    h.counts.resize(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = -2.5 + 5.0 * i / bins;
    for (std::size_t b = 0; b < bins; ++b) {
        const int n = 64;
        const double lo = h.edges[b], hi = h.edges[b + 1];
        const double step = (hi - lo) / n;
        double s = fn(lo) + fn(hi);
        for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * fn(lo + i * step);
        h.counts[b] = static_cast<std::size_t>(std::llround(s * step / 3.0 * 1e13));
        h.total += h.counts[b];
    }
    CHECK(tv_distance(h, fn) < 1e-10);
}
