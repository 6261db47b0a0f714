#ifndef MFL_STATS_HPP
#define MFL_STATS_HPP

#include "mfl/simulate.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace mfl {

// Exact W2 between two equal-weight empirical measures on R: sort both,
// pair order statistics. Throws LengthMismatch.
double w2_empirical_1d(std::vector<double> sample_a, std::vector<double> sample_b);

// W2 between an empirical sample and a density given through its quantile
// function, both discretized at the midpoint ranks (i - 1/2) / n_quantiles.
double w2_sample_vs_density(std::vector<double> sample,
                            const std::function<double(double)>& quantile_fn,
                            std::size_t n_quantiles);

// sup_s |F_emp(s) - (1 - e^{-s})|, evaluated one-sidedly at every jump.
// Throws EmptyInput; inputs must be positive.
double ks_vs_unit_exponential(std::vector<double> normalized_times);

struct ExitTimeReport {
    std::size_t n_total = 0;
    std::size_t n_censored = 0;
    bool mean_defined = false;      // false when every outcome is censored
    double mean_exit = 0.0;         // over uncensored times
    bool censoring_caveat = false;  // n_censored > 0: mean is biased low
    double ks_distance = 0.0;       // of tau/mean_exit vs unit exponential
    double mean_ci_halfwidth = 0.0; // 1.96 * sd / sqrt(n_uncensored)
};

// Censored outcomes are excluded from the mean and the KS statistic but
// counted; failed replicas are treated as censored bookkeeping-wise.
ExitTimeReport exit_report(const std::vector<ExitOutcome>& outcomes);

// k-th absolute empirical moment. Throws EmptyInput.
double moment_k(const std::vector<double>& sample, int k);

struct Histogram {
    std::vector<double> edges;       // bins + 1 entries
    std::vector<std::size_t> counts; // left-closed; last bin right-closed
    std::size_t total = 0;
};

// Equal-width bins on [lo, hi]; samples outside the range are dropped.
// Throws EmptyInput / BadRange.
Histogram histogram(const std::vector<double>& sample, std::size_t bins,
                    double lo, double hi);

// (1/2) sum_bins |p_bin - q_bin| with p the normalized counts and q the
// density integrated per bin with fixed-grid Simpson.
double tv_distance(const Histogram& hist,
                   const std::function<double(double)>& density_fn);

} // namespace mfl

#endif // MFL_STATS_HPP
