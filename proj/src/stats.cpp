#include "mfl/stats.hpp"

#include "mfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfl {

double w2_empirical_1d(std::vector<double> sample_a, std::vector<double> sample_b) {
    if (sample_a.empty() || sample_b.empty()) {
        throw EmptyInput("w2_empirical_1d: empty sample");
    }
    if (sample_a.size() != sample_b.size()) {
        std::ostringstream os;
        os << "w2_empirical_1d: sample sizes differ (" << sample_a.size()
           << " vs " << sample_b.size() << ")";
        throw LengthMismatch(os.str());
    }
    std::sort(sample_a.begin(), sample_a.end());
    std::sort(sample_b.begin(), sample_b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < sample_a.size(); ++i) {
        const double d = sample_a[i] - sample_b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(sample_a.size()));
}

double w2_sample_vs_density(std::vector<double> sample,
                            const std::function<double(double)>& quantile_fn,
                            std::size_t n_quantiles) {
    if (sample.empty()) throw EmptyInput("w2_sample_vs_density: empty sample");
    if (n_quantiles < 1) throw BadRange("w2_sample_vs_density: n_quantiles >= 1");
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n_quantiles; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n_quantiles);
        std::size_t idx = static_cast<std::size_t>(p * static_cast<double>(n));
        if (idx >= n) idx = n - 1;
        const double d = sample[idx] - quantile_fn(p);
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(n_quantiles));
}

double ks_vs_unit_exponential(std::vector<double> normalized_times) {
    if (normalized_times.empty()) {
        throw EmptyInput("ks_vs_unit_exponential: empty input");
    }
    for (double t : normalized_times) {
        if (!(t > 0.0)) throw BadRange("ks_vs_unit_exponential: times must be positive");
    }
    std::sort(normalized_times.begin(), normalized_times.end());
    const double n = static_cast<double>(normalized_times.size());
    double d = 0.0;
    for (std::size_t i = 0; i < normalized_times.size(); ++i) {
        const double cdf = 1.0 - std::exp(-normalized_times[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
        const double lo = cdf - static_cast<double>(i) / n;
        d = std::max({d, std::abs(hi), std::abs(lo)});
    }
    return d;
}

ExitTimeReport exit_report(const std::vector<ExitOutcome>& outcomes) {
    ExitTimeReport report;
    report.n_total = outcomes.size();
    std::vector<double> times;
    for (const auto& o : outcomes) {
        if (o.exited && !o.failed) {
            times.push_back(o.exit_time);
        } else {
            ++report.n_censored;
        }
    }
    report.censoring_caveat = report.n_censored > 0;
    if (times.empty()) {
        report.mean_defined = false;
        return report;
    }
    report.mean_defined = true;
    double s = 0.0;
    for (double t : times) s += t;
    report.mean_exit = s / static_cast<double>(times.size());

    double ss = 0.0;
    for (double t : times) {
        const double d = t - report.mean_exit;
        ss += d * d;
    }
    const double n = static_cast<double>(times.size());
    const double sd = times.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    report.mean_ci_halfwidth = 1.96 * sd / std::sqrt(n);

    std::vector<double> normalized(times);
    for (double& t : normalized) t /= report.mean_exit;
    report.ks_distance = ks_vs_unit_exponential(std::move(normalized));
    return report;
}

double moment_k(const std::vector<double>& sample, int k) {
    if (sample.empty()) throw EmptyInput("moment_k: empty sample");
    if (k < 0) throw BadRange("moment_k: order must be non-negative");
    double s = 0.0;
    for (double v : sample) s += std::pow(std::abs(v), k);
    return s / static_cast<double>(sample.size());
}

Histogram histogram(const std::vector<double>& sample, std::size_t bins,
                    double lo, double hi) {
    if (sample.empty()) throw EmptyInput("histogram: empty sample");
    if (bins < 1 || !(lo < hi)) throw BadRange("histogram: need bins >= 1 and lo < hi");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : sample) {
        if (v < lo || v > hi) continue;
        std::size_t idx = static_cast<std::size_t>((v - lo) / width);
        if (idx >= bins) idx = bins - 1; // right-closed last bin
        ++h.counts[idx];
        ++h.total;
    }
    return h;
}

double tv_distance(const Histogram& hist,
                   const std::function<double(double)>& density_fn) {
    if (hist.total == 0) throw EmptyInput("tv_distance: histogram has no mass");
    const std::size_t bins = hist.counts.size();
    double tv = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double p =
            static_cast<double>(hist.counts[b]) / static_cast<double>(hist.total);
        // Fixed-grid Simpson of the density over the bin.
        const double lo = hist.edges[b], hi = hist.edges[b + 1];
        const int n = 64;
        const double h = (hi - lo) / n;
        double s = density_fn(lo) + density_fn(hi);
        for (int i = 1; i < n; ++i) {
            s += (i % 2 == 1 ? 4.0 : 2.0) * density_fn(lo + i * h);
        }
        const double q = s * h / 3.0;
        tv += std::abs(p - q);
    }
    return 0.5 * tv;
}

} // namespace mfl
