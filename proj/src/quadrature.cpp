#include "mfl/quadrature.hpp"

#include "mfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace mfl {

double log_weight(const ModelParams& params, double m, double x) {
    const double d = x - m;
    return -(potential_value(params.potential, x) + 0.5 * params.kappa * d * d)
           / (params.sigma * params.sigma);
}

namespace {

constexpr int kMaxPanels = 1 << 18;
constexpr double kTailLogDrop = 36.0; // endpoints must sit exp(-36) below the peak
constexpr int kWindowSamples = 129;
constexpr int kMaxExpansions = 400;

struct Window {
    double lo, hi;
    double log_shift; // max sampled log-weight
    double peak_x;    // location of the max sample
};

// Coarse argmax of the log-weight by repeated zoom; the mode of the tilted
// weight sits near m^(1/3) for far tilts, far from the m/(1+kappa) guess,
// and the expand-by-2 rule cannot crawl there on its own.
template <typename LogW>
double zoom_argmax(const LogW& logw, double lo, double hi) {
    double best_x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 12; ++iter) {
        const double h = (hi - lo) / 256.0;
        double best = -HUGE_VAL;
        for (int i = 0; i <= 256; ++i) {
            const double x = lo + h * i;
            const double lw = logw(x);
            if (lw > best) {
                best = lw;
                best_x = x;
            }
        }
        if (h < 0.25) break;
        lo = best_x - 2.0 * h;
        hi = best_x + 2.0 * h;
    }
    return best_x;
}

// Truncation window: start around the given mode, expand an endpoint by 2
// while its integrand is not negligible against the sampled maximum. All
// comparisons happen in log space.
template <typename LogW>
Window select_window_around(const LogW& logw, double mode, double half_width) {
    double lo = mode - half_width;
    double hi = mode + half_width;
    for (int round = 0; round <= kMaxExpansions; ++round) {
        double lmax = -HUGE_VAL;
        double xmax = lo;
        const double h = (hi - lo) / (kWindowSamples - 1);
        for (int i = 0; i < kWindowSamples; ++i) {
            const double x = lo + h * i;
            const double lw = logw(x);
            if (lw > lmax) {
                lmax = lw;
                xmax = x;
            }
        }
        const bool lo_ok = logw(lo) < lmax - kTailLogDrop;
        const bool hi_ok = logw(hi) < lmax - kTailLogDrop;
        if (lo_ok && hi_ok) return {lo, hi, lmax, xmax};
        if (!lo_ok) lo -= 2.0;
        if (!hi_ok) hi += 2.0;
    }
    throw QuadratureNonConvergence(
        "truncation window failed to close after repeated expansion");
}

struct Tri {
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    Tri& operator+=(const Tri& o) {
        i0 += o.i0;
        i1 += o.i1;
        i2 += o.i2;
        return *this;
    }
    Tri operator-(const Tri& o) const { return {i0 - o.i0, i1 - o.i1, i2 - o.i2}; }
    bool within(const Tri& bound) const {
        return std::abs(i0) <= bound.i0 && std::abs(i1) <= bound.i1 &&
               std::abs(i2) <= bound.i2;
    }
};

// Integrand values at a point: {w, (x-c) w, (x-c)^2 w} with w the shifted
// weight. Centering at c keeps the variance free of catastrophic
// cancellation for far-tilted m.
struct Eval {
    double x;
    double w, xw, xxw;
};

template <typename Weight>
Eval eval_at(const Weight& weight, double c, double x) {
    const double w = weight(x);
    const double d = x - c;
    return {x, w, d * w, d * d * w};
}

Tri simpson(const Eval& a, const Eval& mid, const Eval& b) {
    const double h6 = (b.x - a.x) / 6.0;
    return {h6 * (a.w + 4.0 * mid.w + b.w), h6 * (a.xw + 4.0 * mid.xw + b.xw),
            h6 * (a.xxw + 4.0 * mid.xxw + b.xxw)};
}

struct AdaptiveResult {
    Tri integral;
    Tri err;
    int panels = 0;
};

// Adaptive Simpson with interval halving on the three integrals at once;
// an interval is accepted only when every component's |S_fine - S_coarse|/15
// is within its width-proportional share of that component's tolerance.
template <typename Weight>
AdaptiveResult adaptive_simpson_tri(const Weight& weight, double c, double lo,
                                    double hi, const Tri& abs_tol) {
    struct Item {
        Eval a, m, b;
        Tri coarse;
    };
    const double total_width = hi - lo;

    std::vector<Item> stack;
    AdaptiveResult out;

    // Seed with 8 panels so narrow spikes inside a wide window are not
    // missed by the very first error estimate.
    const int seed_n = 8;
    std::vector<Eval> seed;
    seed.reserve(2 * seed_n + 1);
    for (int i = 0; i <= 2 * seed_n; ++i) {
        seed.push_back(eval_at(weight, c, lo + (hi - lo) * i / (2.0 * seed_n)));
    }
    for (int i = 0; i < seed_n; ++i) {
        const Eval& a = seed[2 * i];
        const Eval& m = seed[2 * i + 1];
        const Eval& b = seed[2 * i + 2];
        stack.push_back({a, m, b, simpson(a, m, b)});
    }
    out.panels = seed_n;

    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();

        const Eval ml = eval_at(weight, c, 0.5 * (it.a.x + it.m.x));
        const Eval mr = eval_at(weight, c, 0.5 * (it.m.x + it.b.x));
        const Tri left = simpson(it.a, ml, it.m);
        const Tri right = simpson(it.m, mr, it.b);
        Tri fine = left;
        fine += right;
        const Tri delta = fine - it.coarse;
        const double width = it.b.x - it.a.x;
        const double frac = 15.0 * width / total_width;
        const Tri share{abs_tol.i0 * frac, abs_tol.i1 * frac, abs_tol.i2 * frac};

        if (delta.within(share) || width < 1e-14 * total_width) {
            // Richardson-corrected acceptance.
            Tri corrected = fine;
            corrected.i0 += delta.i0 / 15.0;
            corrected.i1 += delta.i1 / 15.0;
            corrected.i2 += delta.i2 / 15.0;
            out.integral += corrected;
            out.err.i0 += std::abs(delta.i0) / 15.0;
            out.err.i1 += std::abs(delta.i1) / 15.0;
            out.err.i2 += std::abs(delta.i2) / 15.0;
            continue;
        }
        out.panels += 2;
        if (out.panels > kMaxPanels) {
            std::ostringstream os;
            os << "adaptive Simpson exceeded " << kMaxPanels
               << " panels before reaching tol=" << abs_tol.i0;
            throw QuadratureNonConvergence(os.str());
        }
        stack.push_back({it.a, ml, it.m, left});
        stack.push_back({it.m, mr, it.b, right});
    }
    return out;
}

// Trapezoid sketch of the absolute integrand scales {w, |x-c| w, (x-c)^2 w},
// used only to size the adaptive tolerances.
template <typename Weight>
Tri coarse_scales(const Weight& weight, double c, double lo, double hi) {
    const int n = 256;
    const double h = (hi - lo) / n;
    Tri out;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double w = weight(x) * ((i == 0 || i == n) ? 0.5 : 1.0);
        const double d = std::abs(x - c);
        out.i0 += w;
        out.i1 += d * w;
        out.i2 += d * d * w;
    }
    out.i0 *= h;
    out.i1 *= h;
    out.i2 *= h;
    return out;
}

// Monomial coefficients of V as sum a_k x^{2k}.
std::vector<double> monomials(const PotentialSpec& spec) {
    if (spec.kind == PotentialKind::double_well) return {-0.5, 0.25};
    return spec.coefficients;
}

// Coefficients c[j] of u^j in
//   [V(x0+u) - V(x0) + kappa u^2/2 + kappa (x0-m) u] / sigma^2.
// Evaluating the tilted exponent in centered coordinates keeps every term
// at live-zone magnitude, so the weight stays smooth to ~1e-14 even when
// the raw log-weight is ~1e6 and its ulp would otherwise dominate.
std::vector<double> centered_exponent_coeffs(const ModelParams& params, double m,
                                             double x0) {
    const std::vector<double> a = monomials(params.potential);
    const std::size_t degree = 2 * a.size();
    std::vector<double> c(degree + 1, 0.0);
    for (std::size_t k = 1; k <= a.size(); ++k) {
        const double ak = a[k - 1];
        const std::size_t p = 2 * k;
        // a_k [(x0+u)^p - x0^p] = a_k sum_{j=1..p} C(p,j) x0^{p-j} u^j
        std::vector<double> x0_powers(p + 1);
        x0_powers[0] = 1.0;
        for (std::size_t j = 1; j <= p; ++j) x0_powers[j] = x0_powers[j - 1] * x0;
        double binom = 1.0;
        for (std::size_t j = 1; j <= p; ++j) {
            binom = binom * static_cast<double>(p - j + 1) / static_cast<double>(j);
            c[j] += ak * binom * x0_powers[p - j];
        }
    }
    c[1] += params.kappa * (x0 - m);
    c[2] += 0.5 * params.kappa;
    const double sigma2 = params.sigma * params.sigma;
    for (double& v : c) v /= sigma2;
    return c;
}

} // namespace

NuMoments nu_moments(const ModelParams& params, double m, double tol) {
    if (!(tol > 0.0)) throw ConfigError("quadrature tol must be positive");

    const auto logw = [&](double x) { return log_weight(params, m, x); };
    const double reach = std::max(std::abs(m), 10.0) + 10.0;
    const double x0 = zoom_argmax(logw, -reach, reach);

    const std::vector<double> coeffs = centered_exponent_coeffs(params, m, x0);
    const auto exponent_u = [&](double u) {
        double acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 1;) acc = acc * u + coeffs[j];
        return -(acc * u);
    };

    const double half_width0 = 8.0 * params.sigma + 4.0;
    const Window win = select_window_around(exponent_u, 0.0, half_width0);

    const double shift = win.log_shift; // relative to the exponent at x0
    const auto weight = [&](double u) { return std::exp(exponent_u(u) - shift); };
    // Centering at the sampled peak keeps all three integrands on
    // comparable scales and the variance free of cancellation.
    const double c = win.peak_x;

    const Tri scales = coarse_scales(weight, c, win.lo, win.hi);
    const double mass = std::max(scales.i0, 1e-300);
    const Tri abs_tol{tol * 0.1 * mass,
                      tol * 0.1 * std::max(scales.i1, 0.01 * mass),
                      tol * 0.1 * std::max(scales.i2, 0.01 * mass)};

    const AdaptiveResult res = adaptive_simpson_tri(weight, c, win.lo, win.hi, abs_tol);
    if (!(res.integral.i0 > 0.0)) {
        throw QuadratureNonConvergence("tilted-measure mass evaluated to zero");
    }

    NuMoments out;
    out.m = m;
    out.z = std::exp(log_weight(params, m, x0) + shift) * res.integral.i0;
    const double mean_c = res.integral.i1 / res.integral.i0;
    out.mean = x0 + c + mean_c;
    out.variance = res.integral.i2 / res.integral.i0 - mean_c * mean_c;
    out.truncation_radius =
        std::max(std::abs(x0 + win.lo), std::abs(x0 + win.hi));
    out.estimated_error =
        (res.err.i1 + std::abs(mean_c) * res.err.i0) / res.integral.i0;
    return out;
}

double f_of_m(const ModelParams& params, double m, double tol) {
    return nu_moments(params, m, tol).mean;
}

double f_prime(const ModelParams& params, double m, double tol) {
    const NuMoments nm = nu_moments(params, m, tol);
    return params.kappa * nm.variance / (params.sigma * params.sigma);
}

Gibbs1Density::Gibbs1Density(const ModelParams& params, double tol)
    : params_(params) {
    require_valid(params);
    const auto logw = [&](double x) {
        return -potential_value(params_.potential, x) / (params_.sigma * params_.sigma);
    };
    const double mode = zoom_argmax(logw, -20.0, 20.0);
    const Window win = select_window_around(logw, mode, 8.0 * params_.sigma + 4.0);
    log_shift_ = win.log_shift;
    lo_ = win.lo;
    hi_ = win.hi;

    const auto weight = [&](double x) { return std::exp(logw(x) - log_shift_); };
    const Tri scales = coarse_scales(weight, win.peak_x, lo_, hi_);
    const double mass = std::max(scales.i0, 1e-300);
    const Tri abs_tol{tol * 0.1 * mass,
                      tol * 0.1 * std::max(scales.i1, 0.01 * mass),
                      tol * 0.1 * std::max(scales.i2, 0.01 * mass)};
    const AdaptiveResult res =
        adaptive_simpson_tri(weight, win.peak_x, lo_, hi_, abs_tol);
    z_shifted_ = res.integral.i0;
    z_ = std::exp(log_shift_) * z_shifted_;
    if (!(z_shifted_ > 0.0)) {
        throw QuadratureNonConvergence("Gibbs normalization evaluated to zero");
    }
}

double Gibbs1Density::operator()(double x) const {
    const double lw = -potential_value(params_.potential, x)
                      / (params_.sigma * params_.sigma);
    return std::exp(lw - log_shift_) / z_shifted_;
}

double gibbs_density_1particle(const ModelParams& params, double x, double tol) {
    return Gibbs1Density(params, tol)(x);
}

} // namespace mfl
