#include "mfl/modifier.hpp"

#include "mfl/errors.hpp"
#include "mfl/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mfl {

namespace {

// Quintic smoothstep and its antiderivative; zero first and second
// derivatives at both ends, so the bump below is C^2.
double smoothstep5(double t) {
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
double smoothstep5_integral(double t) {
    const double t4 = t * t * t * t;
    return t4 * (2.5 + t * (-3.0 + t));
}

} // namespace

RFunction::RFunction(double band_lo, double band_hi, double ramp_width, double slope)
    : identity_(false), band_lo_(band_lo), band_hi_(band_hi), ramp_(ramp_width),
      slope_(slope) {}

RFunction RFunction::identity() { return RFunction(); }

double RFunction::bump(double z) const {
    if (identity_ || z <= band_lo_ || z >= band_hi_) return 0.0;
    if (z < band_lo_ + ramp_) return smoothstep5((z - band_lo_) / ramp_);
    if (z > band_hi_ - ramp_) return smoothstep5((band_hi_ - z) / ramp_);
    return 1.0;
}

double RFunction::bump_integral_to_hi(double z) const {
    if (identity_ || z >= band_hi_) return 0.0;
    const double full = (band_hi_ - band_lo_) - ramp_; // integral over the whole band
    if (z <= band_lo_) return full;
    if (z < band_lo_ + ramp_) {
        const double t = (z - band_lo_) / ramp_;
        return full - ramp_ * smoothstep5_integral(t);
    }
    if (z <= band_hi_ - ramp_) {
        return (band_hi_ - ramp_ - z) + ramp_ * smoothstep5_integral(1.0);
    }
    const double t = (band_hi_ - z) / ramp_;
    return ramp_ * smoothstep5_integral(t);
}

double RFunction::operator()(double z) const {
    if (identity_ || z >= band_hi_) return z;
    return z + (1.0 - slope_) * bump_integral_to_hi(z);
}

double RFunction::derivative(double z) const {
    return 1.0 - (1.0 - slope_) * bump(z);
}

double RFunction::left_offset() const {
    if (identity_) return 0.0;
    return (1.0 - slope_) * ((band_hi_ - band_lo_) - ramp_);
}

double RFunction::inverse(double z) const {
    if (identity_ || z >= band_hi_) return z;
    const double off = left_offset();
    if (z <= band_lo_ + off) return z - off; // below the band r - id is constant
    double lo = band_lo_, hi = band_hi_;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if ((*this)(mid) < z) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return 0.5 * (lo + hi);
}

ModifiedDrift ModifiedDrift::unmodified(double kappa, double m_star) {
    ModifiedDrift drift;
    drift.plan.a = -std::numeric_limits<double>::infinity();
    drift.plan.m_star = m_star;
    drift.plan.m_minus = -std::numeric_limits<double>::infinity();
    drift.plan.kappa = kappa;
    drift.r = RFunction::identity();
    drift.slope_s = 1.0;
    drift.h_prime_floor = 0.0;
    return drift;
}

ModifierPlan plan_domain(const ModelParams& params, double a, double tol,
                         double quad_tol) {
    require_valid(params);
    if (!(tol > 0.0)) throw ConfigError("plan_domain tol must be positive");

    const double m_max = std::max(5.0, 2.0 * std::abs(a) + 2.0);
    const FixedPointReport rep =
        find_all_fixed_points(params, m_max, 513, tol, quad_tol);

    if (std::abs(f_of_m(params, a, quad_tol) - a) <= 10.0 * tol) {
        throw InvalidDomain("a coincides with a fixed point of f");
    }

    std::vector<double> above, below;
    for (const auto& root : rep.roots) {
        (root.m > a ? above : below).push_back(root.m);
    }
    if (above.empty()) {
        throw InvalidDomain("no fixed point of f above a; D = [a, inf) is not a "
                            "metastable domain at these parameters");
    }
    if (above.size() > 1) {
        throw InvalidDomain("more than one fixed point of f in [a, inf)");
    }
    if (below.empty()) {
        throw InvalidDomain("no fixed point of f below a");
    }

    ModifierPlan plan;
    plan.a = a;
    plan.kappa = params.kappa;
    plan.m_star = above.front();
    plan.m_minus = below.front(); // f has no fixed point on (-inf, m_minus)

    // Scan down from a for the first step containing a fixed point, then
    // halve the fixed-point-free gap.
    const double step = (a - plan.m_minus) / 64.0;
    int first_with_root = -1;
    for (int k = 1; k <= 64 && first_with_root < 0; ++k) {
        const double step_lo = a - k * step;
        const double step_hi = a - (k - 1) * step;
        for (double root : below) {
            if (root >= step_lo && root <= step_hi) {
                first_with_root = k;
                break;
            }
        }
    }
    if (first_with_root <= 1) {
        throw InvalidDomain("a fixed point of f lies within one scan step below a; "
                            "no admissible epsilon");
    }
    plan.epsilon = (first_with_root - 1) * step / 2.0;

    // Sign-constancy of f - id on [a - eps, a].
    {
        const int n = 129;
        bool negative = false, positive = false;
        for (int i = 0; i < n; ++i) {
            const double y = a - plan.epsilon + plan.epsilon * i / (n - 1.0);
            const double g = f_of_m(params, y, quad_tol) - y;
            (g < 0.0 ? negative : positive) = true;
        }
        if (negative && positive) {
            throw InvalidDomain("f - id changes sign on [a - eps, a]");
        }
    }

    plan.a_prime = params.kappa * f_inverse(params, a, tol, quad_tol);
    plan.a_double_prime =
        params.kappa * f_inverse(params, a - plan.epsilon, tol, quad_tol);

    if (!(params.kappa * plan.m_minus < plan.a_double_prime &&
          plan.a_double_prime < plan.a_prime &&
          plan.a_prime < params.kappa * plan.m_star)) {
        std::ostringstream os;
        os << "ordering invariant kappa m_- < a'' < a' < kappa m_* violated: "
           << params.kappa * plan.m_minus << ", " << plan.a_double_prime << ", "
           << plan.a_prime << ", " << params.kappa * plan.m_star;
        throw InvalidDomain(os.str());
    }
    return plan;
}

ModifierPlan plan_domain_upper(const ModelParams& params, double b, double tol,
                               double quad_tol) {
    return plan_domain(params, -b, tol, quad_tol);
}

ModifierPlan plan_domain_interval(const ModelParams&, double, double, double) {
    throw InvalidDomain("closed intervals [a, b] are not supported; pick a "
                        "one-sided domain edge");
}

RFunction build_r(const ModifierPlan& plan) {
    const double lo = plan.kappa * plan.m_minus;
    const double hi = plan.a_prime;
    const double band = hi - lo;
    const double target = 0.9 * (plan.a_prime - plan.a_double_prime);
    if (!(target > 0.0) || !(band > 0.0)) {
        throw InfeasibleBump("build_r: degenerate band or non-positive drop target");
    }
    // Integral of r' over the band must equal `target`; with ramp width w,
    // integral = band - (1-s)(band - w). The ramp fraction shrinks below the
    // nominal quarter when the band is much wider than the admissible drop,
    // keeping s in (0,1).
    const double q = std::min(0.25, target / (2.0 * band));
    const double ramp = q * band;
    const double s = 1.0 - (band - target) / (band - ramp);
    if (!(s > 0.0) || !(s < 1.0)) {
        std::ostringstream os;
        os << "build_r: required minimum slope " << s << " outside (0,1)";
        throw InfeasibleBump(os.str());
    }
    return RFunction(lo, hi, ramp, s);
}

namespace {

// h'(y) without the table: r^{-1}(kappa f^{-1}(y)) - kappa f^{-1}(y).
double h_prime_raw(const ModelParams& params, const ModifierPlan& plan,
                   const RFunction& r, double y, double tol, double quad_tol,
                   double* finv_bracket_hint) {
    if (y >= plan.a) return 0.0;
    if (y <= plan.m_minus) return -r.left_offset();
    double minv;
    if (finv_bracket_hint != nullptr) {
        // Monotone tabulation path: reuse the previous preimage as a bracket.
        double lo = *finv_bracket_hint;
        double hi = std::max(lo + 1e-3, lo * 1.5 + 1e-3);
        while (f_of_m(params, hi, quad_tol) < y) {
            hi += std::max(1.0, hi - lo);
            if (hi > 1e6) throw BracketNotFound("h_prime: no bracket above 1e6");
        }
        for (int k = 0; k < 300; ++k) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f_of_m(params, mid, quad_tol);
            if (std::abs(fm - y) < tol) {
                lo = hi = mid;
                break;
            }
            (fm < y ? lo : hi) = mid;
        }
        minv = 0.5 * (lo + hi);
        *finv_bracket_hint = minv;
    } else {
        minv = f_inverse(params, y, tol, quad_tol);
    }
    const double z = plan.kappa * minv;
    return r.inverse(z) - z;
}

} // namespace

ModifiedDrift build_modified_drift(const ModelParams& params,
                                   const ModifierPlan& plan, double tol,
                                   double quad_tol) {
    ModifiedDrift drift;
    drift.plan = plan;
    drift.r = build_r(plan);
    drift.slope_s = drift.r.slope();
    drift.h_prime_floor = -drift.r.left_offset();

    const std::size_t n_knots = 2048;
    const double y_lo = plan.m_minus - 5.0;
    const double y_hi = plan.a + 1.0;
    drift.h_knot_y.resize(n_knots);
    drift.h_knot_slope.resize(n_knots);
    drift.h_knot_val.resize(n_knots);

    double hint = plan.m_minus - 6.0; // lower bracket for the monotone f^-1 walk
    std::vector<double> mid_slope(n_knots - 1);
    for (std::size_t i = 0; i < n_knots; ++i) {
        drift.h_knot_y[i] = y_lo + (y_hi - y_lo) * static_cast<double>(i) /
                                       static_cast<double>(n_knots - 1);
    }
    for (std::size_t i = 0; i < n_knots; ++i) {
        drift.h_knot_slope[i] = h_prime_raw(params, plan, drift.r,
                                            drift.h_knot_y[i], tol, quad_tol, &hint);
    }
    hint = plan.m_minus - 6.0;
    for (std::size_t i = 0; i + 1 < n_knots; ++i) {
        const double ym = 0.5 * (drift.h_knot_y[i] + drift.h_knot_y[i + 1]);
        mid_slope[i] = h_prime_raw(params, plan, drift.r, ym, tol, quad_tol, &hint);
    }

    // h anchored by h = 0 on [a, inf): integrate h' downward from the top
    // knot with per-segment Simpson.
    drift.h_knot_val[n_knots - 1] = 0.0;
    for (std::size_t i = n_knots - 1; i-- > 0;) {
        const double dy = drift.h_knot_y[i + 1] - drift.h_knot_y[i];
        const double seg = dy / 6.0 *
                           (drift.h_knot_slope[i] + 4.0 * mid_slope[i] +
                            drift.h_knot_slope[i + 1]);
        drift.h_knot_val[i] = drift.h_knot_val[i + 1] - seg;
    }
    return drift;
}

double h_prime(const ModelParams& params, const ModifiedDrift& drift, double y,
               double tol, double quad_tol) {
    return h_prime_raw(params, drift.plan, drift.r, y, tol, quad_tol, nullptr);
}

double h_value(const ModifiedDrift& drift, double y) {
    if (y >= drift.plan.a) return 0.0;
    const auto& ys = drift.h_knot_y;
    if (ys.empty()) return 0.0; // unmodified drift
    if (y <= ys.front()) {
        // h' is constant below m_minus, so h is linear there.
        return drift.h_knot_val.front() + drift.h_prime_floor * (y - ys.front());
    }
    const auto it = std::upper_bound(ys.begin(), ys.end(), y);
    const std::size_t j = static_cast<std::size_t>(it - ys.begin()) - 1;
    const std::size_t i = std::min(j, ys.size() - 2);
    const double dy = ys[i + 1] - ys[i];
    const double t = (y - ys[i]) / dy;
    const double v0 = drift.h_knot_val[i], v1 = drift.h_knot_val[i + 1];
    const double s0 = drift.h_knot_slope[i] * dy, s1 = drift.h_knot_slope[i + 1] * dy;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * s0 +
           (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * s1;
}

double w_prime(const ModelParams& params, const ModifiedDrift& drift,
               double theta, double tol) {
    const double kappa = drift.plan.kappa;
    return theta / kappa - f_of_m(params, drift.r(theta) / kappa, tol);
}

double f_tilde(const ModelParams& params, const ModifiedDrift& drift, double m,
               double tol) {
    return f_of_m(params, drift.r(m), tol);
}

CoercivityReport verify_modifier(const ModelParams& params,
                                 const ModifiedDrift& drift,
                                 const VerifyGridSpec& grid, double quad_tol) {
    CoercivityReport report;
    const double kappa = drift.plan.kappa;
    const double theta_star = kappa * drift.plan.m_star;

    double lo = grid.lo, hi = grid.hi;
    std::size_t n = grid.n;
    if (grid.use_default_window) {
        lo = theta_star - 20.0;
        hi = theta_star + 20.0;
        n = 400;
    }
    if (n < 2) throw ConfigError("verify_modifier: grid needs at least 2 points");

    report.theta_grid.resize(n);
    report.w_prime_values.resize(n);
    double eta = std::numeric_limits<double>::infinity();
    int sign_changes = 0;
    int prev_sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(n - 1);
        const double wp = w_prime(params, drift, theta, quad_tol);
        report.theta_grid[i] = theta;
        report.w_prime_values[i] = wp;
        if (std::abs(theta - theta_star) >= 1e-6) {
            eta = std::min(eta, wp / (theta - theta_star));
        }
        const int sign = wp > 0.0 ? 1 : (wp < 0.0 ? -1 : 0);
        if (sign != 0) {
            if (prev_sign != 0 && sign != prev_sign) ++sign_changes;
            prev_sign = sign;
        }
    }
    report.eta_measured = eta;
    report.unique_critical_point = (sign_changes == 1);

    // Fixed points of f~ on [-5, 5].
    {
        const std::size_t gn = 501;
        const double residual_tol = 1e-9;
        std::vector<double> xs(gn), gs(gn);
        for (std::size_t i = 0; i < gn; ++i) {
            xs[i] = -5.0 + 10.0 * static_cast<double>(i) / static_cast<double>(gn - 1);
            gs[i] = f_tilde(params, drift, xs[i], quad_tol) - xs[i];
        }
        std::vector<double> roots;
        for (std::size_t i = 0; i < gn; ++i) {
            if (std::abs(gs[i]) <= residual_tol) {
                roots.push_back(xs[i]);
                continue;
            }
            if (i + 1 < gn && std::abs(gs[i + 1]) > residual_tol &&
                (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
                double blo = xs[i], bhi = xs[i + 1], glo = gs[i];
                double root = 0.5 * (blo + bhi);
                for (int k = 0; k < 200; ++k) {
                    root = 0.5 * (blo + bhi);
                    const double g = f_tilde(params, drift, root, quad_tol) - root;
                    if (std::abs(g) < residual_tol) break;
                    if ((glo < 0.0) == (g < 0.0)) {
                        blo = root;
                        glo = g;
                    } else {
                        bhi = root;
                    }
                }
                roots.push_back(root);
            }
        }
        std::sort(roots.begin(), roots.end());
        for (double r : roots) {
            if (report.f_tilde_fixed_points.empty() ||
                r - report.f_tilde_fixed_points.back() > 1e-8) {
                report.f_tilde_fixed_points.push_back(r);
            }
        }
    }

    // r1-r4 on 1e3-point grids.
    {
        const std::size_t gn = 1000;
        const double ap = drift.plan.a_prime;
        const double km = kappa * drift.plan.m_minus;
        bool r1 = true, r3 = true, r4 = true;
        for (std::size_t i = 0; i < gn; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(gn - 1);
            const double z1 = ap + 10.0 * t;
            if (drift.r(z1) != z1) r1 = false;
            const double z3 = km - 10.0 * t;
            const double expected = drift.r(km) + z3 - km;
            if (std::abs(drift.r(z3) - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
                r3 = false;
            }
            const double z4 = (km - 2.0) + (ap + 2.0 - (km - 2.0)) * t;
            const double rp = drift.r.derivative(z4);
            if (!(rp > 0.0 && rp <= 1.0)) r4 = false;
        }
        report.r1 = r1;
        report.r2 = drift.r(km) >= drift.plan.a_double_prime;
        report.r3 = r3;
        report.r4 = r4;
    }

    if (!(report.eta_measured > 0.0) || !report.unique_critical_point) {
        std::ostringstream os;
        os << "modifier verification failed: eta=" << report.eta_measured
           << ", sign_changes_unique=" << report.unique_critical_point;
        throw VerificationFailed(os.str(), report);
    }
    return report;
}

} // namespace mfl
