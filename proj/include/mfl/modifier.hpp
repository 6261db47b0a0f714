#ifndef MFL_MODIFIER_HPP
#define MFL_MODIFIER_HPP

#include "mfl/errors.hpp"
#include "mfl/model.hpp"
#include "mfl/quadrature.hpp"

#include <cstddef>
#include <vector>

namespace mfl {

// Constants of the modified-drift construction on D = [a, inf):
//   m_star    the unique fixed point of f in D
//   m_minus   the fixed point below a with no fixed point of f below it
//   epsilon   f has no fixed point in [a - epsilon, a]
//   a'  = kappa f^{-1}(a),  a'' = kappa f^{-1}(a - epsilon)
// Ordering invariant: kappa m_minus < a'' < a' < kappa m_star.
struct ModifierPlan {
    double a = 0.0;
    double m_star = 0.0;
    double m_minus = 0.0;
    double epsilon = 0.0;
    double a_prime = 0.0;
    double a_double_prime = 0.0;
    double kappa = 1.0;
};

// Increasing C^2 map r with
//   r1: r(z) = z for z >= a'
//   r2: r(kappa m_minus) >= a''
//   r3: r(z) = r(kappa m_minus) + z - kappa m_minus for z <= kappa m_minus
//   r4: 0 < r'(z) <= 1
// built as r'(z) = 1 - (1-s) B(z) with B a quintic-smoothstep bump on the
// band (kappa m_minus, a'); r is the exact antiderivative with r(a') = a'.
// The ramp fraction adapts so that the slope s stays in (0,1) even when the
// band is much wider than the admissible drop a' - a''.
class RFunction {
public:
    RFunction() = default;
    RFunction(double band_lo, double band_hi, double ramp_width, double slope);

    double operator()(double z) const;
    double derivative(double z) const;
    double inverse(double z) const; // monotone bisection

    double slope() const { return slope_; }
    double band_lo() const { return band_lo_; }
    double band_hi() const { return band_hi_; }
    // r - id offset below the band: r(z) - z for z <= band_lo.
    double left_offset() const;

    static RFunction identity();

private:
    double bump(double z) const;
    double bump_integral_to_hi(double z) const; // integral of B over [z, band_hi]

    bool identity_ = true;
    double band_lo_ = 0.0, band_hi_ = 0.0;
    double ramp_ = 0.0;
    double slope_ = 1.0;
};

// Immutable bundle: plan, r, and the tabulated antiderivative of h'.
// h'(y) = r^{-1}(kappa f^{-1}(y)) - kappa f^{-1}(y), anchored by h = 0 on
// [a, inf) (hence h(m_star) = 0). h is tabulated on 2048 knots over
// [m_minus - 5, a + 1] with cubic Hermite interpolation (exact h' at knots),
// linear extension below (h' is constant there), exact 0 above a.
struct ModifiedDrift {
    ModifierPlan plan;
    RFunction r;
    double slope_s = 1.0;
    double h_prime_floor = 0.0; // h'(y) for y <= m_minus
    std::vector<double> h_knot_y;
    std::vector<double> h_knot_val;
    std::vector<double> h_knot_slope;

    // r = id, h = 0: the unmodified dynamics, useful as a baseline that
    // verify_modifier must reject below sigma_c.
    static ModifiedDrift unmodified(double kappa, double m_star);
};

struct CoercivityReport {
    std::vector<double> theta_grid;
    std::vector<double> w_prime_values;
    double eta_measured = 0.0; // min of w'(theta)/(theta - kappa m_star)
    bool unique_critical_point = false;
    std::vector<double> f_tilde_fixed_points;
    bool r1 = false, r2 = false, r3 = false, r4 = false;
};

// Thrown by verify_modifier; carries the failing report.
class VerificationFailed : public Error {
public:
    VerificationFailed(const std::string& what, CoercivityReport report_)
        : Error(what), report(std::move(report_)) {}
    CoercivityReport report;
};

// Derives the domain constants for D = [a, inf). Throws InvalidDomain when
// a is not strictly between the lower fixed points and m_star, when a is
// itself a fixed point, or when no fixed-point-free gap below a is found.
ModifierPlan plan_domain(const ModelParams& params, double a, double tol,
                         double quad_tol = kDefaultQuadTol);

// D = (-inf, b]: handled by reflecting the state space. V is even, so the
// reflected model coincides with the original and the returned plan is the
// [(-b), inf) plan for the mirrored coordinates x -> -x.
ModifierPlan plan_domain_upper(const ModelParams& params, double b, double tol,
                               double quad_tol = kDefaultQuadTol);

// Closed intervals [a, b] are not supported; always throws InvalidDomain.
ModifierPlan plan_domain_interval(const ModelParams& params, double a, double b,
                                  double tol);

// Throws InfeasibleBump when no slope in (0,1) can satisfy r2 (cannot
// happen while the plan ordering invariant holds).
RFunction build_r(const ModifierPlan& plan);

// Assembles r and the h tabulation.
ModifiedDrift build_modified_drift(const ModelParams& params,
                                   const ModifierPlan& plan,
                                   double tol = 1e-9,
                                   double quad_tol = kDefaultQuadTol);

// h'(y); returns exactly 0.0 for y >= a (no quadrature on that path) and
// the constant floor for y <= m_minus.
double h_prime(const ModelParams& params, const ModifiedDrift& drift, double y,
               double tol = 1e-10, double quad_tol = kDefaultQuadTol);

// Interpolated antiderivative of h', with h(m_star) = 0.
double h_value(const ModifiedDrift& drift, double y);

// w'(theta) = theta/kappa - f(r(theta)/kappa).
double w_prime(const ModelParams& params, const ModifiedDrift& drift,
               double theta, double tol = kDefaultQuadTol);

// f~(m) = f(r(m)); coincides with f on [a', inf).
double f_tilde(const ModelParams& params, const ModifiedDrift& drift, double m,
               double tol = kDefaultQuadTol);

struct VerifyGridSpec {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 400;
    bool use_default_window = true; // [kappa m_star - 20, kappa m_star + 20]
};

// Evaluates w' on the grid, measures the coercivity constant, enumerates
// the fixed points of f~ on [-5, 5] and checks r1-r4 on 1e3-point grids.
// Throws VerificationFailed (report attached) when eta <= 0 or the critical
// point is not unique.
CoercivityReport verify_modifier(const ModelParams& params,
                                 const ModifiedDrift& drift,
                                 const VerifyGridSpec& grid = {},
                                 double quad_tol = kDefaultQuadTol);

} // namespace mfl

#endif // MFL_MODIFIER_HPP
