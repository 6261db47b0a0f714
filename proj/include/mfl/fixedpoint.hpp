#ifndef MFL_FIXEDPOINT_HPP
#define MFL_FIXEDPOINT_HPP

#include "mfl/model.hpp"
#include "mfl/quadrature.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace mfl {

struct FixedPointRoot {
    double m = 0.0;
    double f_prime_at_m = 0.0;
    bool stable = false; // stable <=> f'(m) < 1
};

struct FixedPointReport {
    double sigma = 0.0;
    std::vector<FixedPointRoot> roots; // strictly increasing
    std::map<double, int> iterations_used; // starting point -> iteration count
    double tolerance = 0.0;
    // g = f - id had equal signs at +-m_max; sub-linearity suggests roots
    // may lie outside the scan window.
    bool boundary_warning = false;
};

struct IterateResult {
    double m = 0.0;
    int iters = 0;
};

// Plain iteration m <- f(m), stopped when two consecutive iterates differ
// by less than tol (the paper's figure procedure uses tol = 1e-5).
// Throws NoConvergence past max_iter.
IterateResult iterate_to_fixed_point(const ModelParams& params, double m0,
                                     double tol, int max_iter = 100000,
                                     double quad_tol = kDefaultQuadTol);

// Scans g(m) = f(m) - m on a uniform grid over [-m_max, m_max], bisects
// every sign-change bracket to |g| < tol, deduplicates at 10*tol and
// classifies stability by f'.
FixedPointReport find_all_fixed_points(const ModelParams& params, double m_max,
                                       std::size_t grid_n, double tol,
                                       double quad_tol = kDefaultQuadTol);

// Inverse of the increasing bijection f, by expanding bracket + bisection.
// Throws BracketNotFound when the expansion passes |m| = 1e6.
double f_inverse(const ModelParams& params, double y, double tol,
                 double quad_tol = kDefaultQuadTol);

// Bisects sigma on the predicate "largest fixed point > 1e-4". Requires
// three fixed points at sigma_lo and one at sigma_hi (else
// PredicateNotBracketed). Returns the bracket midpoint at width tol.
double critical_sigma(const ModelParams& params_template, double sigma_lo,
                      double sigma_hi, double tol);

struct PhaseDiagramRow {
    double sigma = 0.0;
    double m_plus = 0.0;
    double m_minus = 0.0;
    std::string status; // "ok" or "no_convergence"
};

// One row per sigma: iterate_to_fixed_point from m0 = +1 and m0 = -1 with
// the paper's stopping rule. Rows are evaluated in parallel; output order
// follows the input grid. threads = 0 means hardware concurrency.
std::vector<PhaseDiagramRow> phase_diagram(const ModelParams& params_template,
                                           const std::vector<double>& sigma_grid,
                                           double tol, int threads = 0);

} // namespace mfl

#endif // MFL_FIXEDPOINT_HPP
