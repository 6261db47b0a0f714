#ifndef MFL_QUADRATURE_HPP
#define MFL_QUADRATURE_HPP

#include "mfl/model.hpp"

namespace mfl {

// Moments of the tilted measure
//   nu_m(x) ~ exp(-[V(x) + kappa |x-m|^2 / 2] / sigma^2)
// computed by adaptive Simpson quadrature on a truncated window. All three
// integrals (mass, first, second moment) share one panel set.
struct NuMoments {
    double m = 0.0;                 // tilt center
    double z = 0.0;                 // normalization (un-shifted scale)
    double mean = 0.0;              // = f(m)
    double variance = 0.0;          // = Var(nu_m)
    double truncation_radius = 0.0; // max |window endpoint|
    double estimated_error = 0.0;   // estimated absolute error on mean
};

inline constexpr double kDefaultQuadTol = 1e-10;

// Exponent of nu_m: -[V(x) + kappa (x-m)^2 / 2] / sigma^2.
double log_weight(const ModelParams& params, double m, double x);

// Throws QuadratureNonConvergence if the subdivision budget (2^18 panels)
// is exhausted before the error estimates meet tol.
NuMoments nu_moments(const ModelParams& params, double m, double tol = kDefaultQuadTol);

// Self-consistency map f(m) = mean of nu_m.
double f_of_m(const ModelParams& params, double m, double tol = kDefaultQuadTol);

// f'(m) = (kappa / sigma^2) Var(nu_m) > 0.
double f_prime(const ModelParams& params, double m, double tol = kDefaultQuadTol);

// Normalized single-particle Gibbs density exp(-V(x)/sigma^2) / Z1,
// the exact stationary law of the N=1 dynamics (self-interaction vanishes).
// Z1 is computed once by the same adaptive quadrature.
class Gibbs1Density {
public:
    Gibbs1Density(const ModelParams& params, double tol = kDefaultQuadTol);

    double operator()(double x) const;

    double z() const { return z_; }
    double window_lo() const { return lo_; }
    double window_hi() const { return hi_; }

private:
    ModelParams params_;
    double log_shift_;
    double z_shifted_; // integral of exp(logw - log_shift_)
    double z_;
    double lo_, hi_;
};

double gibbs_density_1particle(const ModelParams& params, double x,
                               double tol = kDefaultQuadTol);

} // namespace mfl

#endif // MFL_QUADRATURE_HPP
