#ifndef MFL_MODEL_HPP
#define MFL_MODEL_HPP

#include <string>
#include <vector>

namespace mfl {

// Confining potential. Only even polynomials are representable: either the
// built-in double well V(x) = x^4/4 - x^2/2, or an even polynomial
// V(x) = c_1 x^2 + c_2 x^4 + ... given by its monomial coefficients
// (coefficients[k] multiplies x^{2(k+1)}). Evenness is structural, so
// V(x) = V(-x) and V'(x) = -V'(-x) hold exactly in floating point.
enum class PotentialKind { double_well, even_polynomial };

struct PotentialSpec {
    PotentialKind kind = PotentialKind::double_well;
    std::vector<double> coefficients; // even_polynomial only

    static PotentialSpec double_well() { return PotentialSpec{}; }
    static PotentialSpec even_polynomial(std::vector<double> coeffs);
};

double potential_value(const PotentialSpec& spec, double x);
double potential_grad(const PotentialSpec& spec, double x);

// Physical problem definition: noise amplitude sigma, coupling kappa and
// the confining potential. Immutable after construction.
struct ModelParams {
    double sigma = 0.5;
    double kappa = 1.0;
    PotentialSpec potential;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Structural checks sufficient for confinement and integrability of the
// tilted measures: sigma > 0, kappa > 0, and for even_polynomial a strictly
// positive leading coefficient with degree >= 4.
ValidationReport validate(const ModelParams& params);

// validate() + throw ConfigError listing the violations.
void require_valid(const ModelParams& params);

} // namespace mfl

#endif // MFL_MODEL_HPP
