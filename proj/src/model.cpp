#include "mfl/model.hpp"

#include "mfl/errors.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace mfl {

PotentialSpec PotentialSpec::even_polynomial(std::vector<double> coeffs) {
    PotentialSpec spec;
    spec.kind = PotentialKind::even_polynomial;
    spec.coefficients = std::move(coeffs);
    return spec;
}

double potential_value(const PotentialSpec& spec, double x) {
    const double x2 = x * x;
    if (spec.kind == PotentialKind::double_well) {
        return 0.25 * x2 * x2 - 0.5 * x2;
    }
    // Horner in x^2: c_1 x^2 + c_2 x^4 + ...
    double acc = 0.0;
    for (auto it = spec.coefficients.rbegin(); it != spec.coefficients.rend(); ++it) {
        acc = acc * x2 + *it;
    }
    return acc * x2;
}

double potential_grad(const PotentialSpec& spec, double x) {
    const double x2 = x * x;
    if (spec.kind == PotentialKind::double_well) {
        return x * (x2 - 1.0);
    }
    // d/dx sum c_k x^{2k} = x * sum 2k c_k (x^2)^{k-1}
    double acc = 0.0;
    const auto& c = spec.coefficients;
    for (std::size_t j = c.size(); j-- > 0;) {
        acc = acc * x2 + 2.0 * static_cast<double>(j + 1) * c[j];
    }
    return x * acc;
}

ValidationReport validate(const ModelParams& params) {
    ValidationReport report;
    auto fail = [&report](const std::string& msg) {
        report.ok = false;
        report.violations.push_back(msg);
    };

    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
        fail("sigma must be positive");
    }
    if (!(params.kappa > 0.0) || !std::isfinite(params.kappa)) {
        fail("kappa must be positive");
    }
    if (params.potential.kind == PotentialKind::even_polynomial) {
        const auto& c = params.potential.coefficients;
        if (c.size() < 2) {
            fail("even_polynomial degree must be >= 4 (need at least x^2 and x^4 coefficients)");
        } else if (!(c.back() > 0.0)) {
            fail("even_polynomial leading coefficient must be positive");
        }
        for (double v : c) {
            if (!std::isfinite(v)) {
                fail("even_polynomial coefficients must be finite");
                break;
            }
        }
    }
    return report;
}

void require_valid(const ModelParams& params) {
    const ValidationReport report = validate(params);
    if (report.ok) return;
    std::ostringstream os;
    os << "invalid model parameters:";
    for (const auto& v : report.violations) os << " " << v << ";";
    throw ConfigError(os.str());
}

} // namespace mfl
