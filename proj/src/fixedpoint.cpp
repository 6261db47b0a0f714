#include "mfl/fixedpoint.hpp"

#include "mfl/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace mfl {

IterateResult iterate_to_fixed_point(const ModelParams& params, double m0,
                                     double tol, int max_iter, double quad_tol) {
    if (!(tol > 0.0)) throw ConfigError("iteration tol must be positive");
    double m = m0;
    for (int k = 1; k <= max_iter; ++k) {
        const double next = f_of_m(params, m, quad_tol);
        if (std::abs(next - m) < tol) {
            return {next, k};
        }
        m = next;
    }
    std::ostringstream os;
    os << "fixed-point iteration from m0=" << m0 << " did not converge within "
       << max_iter << " iterations (tol=" << tol << ")";
    throw NoConvergence(os.str());
}

namespace {

struct Bisection {
    double root;
    int iters;
};

// Bisect g = f - id on a sign-change bracket down to |g| < tol.
Bisection bisect_g(const ModelParams& params, double lo, double hi, double g_lo,
                   double tol, double quad_tol) {
    Bisection out{0.5 * (lo + hi), 0};
    for (int k = 1; k <= 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = f_of_m(params, mid, quad_tol) - mid;
        out.iters = k;
        out.root = mid;
        if (std::abs(g_mid) < tol || hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) {
            return out;
        }
        if ((g_lo < 0.0) == (g_mid < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return out;
}

} // namespace

FixedPointReport find_all_fixed_points(const ModelParams& params, double m_max,
                                       std::size_t grid_n, double tol,
                                       double quad_tol) {
    if (grid_n < 64) throw ConfigError("find_all_fixed_points requires grid_n >= 64");
    if (!(m_max > 0.0)) throw ConfigError("m_max must be positive");

    FixedPointReport report;
    report.sigma = params.sigma;
    report.tolerance = tol;

    std::vector<double> xs(grid_n), gs(grid_n);
    for (std::size_t i = 0; i < grid_n; ++i) {
        xs[i] = -m_max + 2.0 * m_max * static_cast<double>(i) / static_cast<double>(grid_n - 1);
        gs[i] = f_of_m(params, xs[i], quad_tol) - xs[i];
    }
    report.boundary_warning = (gs.front() < 0.0) == (gs.back() < 0.0);

    std::vector<double> roots;
    for (std::size_t i = 0; i < grid_n; ++i) {
        if (std::abs(gs[i]) <= tol) {
            roots.push_back(xs[i]);
            report.iterations_used[xs[i]] = 0;
            continue;
        }
        if (i + 1 < grid_n && std::abs(gs[i + 1]) > tol &&
            (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
            const Bisection b = bisect_g(params, xs[i], xs[i + 1], gs[i], tol, quad_tol);
            roots.push_back(b.root);
            report.iterations_used[xs[i]] = b.iters;
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique_roots;
    for (double r : roots) {
        if (unique_roots.empty() || r - unique_roots.back() > 10.0 * tol) {
            unique_roots.push_back(r);
        }
    }

    for (double r : unique_roots) {
        const double fp = f_prime(params, r, quad_tol);
        report.roots.push_back({r, fp, fp < 1.0});
    }
    return report;
}

double f_inverse(const ModelParams& params, double y, double tol, double quad_tol) {
    if (!(tol > 0.0)) throw ConfigError("f_inverse tol must be positive");
    double lo = -1.0, hi = 1.0;
    while (f_of_m(params, lo, quad_tol) > y) {
        lo *= 2.0;
        if (lo < -1e6) throw BracketNotFound("f_inverse: no bracket below -1e6");
    }
    while (f_of_m(params, hi, quad_tol) < y) {
        hi *= 2.0;
        if (hi > 1e6) throw BracketNotFound("f_inverse: no bracket above 1e6");
    }
    double mid = 0.5 * (lo + hi);
    for (int k = 0; k < 300; ++k) {
        mid = 0.5 * (lo + hi);
        const double fm = f_of_m(params, mid, quad_tol);
        if (std::abs(fm - y) < tol) return mid;
        if (fm < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

double critical_sigma(const ModelParams& params_template, double sigma_lo,
                      double sigma_hi, double tol) {
    if (!(sigma_lo < sigma_hi)) throw ConfigError("critical_sigma: need sigma_lo < sigma_hi");
    // Fine scan so that the small branch near sigma_c is still resolved.
    const double m_max = 3.0;
    const std::size_t grid_n = 769;
    const double root_tol = 1e-9;

    const auto below_critical = [&](double sigma) {
        ModelParams p = params_template;
        p.sigma = sigma;
        const FixedPointReport rep = find_all_fixed_points(p, m_max, grid_n, root_tol);
        return !rep.roots.empty() && rep.roots.back().m > 1e-4;
    };

    if (!below_critical(sigma_lo) || below_critical(sigma_hi)) {
        throw PredicateNotBracketed(
            "critical_sigma: sigma_lo must have three fixed points and sigma_hi one");
    }
    double lo = sigma_lo, hi = sigma_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (below_critical(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<PhaseDiagramRow> phase_diagram(const ModelParams& params_template,
                                           const std::vector<double>& sigma_grid,
                                           double tol, int threads) {
    std::vector<PhaseDiagramRow> rows(sigma_grid.size());

    const auto work = [&](std::size_t i) {
        ModelParams p = params_template;
        p.sigma = sigma_grid[i];
        PhaseDiagramRow row;
        row.sigma = sigma_grid[i];
        row.status = "ok";
        try {
            row.m_plus = iterate_to_fixed_point(p, 1.0, tol).m;
            row.m_minus = iterate_to_fixed_point(p, -1.0, tol).m;
        } catch (const NoConvergence&) {
            row.status = "no_convergence";
        }
        rows[i] = row;
    };

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, std::max<std::size_t>(sigma_grid.size(), 1));

    if (n_threads == 1) {
        for (std::size_t i = 0; i < sigma_grid.size(); ++i) work(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < sigma_grid.size();
                 i = next.fetch_add(1)) {
                work(i);
            }
        });
    }
    for (auto& th : pool) th.join();
    return rows;
}

} // namespace mfl
