// Acceptance suite: every release gate runs here, one pass/fail line each.
// All tolerances are pinned in code; seeds are fixed so the verdicts are
// deterministic. Returns the number of failed gates.

#include "mfl/config.hpp"
#include "mfl/errors.hpp"
#include "mfl/fixedpoint.hpp"
#include "mfl/modifier.hpp"
#include "mfl/quadrature.hpp"
#include "mfl/simulate.hpp"
#include "mfl/stats.hpp"
#include "../support/oracles.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

using namespace mfl;

namespace {

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

ModelParams dw(double sigma) {
    ModelParams p;
    p.sigma = sigma;
    return p;
}

SimConfig make_sim(double sigma, std::size_t n, double dt, double horizon,
                   InitLaw init, std::uint64_t seed) {
    SimConfig c;
    c.params = dw(sigma);
    c.n_particles = n;
    c.dt = dt;
    c.horizon = horizon;
    c.init = init;
    c.seed = seed;
    c.threads = 0;
    return c;
}

double mean_of(const std::vector<double>& v, std::size_t from = 0) {
    double s = 0.0;
    for (std::size_t i = from; i < v.size(); ++i) s += v[i];
    return s / static_cast<double>(v.size() - from);
}

// --- gates ------------------------------------------------------------

void criterion_1_critical_sigma() {
    const double t0 = now_seconds();
    const double sc = critical_sigma(dw(0.5), 0.5, 0.8, 1e-3);
    const double elapsed = now_seconds() - t0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "sigma_c = %.4f (window [0.67, 0.69]), %.1fs",
                  sc, elapsed);
    report(1, "critical temperature", sc >= 0.67 && sc <= 0.69 && elapsed < 60.0, buf);
}

void criterion_2_phase_structure() {
    const double t0 = now_seconds();
    bool ok = true;
    std::string detail;
    double prev_mplus = HUGE_VAL;
    for (double sigma : {0.1, 0.3, 0.5, 0.6}) {
        const auto rep = find_all_fixed_points(dw(sigma), 5.0, 257, 1e-9);
        const bool three = rep.roots.size() == 3;
        const bool classified = three && rep.roots[1].f_prime_at_m > 1.0 &&
                                rep.roots[0].f_prime_at_m < 1.0 &&
                                rep.roots[2].f_prime_at_m < 1.0;
        if (!three || !classified) ok = false;
        if (three) {
            if (rep.roots[2].m > prev_mplus + 1e-9) ok = false;
            prev_mplus = rep.roots[2].m;
        }
    }
    for (double sigma : {0.7, 0.8, 1.0}) {
        const auto rep = find_all_fixed_points(dw(sigma), 5.0, 257, 1e-9);
        if (rep.roots.size() != 1 || std::abs(rep.roots[0].m) >= 1e-4) ok = false;
    }
    const double elapsed = now_seconds() - t0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "3 roots below / 1 root above sigma_c, m_plus non-increasing, %.1fs",
                  elapsed);
    report(2, "phase diagram structure", ok && elapsed < 120.0, buf);
}

void criterion_3_quadrature_oracle() {
    const double oracle = oracles::fixed_simpson_f(dw(0.5), 1.0, -8.0, 8.0, 1000000);
    const double golden_drift = std::abs(oracle - oracles::kGoldenFOfOneSigmaHalf);
    const double impl = f_of_m(dw(0.5), 1.0, 1e-10);
    const double err = std::abs(impl - oracle);
    char buf[160];
    std::snprintf(buf, sizeof buf, "|f(1) - oracle| = %.2e (tol 1e-8), golden drift %.1e",
                  err, golden_drift);
    report(3, "quadrature oracle", err < 1e-8 && golden_drift < 5e-12, buf);
}

void criterion_4_fast_convergence() {
    const double m_plus = iterate_to_fixed_point(dw(0.5), 1.0, 1e-10).m;
    std::vector<double> max_devs(20);
    parallel_for(20, [&](std::size_t seed) {
        SimConfig c = make_sim(0.5, 2000, 0.01, 200.0, InitLaw::gaussian(1.0, 0.25),
                               8800 + seed);
        c.record_every = 100; // one record per time unit
        const auto rec = run_trajectory(c);
        double max_dev = 0.0;
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            if (rec.times[k] < 10.0) continue;
            max_dev = std::max(max_dev, std::abs(rec.barycenter[k] - m_plus));
        }
        max_devs[seed] = max_dev;
    });
    int good = 0;
    double worst = 0.0;
    for (double d : max_devs) {
        worst = std::max(worst, d);
        if (d < 0.05) ++good;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d/20 seeds keep |Xbar - m_+| < 0.05 on [10,200] (worst %.3f)",
                  good, worst);
    report(4, "fast convergence to mu_+", good >= 18, buf);
}

void criterion_5_high_temperature() {
    std::vector<double> avgs(20);
    parallel_for(20, [&](std::size_t seed) {
        SimConfig c = make_sim(0.8, 1000, 0.01, 200.0, InitLaw::gaussian(1.0, 0.25),
                               9900 + seed);
        c.record_every = 100;
        const auto rec = run_trajectory(c);
        std::size_t from = 0;
        while (from < rec.times.size() && rec.times[from] < 10.0) ++from;
        avgs[seed] = mean_of(rec.barycenter, from);
    });
    int good = 0;
    double worst = 0.0;
    for (double avg : avgs) {
        worst = std::max(worst, std::abs(avg));
        if (std::abs(avg) < 0.05) ++good;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d/20 seeds have |time-avg Xbar| < 0.05 on [10,200] (worst %.3f)",
                  good, worst);
    report(5, "high-temperature centering", good >= 18, buf);
}

void criterion_6_metastable_transition() {
    SimConfig c = make_sim(0.64, 100, 0.01, 10000.0, InitLaw::gaussian(1.0, 0.25),
                           6600);
    const auto outcomes = run_exit_ensemble(c, 0.0, 10); // 10 replica seeds
    int exits = 0;
    for (const auto& o : outcomes) {
        if (o.exited) ++exits;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/10 seeds exit D = [0, inf) before t = 1e4",
                  exits);
    report(6, "metastable transition", exits >= 7, buf);
}

struct ExitEnsembleResult {
    ExitTimeReport report;
    double horizon;
};

ExitEnsembleResult tuned_exit_ensemble(double sigma, std::size_t n, double domain_a,
                                       double init_x, std::size_t replicas,
                                       std::uint64_t seed) {
    // Pilot run to size the horizon, then the production ensemble; the
    // horizon is grown until censoring is small.
    double horizon = 400.0;
    for (int round = 0; round < 6; ++round) {
        SimConfig pilot = make_sim(sigma, n, 0.01, horizon, InitLaw::point(init_x),
                                   seed * 7919 + 17);
        const auto outcomes = run_exit_ensemble(pilot, domain_a, 24);
        const auto rep = exit_report(outcomes);
        if (rep.mean_defined &&
            rep.n_censored * 5 < outcomes.size()) { // < 20% in the pilot
            horizon = std::max(horizon, 8.0 * rep.mean_exit);
            break;
        }
        horizon *= 4.0;
    }
    SimConfig c = make_sim(sigma, n, 0.01, horizon, InitLaw::point(init_x), seed);
    const auto outcomes = run_exit_ensemble(c, domain_a, replicas);
    return {exit_report(outcomes), horizon};
}

void criterion_7_exponential_law() {
    const double m_plus = iterate_to_fixed_point(dw(0.6), 1.0, 1e-10).m;
    const auto res = tuned_exit_ensemble(0.6, 50, 0.1, m_plus, 200, 70001);
    const double censored_frac =
        static_cast<double>(res.report.n_censored) / static_cast<double>(res.report.n_total);
    const bool ok = res.report.mean_defined && censored_frac < 0.05 &&
                    res.report.ks_distance < 0.12;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "N=50: KS = %.3f (tol 0.12), censored %zu/%zu, mean = %.1f, horizon = %.0f",
                  res.report.ks_distance, res.report.n_censored, res.report.n_total,
                  res.report.mean_exit, res.horizon);
    report(7, "exponential exit law", ok, buf);
}

void criterion_8_exit_time_growth() {
    const double m_plus = iterate_to_fixed_point(dw(0.6), 1.0, 1e-10).m;
    std::vector<double> means;
    std::vector<std::size_t> uncensored;
    for (std::size_t n : {20, 40, 80}) {
        const auto res = tuned_exit_ensemble(0.6, n, 0.1, m_plus, 140, 81000 + n);
        means.push_back(res.report.mean_exit);
        uncensored.push_back(res.report.n_total - res.report.n_censored);
    }
    const bool enough = uncensored[0] >= 100 && uncensored[1] >= 100 && uncensored[2] >= 100;
    const double log_inc1 = std::log(means[1]) - std::log(means[0]);
    const double log_inc2 = std::log(means[2]) - std::log(means[1]);
    const bool ok = enough && means[0] < means[1] && means[1] < means[2] &&
                    log_inc1 > 0.0 && log_inc2 > 0.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "mean exits %.1f < %.1f < %.1f (N=20,40,80), log increments %.2f, %.2f",
                  means[0], means[1], means[2], log_inc1, log_inc2);
    report(8, "exponential growth of t_N", ok, buf);
}

void criterion_9_modifier() {
    const double t0 = now_seconds();
    const ModelParams p = dw(0.5);
    bool ok = true;
    std::string failure;
    try {
        const auto plan = plan_domain(p, 0.1, 1e-9);
        const auto drift = build_modified_drift(p, plan);
        const auto rep = verify_modifier(p, drift);

        if (!(rep.r1 && rep.r2 && rep.r3 && rep.r4)) {
            ok = false;
            failure += " r-properties;";
        }
        for (int i = 0; i <= 1000 && ok; ++i) {
            if (h_prime(p, drift, plan.a + 5.0 * i / 1000.0) != 0.0) {
                ok = false;
                failure += " h' not exactly 0 on D;";
            }
        }
        const double delta = 1e-3;
        for (int i = 0; i < 200; ++i) {
            const double y = plan.m_minus - 1.0 + (plan.a + 0.5 - plan.m_minus + 1.0) * i / 199.0;
            const double fd = (h_prime(p, drift, y + delta, 1e-12) -
                               h_prime(p, drift, y - delta, 1e-12)) / (2.0 * delta);
            if (fd < -1e-9) {
                ok = false;
                failure += " h not convex;";
                break;
            }
        }
        if (std::abs(w_prime(p, drift, plan.kappa * plan.m_star)) >= 1e-6) {
            ok = false;
            failure += " w'(kappa m_*) != 0;";
        }
        if (!(rep.eta_measured > 0.0)) {
            ok = false;
            failure += " eta <= 0;";
        }
        if (rep.f_tilde_fixed_points.size() != 1 ||
            std::abs(rep.f_tilde_fixed_points[0] - plan.m_star) >= 1e-6) {
            ok = false;
            failure += " f~ fixed points;";
        }
        for (double m : {plan.a_prime, plan.a_prime + 0.5, 1.5}) {
            if (std::abs(f_tilde(p, drift, m) - f_of_m(p, m)) > 1e-8) {
                ok = false;
                failure += " f~ != f above a';";
            }
        }
        const double elapsed = now_seconds() - t0;
        if (elapsed >= 60.0) {
            ok = false;
            failure += " too slow;";
        }
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "eta = %.4f, f~ fixed point = %.6f, slope_s = %.4f, %.1fs%s",
                      rep.eta_measured,
                      rep.f_tilde_fixed_points.empty() ? NAN : rep.f_tilde_fixed_points[0],
                      drift.slope_s, elapsed, failure.c_str());
        report(9, "modifier construction", ok, buf);
    } catch (const Error& e) {
        report(9, "modifier construction", false, e.what());
    }
}

void criterion_10_drift_equivalence() {
    const ModelParams p = dw(0.5);
    const auto plan = plan_domain(p, 0.1, 1e-9);
    const auto drift = build_modified_drift(p, plan);

    SimConfig original = make_sim(0.5, 200, 0.01, 1000.0, InitLaw::point(plan.m_star),
                                  1010);
    original.record_every = 100;
    original.record_particles = true;

    SimConfig modified = original;
    modified.drift_mode = DriftMode::modified;
    modified.drift = &drift;

    const auto a = run_trajectory(original); // 1e5 steps
    const auto b = run_trajectory(modified);
    double min_bary = HUGE_VAL;
    for (double v : a.barycenter) min_bary = std::min(min_bary, v);
    bool identical = a.barycenter == b.barycenter && a.moment4 == b.moment4;
    for (std::size_t k = 0; identical && k < a.snapshots.size(); ++k) {
        identical = a.snapshots[k].second == b.snapshots[k].second;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "1e5 steps, min Xbar = %.3f stayed in D, bit-identical = %s",
                  min_bary, identical ? "yes" : "no");
    report(10, "drift equivalence in D", identical && min_bary >= plan.a, buf);
}

void criterion_11_gibbs_oracle() {
    SimConfig c = make_sim(0.5, 1, 0.005, 1.0, InitLaw::point(1.0), 4242);
    GaussianStream rng(derive_stream(c.seed, 0));
    std::vector<double> x = init_particles(c, rng);
    const long long burn = 100000;
    const long long steps = 10000000;
    std::vector<double> occupation;
    occupation.reserve(steps - burn);
    for (long long k = 1; k <= steps; ++k) {
        const double xbar = em_step(c.params, DriftMode::original, nullptr, x,
                                    c.dt, rng);
        if (k > burn) occupation.push_back(xbar);
    }
    const Histogram hist = histogram(occupation, 50, -2.5, 2.5);
    const Gibbs1Density density(c.params);
    const double tv = tv_distance(hist, [&](double u) { return density(u); });
    char buf[120];
    std::snprintf(buf, sizeof buf, "TV(occupation, Gibbs) = %.4f (tol 0.03)", tv);
    report(11, "N=1 Gibbs oracle", tv < 0.03, buf);
}

void criterion_12_w2_exactness() {
    oracles::TestRng rng(1234);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.next() % 6;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform(-4.0, 4.0);
            b[i] = rng.uniform(-4.0, 4.0);
        }
        worst = std::max(worst, std::abs(w2_empirical_1d(a, b) -
                                         oracles::w2_bruteforce(a, b)));
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max |W2 - brute force| = %.2e (tol 1e-12)", worst);
    report(12, "W2 exactness", worst <= 1e-12, buf);
}

void criterion_13_determinism_and_mirror() {
    SimConfig c = make_sim(0.5, 400, 0.01, 50.0, InitLaw::gaussian(1.0, 0.25), 777);
    c.record_every = 10;
    c.record_particles = true;
    const auto a1 = run_trajectory(c);
    const auto a2 = run_trajectory(c);
    const bool identical = a1.barycenter == a2.barycenter &&
                           a1.moment4 == a2.moment4 && a1.times == a2.times;

    SimConfig mirrored = c;
    mirrored.init = InitLaw::gaussian(-1.0, 0.25);
    mirrored.negate_noise = true;
    const auto b = run_trajectory(mirrored);
    double worst = 0.0;
    for (std::size_t k = 0; k < a1.snapshots.size(); ++k) {
        const auto& xa = a1.snapshots[k].second;
        const auto& xb = b.snapshots[k].second;
        for (std::size_t i = 0; i < xa.size(); ++i) {
            worst = std::max(worst, std::abs(xa[i] + xb[i]));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "repeat run identical = %s, mirror residual = %.2e (tol 1e-12)",
                  identical ? "yes" : "no", worst);
    report(13, "determinism and mirror symmetry", identical && worst <= 1e-12, buf);
}

} // namespace

int main() {
    std::printf("acceptance suite (%s)\n", kToolVersion);
    criterion_1_critical_sigma();
    criterion_2_phase_structure();
    criterion_3_quadrature_oracle();
    criterion_4_fast_convergence();
    criterion_5_high_temperature();
    criterion_6_metastable_transition();
    criterion_7_exponential_law();
    criterion_8_exit_time_growth();
    criterion_9_modifier();
    criterion_10_drift_equivalence();
    criterion_11_gibbs_oracle();
    criterion_12_w2_exactness();
    criterion_13_determinism_and_mirror();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", g_failures);
    }
    return g_failures;
}
