// Command-line front end: one subcommand per experiment family. Outputs are
// deterministic functions of (resolved config, seed) at the byte level.
//
// Exit codes: 0 success, 2 config/usage, 3 numerical failure, 4 I/O,
// 5 verification failure.

#include "mfl/config.hpp"
#include "mfl/errors.hpp"
#include "mfl/fixedpoint.hpp"
#include "mfl/modifier.hpp"
#include "mfl/quadrature.hpp"
#include "mfl/simulate.hpp"
#include "mfl/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommandArgs {
    std::string config_path;
    std::string out;
    std::vector<std::string> overrides; // key=value
};

mfl::Config load_config(const CommandArgs& args) {
    mfl::Config config;
    if (!args.config_path.empty()) {
        config = mfl::Config::from_file(args.config_path);
    }
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw mfl::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw mfl::FileError("cannot open output path: " + path);
    return out;
}

void emit_manifest(const std::string& command, const mfl::Config& config,
                   std::uint64_t seed, const std::vector<std::string>& outputs,
                   const std::string& manifest_path) {
    mfl::RunManifest manifest;
    manifest.command = command;
    manifest.config_digest = mfl::digest_hex(mfl::config_digest(config));
    manifest.seed = seed;
    manifest.tool_version = mfl::kToolVersion;
    manifest.output_paths = outputs;
    mfl::write_manifest(manifest, manifest_path);
}

json report_to_json(const mfl::FixedPointReport& report) {
    json roots = json::array();
    for (const auto& r : report.roots) {
        roots.push_back({{"m", r.m},
                         {"f_prime_at_m", r.f_prime_at_m},
                         {"stable", r.stable}});
    }
    json iters = json::object();
    for (const auto& [start, count] : report.iterations_used) {
        iters[std::to_string(start)] = count;
    }
    return json{{"sigma", report.sigma},
                {"roots", roots},
                {"iterations_used", iters},
                {"tolerance", report.tolerance},
                {"boundary_warning", report.boundary_warning}};
}

json exit_report_to_json(const mfl::ExitTimeReport& report) {
    json j{{"n_total", report.n_total},
           {"n_censored", report.n_censored},
           {"censoring_caveat", report.censoring_caveat}};
    if (report.mean_defined) {
        j["mean_exit"] = report.mean_exit;
        j["ks_distance"] = report.ks_distance;
        j["mean_ci_halfwidth"] = report.mean_ci_halfwidth;
    } else {
        j["mean_exit"] = nullptr;
        j["ks_distance"] = nullptr;
        j["mean_ci_halfwidth"] = nullptr;
    }
    return j;
}

int cmd_phase_diagram(const CommandArgs& args) {
    const mfl::Config config = load_config(args);
    const mfl::ModelParams params = mfl::model_params_from_config(config);
    const double lo = config.get_double_or("phase.sigma_lo", 0.05);
    const double hi = config.get_double_or("phase.sigma_hi", 1.0);
    const double step = config.get_double_or("phase.sigma_step", 0.01);
    const double tol = config.get_double_or("phase.tol", 1e-5);
    if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0)) {
        throw mfl::ConfigError("phase.sigma_lo/sigma_hi/sigma_step must define a "
                               "positive increasing grid");
    }
    std::vector<double> grid;
    for (double s = lo; s <= hi + 0.5 * step; s += step) grid.push_back(s);

    emit_manifest("phase-diagram", config, 0, {args.out}, args.out + ".manifest.json");
    const auto rows =
        mfl::phase_diagram(params, grid, tol, mfl::resolve_threads(config));

    std::ofstream out = open_output(args.out);
    out << "sigma,m_plus,m_minus,status\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%s\n", row.sigma,
                      row.m_plus, row.m_minus, row.status.c_str());
        out << buf;
    }
    std::cout << "phase diagram: " << rows.size() << " rows -> " << args.out << "\n";
    return 0;
}

int cmd_fixed_points(const CommandArgs& args, double sigma, double m_max,
                     std::size_t grid_n, double tol) {
    const mfl::Config config = load_config(args);
    mfl::ModelParams params = config.has("sigma")
                                  ? mfl::model_params_from_config(config)
                                  : mfl::ModelParams{};
    params.sigma = sigma;
    mfl::require_valid(params);

    const auto report = mfl::find_all_fixed_points(params, m_max, grid_n, tol);
    const json j = report_to_json(report);
    if (!args.out.empty()) {
        std::ofstream out = open_output(args.out);
        out << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_critical_sigma(const CommandArgs& args, double sigma_lo, double sigma_hi,
                       double tol) {
    const mfl::Config config = load_config(args);
    mfl::ModelParams params = config.has("sigma")
                                  ? mfl::model_params_from_config(config)
                                  : mfl::ModelParams{};
    mfl::require_valid(params);
    const double sc = mfl::critical_sigma(params, sigma_lo, sigma_hi, tol);
    const json j{{"sigma_c", sc},
                 {"bracket", {sigma_lo, sigma_hi}},
                 {"tolerance", tol}};
    if (!args.out.empty()) {
        std::ofstream out = open_output(args.out);
        out << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

// Builds the modified drift when the config requests it; the domain edge
// comes from drift.domain_a (or the --domain-a flag upstream).
struct DriftBundle {
    std::optional<mfl::ModifiedDrift> drift;
};

void wire_drift(const mfl::Config& config, mfl::SimConfig& sim, DriftBundle& bundle) {
    const std::string mode = config.get_string_or("drift.mode", "original");
    if (mode == "original") {
        sim.drift_mode = mfl::DriftMode::original;
    } else if (mode == "modified") {
        if (!config.has("drift.domain_a")) {
            throw mfl::ConfigError("drift.mode=modified requires drift.domain_a");
        }
        const double a = config.get_double("drift.domain_a");
        const auto plan = mfl::plan_domain(sim.params, a, 1e-9);
        bundle.drift = mfl::build_modified_drift(sim.params, plan);
        sim.drift_mode = mfl::DriftMode::modified;
        sim.drift = &*bundle.drift;
    } else {
        throw mfl::ConfigError("drift.mode must be original or modified, got '" +
                               mode + "'");
    }
}

int cmd_simulate(const CommandArgs& args) {
    const mfl::Config config = load_config(args);
    mfl::SimConfig sim = mfl::sim_config_from_config(config);
    DriftBundle bundle;
    wire_drift(config, sim, bundle);
    mfl::validate(sim);

    const fs::path dir(args.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw mfl::FileError("cannot create output directory: " + args.out);

    const std::string traj_path = (dir / "trajectory.csv").string();
    emit_manifest("simulate", config, sim.seed, {traj_path},
                  (dir / "run_manifest.json").string());

    const mfl::TrajectoryRecord rec = mfl::run_trajectory(sim);

    {
        std::ofstream out = open_output(traj_path);
        out << "t,xbar,moment4\n";
        char buf[160];
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", rec.times[i],
                          rec.barycenter[i], rec.moment4[i]);
            out << buf;
        }
    }
    if (sim.record_particles) {
        const fs::path snapdir = dir / "snapshots";
        fs::create_directories(snapdir, ec);
        if (ec) throw mfl::FileError("cannot create snapshot directory");
        json snaps = json::array();
        char name[64];
        for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
            std::snprintf(name, sizeof name, "snap_%06zu.csv", k);
            const fs::path p = snapdir / name;
            std::ofstream out = open_output(p.string());
            out << "index,x\n";
            char buf[80];
            const auto& particles = rec.snapshots[k].second;
            for (std::size_t i = 0; i < particles.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, particles[i]);
                out << buf;
            }
            snaps.push_back({{"time", rec.snapshots[k].first},
                             {"file", p.filename().string()}});
        }
        std::ofstream man = open_output((snapdir / "manifest.json").string());
        man << json{{"snapshots", snaps}}.dump(2) << "\n";
    }
    std::cout << "trajectory: " << rec.times.size() << " records -> " << traj_path
              << "\n";
    return 0;
}

int cmd_exit_times(const CommandArgs& args, double domain_a_flag,
                   bool has_domain_flag, long long replicas) {
    const mfl::Config config = load_config(args);
    mfl::SimConfig sim = mfl::sim_config_from_config(config);
    DriftBundle bundle;
    wire_drift(config, sim, bundle);
    if (replicas < 1) {
        throw mfl::ConfigError("--replicas must be at least 1");
    }
    double domain_a;
    if (has_domain_flag) {
        domain_a = domain_a_flag;
    } else if (config.has("drift.domain_a")) {
        domain_a = config.get_double("drift.domain_a");
    } else {
        throw mfl::ConfigError("exit-times needs --domain-a or drift.domain_a");
    }

    emit_manifest("exit-times", config, sim.seed, {args.out},
                  args.out + ".manifest.json");

    const auto outcomes = mfl::run_exit_ensemble(
        sim, domain_a, static_cast<std::size_t>(replicas));
    std::size_t failures = 0;
    json outs = json::array();
    for (const auto& o : outcomes) {
        json jo{{"replica", o.replica_index},
                {"exit_time", o.exit_time},
                {"exited", o.exited},
                {"seed_stream", o.seed_stream}};
        if (o.failed) {
            jo["failed"] = true;
            jo["error"] = o.error;
            ++failures;
        }
        outs.push_back(jo);
    }
    const mfl::ExitTimeReport report = mfl::exit_report(outcomes);
    json j{{"report", exit_report_to_json(report)},
           {"domain_a", domain_a},
           {"outcomes", outs}};
    std::ofstream out = open_output(args.out);
    out << j.dump(2) << "\n";
    std::cout << exit_report_to_json(report).dump(2) << "\n";
    if (failures == outcomes.size()) {
        std::cerr << "all replicas failed\n";
        return 3;
    }
    return 0;
}

int cmd_modifier_check(const CommandArgs& args, double domain_a) {
    const mfl::Config config = load_config(args);
    const mfl::ModelParams params = mfl::model_params_from_config(config);

    const auto plan = mfl::plan_domain(params, domain_a, 1e-9);
    const auto drift = mfl::build_modified_drift(params, plan);

    const auto write_outputs = [&](const mfl::CoercivityReport& report,
                                   bool passed) {
        json j{{"eta_measured", report.eta_measured},
               {"unique_critical_point", report.unique_critical_point},
               {"f_tilde_fixed_points", report.f_tilde_fixed_points},
               {"r_properties",
                {{"r1", report.r1}, {"r2", report.r2}, {"r3", report.r3},
                 {"r4", report.r4}}},
               {"passed", passed},
               {"plan",
                {{"a", plan.a}, {"m_star", plan.m_star}, {"m_minus", plan.m_minus},
                 {"epsilon", plan.epsilon}, {"a_prime", plan.a_prime},
                 {"a_double_prime", plan.a_double_prime}, {"kappa", plan.kappa},
                 {"slope_s", drift.slope_s}}}};
        std::ofstream out = open_output(args.out);
        out << j.dump(2) << "\n";
        std::ofstream csv = open_output(args.out + ".wprime.csv");
        csv << "theta,w_prime\n";
        char buf[120];
        for (std::size_t i = 0; i < report.theta_grid.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", report.theta_grid[i],
                          report.w_prime_values[i]);
            csv << buf;
        }
        std::cout << j.dump(2) << "\n";
    };

    try {
        const auto report = mfl::verify_modifier(params, drift);
        write_outputs(report, true);
        return 0;
    } catch (const mfl::VerificationFailed& e) {
        write_outputs(e.report, false);
        std::cerr << e.what() << "\n";
        return 5;
    }
}

int cmd_gibbs_oracle(const CommandArgs& args, long long steps) {
    const mfl::Config config = load_config(args);
    mfl::SimConfig sim = mfl::sim_config_from_config(config);
    sim.n_particles = 1;
    sim.dt = config.get_double_or("dt", 0.005);
    if (steps < 1) throw mfl::ConfigError("--steps must be at least 1");
    sim.horizon = static_cast<double>(steps) * sim.dt; // validated below
    mfl::validate(sim);

    const long long burn_in = steps / 100;
    const std::size_t bins =
        static_cast<std::size_t>(config.get_int_or("gibbs.bins", 50));
    const double lo = config.get_double_or("gibbs.lo", -2.5);
    const double hi = config.get_double_or("gibbs.hi", 2.5);

    mfl::GaussianStream rng(mfl::derive_stream(sim.seed, 0));
    std::vector<double> x = mfl::init_particles(sim, rng);
    std::vector<double> occupation;
    occupation.reserve(static_cast<std::size_t>(steps - burn_in));
    for (long long k = 1; k <= steps; ++k) {
        const double xbar = mfl::em_step(sim.params, mfl::DriftMode::original,
                                         nullptr, x, sim.dt, rng,
                                         static_cast<double>(k) * sim.dt);
        if (k > burn_in) occupation.push_back(xbar);
    }
    const mfl::Histogram hist = mfl::histogram(occupation, bins, lo, hi);
    const mfl::Gibbs1Density density(sim.params);
    const double tv = mfl::tv_distance(hist, [&](double u) { return density(u); });

    const bool insufficient = (steps - burn_in) < 1000000;
    const json j{{"tv_distance", tv},
                 {"steps", steps},
                 {"burn_in", burn_in},
                 {"bins", bins},
                 {"range", {lo, hi}},
                 {"insufficient_sampling", insufficient}};
    if (!args.out.empty()) {
        std::ofstream out = open_output(args.out);
        out << j.dump(2) << "\n";
        std::ofstream csv = open_output(args.out + ".hist.csv");
        csv << "bin_left,bin_right,count\n";
        char buf[120];
        for (std::size_t b = 0; b < hist.counts.size(); ++b) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%zu\n", hist.edges[b],
                          hist.edges[b + 1], hist.counts[b]);
            csv << buf;
        }
    }
    std::cout << j.dump(2) << "\n";
    if (insufficient) {
        std::cerr << "insufficient sampling: " << (steps - burn_in)
                  << " post-burn-in steps\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field Langevin particle toolkit"};
    app.set_version_flag("--version", mfl::kToolVersion);
    app.require_subcommand(1);

    CommandArgs args;

    auto add_common = [&args](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", args.config_path, "config file");
        if (config_required) opt->required();
        sub->add_option("--set", args.overrides,
                        "override a config key (key=value), repeatable");
    };

    auto* phase = app.add_subcommand("phase-diagram",
                                     "m_+/m_- branches over a sigma grid (CSV)");
    add_common(phase, true);
    phase->add_option("--out", args.out, "output CSV path")->required();

    double fp_sigma = 0.5, fp_mmax = 5.0, fp_tol = 1e-9;
    std::size_t fp_gridn = 513;
    auto* fixedp = app.add_subcommand("fixed-points",
                                      "all fixed points of f at one sigma (JSON)");
    add_common(fixedp, false);
    fixedp->add_option("--sigma", fp_sigma, "noise amplitude")->required();
    fixedp->add_option("--m-max", fp_mmax, "scan window half-width");
    fixedp->add_option("--grid-n", fp_gridn, "scan grid size");
    fixedp->add_option("--tol", fp_tol, "residual tolerance");
    fixedp->add_option("--out", args.out, "optional output JSON path");

    double cs_lo = 0.5, cs_hi = 0.8, cs_tol = 1e-3;
    auto* critical = app.add_subcommand("critical-sigma",
                                        "bisect the phase transition (JSON)");
    add_common(critical, false);
    critical->add_option("--sigma-lo", cs_lo, "below-critical bracket end");
    critical->add_option("--sigma-hi", cs_hi, "above-critical bracket end");
    critical->add_option("--tol", cs_tol, "bracket width tolerance");
    critical->add_option("--out", args.out, "optional output JSON path");

    auto* simulate = app.add_subcommand("simulate",
                                        "Euler-Maruyama trajectory (CSV + snapshots)");
    add_common(simulate, true);
    simulate->add_option("--out", args.out, "output directory")->required();

    double et_domain_a = 0.0;
    long long et_replicas = 1;
    auto* exits = app.add_subcommand("exit-times",
                                     "replica ensemble of exit times (JSON)");
    add_common(exits, true);
    auto* et_flag = exits->add_option("--domain-a", et_domain_a,
                                      "left edge of D = [a, inf)");
    exits->add_option("--replicas", et_replicas, "ensemble size")->required();
    exits->add_option("--out", args.out, "output JSON path")->required();

    double mc_domain_a = 0.0;
    auto* modcheck = app.add_subcommand("modifier-check",
                                        "build and verify the modified drift (JSON)");
    add_common(modcheck, true);
    modcheck->add_option("--domain-a", mc_domain_a, "left edge of D = [a, inf)")
        ->required();
    modcheck->add_option("--out", args.out, "output JSON path")->required();

    long long go_steps = 10000000;
    auto* gibbs = app.add_subcommand("gibbs-oracle",
                                     "N=1 occupation vs Gibbs density (JSON)");
    add_common(gibbs, true);
    gibbs->add_option("--steps", go_steps, "number of Euler steps");
    gibbs->add_option("--out", args.out, "optional output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (phase->parsed()) return cmd_phase_diagram(args);
        if (fixedp->parsed()) {
            return cmd_fixed_points(args, fp_sigma, fp_mmax, fp_gridn, fp_tol);
        }
        if (critical->parsed()) return cmd_critical_sigma(args, cs_lo, cs_hi, cs_tol);
        if (simulate->parsed()) return cmd_simulate(args);
        if (exits->parsed()) {
            return cmd_exit_times(args, et_domain_a, et_flag->count() > 0,
                                  et_replicas);
        }
        if (modcheck->parsed()) return cmd_modifier_check(args, mc_domain_a);
        if (gibbs->parsed()) return cmd_gibbs_oracle(args, go_steps);
    } catch (const mfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mfl::InvalidDomain& e) {
        std::cerr << "invalid domain: " << e.what() << "\n";
        return 2;
    } catch (const mfl::VerificationFailed& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 5;
    } catch (const mfl::NumericalBlowup& e) {
        std::cerr << "numerical failure at t=" << e.time << ": " << e.what() << "\n";
        return 3;
    } catch (const mfl::FileError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const mfl::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
