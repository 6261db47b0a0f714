#include "mfl/simulate.hpp"

#include "mfl/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace mfl {

namespace {

constexpr double kBlowupLimit = 1e6;

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double fourth_moment(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) {
        const double v2 = v * v;
        s += v2 * v2;
    }
    return s / static_cast<double>(x.size());
}

} // namespace

void validate(const SimConfig& config) {
    require_valid(config.params);
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
        throw ConfigError("dt must be positive");
    }
    if (!(config.horizon >= config.dt)) {
        throw ConfigError("horizon must be at least dt");
    }
    if (config.n_particles < 1) {
        throw ConfigError("n_particles must be at least 1");
    }
    if (config.params.potential.kind == PotentialKind::double_well &&
        config.dt > 0.05) {
        throw ConfigError("dt must be <= 0.05 for the double well (stability)");
    }
    if (config.record_every < 1) {
        throw ConfigError("record_every must be at least 1");
    }
    if (config.drift_mode == DriftMode::modified && config.drift == nullptr) {
        throw ConfigError("modified drift mode requires a built ModifiedDrift");
    }
    if (config.init.kind == InitLaw::Kind::gaussian &&
        !(config.init.variance >= 0.0)) {
        throw ConfigError("init.variance must be non-negative");
    }
}

std::vector<double> init_particles(const SimConfig& config, GaussianStream& rng) {
    const std::size_t n = config.n_particles;
    std::vector<double> x(n);
    switch (config.init.kind) {
    case InitLaw::Kind::gaussian: {
        const double sd = std::sqrt(config.init.variance);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = config.init.mean + sd * rng.gauss();
        }
        break;
    }
    case InitLaw::Kind::point:
        for (std::size_t i = 0; i < n; ++i) x[i] = config.init.x;
        break;
    case InitLaw::Kind::from_file: {
        std::ifstream in(config.init.path);
        if (!in) throw FileError("cannot open init file: " + config.init.path);
        std::string line;
        std::size_t count = 0;
        while (count < n && std::getline(in, line)) {
            if (line.empty() || line == "index,x") continue;
            const auto comma = line.find(',');
            const std::string token =
                comma == std::string::npos ? line : line.substr(comma + 1);
            try {
                x[count++] = std::stod(token);
            } catch (const std::exception&) {
                throw FileError("unparsable value in init file: " + line);
            }
        }
        if (count < n) {
            std::ostringstream os;
            os << "init file " << config.init.path << " has " << count
               << " values, need " << n;
            throw FileError(os.str());
        }
        break;
    }
    }
    return x;
}

double em_step(const ModelParams& params, DriftMode mode,
               const ModifiedDrift* drift, std::vector<double>& particles,
               double dt, GaussianStream& rng, double t_for_diagnostics) {
    const std::size_t n = particles.size();
    const double kappa = params.kappa;
    const double noise_scale = std::sqrt(2.0 * dt) * params.sigma;

    const double xbar = mean_of(particles);
    double extra = 0.0;
    if (mode == DriftMode::modified) {
        extra = h_prime(params, *drift, xbar);
    }

    double new_sum = 0.0;
    double max_abs = 0.0;
    if (params.potential.kind == PotentialKind::double_well) {
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = particles[i];
            const double force = xi * (xi * xi - 1.0) + kappa * (xi - xbar);
            double xn = xi - force * dt + noise_scale * rng.gauss();
            if (extra != 0.0) xn -= extra * dt;
            particles[i] = xn;
            new_sum += xn;
            max_abs = std::max(max_abs, std::abs(xn));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = particles[i];
            const double force =
                potential_grad(params.potential, xi) + kappa * (xi - xbar);
            double xn = xi - force * dt + noise_scale * rng.gauss();
            if (extra != 0.0) xn -= extra * dt;
            particles[i] = xn;
            new_sum += xn;
            max_abs = std::max(max_abs, std::abs(xn));
        }
    }
    if (max_abs > kBlowupLimit) {
        std::ostringstream os;
        os << "particle magnitude exceeded 1e6 at t=" << t_for_diagnostics
           << "; dt is too large for this potential";
        throw NumericalBlowup(os.str(), t_for_diagnostics);
    }
    return new_sum / static_cast<double>(n);
}

TrajectoryRecord run_trajectory(const SimConfig& config) {
    validate(config);
    GaussianStream rng(derive_stream(config.seed, 0), config.negate_noise);
    std::vector<double> x = init_particles(config, rng);

    const long long steps = std::llround(config.horizon / config.dt);
    TrajectoryRecord rec;
    const std::size_t expected =
        static_cast<std::size_t>(steps / static_cast<long long>(config.record_every)) + 1;
    rec.times.reserve(expected);
    rec.barycenter.reserve(expected);
    rec.moment4.reserve(expected);

    const auto record = [&](double t) {
        rec.times.push_back(t);
        rec.barycenter.push_back(mean_of(x));
        rec.moment4.push_back(fourth_moment(x));
        if (config.record_particles) {
            rec.snapshots.emplace_back(t, x);
        }
    };
    record(0.0);

    for (long long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        em_step(config.params, config.drift_mode, config.drift, x, config.dt,
                rng, t);
        if (k % static_cast<long long>(config.record_every) == 0) {
            record(t);
        }
    }
    return rec;
}

namespace {

ExitOutcome run_exit_replica(const SimConfig& config, double domain_a,
                             std::size_t replica) {
    ExitOutcome out;
    out.replica_index = replica;
    out.seed_stream = derive_stream(config.seed, replica);
    out.exit_time = config.horizon;
    out.exited = false;

    GaussianStream rng(out.seed_stream, config.negate_noise);
    std::vector<double> x = init_particles(config, rng);
    const long long steps = std::llround(config.horizon / config.dt);
    for (long long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        const double xbar = em_step(config.params, config.drift_mode,
                                    config.drift, x, config.dt, rng, t);
        if (xbar < domain_a && k < steps) {
            out.exit_time = t;
            out.exited = true;
            return out;
        }
    }
    return out;
}

} // namespace

ExitOutcome run_exit(const SimConfig& config, double domain_a) {
    validate(config);
    switch (config.init.kind) {
    case InitLaw::Kind::gaussian:
        if (config.init.mean < domain_a) {
            throw InvalidDomain("init law mean lies outside D = [a, inf)");
        }
        break;
    case InitLaw::Kind::point:
        if (config.init.x < domain_a) {
            throw InvalidDomain("init point lies outside D = [a, inf)");
        }
        break;
    case InitLaw::Kind::from_file:
        break; // checked against the loaded sample below
    }
    if (config.init.kind == InitLaw::Kind::from_file) {
        GaussianStream probe(derive_stream(config.seed, 0));
        const std::vector<double> x0 = init_particles(config, probe);
        double s = 0.0;
        for (double v : x0) s += v;
        if (s / static_cast<double>(x0.size()) < domain_a) {
            throw InvalidDomain("init file barycenter lies outside D = [a, inf)");
        }
    }
    return run_exit_replica(config, domain_a, 0);
}

std::vector<ExitOutcome> run_exit_ensemble(const SimConfig& config,
                                           double domain_a,
                                           std::size_t n_replicas) {
    validate(config);
    if (n_replicas < 1) throw ConfigError("n_replicas must be at least 1");

    std::vector<ExitOutcome> outcomes(n_replicas);
    const auto work = [&](std::size_t k) {
        try {
            outcomes[k] = run_exit_replica(config, domain_a, k);
        } catch (const Error& e) {
            outcomes[k] = ExitOutcome{};
            outcomes[k].replica_index = k;
            outcomes[k].seed_stream = derive_stream(config.seed, k);
            outcomes[k].exit_time = config.horizon;
            outcomes[k].failed = true;
            outcomes[k].error = e.what();
        }
    };

    unsigned n_threads = config.threads > 0
                             ? static_cast<unsigned>(config.threads)
                             : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_replicas));

    if (n_threads <= 1) {
        for (std::size_t k = 0; k < n_replicas; ++k) work(k);
        return outcomes;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next.fetch_add(1); k < n_replicas;
                 k = next.fetch_add(1)) {
                work(k);
            }
        });
    }
    for (auto& th : pool) th.join();
    return outcomes;
}

} // namespace mfl
