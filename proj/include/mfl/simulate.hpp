#ifndef MFL_SIMULATE_HPP
#define MFL_SIMULATE_HPP

#include "mfl/model.hpp"
#include "mfl/modifier.hpp"
#include "mfl/rng.hpp"

#include <cstdint>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mfl {

struct InitLaw {
    enum class Kind { gaussian, point, from_file };
    Kind kind = Kind::gaussian;
    double mean = 0.0;     // gaussian
    double variance = 0.0; // gaussian
    double x = 0.0;        // point
    std::string path;      // from_file

    static InitLaw gaussian(double mean, double variance) {
        InitLaw law;
        law.kind = Kind::gaussian;
        law.mean = mean;
        law.variance = variance;
        return law;
    }
    static InitLaw point(double x) {
        InitLaw law;
        law.kind = Kind::point;
        law.x = x;
        return law;
    }
    static InitLaw from_file(std::string path) {
        InitLaw law;
        law.kind = Kind::from_file;
        law.path = std::move(path);
        return law;
    }
};

enum class DriftMode { original, modified };

struct SimConfig {
    ModelParams params;
    std::size_t n_particles = 1;
    double dt = 0.01;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    InitLaw init;
    DriftMode drift_mode = DriftMode::original;
    const ModifiedDrift* drift = nullptr; // required in modified mode
    std::size_t record_every = 100;       // steps between snapshots
    bool record_particles = false;
    bool negate_noise = false; // diagnostic: mirror-equivariance tests
    int threads = 0;           // ensembles only; 0 = hardware concurrency
};

// Throws ConfigError on violated invariants (dt > 0, horizon >= dt,
// n_particles >= 1, dt <= 0.05 for the double well, drift present in
// modified mode, valid params).
void validate(const SimConfig& config);

// N i.i.d. draws from the init law, consumed from the replica's stream.
// Throws FileError for from_file problems.
std::vector<double> init_particles(const SimConfig& config, GaussianStream& rng);

// One Euler-Maruyama step, in place:
//   x_i <- x_i - [V'(x_i) + kappa (x_i - xbar) + h'(xbar)]*dt + sqrt(2 dt) sigma xi_i
// (the h' term only in modified mode, and it is skipped — not added as
// 0.0 — when it vanishes, so in-domain modified steps execute the exact
// instruction sequence of original ones). xbar is computed once per step;
// the per-particle draws are consumed particle-major. Returns the barycenter
// of the updated state. Throws NumericalBlowup when any |x_i| > 1e6.
double em_step(const ModelParams& params, DriftMode mode,
               const ModifiedDrift* drift, std::vector<double>& particles,
               double dt, GaussianStream& rng, double t_for_diagnostics = 0.0);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> barycenter;
    std::vector<double> moment4; // (1/N) sum |x_i|^4
    std::vector<std::pair<double, std::vector<double>>> snapshots;
};

// Integrates to the horizon, recording every record_every steps (including
// step 0). Deterministic function of (config, seed).
TrajectoryRecord run_trajectory(const SimConfig& config);

struct ExitOutcome {
    double exit_time = 0.0; // == horizon when censored
    bool exited = false;    // exited <=> exit_time < horizon
    std::size_t replica_index = 0;
    std::uint64_t seed_stream = 0;
    bool failed = false; // replica aborted (e.g. blow-up); see error
    std::string error;
};

// Steps until the first step where xbar < domain_a; censored at the horizon.
// Precondition: the init law's mean lies in [domain_a, inf).
ExitOutcome run_exit(const SimConfig& config, double domain_a);

// Replica k uses the stream derive_stream(seed, k). Replicas run in
// parallel; the output is ordered by replica_index and independent of
// scheduling. Per-replica failures are recorded, not thrown.
std::vector<ExitOutcome> run_exit_ensemble(const SimConfig& config,
                                           double domain_a,
                                           std::size_t n_replicas);

} // namespace mfl

#endif // MFL_SIMULATE_HPP
