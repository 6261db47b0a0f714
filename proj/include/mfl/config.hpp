#ifndef MFL_CONFIG_HPP
#define MFL_CONFIG_HPP

#include "mfl/model.hpp"
#include "mfl/simulate.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mfl {

// Flat key=value configuration with dotted keys. '#' starts a comment,
// blank lines are ignored. Later assignments (and command-line overrides)
// win. Schema (all optional unless a command needs them):
//   sigma, kappa
//   potential.kind          double_well | even_polynomial
//   potential.coefficients  comma-separated, x^2 coefficient first
//   n_particles, dt, horizon, seed
//   init.kind               gaussian | point | from_file
//   init.mean, init.variance, init.x, init.path
//   drift.mode              original | modified
//   drift.domain_a          left edge of D (modified mode / exit runs)
//   record.every, record.particles
//   threads                 0 = auto; wins over the MFL_THREADS env var
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path); // throws ConfigError/FileError
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const; // throws ConfigError naming the key
    std::string get_string_or(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double dflt) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long dflt) const;
    bool get_bool_or(const std::string& key, bool dflt) const;
    std::vector<double> get_double_list(const std::string& key) const;

    // Canonical "key=value\n" serialization, keys sorted.
    std::string canonical() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

ModelParams model_params_from_config(const Config& config);
// Everything except drift_mode/drift, which the caller wires up.
SimConfig sim_config_from_config(const Config& config);

// FNV-1a 64 over the canonical serialization; stable across runs.
std::uint64_t config_digest(const Config& config);
std::string digest_hex(std::uint64_t digest);

// Resolved thread count: `threads` config key if present, else the
// MFL_THREADS environment variable, else 0 (auto).
int resolve_threads(const Config& config);

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::vector<std::string> output_paths;
};

extern const char* const kToolVersion;

// Serialized as JSON; written before long computation begins.
void write_manifest(const RunManifest& manifest, const std::string& path);

} // namespace mfl

#endif // MFL_CONFIG_HPP
