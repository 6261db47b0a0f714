#include "mfl/config.hpp"

#include "mfl/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mfl {

const char* const kToolVersion = "mfl 0.1.0";

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open config file: " + path);
    Config config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected key=value, got '" << line << "'";
            throw ConfigError(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << path << ":" << lineno << ": empty key";
            throw ConfigError(os.str());
        }
        config.set(key, value);
    }
    return config;
}

void Config::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string Config::get_string_or(const std::string& key,
                                  const std::string& dflt) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: '" + raw + "'");
    }
}

double Config::get_double_or(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
}

long long Config::get_int(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(raw, &pos);
        if (pos != raw.size()) {
            // Allow scientific notation for large step counts (e.g. 1e7).
            const double d = std::stod(raw, &pos);
            if (pos != raw.size() || d != std::floor(d)) {
                throw std::invalid_argument("not an integer");
            }
            return static_cast<long long>(d);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: '" + raw + "'");
    }
}

long long Config::get_int_or(const std::string& key, long long dflt) const {
    return has(key) ? get_int(key) : dflt;
}

bool Config::get_bool_or(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const std::string raw = get_string(key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError("config key " + key + " is not a boolean: '" + raw + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + " has a non-numeric entry: '" +
                              token + "'");
        }
    }
    if (out.empty()) throw ConfigError("config key " + key + " is an empty list");
    return out;
}

std::string Config::canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << "=" << v << "\n";
    return os.str();
}

ModelParams model_params_from_config(const Config& config) {
    ModelParams params;
    params.sigma = config.get_double("sigma");
    params.kappa = config.get_double_or("kappa", 1.0);
    const std::string kind = config.get_string_or("potential.kind", "double_well");
    if (kind == "double_well") {
        params.potential = PotentialSpec::double_well();
    } else if (kind == "even_polynomial") {
        params.potential =
            PotentialSpec::even_polynomial(config.get_double_list("potential.coefficients"));
    } else {
        throw ConfigError("config key potential.kind must be double_well or "
                          "even_polynomial, got '" + kind + "'");
    }
    require_valid(params);
    return params;
}

SimConfig sim_config_from_config(const Config& config) {
    SimConfig sim;
    sim.params = model_params_from_config(config);
    const long long n = config.get_int_or("n_particles", 1);
    if (n < 1) throw ConfigError("config key n_particles must be >= 1");
    sim.n_particles = static_cast<std::size_t>(n);
    sim.dt = config.get_double_or("dt", 0.01);
    sim.horizon = config.get_double_or("horizon", 1.0);
    sim.seed = static_cast<std::uint64_t>(config.get_int_or("seed", 0));

    const std::string init_kind = config.get_string_or("init.kind", "gaussian");
    if (init_kind == "gaussian") {
        sim.init = InitLaw::gaussian(config.get_double_or("init.mean", 0.0),
                                     config.get_double_or("init.variance", 0.25));
    } else if (init_kind == "point") {
        sim.init = InitLaw::point(config.get_double("init.x"));
    } else if (init_kind == "from_file") {
        sim.init = InitLaw::from_file(config.get_string("init.path"));
    } else {
        throw ConfigError("config key init.kind must be gaussian, point or "
                          "from_file, got '" + init_kind + "'");
    }

    const long long every = config.get_int_or("record.every", 100);
    if (every < 1) throw ConfigError("config key record.every must be >= 1");
    sim.record_every = static_cast<std::size_t>(every);
    sim.record_particles = config.get_bool_or("record.particles", false);
    sim.threads = resolve_threads(config);
    return sim;
}

std::uint64_t config_digest(const Config& config) {
    const std::string canon = config.canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a 64
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string digest_hex(std::uint64_t digest) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << digest;
    return os.str();
}

int resolve_threads(const Config& config) {
    if (config.has("threads")) {
        return static_cast<int>(config.get_int("threads"));
    }
    if (const char* env = std::getenv("MFL_THREADS")) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("MFL_THREADS is not an integer: ") + env);
        }
    }
    return 0;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config_digest"] = manifest.config_digest;
    j["seed"] = manifest.seed;
    j["tool_version"] = manifest.tool_version;
    j["output_paths"] = manifest.output_paths;
    std::ofstream out(path);
    if (!out) throw FileError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

} // namespace mfl
