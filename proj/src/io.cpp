#include "magbb/io.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <system_error>

namespace magbb::io {

namespace {

using nlohmann::json;

double json_number(const json& node, const char* key, const char* context) {
    if (!node.contains(key))
        throw ConfigError(std::string(context) + ": missing field '" + key + "'");
    const auto& value = node.at(key);
    if (!value.is_number())
        throw ConfigError(std::string(context) + ": field '" + key + "' must be a number");
    return value.get<double>();
}

std::int64_t json_integer(const json& node, const char* key, const char* context) {
    if (!node.contains(key))
        throw ConfigError(std::string(context) + ": missing field '" + key + "'");
    const auto& value = node.at(key);
    if (!value.is_number_integer())
        throw ConfigError(std::string(context) + ": field '" + key + "' must be an integer");
    return value.get<std::int64_t>();
}

beamform::Scheme scheme_from_name(const std::string& name, const char* context) {
    if (name == "constant") return beamform::Scheme::constant;
    if (name == "orthonormal3") return beamform::Scheme::orthonormal3;
    if (name == "grid") return beamform::Scheme::grid;
    throw ConfigError(std::string(context) +
                      ": field 'kind' must be one of constant|orthonormal3|grid, got '" +
                      name + "'");
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

std::string SchemeSpec::name() const {
    switch (kind) {
        case beamform::Scheme::constant: return "constant";
        case beamform::Scheme::orthonormal3: return "orthonormal3";
        case beamform::Scheme::grid: return "grid-" + std::to_string(n_cv);
    }
    return "unknown";
}

Medium ExperimentConfig::medium() const {
    return Medium(permittivity_vacuum_f_per_m, relative_permittivity,
                  permeability_vacuum_h_per_m, relative_permeability, frequency_hz);
}

CoilSpec ExperimentConfig::tx_coil() const {
    return CoilSpec(tx_radius_m, tx_turns, tx_resistance_ohm);
}

CoilSpec ExperimentConfig::rx_coil() const {
    return CoilSpec(rx_radius_m, rx_turns, rx_resistance_ohm);
}

beamform::DesignParams ExperimentConfig::design_params() const {
    beamform::DesignParams params{medium(), tx_coil(),        rx_coil(), p_max_w,
                                  v_th_v,   beamform::VoltageMode::automatic,
                                  voltage_margin, {}};
    params.solver.tolerance = sdp_tolerance;
    params.solver.max_iterations = sdp_max_iterations;
    return params;
}

sim::McParams ExperimentConfig::mc_params() const {
    return sim::McParams{tx_coil(), rx_coil(), medium(), v_th_v, threads};
}

void ExperimentConfig::check() const {
    try {
        (void)medium();
        (void)tx_coil();
        (void)rx_coil();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(p_max_w > 0.0)) throw ConfigError("config: p_max_w must be > 0");
    if (v_th_v < 0.0) throw ConfigError("config: v_th_v must be >= 0");
    if (mc_samples < 1) throw ConfigError("config: mc_samples must be >= 1");
    if (!(cycle_seconds > 0.0)) throw ConfigError("config: cycle_seconds must be > 0");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    if (distances_m.empty()) throw ConfigError("config: distances_m must be non-empty");
    for (const double d : distances_m)
        if (!(d > 0.0)) throw ConfigError("config: distances_m entries must be > 0");
    if (schemes.empty()) throw ConfigError("config: schemes must be non-empty");
    for (const auto& scheme : schemes) {
        if (scheme.kind == beamform::Scheme::grid && scheme.n_cv < 1)
            throw ConfigError("config: grid schemes need n_cv >= 1");
    }
    if (!(sdp_tolerance > 0.0)) throw ConfigError("config: sdp_tolerance must be > 0");
    if (sdp_max_iterations < 1) throw ConfigError("config: sdp_max_iterations must be >= 1");
}

namespace {

json config_to_json(const ExperimentConfig& config) {
    json schemes = json::array();
    for (const auto& scheme : config.schemes) {
        json node;
        switch (scheme.kind) {
            case beamform::Scheme::constant: node["kind"] = "constant"; break;
            case beamform::Scheme::orthonormal3: node["kind"] = "orthonormal3"; break;
            case beamform::Scheme::grid:
                node["kind"] = "grid";
                node["n_cv"] = scheme.n_cv;
                break;
        }
        schemes.push_back(node);
    }
    json locations = json::array();
    for (const auto& loc : config.locations_deg) {
        json node{{"theta_deg", loc.theta_deg}, {"phi_deg", loc.phi_deg}};
        if (!loc.label.empty()) node["label"] = loc.label;
        locations.push_back(node);
    }
    return json{{"permittivity_vacuum_f_per_m", config.permittivity_vacuum_f_per_m},
                {"relative_permittivity", config.relative_permittivity},
                {"permeability_vacuum_h_per_m", config.permeability_vacuum_h_per_m},
                {"relative_permeability", config.relative_permeability},
                {"frequency_hz", config.frequency_hz},
                {"tx_radius_m", config.tx_radius_m},
                {"tx_turns", config.tx_turns},
                {"tx_resistance_ohm", config.tx_resistance_ohm},
                {"rx_radius_m", config.rx_radius_m},
                {"rx_turns", config.rx_turns},
                {"rx_resistance_ohm", config.rx_resistance_ohm},
                {"p_max_w", config.p_max_w},
                {"v_th_v", config.v_th_v},
                {"distances_m", config.distances_m},
                {"locations_deg", locations},
                {"schemes", schemes},
                {"cycle_seconds", config.cycle_seconds},
                {"mc_samples", config.mc_samples},
                {"seed", config.seed},
                {"threads", config.threads},
                {"sdp_tolerance", config.sdp_tolerance},
                {"sdp_max_iterations", config.sdp_max_iterations},
                {"voltage_margin", config.voltage_margin}};
}

ExperimentConfig config_from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("config: document root must be an object");
    ExperimentConfig config;
    for (const auto& [key, value] : root.items()) {
        if (key == "permittivity_vacuum_f_per_m")
            config.permittivity_vacuum_f_per_m = json_number(root, key.c_str(), "config");
        else if (key == "relative_permittivity")
            config.relative_permittivity = json_number(root, key.c_str(), "config");
        else if (key == "permeability_vacuum_h_per_m")
            config.permeability_vacuum_h_per_m = json_number(root, key.c_str(), "config");
        else if (key == "relative_permeability")
            config.relative_permeability = json_number(root, key.c_str(), "config");
        else if (key == "frequency_hz")
            config.frequency_hz = json_number(root, key.c_str(), "config");
        else if (key == "tx_radius_m")
            config.tx_radius_m = json_number(root, key.c_str(), "config");
        else if (key == "tx_turns")
            config.tx_turns = static_cast<int>(json_integer(root, key.c_str(), "config"));
        else if (key == "tx_resistance_ohm")
            config.tx_resistance_ohm = json_number(root, key.c_str(), "config");
        else if (key == "rx_radius_m")
            config.rx_radius_m = json_number(root, key.c_str(), "config");
        else if (key == "rx_turns")
            config.rx_turns = static_cast<int>(json_integer(root, key.c_str(), "config"));
        else if (key == "rx_resistance_ohm")
            config.rx_resistance_ohm = json_number(root, key.c_str(), "config");
        else if (key == "p_max_w")
            config.p_max_w = json_number(root, key.c_str(), "config");
        else if (key == "v_th_v")
            config.v_th_v = json_number(root, key.c_str(), "config");
        else if (key == "distances_m") {
            if (!value.is_array()) throw ConfigError("config: distances_m must be an array");
            config.distances_m = value.get<std::vector<double>>();
        } else if (key == "locations_deg") {
            if (!value.is_array()) throw ConfigError("config: locations_deg must be an array");
            config.locations_deg.clear();
            for (const auto& node : value) {
                LocationSpec loc;
                loc.theta_deg = json_number(node, "theta_deg", "config.locations_deg");
                loc.phi_deg = json_number(node, "phi_deg", "config.locations_deg");
                if (node.contains("label")) loc.label = node.at("label").get<std::string>();
                config.locations_deg.push_back(loc);
            }
        } else if (key == "schemes") {
            if (!value.is_array()) throw ConfigError("config: schemes must be an array");
            config.schemes.clear();
            for (const auto& node : value) {
                if (!node.contains("kind"))
                    throw ConfigError("config.schemes: missing field 'kind'");
                SchemeSpec scheme;
                scheme.kind =
                    scheme_from_name(node.at("kind").get<std::string>(), "config.schemes");
                if (scheme.kind == beamform::Scheme::constant) scheme.n_cv = 1;
                if (scheme.kind == beamform::Scheme::orthonormal3) scheme.n_cv = 3;
                if (node.contains("n_cv"))
                    scheme.n_cv =
                        static_cast<int>(json_integer(node, "n_cv", "config.schemes"));
                else if (scheme.kind == beamform::Scheme::grid)
                    throw ConfigError("config.schemes: grid entries need field 'n_cv'");
                config.schemes.push_back(scheme);
            }
        } else if (key == "cycle_seconds")
            config.cycle_seconds = json_number(root, key.c_str(), "config");
        else if (key == "mc_samples")
            config.mc_samples = static_cast<int>(json_integer(root, key.c_str(), "config"));
        else if (key == "seed")
            config.seed = root.at(key).get<std::uint64_t>();
        else if (key == "threads")
            config.threads = static_cast<int>(json_integer(root, key.c_str(), "config"));
        else if (key == "sdp_tolerance")
            config.sdp_tolerance = json_number(root, key.c_str(), "config");
        else if (key == "sdp_max_iterations")
            config.sdp_max_iterations =
                static_cast<int>(json_integer(root, key.c_str(), "config"));
        else if (key == "voltage_margin")
            config.voltage_margin = json_number(root, key.c_str(), "config");
        else
            throw ConfigError("config: unknown field '" + key + "'");
    }
    config.check();
    return config;
}

}  // namespace

std::string config_to_json_string(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig config_from_json_string(const std::string& text) {
    try {
        return config_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_json_string(read_text(path));
}

std::string current_set_to_json_string(const beamform::CurrentSet& set) {
    json vectors = json::array();
    for (const auto& vec : set.vectors) {
        json node;
        node["target"] = {{"theta_deg", rad_to_deg(vec.target_direction.polar)},
                          {"phi_deg", rad_to_deg(vec.target_direction.azimuth)}};
        node["i_re"] = {vec.i(0).real(), vec.i(1).real(), vec.i(2).real()};
        node["i_im"] = {vec.i(0).imag(), vec.i(1).imag(), vec.i(2).imag()};
        node["diagnostics"] = {{"alignment_error", vec.diagnostics.alignment_error},
                               {"rank1_ratio", vec.diagnostics.rank1_ratio},
                               {"feasible_voltage", vec.diagnostics.feasible_voltage},
                               {"imag_current_norm", vec.diagnostics.imag_current_norm}};
        vectors.push_back(node);
    }
    const json root{{"scheme", beamform::to_string(set.scheme)},
                    {"n_cv", set.n_cv},
                    {"seed", set.seed},
                    {"design_location", {{"r_m", set.design_location.range},
                                         {"theta_deg", rad_to_deg(set.design_location.polar)},
                                         {"phi_deg", rad_to_deg(set.design_location.azimuth)}}},
                    {"vectors", vectors}};
    return root.dump(2) + "\n";
}

namespace {
beamform::CurrentSet current_set_from_json(const json& root);
}

beamform::CurrentSet current_set_from_json_string(const std::string& text) {
    try {
        return current_set_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("current_set: invalid JSON: ") + e.what());
    }
}

namespace {

beamform::CurrentSet current_set_from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("current_set: document root must be an object");
    if (!root.contains("scheme")) throw ConfigError("current_set: missing field 'scheme'");

    beamform::CurrentSet set;
    set.scheme = scheme_from_name(root.at("scheme").get<std::string>(), "current_set");
    set.n_cv = static_cast<int>(json_integer(root, "n_cv", "current_set"));
    if (!root.contains("seed")) throw ConfigError("current_set: missing field 'seed'");
    set.seed = root.at("seed").get<std::uint64_t>();

    if (!root.contains("design_location"))
        throw ConfigError("current_set: missing field 'design_location'");
    const json& loc = root.at("design_location");
    set.design_location = SphericalLocation::from_degrees(
        json_number(loc, "r_m", "current_set.design_location"),
        json_number(loc, "theta_deg", "current_set.design_location"),
        json_number(loc, "phi_deg", "current_set.design_location"));

    if (!root.contains("vectors") || !root.at("vectors").is_array())
        throw ConfigError("current_set: missing array field 'vectors'");
    for (const auto& node : root.at("vectors")) {
        if (!node.contains("target"))
            throw ConfigError("current_set.vectors: missing field 'target'");
        const Orientation target = Orientation::from_degrees(
            json_number(node.at("target"), "theta_deg", "current_set.vectors.target"),
            json_number(node.at("target"), "phi_deg", "current_set.vectors.target"));
        if (!node.contains("i_re") || !node.at("i_re").is_array() ||
            node.at("i_re").size() != 3)
            throw ConfigError("current_set.vectors: field 'i_re' must be an array of 3");
        if (!node.contains("i_im") || !node.at("i_im").is_array() ||
            node.at("i_im").size() != 3)
            throw ConfigError("current_set.vectors: field 'i_im' must be an array of 3");
        CVec3d current;
        for (int k = 0; k < 3; ++k)
            current(k) = {node.at("i_re").at(k).get<double>(),
                          node.at("i_im").at(k).get<double>()};
        beamform::CurrentVector vec{current, target, {}};
        if (node.contains("diagnostics")) {
            const json& diag = node.at("diagnostics");
            vec.diagnostics.alignment_error =
                json_number(diag, "alignment_error", "current_set.vectors.diagnostics");
            vec.diagnostics.rank1_ratio =
                json_number(diag, "rank1_ratio", "current_set.vectors.diagnostics");
            if (!diag.contains("feasible_voltage"))
                throw ConfigError(
                    "current_set.vectors.diagnostics: missing field 'feasible_voltage'");
            vec.diagnostics.feasible_voltage = diag.at("feasible_voltage").get<bool>();
            vec.diagnostics.imag_current_norm =
                json_number(diag, "imag_current_norm", "current_set.vectors.diagnostics");
        }
        set.vectors.push_back(std::move(vec));
    }
    if (set.n_cv < 1) throw ConfigError("current_set: field 'n_cv' must be >= 1");
    if (static_cast<int>(set.vectors.size()) != set.n_cv)
        throw ConfigError("current_set: field 'n_cv' does not match the vectors array");
    return set;
}

}  // namespace

void save_current_set(const beamform::CurrentSet& set, const std::string& path) {
    write_text_atomic(path, current_set_to_json_string(set));
}

beamform::CurrentSet load_current_set(const std::string& path) {
    return current_set_from_json_string(read_text(path));
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + temp);
        out << content;
        if (!out) throw IoError("write failed: " + temp);
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) throw IoError("rename failed: " + temp + " -> " + path + ": " + ec.message());
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string trace_csv_string(const std::vector<sim::TracePoint>& trace, double v_th) {
    std::string out = "t_s,v_abs_V,above_threshold\n";
    for (const auto& point : trace) {
        out += format_double(point.t);
        out += ',';
        out += format_double(point.v_abs);
        out += ',';
        out += point.v_abs > v_th ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string mc_csv_string(const std::vector<PolicyResult>& results) {
    std::string out = "policy,energy_J,cdf\n";
    for (const auto& result : results) {
        const auto n = result.cdf.samples.size();
        for (std::size_t i = 0; i < n; ++i) {
            out += result.policy;
            out += ',';
            out += format_double(result.cdf.samples[i]);
            out += ',';
            out += format_double(static_cast<double>(i + 1) / static_cast<double>(n));
            out += '\n';
        }
    }
    out += "\npolicy,zero_probability,q50_J\n";
    for (const auto& result : results) {
        out += result.policy;
        out += ',';
        out += format_double(result.cdf.zero_probability);
        out += ',';
        out += format_double(result.cdf.quantiles.at(0.50));
        out += '\n';
    }
    return out;
}

std::string sweep_csv_string(const std::vector<SweepRow>& rows) {
    std::string out = "variable,value,policy,zero_probability,q50_J\n";
    for (const auto& row : rows) {
        out += row.variable;
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += row.policy;
        out += ',';
        out += format_double(row.zero_probability);
        out += ',';
        out += format_double(row.median_energy_j);
        out += '\n';
    }
    return out;
}

std::vector<PolicyResult> run_mc_experiment(const McExperiment& experiment) {
    experiment.config.check();
    if (experiment.mode != "fixed" && experiment.mode != "random")
        throw ConfigError("mc: mode must be 'fixed' or 'random'");
    if (experiment.distances.empty()) throw ConfigError("mc: distances must be non-empty");
    for (const double r : experiment.distances)
        if (!(r > 0.0)) throw ConfigError("mc: distances must be > 0");

    const auto& config = experiment.config;
    const bool fixed = experiment.mode == "fixed";
    const bool suffix_range = experiment.distances.size() > 1;

    std::vector<PolicyResult> results;
    for (const double r : experiment.distances) {
        // Sets are designed against the fixed receiver location; in random
        // mode they are designed for the axial reference location at range r.
        const SphericalLocation design_location =
            fixed ? SphericalLocation::from_degrees(r, experiment.theta_deg,
                                                    experiment.phi_deg)
                  : SphericalLocation::from_degrees(r, 180.0, 0.0);

        std::vector<std::pair<std::string, beamform::CurrentSet>> sets;
        if (experiment.set_paths.empty()) {
            const auto params = config.design_params();
            for (const auto& scheme : config.schemes)
                sets.emplace_back(scheme.name(),
                                  beamform::design_set(design_location, scheme.n_cv,
                                                       scheme.kind, params, config.seed));
        } else {
            for (const auto& path : experiment.set_paths) {
                beamform::CurrentSet set = load_current_set(path);
                std::string name = SchemeSpec{set.scheme, set.n_cv}.name();
                for (const auto& existing : sets)
                    if (existing.first == name) name += "+";
                sets.emplace_back(std::move(name), std::move(set));
            }
        }

        const sim::McMode mode =
            fixed ? sim::McMode::fixed(SphericalLocation::from_degrees(
                        r, experiment.theta_deg, experiment.phi_deg))
                  : sim::McMode::random(r);

        for (auto& [name, set] : sets) {
            const sim::ChargingPolicy policy{std::move(set), config.cycle_seconds};
            std::string label = suffix_range ? name + "@" + format_double(r) + "m" : name;
            results.push_back({std::move(label),
                               sim::monte_carlo(policy, config.mc_samples, mode, config.seed,
                                                config.mc_params())});
        }
    }
    return results;
}

std::string mc_manifest_string(const McExperiment& experiment,
                               const std::vector<std::string>& outputs) {
    const json root{{"tool", "magbb"},
                    {"version", kToolVersion},
                    {"command", "mc"},
                    {"created_utc", utc_timestamp()},
                    {"seed", experiment.config.seed},
                    {"experiment",
                     {{"mode", experiment.mode},
                      {"distances_m", experiment.distances},
                      {"theta_deg", experiment.theta_deg},
                      {"phi_deg", experiment.phi_deg},
                      {"set_paths", experiment.set_paths}}},
                    {"config", config_to_json(experiment.config)},
                    {"outputs", outputs}};
    return root.dump(2) + "\n";
}

McExperiment mc_experiment_from_manifest(const std::string& path) {
    const std::string text = read_text(path);
    try {
        const json root = json::parse(text);
        if (!root.contains("config")) throw ConfigError("manifest: missing field 'config'");
        if (!root.contains("experiment"))
            throw ConfigError("manifest: missing field 'experiment'");

        McExperiment experiment;
        experiment.config = config_from_json(root.at("config"));
        const json& exp = root.at("experiment");
        if (!exp.contains("mode"))
            throw ConfigError("manifest.experiment: missing field 'mode'");
        experiment.mode = exp.at("mode").get<std::string>();
        if (!exp.contains("distances_m") || !exp.at("distances_m").is_array())
            throw ConfigError("manifest.experiment: missing array field 'distances_m'");
        experiment.distances = exp.at("distances_m").get<std::vector<double>>();
        experiment.theta_deg = json_number(exp, "theta_deg", "manifest.experiment");
        experiment.phi_deg = json_number(exp, "phi_deg", "manifest.experiment");
        if (exp.contains("set_paths"))
            experiment.set_paths = exp.at("set_paths").get<std::vector<std::string>>();
        return experiment;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: invalid JSON: ") + e.what());
    }
}

}  // namespace magbb::io
