// magbb: design rotating current sets for a tri-axis charging coil and
// evaluate charging reliability. Subcommands: design, trace, mc, sweep.
//
// Exit codes: 0 success, 2 usage/config error, 3 solver failure, 4 I/O error.
#include "magbb/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace magbb;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

io::ExperimentConfig resolve_config(const CommonArgs& args) {
    io::ExperimentConfig config;
    if (!args.config_path.empty()) config = io::load_config(args.config_path);
    if (args.seed) config.seed = *args.seed;
    if (args.threads) config.threads = *args.threads;
    config.check();
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config JSON path (defaults embedded)");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Seed override");
    cmd->add_option("--threads", args.threads, "Worker threads for Monte Carlo");
}

std::string joined(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io::IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string generic_manifest(const std::string& command, const io::ExperimentConfig& config,
                             const std::string& params_json,
                             const std::vector<std::string>& outputs) {
    std::string out = "{\n";
    out += "  \"tool\": \"magbb\",\n";
    out += "  \"version\": \"" + std::string(io::kToolVersion) + "\",\n";
    out += "  \"command\": \"" + command + "\",\n";
    out += "  \"params\": " + params_json + ",\n";
    out += "  \"outputs\": [";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + outputs[i] + "\"";
    }
    out += "],\n";
    out += "  \"config\": " + io::config_to_json_string(config);
    out.pop_back();  // trailing newline from config_to_json_string
    out += "\n}\n";
    return out;
}

beamform::Scheme parse_scheme(const std::string& name) {
    if (name == "constant") return beamform::Scheme::constant;
    if (name == "orthonormal3") return beamform::Scheme::orthonormal3;
    if (name == "grid") return beamform::Scheme::grid;
    throw io::ConfigError("--scheme must be one of constant|orthonormal3|grid");
}

int run(int argc, char** argv) {
    CLI::App app{"Magnetic blind beamforming designer and charging simulator"};
    app.require_subcommand(1);

    // ---- design --------------------------------------------------------
    CommonArgs design_args;
    std::string design_scheme = "grid";
    int design_n_cv = 36;
    double design_r = 1.2, design_theta = 180.0, design_phi = 0.0;
    std::string design_out_file;
    auto* design = app.add_subcommand("design", "Design a current set for one location");
    add_common(design, design_args);
    design->add_option("--scheme", design_scheme, "constant | orthonormal3 | grid");
    design->add_option("--n-cv", design_n_cv, "Number of current vectors (grid scheme)");
    design->add_option("--r-m", design_r, "Design range in meters");
    design->add_option("--theta-deg", design_theta, "Design polar angle, degrees");
    design->add_option("--phi-deg", design_phi, "Design azimuth, degrees");
    design->add_option("--out-file", design_out_file, "Current-set filename override");

    // ---- trace ---------------------------------------------------------
    CommonArgs trace_args;
    std::string trace_set_path;
    double trace_r = 1.2, trace_theta = 180.0, trace_phi = 0.0;
    double trace_rx_theta = 0.0, trace_rx_phi = 0.0;
    std::string trace_out_file = "trace.csv";
    auto* trace = app.add_subcommand("trace", "Voltage trace over one charging cycle");
    add_common(trace, trace_args);
    trace->add_option("--set", trace_set_path, "Current-set JSON path")->required();
    trace->add_option("--r-m", trace_r, "Receiver range, meters");
    trace->add_option("--theta-deg", trace_theta, "Receiver polar angle, degrees");
    trace->add_option("--phi-deg", trace_phi, "Receiver azimuth, degrees");
    trace->add_option("--rx-theta-deg", trace_rx_theta, "Receiver coil axis polar, degrees");
    trace->add_option("--rx-phi-deg", trace_rx_phi, "Receiver coil axis azimuth, degrees");
    trace->add_option("--out-file", trace_out_file, "Trace CSV filename");

    // ---- mc ------------------------------------------------------------
    CommonArgs mc_args;
    std::vector<std::string> mc_set_paths;
    std::string mc_mode = "fixed";
    std::optional<double> mc_r;
    double mc_theta = 180.0, mc_phi = 0.0;
    std::optional<int> mc_samples;
    std::string mc_from_manifest;
    std::string mc_out_file = "mc.csv";
    auto* mc = app.add_subcommand("mc", "Monte Carlo charging reliability CDFs");
    add_common(mc, mc_args);
    mc->add_option("--set", mc_set_paths, "Current-set JSON path (repeatable)");
    mc->add_option("--mode", mc_mode, "fixed | random receiver location");
    mc->add_option("--r-m", mc_r, "Receiver range, meters (default: config distances)");
    mc->add_option("--theta-deg", mc_theta, "Fixed-location polar angle, degrees");
    mc->add_option("--phi-deg", mc_phi, "Fixed-location azimuth, degrees");
    mc->add_option("--samples", mc_samples, "Monte Carlo receivers");
    mc->add_option("--from-manifest", mc_from_manifest,
                   "Re-run a previous mc invocation from its manifest");
    mc->add_option("--out-file", mc_out_file, "CDF CSV filename");

    // ---- sweep ---------------------------------------------------------
    CommonArgs sweep_args;
    std::string sweep_variable = "distance";
    std::vector<double> sweep_values;
    std::string sweep_mode = "fixed";
    double sweep_r = 1.2;
    std::string sweep_out_file = "sweep.csv";
    auto* sweep = app.add_subcommand("sweep", "Summary sweep over distance or n_cv");
    add_common(sweep, sweep_args);
    sweep->add_option("--variable", sweep_variable, "distance | n_cv");
    sweep->add_option("--values", sweep_values, "Sweep points (>= 2)");
    sweep->add_option("--mode", sweep_mode, "fixed | random receiver location");
    sweep->add_option("--r-m", sweep_r, "Range for the n_cv sweep, meters");
    sweep->add_option("--out-file", sweep_out_file, "Summary CSV filename");

    CLI11_PARSE(app, argc, argv);

    if (design->parsed()) {
        const io::ExperimentConfig config = resolve_config(design_args);
        const beamform::Scheme scheme = parse_scheme(design_scheme);
        const int n_cv = scheme == beamform::Scheme::constant       ? 1
                         : scheme == beamform::Scheme::orthonormal3 ? 3
                                                                    : design_n_cv;
        const auto location =
            SphericalLocation::from_degrees(design_r, design_theta, design_phi);
        const beamform::CurrentSet set =
            beamform::design_set(location, n_cv, scheme, config.design_params(), config.seed);

        ensure_out_dir(design_args.out_dir);
        const std::string file_name =
            design_out_file.empty() ? io::SchemeSpec{scheme, n_cv}.name() + ".currentset.json"
                                    : design_out_file;
        const std::string set_path = joined(design_args.out_dir, file_name);
        io::save_current_set(set, set_path);

        const std::string params =
            std::string("{\"scheme\": \"") + design_scheme +
            "\", \"n_cv\": " + std::to_string(n_cv) +
            ", \"r_m\": " + io::format_double(design_r) +
            ", \"theta_deg\": " + io::format_double(design_theta) +
            ", \"phi_deg\": " + io::format_double(design_phi) + "}";
        io::write_text_atomic(set_path + ".manifest.json",
                              generic_manifest("design", config, params, {file_name}));
        std::printf("wrote %s (%d vectors)\n", set_path.c_str(), set.n_cv);
        return 0;
    }

    if (trace->parsed()) {
        const io::ExperimentConfig config = resolve_config(trace_args);
        const beamform::CurrentSet set = io::load_current_set(trace_set_path);
        const sim::ChargingPolicy policy{set, config.cycle_seconds};
        const sim::ReceiverSample receiver{
            SphericalLocation::from_degrees(trace_r, trace_theta, trace_phi),
            Orientation::from_degrees(trace_rx_theta, trace_rx_phi), config.rx_coil()};
        const auto points =
            sim::voltage_trace(policy, receiver, config.tx_coil(), config.medium());

        ensure_out_dir(trace_args.out_dir);
        const std::string csv_path = joined(trace_args.out_dir, trace_out_file);
        io::write_text_atomic(csv_path, io::trace_csv_string(points, config.v_th_v));
        const std::string params = std::string("{\"set\": \"") + trace_set_path +
                                   "\", \"r_m\": " + io::format_double(trace_r) +
                                   ", \"theta_deg\": " + io::format_double(trace_theta) +
                                   ", \"phi_deg\": " + io::format_double(trace_phi) +
                                   ", \"rx_theta_deg\": " + io::format_double(trace_rx_theta) +
                                   ", \"rx_phi_deg\": " + io::format_double(trace_rx_phi) + "}";
        io::write_text_atomic(csv_path + ".manifest.json",
                              generic_manifest("trace", config, params, {trace_out_file}));
        std::printf("wrote %s (%zu segments)\n", csv_path.c_str(), points.size());
        return 0;
    }

    if (mc->parsed()) {
        io::McExperiment experiment;
        if (!mc_from_manifest.empty()) {
            experiment = io::mc_experiment_from_manifest(mc_from_manifest);
        } else {
            experiment.config = resolve_config(mc_args);
            experiment.mode = mc_mode;
            experiment.distances =
                mc_r ? std::vector<double>{*mc_r} : experiment.config.distances_m;
            experiment.theta_deg = mc_theta;
            experiment.phi_deg = mc_phi;
            experiment.set_paths = mc_set_paths;
            if (mc_samples) experiment.config.mc_samples = *mc_samples;
        }
        if (mc_args.seed) experiment.config.seed = *mc_args.seed;
        if (mc_args.threads) experiment.config.threads = *mc_args.threads;

        const auto results = io::run_mc_experiment(experiment);

        ensure_out_dir(mc_args.out_dir);
        const std::string csv_path = joined(mc_args.out_dir, mc_out_file);
        io::write_text_atomic(csv_path, io::mc_csv_string(results));
        io::write_text_atomic(joined(mc_args.out_dir, mc_out_file + ".manifest.json"),
                              io::mc_manifest_string(experiment, {mc_out_file}));
        for (const auto& result : results)
            std::printf("%-14s zero_probability=%.4f q50=%.6g J\n", result.policy.c_str(),
                        result.cdf.zero_probability, result.cdf.quantiles.at(0.50));
        std::printf("wrote %s\n", csv_path.c_str());
        return 0;
    }

    if (sweep->parsed()) {
        const io::ExperimentConfig config = resolve_config(sweep_args);
        std::vector<double> values = sweep_values;
        if (values.empty() && sweep_variable == "distance") values = config.distances_m;
        if (values.empty() && sweep_variable == "n_cv") values = {4.0, 8.0, 36.0, 100.0};
        if (sweep_variable != "distance" && sweep_variable != "n_cv")
            throw io::ConfigError("sweep: --variable must be 'distance' or 'n_cv'");
        if (values.size() < 2) throw io::ConfigError("sweep: need at least 2 sweep points");

        std::vector<io::SweepRow> rows;
        for (const double value : values) {
            io::McExperiment experiment;
            experiment.config = config;
            experiment.mode = sweep_mode;
            if (sweep_variable == "distance") {
                experiment.distances = {value};
            } else {
                experiment.distances = {sweep_r};
                experiment.config.schemes = {
                    io::SchemeSpec{beamform::Scheme::grid, static_cast<int>(value)}};
            }
            for (const auto& result : io::run_mc_experiment(experiment))
                rows.push_back({sweep_variable, value, result.policy,
                                result.cdf.zero_probability,
                                result.cdf.quantiles.at(0.50)});
        }

        ensure_out_dir(sweep_args.out_dir);
        const std::string csv_path = joined(sweep_args.out_dir, sweep_out_file);
        io::write_text_atomic(csv_path, io::sweep_csv_string(rows));
        const std::string params = std::string("{\"variable\": \"") + sweep_variable +
                                   "\", \"mode\": \"" + sweep_mode + "\"}";
        io::write_text_atomic(csv_path + ".manifest.json",
                              generic_manifest("sweep", config, params, {sweep_out_file}));
        std::printf("wrote %s (%zu rows)\n", csv_path.c_str(), rows.size());
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const io::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const io::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
