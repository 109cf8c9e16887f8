// Configuration, serialization and experiment orchestration shared by the
// CLI and the acceptance suite: JSON config with embedded defaults, the
// current-set file format, CSV emitters and reproducible run manifests.
#pragma once

#include "magbb/beamform.hpp"
#include "magbb/chargesim.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace magbb::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Raised for malformed config / current-set documents; the message names
/// the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal representation, locale-independent.
std::string format_double(double value);

struct SchemeSpec {
    beamform::Scheme kind = beamform::Scheme::grid;
    int n_cv = 36;

    std::string name() const;  // constant | orthonormal3 | grid-<n>
};

struct LocationSpec {
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    std::string label;
};

/// Experiment parameters with the reference defaults baked in, so a bare
/// `magbb mc` run reproduces the standard charging scenario. Keys in the
/// JSON form carry units (p_max_w, v_th_v, theta_deg, ...).
struct ExperimentConfig {
    double permittivity_vacuum_f_per_m = 8.85e-12;
    double relative_permittivity = 1.0006;
    double permeability_vacuum_h_per_m = 1.2566e-6;
    double relative_permeability = 1.0;
    double frequency_hz = 13.56e6;

    double tx_radius_m = 0.1;
    int tx_turns = 72;
    double tx_resistance_ohm = 1.0;
    double rx_radius_m = 0.01;
    int rx_turns = 10;
    double rx_resistance_ohm = 0.2;

    double p_max_w = 50.0;
    double v_th_v = 0.2;

    std::vector<double> distances_m{0.6, 1.2};
    std::vector<LocationSpec> locations_deg{{180.0, 0.0, "optimized"},
                                            {0.021, 108.84, "random1"},
                                            {33.53, 124.4, "random2"}};
    std::vector<SchemeSpec> schemes{{beamform::Scheme::constant, 1},
                                    {beamform::Scheme::orthonormal3, 3},
                                    {beamform::Scheme::grid, 4},
                                    {beamform::Scheme::grid, 8},
                                    {beamform::Scheme::grid, 36},
                                    {beamform::Scheme::grid, 100}};
    double cycle_seconds = 60.0;
    int mc_samples = 10000;
    std::uint64_t seed = 42;
    int threads = 1;

    double sdp_tolerance = 1e-9;
    int sdp_max_iterations = 500;
    double voltage_margin = 0.0;

    Medium medium() const;
    CoilSpec tx_coil() const;
    CoilSpec rx_coil() const;
    beamform::DesignParams design_params() const;
    sim::McParams mc_params() const;
    void check() const;  // throws ConfigError on invalid values
};

std::string config_to_json_string(const ExperimentConfig& config);
ExperimentConfig config_from_json_string(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Current-set document: {scheme, n_cv, seed, design_location{r_m,
/// theta_deg, phi_deg}, vectors[{target{theta_deg, phi_deg}, i_re, i_im,
/// diagnostics}]}. Angles in files are degrees.
std::string current_set_to_json_string(const beamform::CurrentSet& set);
beamform::CurrentSet current_set_from_json_string(const std::string& text);
void save_current_set(const beamform::CurrentSet& set, const std::string& path);
beamform::CurrentSet load_current_set(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// --- CSV emitters ---------------------------------------------------------

std::string trace_csv_string(const std::vector<sim::TracePoint>& trace, double v_th);

struct PolicyResult {
    std::string policy;
    sim::EnergyCdf cdf;
};

std::string mc_csv_string(const std::vector<PolicyResult>& results);

struct SweepRow {
    std::string variable;
    double value = 0.0;
    std::string policy;
    double zero_probability = 0.0;
    double median_energy_j = 0.0;
};

std::string sweep_csv_string(const std::vector<SweepRow>& rows);

// --- Monte Carlo experiment with manifest-backed reruns --------------------

struct McExperiment {
    ExperimentConfig config;
    std::string mode = "fixed";        // fixed | random
    std::vector<double> distances{1.2};  // receiver ranges; one CDF group per
                                         // (policy, range), names suffixed
                                         // "@<r>m" when more than one range
    double theta_deg = 180.0;
    double phi_deg = 0.0;
    std::vector<std::string> set_paths;  // empty: design from config.schemes
};

/// Designs (or loads) the policy sets and runs one Monte Carlo per policy.
std::vector<PolicyResult> run_mc_experiment(const McExperiment& experiment);

/// Manifest document for an mc run; rerunning from it reproduces the CSV
/// byte for byte.
std::string mc_manifest_string(const McExperiment& experiment,
                               const std::vector<std::string>& outputs);
McExperiment mc_experiment_from_manifest(const std::string& path);

}  // namespace magbb::io
