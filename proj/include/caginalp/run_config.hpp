// Structured run configuration (JSON tree with sections grid / time /
// physics / nonlinearity / solver / output), validation against the
// admissibility constraints, a content hash over the semantically meaningful
// fields, and run persistence (trajectory CSVs plus a JSON manifest).

#ifndef CAGINALP_RUN_CONFIG_HPP
#define CAGINALP_RUN_CONFIG_HPP

#include <cstdint>
#include <string>

#include "caginalp/coupled_solver.hpp"
#include "json.hpp"

namespace caginalp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // grid
    int dim = 1;
    int nodes_x = 41, nodes_y = 3;
    double len_x = 1.0, len_y = 1.0;
    // time
    double dt = 1e-3;
    int steps = 1000;
    // physics
    double latent_heat = 1.0;
    double p = 2.0;
    std::string heat_source_kind = "zero";  // zero | constant | cosine
    double heat_source_value = 0.0;
    int heat_source_mode = 1;
    // nonlinearity
    std::string nonlinearity = "double_well";  // zero|linear|double_well|power_law|hoffman_jiang
    double nl_param1 = 0.0, nl_param2 = 0.0;
    double r = 3.0;  // growth exponent used for validation and iteration norms
    // initial data profiles: kind in {constant, cosine, random}
    std::string u0_kind = "constant";
    double u0_value = 0.0, u0_amplitude = 0.0;
    int u0_mode = 1;
    std::string phi0_kind = "constant";
    double phi0_value = 0.0, phi0_amplitude = 0.0;
    int phi0_mode = 1;
    // solver
    double theta = 0.5;
    double residual_tol = 1e-8;
    int max_outer_iters = 300;
    std::string method = "stepping";  // stepping | homotopy
    // hypothesis checking
    double box = 10.0;
    int samples = 400;
    // output / reproducibility
    std::string out_dir = "runs/out";
    uint64_t seed = 42;
    bool allow_unverified_exponents = false;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::string& path);

    /// Enforces p >= 2 and the (p, N, r) exponent admissibility unless
    /// allow_unverified_exponents is set.
    void validate() const;

    /// FNV-1a over the canonical dump of the semantic fields (everything
    /// except output directory, verbosity and the override flag).
    uint64_t config_hash() const;
    nlohmann::json semantic_json() const;

    NonlinearityDescriptor make_nonlinearity() const;
    SystemConfig to_system_config() const;
    CoupledMethod coupled_method() const;
};

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

struct RunArtifacts {
    std::string manifest_path;
    std::string u_csv_path;
    std::string phi_csv_path;
};

/// Persists a solved pair: u.csv, phi.csv and manifest.json (config hash,
/// method, iterations, residual, ledgers, stored norms for round-trip
/// checks).
RunArtifacts persist_run(const std::string& out_dir, const RunConfig& cfg,
                         const SolutionPair& pair);

/// Re-reads a run directory and emits frames.csv (per-frame norms and
/// conservation drift) and residuals.csv (outer iteration history).
/// Returns the recomputed L2(Q) norms for round-trip verification.
struct PlotData {
    std::string frames_csv_path;
    std::string residuals_csv_path;
    double norm_u_l2q = 0.0;
    double norm_phi_l2q = 0.0;
};
PlotData emit_plot_data(const std::string& run_dir);

}  // namespace caginalp

#endif
