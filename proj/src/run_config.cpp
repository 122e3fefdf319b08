#include "caginalp/run_config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "caginalp/verification.hpp"

namespace caginalp {

namespace fs = std::filesystem;

namespace {

const nlohmann::json& section(const nlohmann::json& doc, const char* name,
                              const nlohmann::json& fallback) {
    auto it = doc.find(name);
    return it == doc.end() ? fallback : *it;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    static const nlohmann::json empty = nlohmann::json::object();
    RunConfig c;
    try {
        const auto& grid = section(doc, "grid", empty);
        c.dim = grid.value("dim", c.dim);
        c.nodes_x = grid.value("nodes_x", c.nodes_x);
        c.nodes_y = grid.value("nodes_y", c.nodes_y);
        c.len_x = grid.value("len_x", c.len_x);
        c.len_y = grid.value("len_y", c.len_y);

        const auto& time = section(doc, "time", empty);
        c.dt = time.value("dt", c.dt);
        c.steps = time.value("steps", c.steps);

        const auto& phys = section(doc, "physics", empty);
        c.latent_heat = phys.value("latent_heat", c.latent_heat);
        c.p = phys.value("p", c.p);
        const auto& hs = section(phys, "heat_source", empty);
        c.heat_source_kind = hs.value("kind", c.heat_source_kind);
        c.heat_source_value = hs.value("value", c.heat_source_value);
        c.heat_source_mode = hs.value("mode", c.heat_source_mode);

        const auto& nl = section(doc, "nonlinearity", empty);
        c.nonlinearity = nl.value("name", c.nonlinearity);
        c.nl_param1 = nl.value("param1", c.nl_param1);
        c.nl_param2 = nl.value("param2", c.nl_param2);
        double default_r = 3.0;
        if (c.nonlinearity == "zero" || c.nonlinearity == "linear") default_r = 1.0;
        if (c.nonlinearity == "power_law") default_r = std::max(c.nl_param1, 1.0);
        c.r = nl.value("r", default_r);

        const auto& init = section(doc, "initial", empty);
        const auto& u0 = section(init, "u0", empty);
        c.u0_kind = u0.value("kind", c.u0_kind);
        c.u0_value = u0.value("value", c.u0_value);
        c.u0_amplitude = u0.value("amplitude", c.u0_amplitude);
        c.u0_mode = u0.value("mode", c.u0_mode);
        const auto& phi0 = section(init, "phi0", empty);
        c.phi0_kind = phi0.value("kind", c.phi0_kind);
        c.phi0_value = phi0.value("value", c.phi0_value);
        c.phi0_amplitude = phi0.value("amplitude", c.phi0_amplitude);
        c.phi0_mode = phi0.value("mode", c.phi0_mode);

        const auto& solver = section(doc, "solver", empty);
        c.theta = solver.value("theta", c.theta);
        c.residual_tol = solver.value("residual_tol", c.residual_tol);
        c.max_outer_iters = solver.value("max_outer_iters", c.max_outer_iters);
        c.method = solver.value("method", c.method);

        const auto& hyp = section(doc, "hypotheses", empty);
        c.box = hyp.value("box", c.box);
        c.samples = hyp.value("samples", c.samples);

        const auto& output = section(doc, "output", empty);
        c.out_dir = output.value("dir", c.out_dir);
        c.seed = doc.value("seed", c.seed);
        c.allow_unverified_exponents =
            doc.value("allow_unverified_exponents", c.allow_unverified_exponents);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config parse error: ") + ex.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    return from_json(doc);
}

void RunConfig::validate() const {
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim must be 1 or 2");
    if (nodes_x < 3 || (dim == 2 && nodes_y < 3))
        throw ConfigError("grid needs at least 3 nodes per axis");
    if (!(len_x > 0.0) || (dim == 2 && !(len_y > 0.0)))
        throw ConfigError("grid extents must be positive");
    if (!(dt > 0.0) || steps < 1) throw ConfigError("time.dt must be > 0 and steps >= 1");
    if (!(latent_heat > 0.0)) throw ConfigError("physics.latent_heat must be positive");
    if (!(p >= 2.0)) throw ConfigError("physics.p must be >= 2");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("solver.theta must lie in [0,1]");
    if (!(residual_tol > 0.0)) throw ConfigError("solver.residual_tol must be positive");
    if (method != "stepping" && method != "homotopy")
        throw ConfigError("solver.method must be 'stepping' or 'homotopy'");
    for (const std::string& kind : {u0_kind, phi0_kind})
        if (kind != "constant" && kind != "cosine" && kind != "random")
            throw ConfigError("initial profile kind must be constant, cosine or random");
    if (heat_source_kind != "zero" && heat_source_kind != "constant" &&
        heat_source_kind != "cosine")
        throw ConfigError("heat_source.kind must be zero, constant or cosine");
    make_nonlinearity();  // throws on unknown name / bad parameters
    if (!allow_unverified_exponents && !validate_H3(p, dim, r)) {
        std::ostringstream msg;
        msg << "exponents not admissible: p = " << p << ", N = " << dim << ", r = " << r
            << " (pass --allow-unverified-exponents to override)";
        throw ConfigError(msg.str());
    }
}

nlohmann::json RunConfig::semantic_json() const {
    return nlohmann::json{
        {"grid", {{"dim", dim}, {"nodes_x", nodes_x}, {"nodes_y", nodes_y},
                  {"len_x", len_x}, {"len_y", len_y}}},
        {"time", {{"dt", dt}, {"steps", steps}}},
        {"physics",
         {{"latent_heat", latent_heat},
          {"p", p},
          {"heat_source", {{"kind", heat_source_kind}, {"value", heat_source_value},
                           {"mode", heat_source_mode}}}}},
        {"nonlinearity", {{"name", nonlinearity}, {"param1", nl_param1},
                          {"param2", nl_param2}, {"r", r}}},
        {"initial",
         {{"u0", {{"kind", u0_kind}, {"value", u0_value}, {"amplitude", u0_amplitude},
                  {"mode", u0_mode}}},
          {"phi0", {{"kind", phi0_kind}, {"value", phi0_value},
                    {"amplitude", phi0_amplitude}, {"mode", phi0_mode}}}}},
        {"solver", {{"theta", theta}, {"residual_tol", residual_tol},
                    {"max_outer_iters", max_outer_iters}, {"method", method}}},
        {"hypotheses", {{"box", box}, {"samples", samples}}},
        {"seed", seed}};
}

uint64_t RunConfig::config_hash() const {
    const std::string dump = semantic_json().dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

NonlinearityDescriptor RunConfig::make_nonlinearity() const {
    NonlinearityDescriptor d;
    if (nonlinearity == "zero") {
        d = builtin_zero();
    } else if (nonlinearity == "linear") {
        d = builtin_linear(nl_param1);
    } else if (nonlinearity == "double_well") {
        d = builtin_double_well();
    } else if (nonlinearity == "power_law") {
        try {
            d = builtin_power_law(nl_param1, nl_param2);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    } else if (nonlinearity == "hoffman_jiang") {
        d = builtin_hoffman_jiang(nl_param1, nl_param2);
    } else {
        throw ConfigError("unknown nonlinearity: " + nonlinearity);
    }
    d.growth_exponent_r = r;
    return d;
}

namespace {

Field make_profile(const GridPtr& grid, const std::string& kind, double value,
                   double amplitude, int mode, uint64_t seed) {
    if (kind == "constant") return Field(grid, value);
    if (kind == "cosine") {
        Field f(grid);
        for (int i = 0; i < f.size(); ++i)
            f[i] = amplitude * std::cos(mode * M_PI * grid->x_of(i) / grid->extent(0)) + value;
        return f;
    }
    Field f = random_smooth_field(grid, amplitude, seed);
    for (int i = 0; i < f.size(); ++i) f[i] += value;
    return f;
}

}  // namespace

SystemConfig RunConfig::to_system_config() const {
    const GridPtr grid = dim == 1 ? Grid::interval(len_x, nodes_x)
                                  : Grid::rectangle(len_x, len_y, nodes_x, nodes_y);
    SystemConfig cfg;
    cfg.latent_heat = latent_heat;
    if (heat_source_kind == "zero") {
        cfg.heat_source = Trajectory(grid, dt, steps, 0.0);
    } else {
        Field shape = make_profile(grid, heat_source_kind == "constant" ? "constant" : "cosine",
                                   heat_source_kind == "constant" ? heat_source_value : 0.0,
                                   heat_source_value, heat_source_mode, seed);
        std::vector<Field> frames(steps + 1, shape);
        cfg.heat_source = Trajectory(grid, dt, std::move(frames));
    }
    cfg.u0 = make_profile(grid, u0_kind, u0_value, u0_amplitude, u0_mode, seed + 1);
    cfg.phi0 = make_profile(grid, phi0_kind, phi0_value, phi0_amplitude, phi0_mode, seed + 2);
    cfg.p = p;
    cfg.r = r;
    cfg.nonlinearity = make_nonlinearity();
    cfg.fixed_point.p = p;
    cfg.fixed_point.r = r;
    cfg.fixed_point.residual_tol = residual_tol;
    cfg.fixed_point.max_outer_iters = max_outer_iters;
    cfg.scheme.theta = theta;
    return cfg;
}

CoupledMethod RunConfig::coupled_method() const {
    return method == "homotopy" ? CoupledMethod::homotopy : CoupledMethod::stepping;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open for writing: " + tmp);
        os << content;
        if (!os) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

RunArtifacts persist_run(const std::string& out_dir, const RunConfig& cfg,
                         const SolutionPair& pair) {
    fs::create_directories(out_dir);
    RunArtifacts art;
    art.manifest_path = out_dir + "/manifest.json";
    art.u_csv_path = out_dir + "/u.csv";
    art.phi_csv_path = out_dir + "/phi.csv";
    if (fs::exists(art.manifest_path))
        throw ConfigError("output directory already holds a run manifest: " +
                          art.manifest_path);

    std::ostringstream u_csv, phi_csv;
    write_csv(u_csv, pair.u);
    write_csv(phi_csv, pair.phi);
    write_file_atomic(art.u_csv_path, u_csv.str());
    write_file_atomic(art.phi_csv_path, phi_csv.str());

    std::ostringstream hash_hex;
    hash_hex << std::hex << std::setw(16) << std::setfill('0') << cfg.config_hash();
    nlohmann::json manifest{
        {"config_hash", hash_hex.str()},
        {"config", cfg.semantic_json()},
        {"method", pair.ledger.method},
        {"iterations", pair.ledger.total_iterations},
        {"residual", pair.ledger.residual},
        {"converged", pair.ledger.converged},
        {"ledgers", pair.ledger.to_json()},
        {"latent_heat", cfg.latent_heat},
        {"phase_source_present", false},
        {"norms", {{"u_l2q", norm_lp_q(pair.u, 2.0)}, {"phi_l2q", norm_lp_q(pair.phi, 2.0)}}},
        {"files", {{"u", "u.csv"}, {"phi", "phi.csv"}, {"format", "t,x[,y],value"}}}};
    write_file_atomic(art.manifest_path, manifest.dump(2) + "\n");
    return art;
}

PlotData emit_plot_data(const std::string& run_dir) {
    const std::string manifest_path = run_dir + "/manifest.json";
    std::ifstream ms(manifest_path);
    if (!ms) throw ConfigError("no run manifest at " + manifest_path);
    nlohmann::json manifest;
    try {
        ms >> manifest;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + ex.what());
    }
    const double l = manifest.value("latent_heat", 1.0);

    Trajectory u = read_trajectory_csv_file(run_dir + "/u.csv");
    Trajectory phi = read_trajectory_csv_file(run_dir + "/phi.csv");

    PlotData out;
    out.norm_u_l2q = norm_lp_q(u, 2.0);
    out.norm_phi_l2q = norm_lp_q(phi, 2.0);

    std::ostringstream frames;
    frames << std::setprecision(std::numeric_limits<double>::max_digits10);
    frames << "t,l2_u,l2_phi,mean_u,mean_phi,conserved,drift\n";
    const double m0 = mean(u.frame(0)) + l * mean(phi.frame(0));
    for (int k = 0; k <= u.steps(); ++k) {
        const double mu = mean(u.frame(k));
        const double mp = mean(phi.frame(k));
        frames << u.time_of(k) << ',' << norm_lp_omega(u.frame(k), 2.0) << ','
               << norm_lp_omega(phi.frame(k), 2.0) << ',' << mu << ',' << mp << ','
               << (mu + l * mp) << ',' << (mu + l * mp - m0) << '\n';
    }
    out.frames_csv_path = run_dir + "/frames.csv";
    write_file_atomic(out.frames_csv_path, frames.str());

    std::ostringstream residuals;
    residuals << std::setprecision(std::numeric_limits<double>::max_digits10);
    residuals << "lambda,iter,residual,damping\n";
    if (manifest.contains("ledgers") && manifest["ledgers"].contains("outer"))
        for (const auto& row : manifest["ledgers"]["outer"])
            residuals << row.value("lambda", 0.0) << ',' << row.value("iter", 0) << ','
                      << row.value("residual", 0.0) << ',' << row.value("damping", 0.0)
                      << '\n';
    out.residuals_csv_path = run_dir + "/residuals.csv";
    write_file_atomic(out.residuals_csv_path, residuals.str());
    return out;
}

}  // namespace caginalp
