// caginalp: command-line laboratory for the coupled thermal phase-field
// system.  Subcommands: solve, check-hypotheses, verify, plotdata.
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 acceptance failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "caginalp/run_config.hpp"
#include "caginalp/verification.hpp"
#include "json.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("CAGINALP_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "0" || v == "quiet") return 0;
    if (v == "2" || v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[caginalp] " << msg << '\n';
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> method;
    std::optional<std::string> out_dir;
    std::optional<uint64_t> seed;
    bool allow_unverified = false;
};

caginalp::RunConfig load_config(const CommonFlags& flags) {
    caginalp::RunConfig cfg = flags.config_path.empty()
                                  ? caginalp::RunConfig{}
                                  : caginalp::RunConfig::load(flags.config_path);
    // flags override file values
    if (flags.method) cfg.method = *flags.method;
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.allow_unverified) cfg.allow_unverified_exponents = true;
    cfg.validate();
    return cfg;
}

int cmd_solve(const CommonFlags& flags) {
    caginalp::RunConfig cfg = load_config(flags);
    caginalp::SystemConfig sys = cfg.to_system_config();
    log_info("solving with method=" + cfg.method + " on " + std::to_string(cfg.nodes_x) +
             " nodes, " + std::to_string(cfg.steps) + " steps");
    caginalp::SolutionPair pair = caginalp::solve_system(sys, cfg.coupled_method());
    if (!pair.ledger.converged) {
        std::cerr << "solver failed: " << pair.ledger.failure_reason << '\n';
        return 3;
    }
    caginalp::RunArtifacts art = caginalp::persist_run(cfg.out_dir, cfg, pair);
    log_info("wrote " + art.manifest_path);
    std::cout << art.manifest_path << '\n';
    return 0;
}

int cmd_check_hypotheses(const CommonFlags& flags) {
    caginalp::RunConfig cfg = load_config(flags);
    caginalp::NonlinearityDescriptor F = cfg.make_nonlinearity();
    auto reports = caginalp::check_hypotheses(F, cfg.box, cfg.samples, cfg.p, cfg.dim);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());

    // The power-law built-ins also get the (M4) counterexample search.
    if (cfg.nonlinearity == "power_law") {
        caginalp::M4Params params;
        params.p = cfg.p;
        params.r = cfg.nl_param1 + 1.0;
        params.r1 = cfg.nl_param1;
        params.r2 = cfg.nl_param2;
        auto m4 = caginalp::check_M4_violation(F, params, std::max(10.0, cfg.box));
        nlohmann::json j = m4.to_json();
        j["hypothesis"] = "M4";
        j["verdict"] = m4.witness ? "fail" : "inconclusive";
        arr.push_back(j);
    }
    nlohmann::json out{{"nonlinearity", cfg.nonlinearity}, {"reports", arr}};
    if (flags.out_dir) {
        std::filesystem::create_directories(*flags.out_dir);
        caginalp::write_file_atomic(*flags.out_dir + "/hypotheses.json", out.dump(2) + "\n");
        log_info("wrote " + *flags.out_dir + "/hypotheses.json");
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_verify(const CommonFlags& flags, const std::vector<int>& criteria) {
    caginalp::SuiteOptions opts;
    if (flags.seed) opts.seed = *flags.seed;
    if (!criteria.empty()) opts.criteria = criteria;
    opts.verbose = log_level() >= 1;
    caginalp::SuiteReport report = caginalp::run_acceptance_suite(opts);
    if (flags.out_dir) {
        std::filesystem::create_directories(*flags.out_dir);
        caginalp::write_file_atomic(*flags.out_dir + "/acceptance.json",
                                    report.to_json().dump(2) + "\n");
        log_info("wrote " + *flags.out_dir + "/acceptance.json");
    } else {
        std::cout << report.to_json().dump(2) << '\n';
    }
    return report.all_pass ? 0 : 4;
}

int cmd_plotdata(const std::string& run_dir) {
    caginalp::PlotData out = caginalp::emit_plot_data(run_dir);
    log_info("wrote " + out.frames_csv_path + " and " + out.residuals_csv_path);
    std::cout << out.frames_csv_path << '\n' << out.residuals_csv_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for the coupled thermal phase-field system"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string run_dir;
    std::vector<int> criteria;

    auto add_common = [&flags](CLI::App* sub, bool with_config = true) {
        if (with_config) sub->add_option("--config", flags.config_path, "JSON config path");
        sub->add_option("--method", [&flags](const std::vector<std::string>& v) {
            flags.method = v.front();
            return true;
        }, "Override solver method (homotopy|stepping)");
        sub->add_option("--out", [&flags](const std::vector<std::string>& v) {
            flags.out_dir = v.front();
            return true;
        }, "Output directory");
        sub->add_option("--seed", [&flags](const std::vector<std::string>& v) {
            flags.seed = std::stoull(v.front());
            return true;
        }, "Seed for randomized corpus elements");
        sub->add_flag("--allow-unverified-exponents", flags.allow_unverified,
                      "Skip the exponent admissibility gate");
    };

    CLI::App* solve = app.add_subcommand("solve", "Solve the coupled system and persist the run");
    add_common(solve);
    CLI::App* hyp = app.add_subcommand("check-hypotheses",
                                       "Estimate the nonlinearity hypothesis constants");
    add_common(hyp);
    CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
    add_common(verify);
    verify->add_option("--criterion", criteria, "Restrict to specific criteria (1..10)");
    CLI::App* plot = app.add_subcommand("plotdata", "Emit plot-ready CSV time series for a run");
    plot->add_option("run_dir", run_dir, "Run directory written by solve")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(flags);
        if (hyp->parsed()) return cmd_check_hypotheses(flags);
        if (verify->parsed()) return cmd_verify(flags, criteria);
        if (plot->parsed()) return cmd_plotdata(run_dir);
    } catch (const caginalp::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return 2;
    } catch (const caginalp::SolverError& ex) {
        std::cerr << "solver failure: " << ex.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 3;
    }
    return 0;
}
