// Solver for the coupled system
//     u_t + l phi_t = Laplace(u) + f,
//     phi_t = Laplace(phi) + F(x,t,phi) + u,
// with homogeneous Neumann data, via (a) the outer homotopy operator
// g -> u (inner semilinear solve for phi, then a linear heat solve whose
// latent-heat term enters as the exact per-step increment -l (phi_{k+1} -
// phi_k)) iterated by damped Picard with lambda continuation, and (b) a
// production coupled semi-implicit stepper.  Uniqueness, conservation and
// main-estimate monitors included.

#ifndef CAGINALP_COUPLED_SOLVER_HPP
#define CAGINALP_COUPLED_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "caginalp/phase_solver.hpp"
#include "json.hpp"

namespace caginalp {

struct SystemConfig {
    double latent_heat = 1.0;  // l > 0
    Trajectory heat_source;    // f, sampled at the time nodes
    Field u0;
    Field phi0;
    // Manufactured source in the phase equation; verification only,
    // defaults to absent and is flagged in outputs.
    std::optional<Trajectory> phase_source;
    double p = 2.0;  // >= 2
    double r = 3.0;
    NonlinearityDescriptor nonlinearity;
    FixedPointConfig fixed_point;
    ThetaScheme scheme;

    void validate() const;
    GridPtr grid() const { return heat_source.grid(); }
    double dt() const { return heat_source.dt(); }
    int steps() const { return heat_source.steps(); }
};

enum class CoupledMethod { homotopy, stepping };
const char* to_string(CoupledMethod m);

struct OuterRecord {
    double lambda;
    int iter;
    double residual;
    double damping;
};

struct CoupledLedger {
    std::vector<OuterRecord> outer;
    AprioriLedger inner_last;     // ledger of the final inner phase solve
    bool converged = false;
    std::string failure_reason;
    std::string method;
    double residual = 0.0;        // final outer residual (homotopy only)
    double rho_sup_norm_u = 0.0;  // sup over iterates of ||u||_{L^p(Q)}
    double p13_ratio = 0.0;       // ||u||_p,Q / (1 + ||u0|| + ||phi0|| + ||f||)
    int total_iterations = 0;

    nlohmann::json to_json() const;
};

struct SolutionPair {
    Trajectory u;
    Trajectory phi;
    CoupledLedger ledger;
};

/// Outer homotopy operator: solves the auxiliary problem with source g for
/// phi, then u_t - Laplace(u) = lambda (-l phi_t + f) with u(0) = lambda u0.
/// Inner non-convergence is thrown with context.
Trajectory apply_outer_L(const Trajectory& g, double lambda, const SystemConfig& cfg);

/// Solves the full system.  The homotopy method iterates g -> L(g,lambda)
/// in the discrete L^p(Q) norm along the lambda schedule; the stepping
/// method advances both equations once per step (phase equation with u
/// frozen, then the heat equation with the new phi increment).
SolutionPair solve_system(const SystemConfig& cfg,
                          CoupledMethod method = CoupledMethod::stepping,
                          const std::optional<Trajectory>& initial_outer_iterate = std::nullopt);

struct UniquenessReport {
    double dist_u_l2q = 0.0;
    double dist_phi_l2q = 0.0;
    double tolerance = 0.0;  // 10 x outer residual tolerance
    bool pass = false;
    bool conclusive = false;  // false when either solve failed
    nlohmann::json to_json() const;
};

/// Solves twice with different outer initial iterates (zero vs seeded
/// bounded random) by direct lambda = 1 iteration and checks that the
/// solution pairs coincide.
UniquenessReport check_uniqueness(const SystemConfig& cfg, uint64_t seed = 7);

struct ConservationReport {
    std::vector<double> series;  // mean(u_k) + l mean(phi_k) per frame
    double max_drift_rel = 0.0;
    bool pass = false;
    nlohmann::json to_json() const;
};

/// With f == 0 and zero-flux boundaries, int(u + l phi) is conserved; the
/// check is quantitative: max relative deviation from frame 0 below 1e-8.
ConservationReport check_conservation(const SolutionPair& pair, const SystemConfig& cfg);

struct MainEstimateEntry {
    double solution_norm = 0.0;  // W21p surrogates of u and phi, summed
    double data_norm = 0.0;      // 1 + ||phi0|| + ||u0|| + ||f||
    double ratio = 0.0;
    bool applicable = false;
    nlohmann::json to_json() const;
};

/// Empirical constant of the main estimate: solution norm over data norm in
/// the discrete surrogates.
MainEstimateEntry measure_main_estimate(const SolutionPair& pair, const SystemConfig& cfg);

}  // namespace caginalp

#endif
