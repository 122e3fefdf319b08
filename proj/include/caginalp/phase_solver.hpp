// Solvers for the auxiliary semilinear problem
//     phi_t - Laplace(phi) = F(x,t,phi) + g,   d(phi)/dnu = 0,
// via the homotopy operator L(w,lambda) (one linear solve with F frozen
// along w) iterated by damped Picard with a lambda-continuation schedule,
// plus a direct semi-implicit stepper and the energy / stability monitors.

#ifndef CAGINALP_PHASE_SOLVER_HPP
#define CAGINALP_PHASE_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "caginalp/linear_parabolic.hpp"
#include "caginalp/mesh.hpp"
#include "caginalp/nonlinearity.hpp"
#include "json.hpp"

namespace caginalp {

struct FixedPointConfig {
    std::vector<double> lambda_schedule{0.0, 0.25, 0.5, 0.75, 1.0};
    double damping = 1.0;       // omega in (0,1], halved on residual increase
    double residual_tol = 1e-8; // in the discrete L^{pr}(Q) iteration norm
    int max_outer_iters = 200;  // per lambda
    double p = 2.0;
    double r = 3.0;

    double iteration_exponent() const { return p * r; }
    void validate() const;
};

struct IterationRecord {
    double lambda;
    int iter;
    double residual;
    double damping;
};

struct AprioriLedger {
    std::vector<IterationRecord> iterations;
    bool converged = false;
    std::string failure_reason;
    double norm_phi_lpr = 0.0;   // ||phi||_{L^{pr}(Q)} of the returned iterate
    double data_norm = 0.0;      // 1 + ||phi0|| + ||g||  (surrogate data size)
    double rho_ratio = 0.0;      // norm_phi_lpr / data_norm

    nlohmann::json to_json() const;
};

/// Homotopy operator: returns the solution of
///     phi_t - Laplace(phi) = lambda (F(x,t,w) + g),  phi(0) = phi0,
/// with F evaluated frame-by-frame along the frozen iterate w.
/// At lambda = 0 the result is the pure heat flow of phi0, independent of w.
Trajectory apply_L(const Trajectory& w, double lambda, const Trajectory& g, const Field& phi0,
                   const NonlinearityDescriptor& F, const ThetaScheme& scheme);

struct PhaseSolveResult {
    Trajectory phi;
    AprioriLedger ledger;
};

/// Damped Picard iteration w <- (1-omega) w + omega L(w,lambda) along the
/// lambda schedule, warm-starting each stage from the previous one.
/// Non-convergence is reported through the ledger, not thrown.
PhaseSolveResult solve_auxiliary_fixed_point(
    const Trajectory& g, const Field& phi0, const NonlinearityDescriptor& F,
    const FixedPointConfig& cfg, const ThetaScheme& scheme,
    const std::optional<Trajectory>& initial_iterate = std::nullopt);

/// Single-lambda damped Picard (no continuation); building block of the
/// schedule loop, also used for warm-started inner solves and the
/// uniqueness surrogate.
PhaseSolveResult solve_phase_picard(const Trajectory& g, const Field& phi0,
                                    const NonlinearityDescriptor& F, double lambda,
                                    const FixedPointConfig& cfg, const ThetaScheme& scheme,
                                    const Trajectory& initial_iterate);

/// Production path: Laplacian implicit via the theta scheme, F explicit at
/// the old frame.  Throws SolverError if the explicit F evaluation exceeds
/// the blow-up guard (1e12).
Trajectory solve_auxiliary_stepping(const Trajectory& g, const Field& phi0,
                                    const NonlinearityDescriptor& F, const ThetaScheme& scheme);

// ---------------------------------------------------------------------------
// Monitors
// ---------------------------------------------------------------------------

struct EnergyEntry {
    std::vector<double> lhs;   // 1/2 ||phi(t)||_2^2 + int_{Q_t} |grad phi|^2, per frame
    double rhs = 0.0;          // C0 (1 + ||phi0||_2^2 + ||g||_{2,Q}^2)
    double d0_used = 0.0;
    double gronwall_c0 = 0.0;  // exp(2 d0 T) (1 + d0 T)
    double worst_margin = 0.0; // min over frames of rhs - lhs
    int worst_frame = 0;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Checks the discrete energy inequality with the Gronwall constant
/// assembled from the sampled d0 of estimate_d0.
EnergyEntry measure_energy_inequality(const Trajectory& phi, const Trajectory& g,
                                      const Field& phi0, const NonlinearityDescriptor& F);

struct StabilityEntry {
    double solution_diff = 0.0;  // ||phi_a - phi_b||_{L^p(Q)}
    double data_diff = 0.0;      // ||phi0_a - phi0_b||_p + ||g_a - g_b||_{p,Q}
    double ratio = 0.0;
    bool applicable = false;     // false when the data difference < 1e-14
    bool solves_converged = false;

    nlohmann::json to_json() const;
};

/// Solves both problems and records the continuous-dependence ratio.
StabilityEntry measure_stability(const Field& phi0_a, const Trajectory& g_a,
                                 const Field& phi0_b, const Trajectory& g_b,
                                 const NonlinearityDescriptor& F, const FixedPointConfig& cfg,
                                 const ThetaScheme& scheme);

}  // namespace caginalp

#endif
