#include "caginalp/coupled_solver.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace caginalp {

void SystemConfig::validate() const {
    if (!(latent_heat > 0.0))
        throw std::invalid_argument("SystemConfig: latent heat must be positive");
    if (!(p >= 2.0)) throw std::invalid_argument("SystemConfig: p must be >= 2");
    if (!(r >= 1.0)) throw std::invalid_argument("SystemConfig: r must be >= 1");
    require_same_grid(u0, heat_source.frame(0), "SystemConfig");
    require_same_grid(phi0, heat_source.frame(0), "SystemConfig");
    if (phase_source) require_same_slab(*phase_source, heat_source, "SystemConfig");
    nonlinearity.validate();
    fixed_point.validate();
    scheme.validate();
}

const char* to_string(CoupledMethod m) {
    return m == CoupledMethod::homotopy ? "homotopy" : "stepping";
}

nlohmann::json CoupledLedger::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& it : outer)
        rows.push_back({{"lambda", it.lambda}, {"iter", it.iter},
                        {"residual", it.residual}, {"damping", it.damping}});
    return nlohmann::json{{"outer", rows},
                          {"inner_last", inner_last.to_json()},
                          {"converged", converged},
                          {"failure_reason", failure_reason},
                          {"method", method},
                          {"residual", residual},
                          {"rho_sup_norm_u", rho_sup_norm_u},
                          {"p13_ratio", p13_ratio},
                          {"total_iterations", total_iterations}};
}

namespace {

// Effective source of the phase equation: g plus the optional manufactured
// term.
Trajectory phase_rhs_source(const Trajectory& g, const SystemConfig& cfg) {
    if (!cfg.phase_source) return g;
    return linear_combination(1.0, g, 1.0, *cfg.phase_source);
}

// Heat solve of (P.6): latent heat enters as the exact per-step increment
// -l (phi_{k+1} - phi_k) so the theta step integrates l phi_t without
// quadrature error; f keeps its theta weighting.
Trajectory heat_solve_from_phase(const Trajectory& phi, double lambda,
                                 const SystemConfig& cfg) {
    const int n = cfg.steps();
    const double dt = cfg.dt();
    const double theta = cfg.scheme.theta;
    std::vector<Field> rhs_steps;
    rhs_steps.reserve(n);
    for (int k = 0; k < n; ++k) {
        Field dphi = linear_combination(1.0 / dt, phi.frame(k + 1), -1.0 / dt, phi.frame(k));
        Field fbar = linear_combination(1.0 - theta, cfg.heat_source.frame(k), theta,
                                        cfg.heat_source.frame(k + 1));
        rhs_steps.push_back(
            linear_combination(-lambda * cfg.latent_heat, dphi, lambda, fbar));
    }
    Field u_init = linear_combination(lambda, cfg.u0, 0.0, cfg.u0);
    return solve_trajectory_steps(u_init, rhs_steps, dt, cfg.scheme);
}

struct OuterApply {
    Trajectory u;
    Trajectory phi;
    AprioriLedger inner_ledger;
};

// One application of the outer operator, optionally warm-starting the inner
// fixed point from a previous phase iterate (pure optimization; the
// converged result is the same within tolerance).
OuterApply apply_outer(const Trajectory& g, double lambda, const SystemConfig& cfg,
                       const std::optional<Trajectory>& warm_phi) {
    Trajectory g_eff = phase_rhs_source(g, cfg);
    PhaseSolveResult inner;
    if (warm_phi) {
        inner = solve_phase_picard(g_eff, cfg.phi0, cfg.nonlinearity, 1.0, cfg.fixed_point,
                                   cfg.scheme, *warm_phi);
        if (!inner.ledger.converged)
            inner = solve_auxiliary_fixed_point(g_eff, cfg.phi0, cfg.nonlinearity,
                                                cfg.fixed_point, cfg.scheme);
    } else {
        inner = solve_auxiliary_fixed_point(g_eff, cfg.phi0, cfg.nonlinearity, cfg.fixed_point,
                                            cfg.scheme);
    }
    if (!inner.ledger.converged)
        throw SolverError("apply_outer_L: inner phase solve failed (" +
                          inner.ledger.failure_reason + ") at outer lambda = " +
                          std::to_string(lambda));
    return {heat_solve_from_phase(inner.phi, lambda, cfg), std::move(inner.phi),
            std::move(inner.ledger)};
}

struct OuterStage {
    Trajectory g;
    std::optional<Trajectory> warm_phi;
    Trajectory last_phi;
    AprioriLedger last_inner;
    bool converged = false;
    std::string failure_reason;
    double residual = 0.0;
};

// Damped Picard on g -> L(g,lambda) at a fixed lambda; retries from the same
// iterate with halved damping when the residual grows.
OuterStage outer_picard(Trajectory g, double lambda, const SystemConfig& cfg,
                        std::optional<Trajectory> warm_phi, CoupledLedger& ledger) {
    OuterStage st{std::move(g), std::move(warm_phi), Trajectory(), {},
                  false, "", 0.0};
    double omega = cfg.fixed_point.damping;
    double prev_residual = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= cfg.fixed_point.max_outer_iters; ++iter) {
        OuterApply ap = apply_outer(st.g, lambda, cfg, st.warm_phi);
        st.warm_phi = ap.phi;
        st.last_phi = std::move(ap.phi);
        st.last_inner = std::move(ap.inner_ledger);
        const double residual =
            norm_lp_q(linear_combination(1.0, ap.u, -1.0, st.g), cfg.p);
        ledger.outer.push_back({lambda, iter, residual, omega});
        ++ledger.total_iterations;
        ledger.rho_sup_norm_u = std::max(ledger.rho_sup_norm_u, norm_lp_q(ap.u, cfg.p));
        if (residual <= cfg.fixed_point.residual_tol) {
            st.g = std::move(ap.u);
            st.converged = true;
            st.residual = residual;
            return st;
        }
        if (residual > prev_residual) {
            omega *= 0.5;
            if (omega < 1e-4) {
                st.failure_reason = "outer damping underflow";
                st.residual = residual;
                return st;
            }
            prev_residual = std::numeric_limits<double>::infinity();
            continue;
        }
        prev_residual = residual;
        st.g = (omega == 1.0) ? std::move(ap.u)
                              : linear_combination(1.0 - omega, st.g, omega, ap.u);
        st.residual = residual;
    }
    std::ostringstream msg;
    msg << "outer iteration: no convergence after " << cfg.fixed_point.max_outer_iters
        << " iterations at lambda = " << lambda;
    st.failure_reason = msg.str();
    return st;
}

void finalize_ledger(SolutionPair& pair, const SystemConfig& cfg) {
    const double data = 1.0 + norm_lp_omega(cfg.u0, cfg.p) + h1_seminorm(cfg.u0) +
                        norm_lp_omega(cfg.phi0, cfg.p) + h1_seminorm(cfg.phi0) +
                        norm_lp_q(cfg.heat_source, cfg.p);
    pair.ledger.p13_ratio = norm_lp_q(pair.u, cfg.p) / data;
}

SolutionPair solve_stepping(const SystemConfig& cfg) {
    const int n = cfg.steps();
    const double dt = cfg.dt();
    const double theta = cfg.scheme.theta;
    const Grid& grid = *cfg.grid();

    std::vector<Field> u_frames{cfg.u0};
    std::vector<Field> phi_frames{cfg.phi0};
    u_frames.reserve(n + 1);
    phi_frames.reserve(n + 1);
    for (int k = 0; k < n; ++k) {
        const Field& u_k = u_frames.back();
        const Field& phi_k = phi_frames.back();
        const double t_k = k * dt;

        // Phase equation, u and F frozen at frame k.
        Field rhs_phi(cfg.grid());
        for (int i = 0; i < rhs_phi.size(); ++i) {
            const double fz = cfg.nonlinearity(grid.x_of(i), grid.y_of(i), t_k, phi_k[i]);
            if (std::abs(fz) > 1e12) {
                std::ostringstream msg;
                msg << "coupled stepping: blow-up guard tripped at step " << k << ", node "
                    << i;
                throw SolverError(msg.str());
            }
            rhs_phi[i] = fz + u_k[i];
            if (cfg.phase_source) rhs_phi[i] += cfg.phase_source->frame(k)[i];
        }
        Field phi_next = theta_step_combined(phi_k, rhs_phi, dt, cfg.scheme);

        // Heat equation with the new phase increment.
        Field dphi = linear_combination(1.0 / dt, phi_next, -1.0 / dt, phi_k);
        Field fbar = linear_combination(1.0 - theta, cfg.heat_source.frame(k), theta,
                                        cfg.heat_source.frame(k + 1));
        Field rhs_u = linear_combination(-cfg.latent_heat, dphi, 1.0, fbar);
        u_frames.push_back(theta_step_combined(u_k, rhs_u, dt, cfg.scheme));
        phi_frames.push_back(std::move(phi_next));
    }

    SolutionPair pair{Trajectory(cfg.grid(), dt, std::move(u_frames)),
                      Trajectory(cfg.grid(), dt, std::move(phi_frames)),
                      {}};
    pair.ledger.converged = true;
    pair.ledger.method = "stepping";
    pair.ledger.total_iterations = n;
    finalize_ledger(pair, cfg);
    return pair;
}

SolutionPair solve_homotopy(const SystemConfig& cfg,
                            const std::optional<Trajectory>& initial_outer_iterate,
                            bool continuation) {
    SolutionPair pair{Trajectory(cfg.grid(), cfg.dt(), cfg.steps(), 0.0),
                      Trajectory(cfg.grid(), cfg.dt(), cfg.steps(), 0.0),
                      {}};
    pair.ledger.method = "homotopy";

    Trajectory g = initial_outer_iterate ? *initial_outer_iterate
                                         : Trajectory(cfg.grid(), cfg.dt(), cfg.steps(), 0.0);
    std::optional<Trajectory> warm_phi;
    std::vector<double> schedule =
        continuation ? cfg.fixed_point.lambda_schedule : std::vector<double>{1.0};
    for (double lambda : schedule) {
        OuterStage st = outer_picard(std::move(g), lambda, cfg, std::move(warm_phi),
                                     pair.ledger);
        g = std::move(st.g);
        warm_phi = std::move(st.warm_phi);
        pair.ledger.converged = st.converged;
        pair.ledger.failure_reason = st.failure_reason;
        pair.ledger.residual = st.residual;
        if (st.converged) {
            pair.u = g;
            pair.phi = std::move(st.last_phi);
            pair.ledger.inner_last = std::move(st.last_inner);
        } else {
            break;
        }
    }
    finalize_ledger(pair, cfg);
    return pair;
}

}  // namespace

Trajectory apply_outer_L(const Trajectory& g, double lambda, const SystemConfig& cfg) {
    cfg.validate();
    require_same_slab(g, cfg.heat_source, "apply_outer_L");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("apply_outer_L: lambda must lie in [0,1]");
    return apply_outer(g, lambda, cfg, std::nullopt).u;
}

SolutionPair solve_system(const SystemConfig& cfg, CoupledMethod method,
                          const std::optional<Trajectory>& initial_outer_iterate) {
    cfg.validate();
    if (method == CoupledMethod::stepping) return solve_stepping(cfg);
    return solve_homotopy(cfg, initial_outer_iterate, /*continuation=*/true);
}

nlohmann::json UniquenessReport::to_json() const {
    return nlohmann::json{{"dist_u_l2q", dist_u_l2q},
                          {"dist_phi_l2q", dist_phi_l2q},
                          {"tolerance", tolerance},
                          {"pass", pass},
                          {"conclusive", conclusive}};
}

UniquenessReport check_uniqueness(const SystemConfig& cfg, uint64_t seed) {
    cfg.validate();
    UniquenessReport rep;
    rep.tolerance = 10.0 * cfg.fixed_point.residual_tol;

    // Both runs iterate directly at lambda = 1 so the distinct initial
    // iterates are not wiped by the lambda = 0 stage.
    SolutionPair a = solve_homotopy(cfg, std::nullopt, /*continuation=*/false);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    Trajectory g0(cfg.grid(), cfg.dt(), cfg.steps(), 0.0);
    for (int k = 0; k <= g0.steps(); ++k)
        for (int i = 0; i < g0.frame(k).size(); ++i) g0.frame(k)[i] = dist(rng);
    SolutionPair b = solve_homotopy(cfg, g0, /*continuation=*/false);

    rep.conclusive = a.ledger.converged && b.ledger.converged;
    if (!rep.conclusive) return rep;
    rep.dist_u_l2q = distance_l2_q(a.u, b.u);
    rep.dist_phi_l2q = distance_l2_q(a.phi, b.phi);
    rep.pass = rep.dist_u_l2q < rep.tolerance && rep.dist_phi_l2q < rep.tolerance;
    return rep;
}

nlohmann::json ConservationReport::to_json() const {
    return nlohmann::json{{"max_drift_rel", max_drift_rel}, {"pass", pass}};
}

ConservationReport check_conservation(const SolutionPair& pair, const SystemConfig& cfg) {
    ConservationReport rep;
    const int n = pair.u.steps();
    rep.series.resize(n + 1);
    for (int k = 0; k <= n; ++k)
        rep.series[k] = mean(pair.u.frame(k)) + cfg.latent_heat * mean(pair.phi.frame(k));

    const double scale = std::max(
        {std::abs(rep.series[0]),
         (max_abs(pair.u) + cfg.latent_heat * max_abs(pair.phi)) * cfg.grid()->measure(),
         1e-14});
    double worst = 0.0;
    for (int k = 0; k <= n; ++k)
        worst = std::max(worst, std::abs(rep.series[k] - rep.series[0]));
    rep.max_drift_rel = worst / scale;
    rep.pass = rep.max_drift_rel < 1e-8;
    return rep;
}

nlohmann::json MainEstimateEntry::to_json() const {
    return nlohmann::json{{"solution_norm", solution_norm},
                          {"data_norm", data_norm},
                          {"ratio", applicable ? nlohmann::json(ratio) : nlohmann::json()},
                          {"applicable", applicable}};
}

MainEstimateEntry measure_main_estimate(const SolutionPair& pair, const SystemConfig& cfg) {
    MainEstimateEntry e;
    e.solution_norm =
        w21p_surrogate(pair.u, cfg.p).total() + w21p_surrogate(pair.phi, cfg.p).total();
    const double raw_data = norm_lp_omega(cfg.phi0, cfg.p) + h1_seminorm(cfg.phi0) +
                            norm_lp_omega(cfg.u0, cfg.p) + h1_seminorm(cfg.u0) +
                            norm_lp_q(cfg.heat_source, cfg.p);
    e.data_norm = 1.0 + raw_data;
    e.applicable = raw_data >= 1e-14;
    e.ratio = e.applicable ? e.solution_norm / e.data_norm : 0.0;
    return e;
}

}  // namespace caginalp
