#include "caginalp/phase_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace caginalp {

namespace {
constexpr double kBlowUpGuard = 1e12;
constexpr double kDampingFloor = 1e-4;
}  // namespace

void FixedPointConfig::validate() const {
    if (lambda_schedule.empty() || lambda_schedule.front() != 0.0 ||
        lambda_schedule.back() != 1.0)
        throw std::invalid_argument("FixedPointConfig: schedule must run from 0 to 1");
    for (size_t i = 1; i < lambda_schedule.size(); ++i)
        if (!(lambda_schedule[i] > lambda_schedule[i - 1]))
            throw std::invalid_argument("FixedPointConfig: schedule must be strictly increasing");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("FixedPointConfig: damping must lie in (0,1]");
    if (!(residual_tol > 0.0))
        throw std::invalid_argument("FixedPointConfig: tolerance must be positive");
    if (max_outer_iters < 1)
        throw std::invalid_argument("FixedPointConfig: need at least 1 outer iteration");
    if (!(p >= 1.0) || !(r >= 1.0))
        throw std::invalid_argument("FixedPointConfig: exponents must be >= 1");
}

nlohmann::json AprioriLedger::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& it : iterations)
        rows.push_back({{"lambda", it.lambda}, {"iter", it.iter},
                        {"residual", it.residual}, {"damping", it.damping}});
    return nlohmann::json{{"iterations", rows},
                          {"converged", converged},
                          {"failure_reason", failure_reason},
                          {"norm_phi_Lpr", norm_phi_lpr},
                          {"data_norm", data_norm},
                          {"rho_ratio", rho_ratio}};
}

namespace {

// F evaluated frame-by-frame along a trajectory.
Field evaluate_F(const NonlinearityDescriptor& F, const Field& w, double t,
                 bool guard_blow_up) {
    const Grid& g = *w.grid();
    Field out(w.grid());
    for (int i = 0; i < w.size(); ++i) {
        out[i] = F(g.x_of(i), g.y_of(i), t, w[i]);
        if (guard_blow_up && std::abs(out[i]) > kBlowUpGuard) {
            std::ostringstream msg;
            msg << "blow-up guard tripped: |F| = " << std::abs(out[i]) << " at node " << i
                << ", t = " << t;
            throw SolverError(msg.str());
        }
    }
    if (!out.all_finite()) throw SolverError("nonlinearity produced a non-finite value");
    return out;
}

}  // namespace

Trajectory apply_L(const Trajectory& w, double lambda, const Trajectory& g, const Field& phi0,
                   const NonlinearityDescriptor& F, const ThetaScheme& scheme) {
    require_same_slab(w, g, "apply_L");
    require_same_grid(phi0, g.frame(0), "apply_L");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("apply_L: lambda must lie in [0,1]");

    const int n = g.steps();
    std::vector<Field> rhs_frames;
    rhs_frames.reserve(n + 1);
    if (lambda == 0.0) {
        // rhs vanishes identically; skip F so the result is exactly
        // w-independent.
        for (int k = 0; k <= n; ++k) rhs_frames.emplace_back(g.grid(), 0.0);
    } else {
        for (int k = 0; k <= n; ++k) {
            Field fw = evaluate_F(F, w.frame(k), w.time_of(k), false);
            rhs_frames.push_back(linear_combination(lambda, fw, lambda, g.frame(k)));
        }
    }
    return solve_trajectory(phi0, Trajectory(g.grid(), g.dt(), std::move(rhs_frames)), scheme);
}

PhaseSolveResult solve_phase_picard(const Trajectory& g, const Field& phi0,
                                    const NonlinearityDescriptor& F, double lambda,
                                    const FixedPointConfig& cfg, const ThetaScheme& scheme,
                                    const Trajectory& initial_iterate) {
    const double pr = cfg.iteration_exponent();
    PhaseSolveResult res{initial_iterate, {}};
    Trajectory& w = res.phi;
    AprioriLedger& ledger = res.ledger;

    double omega = cfg.damping;
    double prev_residual = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
        Trajectory lw = apply_L(w, lambda, g, phi0, F, scheme);
        const double residual = norm_lp_q(linear_combination(1.0, lw, -1.0, w), pr);
        ledger.iterations.push_back({lambda, iter, residual, omega});
        if (residual <= cfg.residual_tol) {
            w = std::move(lw);
            ledger.converged = true;
            return res;
        }
        if (residual > prev_residual) {
            omega *= 0.5;
            if (omega < kDampingFloor) {
                ledger.converged = false;
                ledger.failure_reason = "damping underflow";
                return res;
            }
            // retry from the same iterate with the smaller damping
            prev_residual = std::numeric_limits<double>::infinity();
            continue;
        }
        prev_residual = residual;
        w = (omega == 1.0) ? std::move(lw) : linear_combination(1.0 - omega, w, omega, lw);
    }
    ledger.converged = false;
    std::ostringstream msg;
    msg << "no convergence after " << cfg.max_outer_iters << " iterations at lambda = "
        << lambda;
    ledger.failure_reason = msg.str();
    return res;
}

PhaseSolveResult solve_auxiliary_fixed_point(const Trajectory& g, const Field& phi0,
                                             const NonlinearityDescriptor& F,
                                             const FixedPointConfig& cfg,
                                             const ThetaScheme& scheme,
                                             const std::optional<Trajectory>& initial_iterate) {
    cfg.validate();
    scheme.validate();
    F.validate();

    PhaseSolveResult res{initial_iterate ? *initial_iterate
                                         : Trajectory(g.grid(), g.dt(), g.steps(), 0.0),
                         {}};
    for (double lambda : cfg.lambda_schedule) {
        PhaseSolveResult stage = solve_phase_picard(g, phi0, F, lambda, cfg, scheme, res.phi);
        res.phi = std::move(stage.phi);
        auto& rows = stage.ledger.iterations;
        res.ledger.iterations.insert(res.ledger.iterations.end(), rows.begin(), rows.end());
        res.ledger.converged = stage.ledger.converged;
        res.ledger.failure_reason = stage.ledger.failure_reason;
        if (!res.ledger.converged) break;
    }

    res.ledger.norm_phi_lpr = norm_lp_q(res.phi, cfg.iteration_exponent());
    res.ledger.data_norm =
        1.0 + norm_lp_omega(phi0, cfg.p) + h1_seminorm(phi0) + norm_lp_q(g, cfg.p);
    res.ledger.rho_ratio = res.ledger.norm_phi_lpr / res.ledger.data_norm;
    return res;
}

Trajectory solve_auxiliary_stepping(const Trajectory& g, const Field& phi0,
                                    const NonlinearityDescriptor& F,
                                    const ThetaScheme& scheme) {
    scheme.validate();
    F.validate();
    require_same_grid(phi0, g.frame(0), "solve_auxiliary_stepping");

    std::vector<Field> frames;
    frames.reserve(g.steps() + 1);
    frames.push_back(phi0);
    for (int k = 0; k < g.steps(); ++k) {
        Field fw = evaluate_F(F, frames.back(), g.time_of(k), true);
        // F and g frozen at frame k, Laplacian theta-implicit.
        Field rhs = linear_combination(1.0, fw, 1.0, g.frame(k));
        frames.push_back(theta_step_combined(frames.back(), rhs, g.dt(), scheme));
    }
    return Trajectory(g.grid(), g.dt(), std::move(frames));
}

// ---------------------------------------------------------------------------
// Monitors
// ---------------------------------------------------------------------------

nlohmann::json EnergyEntry::to_json() const {
    return nlohmann::json{{"energy_lhs", lhs.empty() ? 0.0 : lhs.back()},
                          {"energy_rhs", rhs},
                          {"d0_used", d0_used},
                          {"gronwall_c0", gronwall_c0},
                          {"worst_margin", worst_margin},
                          {"worst_frame", worst_frame},
                          {"pass", pass}};
}

EnergyEntry measure_energy_inequality(const Trajectory& phi, const Trajectory& g,
                                      const Field& phi0, const NonlinearityDescriptor& F) {
    EnergyEntry e;
    const double box = std::max(10.0, 1.5 * max_abs(phi));
    e.d0_used = std::max(0.0, estimate_d0(F, box, 400).value);
    const double T = phi.duration();
    e.gronwall_c0 = std::exp(2.0 * e.d0_used * T) * (1.0 + e.d0_used * T);

    const double n_phi0 = norm_lp_omega(phi0, 2.0);
    const double n_g = norm_lp_q(g, 2.0);
    e.rhs = e.gronwall_c0 * (1.0 + n_phi0 * n_phi0 + n_g * n_g);

    // LHS(t_k) = 1/2 ||phi_k||_2^2 + trapezoidal accumulation of |phi|_H1^2.
    const int n = phi.steps();
    std::vector<double> grad2(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double s = h1_seminorm(phi.frame(k));
        grad2[k] = s * s;
    }
    double grad_acc = 0.0;
    e.lhs.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        if (k > 0) grad_acc += 0.5 * phi.dt() * (grad2[k - 1] + grad2[k]);
        const double l2 = norm_lp_omega(phi.frame(k), 2.0);
        e.lhs[k] = 0.5 * l2 * l2 + grad_acc;
    }

    e.worst_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
        const double margin = e.rhs - e.lhs[k];
        if (margin < e.worst_margin) {
            e.worst_margin = margin;
            e.worst_frame = k;
        }
    }
    e.pass = e.worst_margin >= 0.0;
    return e;
}

nlohmann::json StabilityEntry::to_json() const {
    return nlohmann::json{{"stability_ratio", applicable ? nlohmann::json(ratio) : nlohmann::json()},
                          {"solution_diff", solution_diff},
                          {"data_diff", data_diff},
                          {"applicable", applicable},
                          {"solves_converged", solves_converged}};
}

StabilityEntry measure_stability(const Field& phi0_a, const Trajectory& g_a,
                                 const Field& phi0_b, const Trajectory& g_b,
                                 const NonlinearityDescriptor& F, const FixedPointConfig& cfg,
                                 const ThetaScheme& scheme) {
    StabilityEntry s;
    Field d0 = linear_combination(1.0, phi0_a, -1.0, phi0_b);
    Trajectory dg = linear_combination(1.0, g_a, -1.0, g_b);
    s.data_diff = norm_lp_omega(d0, cfg.p) + norm_lp_q(dg, cfg.p);
    s.applicable = s.data_diff >= 1e-14;

    PhaseSolveResult a = solve_auxiliary_fixed_point(g_a, phi0_a, F, cfg, scheme);
    PhaseSolveResult b = solve_auxiliary_fixed_point(g_b, phi0_b, F, cfg, scheme);
    s.solves_converged = a.ledger.converged && b.ledger.converged;

    s.solution_diff = norm_lp_q(linear_combination(1.0, a.phi, -1.0, b.phi), cfg.p);
    s.ratio = s.applicable ? s.solution_diff / s.data_diff : 0.0;
    return s;
}

}  // namespace caginalp
