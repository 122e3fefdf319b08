#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "caginalp/coupled_solver.hpp"
#include "caginalp/verification.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace caginalp;

namespace {

SystemConfig base_config(const GridPtr& g, double dt, int steps,
                         NonlinearityDescriptor F) {
    SystemConfig cfg;
    cfg.latent_heat = 1.0;
    cfg.heat_source = Trajectory(g, dt, steps, 0.0);
    cfg.u0 = Field(g, 0.0);
    cfg.phi0 = Field(g, 0.0);
    cfg.p = 2.0;
    cfg.r = F.growth_exponent_r;
    cfg.fixed_point.p = 2.0;
    cfg.fixed_point.r = F.growth_exponent_r;
    cfg.nonlinearity = std::move(F);
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    auto g = Grid::interval(1.0, 11);
    SystemConfig cfg = base_config(g, 0.01, 10, builtin_zero());
    CHECK_NOTHROW(cfg.validate());
    cfg.latent_heat = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.latent_heat = 1.0;
    cfg.p = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.p = 2.0;
    cfg.u0 = Field(Grid::interval(1.0, 13), 0.0);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("outer operator vanishes identically at lambda 0") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 0.01, 40, builtin_double_well());
    cfg.u0 = Field(g, 1.0);
    cfg.phi0 = test_helpers::random_field(g, 3, 0.3);
    Trajectory any = test_helpers::random_trajectory(g, 0.01, 40, 4);
    Trajectory u = apply_outer_L(any, 0.0, cfg);
    CHECK(max_abs(u) == 0.0);
}

TEST_CASE("all-zero data yields the zero pair") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 0.01, 40, builtin_double_well());
    for (auto method : {CoupledMethod::homotopy, CoupledMethod::stepping}) {
        SolutionPair pair = solve_system(cfg, method);
        REQUIRE(pair.ledger.converged);
        CHECK(max_abs(pair.u) == 0.0);
        CHECK(max_abs(pair.phi) == 0.0);
    }
}

TEST_CASE("latent-heat exchange: u' = -phi', phi' = u") {
    auto g = Grid::interval(1.0, 31);
    const double dt = 1e-3;
    const int steps = 1000;
    SystemConfig cfg = base_config(g, dt, steps, builtin_zero());
    cfg.u0 = Field(g, 1.0);
    cfg.fixed_point.residual_tol = 1e-10;

    SolutionPair pair = solve_system(cfg, CoupledMethod::homotopy);
    REQUIRE(pair.ledger.converged);
    CHECK(max_nodal_difference(pair.u.frame(steps), Field(g, std::exp(-1.0))) < 1e-4);
    CHECK(max_nodal_difference(pair.phi.frame(steps), Field(g, 1.0 - std::exp(-1.0))) <
          1e-4);

    // u + l phi is constant in closed form; the discrete drift is machine-level
    ConservationReport cons = check_conservation(pair, cfg);
    CHECK(cons.pass);
    CHECK(cons.max_drift_rel < 1e-10);
}

TEST_CASE("constant-data double well matches the ODE oracle for both methods") {
    auto g = Grid::interval(1.0, 21);
    const double dt = 1e-3;
    const int steps = 1000;
    SystemConfig cfg = base_config(g, dt, steps, builtin_double_well());
    cfg.phi0 = Field(g, 0.1);
    auto [u_ref, phi_ref] = ode_reduction_oracle(cfg);

    SolutionPair hom = solve_system(cfg, CoupledMethod::homotopy);
    REQUIRE(hom.ledger.converged);
    double worst_u = 0.0, worst_phi = 0.0;
    for (int k = 0; k <= steps; ++k) {
        worst_u = std::max(worst_u, max_nodal_difference(hom.u.frame(k), u_ref.frame(k)));
        worst_phi =
            std::max(worst_phi, max_nodal_difference(hom.phi.frame(k), phi_ref.frame(k)));
    }
    CHECK(worst_u < 1e-5);
    CHECK(worst_phi < 1e-5);

    SolutionPair stp = solve_system(cfg, CoupledMethod::stepping);
    double worst_s = 0.0;
    for (int k = 0; k <= steps; ++k) {
        worst_s = std::max(worst_s, max_nodal_difference(stp.u.frame(k), u_ref.frame(k)));
        worst_s = std::max(worst_s, max_nodal_difference(stp.phi.frame(k), phi_ref.frame(k)));
    }
    CHECK(worst_s < 1e-3);
}

TEST_CASE("homotopy and stepping agree on an oscillatory forced case") {
    auto g = Grid::interval(1.0, 21);
    const double dt = 2e-3;
    const int steps = 250;
    SystemConfig cfg = base_config(g, dt, steps, builtin_double_well());
    for (int i = 0; i < cfg.phi0.size(); ++i)
        cfg.phi0[i] = 0.6 * std::cos(M_PI * g->x_of(i));
    for (int i = 0; i < cfg.u0.size(); ++i)
        cfg.u0[i] = 0.4 * std::cos(2.0 * M_PI * g->x_of(i));

    SolutionPair hom = solve_system(cfg, CoupledMethod::homotopy);
    REQUIRE(hom.ledger.converged);
    SolutionPair stp = solve_system(cfg, CoupledMethod::stepping);
    const double bound = 1e-5 + 10.0 * dt;
    CHECK(distance_l2_q(hom.u, stp.u) < bound);
    CHECK(distance_l2_q(hom.phi, stp.phi) < bound);
}

TEST_CASE("outer residual history is non-increasing after damping kicks in") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 2e-3, 250, builtin_double_well());
    for (int i = 0; i < cfg.phi0.size(); ++i)
        cfg.phi0[i] = 0.8 * std::cos(M_PI * g->x_of(i)) + 0.1;
    cfg.u0 = Field(g, 0.5);
    SolutionPair pair = solve_system(cfg, CoupledMethod::homotopy);
    REQUIRE(pair.ledger.converged);
    CHECK(pair.ledger.residual <= cfg.fixed_point.residual_tol);
    bool damped = false;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : pair.ledger.outer) {
        if (row.damping < 1.0) {
            if (damped) CHECK(row.residual <= prev * (1.0 + 1e-12));
            damped = true;
            prev = row.residual;
        }
    }
    // with or without damping activation the final residual met the bound
    CHECK(pair.ledger.outer.back().residual <= cfg.fixed_point.residual_tol);
}

TEST_CASE("uniqueness check on a linear problem reaches machine coincidence") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 5e-3, 100, builtin_zero());
    cfg.u0 = Field(g, 0.7);
    cfg.phi0 = Field(g, -0.2);
    cfg.fixed_point.residual_tol = 1e-13;
    UniquenessReport rep = check_uniqueness(cfg, 123);
    REQUIRE(rep.conclusive);
    CHECK(rep.dist_u_l2q < 1e-12);
    CHECK(rep.dist_phi_l2q < 1e-12);
    CHECK(rep.pass);
}

TEST_CASE("uniqueness check on the double well") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 5e-3, 100, builtin_double_well());
    for (int i = 0; i < cfg.phi0.size(); ++i)
        cfg.phi0[i] = 0.7 * std::cos(M_PI * g->x_of(i)) + 0.05;
    cfg.u0 = Field(g, 0.3);
    UniquenessReport rep = check_uniqueness(cfg, 99);
    REQUIRE(rep.conclusive);
    CHECK(rep.pass);
    CHECK(rep.dist_u_l2q < 1e-7);
    CHECK(rep.dist_phi_l2q < 1e-7);
}

TEST_CASE("conservation monitor") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 2e-3, 500, builtin_double_well());
    SolutionPair zero_pair = solve_system(cfg, CoupledMethod::stepping);
    ConservationReport zero_rep = check_conservation(zero_pair, cfg);
    CHECK(zero_rep.pass);
    CHECK(zero_rep.max_drift_rel == 0.0);

    for (int i = 0; i < cfg.phi0.size(); ++i)
        cfg.phi0[i] = 0.8 * std::cos(M_PI * g->x_of(i)) + 0.1;
    for (int i = 0; i < cfg.u0.size(); ++i)
        cfg.u0[i] = 0.5 * std::cos(2.0 * M_PI * g->x_of(i));
    for (auto method : {CoupledMethod::homotopy, CoupledMethod::stepping}) {
        SolutionPair pair = solve_system(cfg, method);
        REQUIRE(pair.ledger.converged);
        ConservationReport rep = check_conservation(pair, cfg);
        CHECK(rep.pass);
        CHECK(rep.max_drift_rel < 1e-8);
    }
}

TEST_CASE("main estimate ledger") {
    auto g = Grid::interval(1.0, 21);
    SystemConfig cfg = base_config(g, 2e-3, 250, builtin_double_well());
    SolutionPair zero_pair = solve_system(cfg, CoupledMethod::stepping);
    MainEstimateEntry zero_entry = measure_main_estimate(zero_pair, cfg);
    CHECK_FALSE(zero_entry.applicable);

    cfg.u0 = Field(g, 1.0);
    cfg.nonlinearity = builtin_zero();
    cfg.r = 1.0;
    cfg.fixed_point.r = 1.0;
    SolutionPair pair = solve_system(cfg, CoupledMethod::homotopy);
    REQUIRE(pair.ledger.converged);
    MainEstimateEntry e = measure_main_estimate(pair, cfg);
    CHECK(e.applicable);
    CHECK(e.ratio > 0.0);
    CHECK(std::isfinite(e.ratio));
    CHECK(pair.ledger.p13_ratio > 0.0);
}

TEST_CASE("system-level continuous dependence is linear in the perturbation") {
    auto g = Grid::interval(1.0, 21);
    const double dt = 2.5e-3;
    const int steps = 200;
    SystemConfig base = base_config(g, dt, steps, builtin_double_well());
    for (int i = 0; i < base.phi0.size(); ++i)
        base.phi0[i] = 0.6 * std::cos(M_PI * g->x_of(i)) + 0.1;
    for (int i = 0; i < base.u0.size(); ++i)
        base.u0[i] = 0.3 * std::cos(2.0 * M_PI * g->x_of(i));
    SolutionPair ref = solve_system(base, CoupledMethod::homotopy);
    REQUIRE(ref.ledger.converged);

    Field du0(g), dphi0(g), df(g);
    for (int i = 0; i < du0.size(); ++i) {
        du0[i] = std::cos(M_PI * g->x_of(i));
        dphi0[i] = std::cos(2.0 * M_PI * g->x_of(i));
        df[i] = 0.5 * std::cos(M_PI * g->x_of(i));
    }
    std::vector<double> ratios;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        SystemConfig pert = base;
        pert.u0 = linear_combination(1.0, base.u0, eps, du0);
        pert.phi0 = linear_combination(1.0, base.phi0, eps, dphi0);
        std::vector<Field> f_frames(steps + 1, linear_combination(eps, df, 0.0, df));
        pert.heat_source = Trajectory(g, dt, std::move(f_frames));
        SolutionPair sol = solve_system(pert, CoupledMethod::homotopy);
        REQUIRE(sol.ledger.converged);
        const double diff =
            distance_l2_q(sol.u, ref.u) + distance_l2_q(sol.phi, ref.phi);
        const double data = eps * (norm_lp_omega(du0, 2.0) + norm_lp_omega(dphi0, 2.0) +
                                   norm_lp_omega(df, 2.0));
        ratios.push_back(diff / data);
    }
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    CHECK(hi / lo < 2.0);
}

TEST_CASE("two-dimensional coupled solve conserves and matches the 1-D reduction") {
    auto g2 = Grid::rectangle(1.0, 1.0, 17, 17);
    const double dt = 2e-3;
    const int steps = 100;
    SystemConfig cfg = base_config(g2, dt, steps, builtin_double_well());
    Field phi0(g2);
    for (int i = 0; i < phi0.size(); ++i)
        phi0[i] = 0.5 * std::cos(M_PI * g2->x_of(i)) * std::cos(M_PI * g2->y_of(i)) + 0.1;
    cfg.phi0 = phi0;
    cfg.u0 = Field(g2, 0.2);
    cfg.scheme.linear_tol = 1e-13;

    SolutionPair pair = solve_system(cfg, CoupledMethod::stepping);
    ConservationReport rep = check_conservation(pair, cfg);
    CHECK(rep.pass);

    // constant data on a 2-D grid reduces to the same ODE as in 1-D
    SystemConfig flat = base_config(g2, dt, steps, builtin_double_well());
    flat.phi0 = Field(g2, 0.1);
    flat.scheme.linear_tol = 1e-13;
    SolutionPair p2 = solve_system(flat, CoupledMethod::homotopy);
    REQUIRE(p2.ledger.converged);
    auto [u_ref, phi_ref] = ode_reduction_oracle(flat);
    CHECK(max_nodal_difference(p2.phi.frame(steps), phi_ref.frame(steps)) < 1e-5);
}

TEST_CASE("inner failure propagates with context") {
    auto g = Grid::interval(1.0, 11);
    SystemConfig cfg = base_config(g, 0.01, 20, builtin_double_well());
    cfg.phi0 = Field(g, 0.9);
    cfg.fixed_point.max_outer_iters = 1;
    cfg.fixed_point.residual_tol = 1e-15;
    Trajectory any(g, 0.01, 20, 0.0);
    CHECK_THROWS_AS(apply_outer_L(any, 1.0, cfg), SolverError);
}

TEST_CASE("ledger serializes to the manifest row layout") {
    auto g = Grid::interval(1.0, 11);
    SystemConfig cfg = base_config(g, 0.01, 20, builtin_zero());
    cfg.u0 = Field(g, 1.0);
    SolutionPair pair = solve_system(cfg, CoupledMethod::homotopy);
    nlohmann::json j = pair.ledger.to_json();
    CHECK(j.contains("outer"));
    CHECK(j.contains("method"));
    CHECK(j.contains("residual"));
    CHECK(j["outer"].is_array());
    REQUIRE(!j["outer"].empty());
    CHECK(j["outer"][0].contains("lambda"));
    CHECK(j["outer"][0].contains("iter"));
    CHECK(j["outer"][0].contains("residual"));
}
