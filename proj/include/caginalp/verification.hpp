// Verification harness: manufactured-solution convergence studies, the
// spatially-constant ODE-reduction oracle, the canonical solver corpus, and
// the acceptance suite that aggregates every monitor.

#ifndef CAGINALP_VERIFICATION_HPP
#define CAGINALP_VERIFICATION_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "caginalp/coupled_solver.hpp"
#include "json.hpp"

namespace caginalp {

// ---------------------------------------------------------------------------
// Method of manufactured solutions
// ---------------------------------------------------------------------------

/// Closed-form pair (phi*, u*) with analytic derivatives; the fields must
/// satisfy the Neumann condition on the interval boundary analytically.
/// Sources f and s_phi are assembled pointwise from these and the active
/// nonlinearity.
struct ManufacturedCase {
    std::string name;
    double l = 1.0;
    std::function<double(double x, double t)> phi, phi_t, phi_xx;
    std::function<double(double x, double t)> u, u_t, u_xx;
};

/// Separable cosine modes: phi* = e^{-t} cos(pi x), u* = e^{-t} cos(pi x)/2
/// on the unit interval.
ManufacturedCase cosine_case(double l);

Field sample_field(const GridPtr& grid, const std::function<double(double, double)>& fn,
                   double t);
Trajectory sample_trajectory(const GridPtr& grid, double dt, int steps,
                             const std::function<double(double, double)>& fn);

/// Assembles the coupled configuration whose exact solution is the case:
/// f = u*_t + l phi*_t - u*_xx and s_phi = phi*_t - phi*_xx - F(phi*) - u*.
SystemConfig manufactured_config(const ManufacturedCase& mc, const NonlinearityDescriptor& F,
                                 const GridPtr& grid, double dt, int steps, double theta,
                                 double residual_tol = 1e-10);

struct MmsLevel {
    int nodes;
    double dt;
};

struct MmsLadder {
    enum Axis { spatial, temporal } axis = spatial;
    std::vector<MmsLevel> levels;  // at least 3
    double T = 0.25;
    double theta = 0.5;
};

struct ConvergenceReport {
    struct Level {
        double h;
        double dt;
        double err_l2q;        // summed u and phi discrete L^2(Q) errors
        double err_linf_final; // max nodal error at the final time
    };
    std::vector<Level> levels;
    double fitted_order = 0.0;        // least-squares slope over all levels
    double regression_residual = 0.0; // rms residual of the log-log fit
    bool monotone = false;            // errors decrease down the ladder

    nlohmann::json to_json() const;
};

ConvergenceReport run_mms(const ManufacturedCase& mc, const NonlinearityDescriptor& F,
                          CoupledMethod method, const MmsLadder& ladder);

// ---------------------------------------------------------------------------
// ODE-reduction oracle
// ---------------------------------------------------------------------------

/// With spatially constant data the system reduces to
///     u' = -l (F(t,phi) + u + s_phi) + f,   phi' = F(t,phi) + u + s_phi.
/// Integrated by an adaptive embedded Runge-Kutta pair at tolerance 1e-10;
/// rejects non-constant spatial data.
std::pair<Trajectory, Trajectory> ode_reduction_oracle(const SystemConfig& cfg);

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct CorpusCase {
    std::string id;
    bool zero_heat_source = false;
    SystemConfig cfg;
};

/// Eight smooth desk-scale cases spanning the built-in nonlinearities;
/// six with f == 0 (conservation-eligible), two forced.  The random
/// coefficients of the sixth case come from the seed.
std::vector<CorpusCase> default_corpus(const GridPtr& grid, double dt, int steps,
                                       uint64_t seed);

/// Smooth Neumann-compatible pseudo-random field: seeded low-mode cosine
/// combination with coefficients of the given scale.
Field random_smooth_field(const GridPtr& grid, double scale, uint64_t seed);

// ---------------------------------------------------------------------------
// Acceptance suite
// ---------------------------------------------------------------------------

struct SuiteOptions {
    // Criteria to run (1..10); nullopt = all, empty = none.
    std::optional<std::vector<int>> criteria;
    uint64_t seed = 42;
    // Sensitivity hook: overrides the time step of the ODE-reduction
    // criterion so a deliberately coarse run demonstrates a detected failure.
    std::optional<double> dt_override;
    bool verbose = true;  // one console line per check
};

struct CriterionResult {
    std::string case_id;
    std::string criterion;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    bool runtime_entry = false;  // wall-clock entries: measured kept out of JSON
    std::string detail;
};

struct SuiteReport {
    std::vector<CriterionResult> entries;
    bool all_pass = true;

    nlohmann::json to_json() const;
};

SuiteReport run_acceptance_suite(const SuiteOptions& opts);

}  // namespace caginalp

#endif
