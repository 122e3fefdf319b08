// One-step theta scheme for v_t - Laplace(v) = rhs with homogeneous Neumann
// data: direct tridiagonal elimination in 1-D, Jacobi-preconditioned
// conjugate gradients in 2-D.  Also measures the discrete counterpart of the
// maximal-regularity estimate (solution norm over data norm).

#ifndef CAGINALP_LINEAR_PARABOLIC_HPP
#define CAGINALP_LINEAR_PARABOLIC_HPP

#include <string>
#include <vector>

#include "caginalp/mesh.hpp"
#include "json.hpp"

namespace caginalp {

struct ThetaScheme {
    double theta = 0.5;        // 0 explicit, 1/2 Crank-Nicolson, 1 implicit
    double linear_tol = 1e-12; // relative residual of the inner linear solve
    int max_linear_iters = 20000;

    void validate() const;
};

/// Advances one step of (I - theta dt L) v+ = (I + (1-theta) dt L) v
///                       + dt (theta rhs_next + (1-theta) rhs_now).
Field theta_step(const Field& v, const Field& rhs_now, const Field& rhs_next, double dt,
                 const ThetaScheme& scheme);

/// Same step with a source already combined over the step (treated constant
/// on [t, t+dt]); used when a time integral must enter exactly.
Field theta_step_combined(const Field& v, const Field& rhs_step, double dt,
                          const ThetaScheme& scheme);

/// Full space-time solve; frame 0 of the result is v0, rhs supplies
/// steps()+1 frames sampled at the time nodes.
Trajectory solve_trajectory(const Field& v0, const Trajectory& rhs, const ThetaScheme& scheme);

/// Space-time solve with one combined source field per step.
Trajectory solve_trajectory_steps(const Field& v0, const std::vector<Field>& rhs_steps,
                                  double dt, const ThetaScheme& scheme);

/// Forward difference quotients (v_{k+1}-v_k)/dt; the last frame repeats the
/// final backward quotient so the result lives on the same slab.
Trajectory time_derivative_quotients(const Trajectory& v);

/// Components of the discrete stand-in for the parabolic solution norm.
struct W21pParts {
    double norm_v = 0.0;
    double norm_vt = 0.0;
    double norm_lap = 0.0;
    double total() const { return norm_v + norm_vt + norm_lap; }
};
W21pParts w21p_surrogate(const Trajectory& v, double p);

struct LinearEstimateEntry {
    std::string norm_name = "W21p_surrogate";
    double value = 0.0;      // ||v||_p,Q + ||v_t||_p,Q + ||Lap v||_p,Q
    double norm_v = 0.0;
    double norm_vt = 0.0;
    double norm_lap = 0.0;
    double data_norm = 0.0;  // ||v0||_p + h1_seminorm(v0) + ||rhs||_p,Q
    double ratio = 0.0;
    bool applicable = false; // false when the data norm is below 1e-14
    std::string grid_desc;
    double dt = 0.0;
    double theta = 0.0;

    nlohmann::json to_json() const;
};

/// Solves and records the empirical constant of the discrete estimate
/// ||v||_surrogate <= C (||v0|| + ||rhs||).  The initial-data norm uses the
/// computable surrogate ||v0||_p + |v0|_{H^1} in place of the fractional
/// trace norm.
LinearEstimateEntry measure_linear_estimate(const Field& v0, const Trajectory& rhs, double p,
                                            const ThetaScheme& scheme);

}  // namespace caginalp

#endif
