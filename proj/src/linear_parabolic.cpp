#include "caginalp/linear_parabolic.hpp"

#include <cmath>
#include <sstream>

namespace caginalp {

void ThetaScheme::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("ThetaScheme: theta must lie in [0,1]");
    if (!(linear_tol > 0.0)) throw std::invalid_argument("ThetaScheme: tolerance must be positive");
    if (max_linear_iters < 1) throw std::invalid_argument("ThetaScheme: need at least 1 iteration");
}

namespace {

// Solves (I - a dt Lap) x = b for the 1-D mirrored-ghost stencil by the
// Thomas algorithm.  The boundary rows carry the doubled off-diagonal from
// ghost mirroring.
Field solve_tridiagonal(const Field& b, double coef) {
    const Grid& g = *b.grid();
    const int n = g.nodes(0);
    const double a = coef / (g.spacing(0) * g.spacing(0));
    std::vector<double> c_prime(n), d_prime(n);
    // row 0: (1+2a) x0 - 2a x1
    double beta = 1.0 + 2.0 * a;
    c_prime[0] = -2.0 * a / beta;
    d_prime[0] = b[0] / beta;
    for (int i = 1; i < n; ++i) {
        const double lower = (i == n - 1) ? -2.0 * a : -a;
        const double upper = -a;
        beta = (1.0 + 2.0 * a) - lower * c_prime[i - 1];
        c_prime[i] = upper / beta;
        d_prime[i] = (b[i] - lower * d_prime[i - 1]) / beta;
    }
    Field x(b.grid());
    x[n - 1] = d_prime[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    return x;
}

// Conjugate gradients on (I - coef Lap) x = b, SPD in the trapezoid-weighted
// inner product.  The Jacobi preconditioner is the (constant) diagonal.
Field solve_cg(const Field& b, double coef, const ThetaScheme& scheme) {
    const Grid& g = *b.grid();
    auto apply = [&](const Field& v) {
        Field lap = laplacian_neumann(v);
        return linear_combination(1.0, v, -coef, lap);
    };
    const double diag = 1.0 + coef * (2.0 / (g.spacing(0) * g.spacing(0)) +
                                      (g.dim() == 2 ? 2.0 / (g.spacing(1) * g.spacing(1)) : 0.0));
    const double inv_diag = 1.0 / diag;

    Field x(b.grid(), 0.0);
    Field r = b;
    const double b_norm = std::sqrt(inner_product_omega(b, b));
    if (b_norm == 0.0) return x;
    Field z = r;
    for (int i = 0; i < z.size(); ++i) z[i] *= inv_diag;
    Field p = z;
    double rz = inner_product_omega(r, z);
    for (int it = 0; it < scheme.max_linear_iters; ++it) {
        Field ap = apply(p);
        const double alpha = rz / inner_product_omega(p, ap);
        x = linear_combination(1.0, x, alpha, p);
        r = linear_combination(1.0, r, -alpha, ap);
        const double res = std::sqrt(inner_product_omega(r, r));
        if (res <= scheme.linear_tol * b_norm) return x;
        z = r;
        for (int i = 0; i < z.size(); ++i) z[i] *= inv_diag;
        const double rz_new = inner_product_omega(r, z);
        p = linear_combination(1.0, z, rz_new / rz, p);
        rz = rz_new;
    }
    std::ostringstream msg;
    msg << "conjugate gradient did not converge: relative residual "
        << std::sqrt(inner_product_omega(r, r)) / b_norm << " after "
        << scheme.max_linear_iters << " iterations";
    throw SolverError(msg.str());
}

Field solve_helmholtz(const Field& b, double coef, const ThetaScheme& scheme) {
    if (coef == 0.0) return b;
    return b.grid()->dim() == 1 ? solve_tridiagonal(b, coef) : solve_cg(b, coef, scheme);
}

}  // namespace

Field theta_step_combined(const Field& v, const Field& rhs_step, double dt,
                          const ThetaScheme& scheme) {
    scheme.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("theta_step: dt must be positive");
    require_same_grid(v, rhs_step, "theta_step");

    Field b = v;
    if (scheme.theta < 1.0) {
        Field lap = laplacian_neumann(v);
        b = linear_combination(1.0, v, (1.0 - scheme.theta) * dt, lap);
    }
    b = linear_combination(1.0, b, dt, rhs_step);
    Field out = solve_helmholtz(b, scheme.theta * dt, scheme);
    if (!out.all_finite()) throw SolverError("theta_step: non-finite result");
    return out;
}

Field theta_step(const Field& v, const Field& rhs_now, const Field& rhs_next, double dt,
                 const ThetaScheme& scheme) {
    require_same_grid(rhs_now, rhs_next, "theta_step");
    Field rhs = linear_combination(1.0 - scheme.theta, rhs_now, scheme.theta, rhs_next);
    return theta_step_combined(v, rhs, dt, scheme);
}

Trajectory solve_trajectory(const Field& v0, const Trajectory& rhs, const ThetaScheme& scheme) {
    require_same_grid(v0, rhs.frame(0), "solve_trajectory");
    std::vector<Field> frames;
    frames.reserve(rhs.steps() + 1);
    frames.push_back(v0);
    for (int k = 0; k < rhs.steps(); ++k)
        frames.push_back(theta_step(frames.back(), rhs.frame(k), rhs.frame(k + 1), rhs.dt(),
                                    scheme));
    return Trajectory(rhs.grid(), rhs.dt(), std::move(frames));
}

Trajectory solve_trajectory_steps(const Field& v0, const std::vector<Field>& rhs_steps,
                                  double dt, const ThetaScheme& scheme) {
    if (rhs_steps.empty()) throw std::invalid_argument("solve_trajectory_steps: no steps");
    std::vector<Field> frames;
    frames.reserve(rhs_steps.size() + 1);
    frames.push_back(v0);
    for (const Field& r : rhs_steps)
        frames.push_back(theta_step_combined(frames.back(), r, dt, scheme));
    return Trajectory(v0.grid(), dt, std::move(frames));
}

Trajectory time_derivative_quotients(const Trajectory& v) {
    const int n = v.steps();
    std::vector<Field> frames;
    frames.reserve(n + 1);
    for (int k = 0; k < n; ++k)
        frames.push_back(linear_combination(1.0 / v.dt(), v.frame(k + 1), -1.0 / v.dt(),
                                            v.frame(k)));
    frames.push_back(frames.back());
    return Trajectory(v.grid(), v.dt(), std::move(frames));
}

nlohmann::json LinearEstimateEntry::to_json() const {
    return nlohmann::json{{"norm_name", norm_name}, {"value", value},
                          {"norm_v", norm_v},       {"norm_vt", norm_vt},
                          {"norm_lap", norm_lap},   {"data_norm", data_norm},
                          {"ratio", applicable ? nlohmann::json(ratio) : nlohmann::json()},
                          {"grid", grid_desc},      {"dt", dt},
                          {"theta", theta}};
}

W21pParts w21p_surrogate(const Trajectory& v, double p) {
    W21pParts parts;
    parts.norm_v = norm_lp_q(v, p);
    parts.norm_vt = norm_lp_q(time_derivative_quotients(v), p);
    std::vector<Field> laps;
    laps.reserve(v.steps() + 1);
    for (const Field& f : v.frames()) laps.push_back(laplacian_neumann(f));
    parts.norm_lap = norm_lp_q(Trajectory(v.grid(), v.dt(), std::move(laps)), p);
    return parts;
}

LinearEstimateEntry measure_linear_estimate(const Field& v0, const Trajectory& rhs, double p,
                                            const ThetaScheme& scheme) {
    Trajectory v = solve_trajectory(v0, rhs, scheme);

    LinearEstimateEntry e;
    const W21pParts parts = w21p_surrogate(v, p);
    e.norm_v = parts.norm_v;
    e.norm_vt = parts.norm_vt;
    e.norm_lap = parts.norm_lap;
    e.value = parts.total();

    e.data_norm = norm_lp_omega(v0, p) + h1_seminorm(v0) + norm_lp_q(rhs, p);
    e.applicable = e.data_norm >= 1e-14;
    e.ratio = e.applicable ? e.value / e.data_norm : 0.0;

    std::ostringstream gd;
    gd << v.grid()->nodes(0);
    if (v.grid()->dim() == 2) gd << "x" << v.grid()->nodes(1);
    e.grid_desc = gd.str();
    e.dt = v.dt();
    e.theta = scheme.theta;
    return e;
}

}  // namespace caginalp
