// Pluggable nonlinearity F(x,t,z): built-in instances, sampling-based
// estimation of the hypothesis constants (one-sided Lipschitz a0, growth
// envelope c0/a, sign constant d0), the admissible-exponent logic relating
// p, N and the growth exponent r, and the search for violations of the
// competing (M4)-type sign condition.
//
// All checks are estimates over a bounded sampling box, reported with
// witnesses; they are never proofs.

#ifndef CAGINALP_NONLINEARITY_HPP
#define CAGINALP_NONLINEARITY_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace caginalp {

/// Evaluator for F(x,y,t,z) plus declared growth data. Built-ins are
/// constant in (x,t); the signature allows Caratheodory-style dependence.
struct NonlinearityDescriptor {
    std::function<double(double x, double y, double t, double z)> eval;
    double growth_exponent_r = 1.0;  // r >= 1
    std::optional<double> declared_a0;
    std::optional<double> declared_c0;
    std::optional<double> declared_a;
    std::optional<double> declared_d0;
    bool xt_dependent = false;
    std::string name = "custom";

    double operator()(double x, double y, double t, double z) const { return eval(x, y, t, z); }
    double operator()(double z) const { return eval(0.0, 0.0, 0.0, z); }

    void validate() const;

    static NonlinearityDescriptor autonomous(std::function<double(double)> f, double r,
                                             std::string name);
};

NonlinearityDescriptor builtin_zero();
NonlinearityDescriptor builtin_linear(double slope);
/// Classical two-well nonlinearity (z - z^3)/2, growth exponent 3.
NonlinearityDescriptor builtin_double_well();
/// |z|^{r2-1} z - |z|^{r1-1} z with 1 <= r2 < r1, growth exponent r1.
NonlinearityDescriptor builtin_power_law(double r1, double r2);
/// a z + b z^2 - z^3 (constant-coefficient stand-in for k(x,t,z)-h(z)).
NonlinearityDescriptor builtin_hoffman_jiang(double a_coef, double b_coef);

// ---------------------------------------------------------------------------
// Hypothesis constant estimators (sampling-based)
// ---------------------------------------------------------------------------

/// Result of a sampled sup. `conclusive` is false when the evaluator
/// overflowed somewhere in the box (those samples are skipped).
struct Estimate {
    double value = 0.0;
    bool conclusive = true;
    // worst-case witness attaining the sup
    double z1 = 0.0, z2 = 0.0, x = 0.0, t = 0.0;
};

/// sup of (F(z1)-F(z2))/(z1-z2) over a dense pair set in [-box,box]^2;
/// a lower bound of the true one-sided Lipschitz constant.
Estimate estimate_a0(const NonlinearityDescriptor& F, double box, int samples);

struct GrowthEnvelope {
    Estimate c0;  // sup (F(z1)-F(z2))^2 / ((z1-z2)^2 (1+|z1|^{2r-2}+|z2|^{2r-2}))
    Estimate a;   // sup |F(z)| / (1+|z|^r)
};
GrowthEnvelope estimate_growth_envelope(const NonlinearityDescriptor& F, double box, int samples);

/// sup of F(z) z / (1+z^2); smallest constant in the sign condition
/// F(z) z <= d0 (1+z^2) over the box.
Estimate estimate_d0(const NonlinearityDescriptor& F, double box, int samples);

// ---------------------------------------------------------------------------
// (M4) violation search
// ---------------------------------------------------------------------------

struct M4Params {
    double alpha = 1.0;  // > 0
    double beta = 1.0;   // > 0
    double p = 2.0;      // >= 2
    double r = 1.0;      // >= 1, the exponent used inside (M4)
    std::optional<double> r1, r2;  // power-law exponents, 1 <= r2 < r1

    void validate() const;
};

struct M4Witness {
    double z;
    double lhs;  // F(z) |z|^{pr-r-1} z
    double rhs;  // alpha (1+|z|^{pr-1}) - beta |z|^{pr}
};

struct M4Result {
    std::optional<M4Witness> witness;  // empty => no violation found in box
    double box = 0.0;
    long samples_checked = 0;
    nlohmann::json to_json() const;
};

/// Searches z in [-box, box] (log-spaced emphasis on large |z|) for
/// F(z)|z|^{pr-r-1} z > alpha (1+|z|^{pr-1}) - beta |z|^{pr}. Absence of a
/// witness only means the bounded search found none.
M4Result check_M4_violation(const NonlinearityDescriptor& F, const M4Params& params, double box);

// ---------------------------------------------------------------------------
// Exponent logic
// ---------------------------------------------------------------------------

struct EmbeddingExponent {
    enum Kind { bounded, any_finite, unbounded } kind;
    double q_max = 0.0;  // valid when kind == bounded: p(N+2)/(N+2-2p)
};

/// Admissible q of the parabolic Sobolev embedding into L^q(Q):
/// unbounded if p > (N+2)/2, any finite q >= 1 at equality, and
/// q_max = p(N+2)/(N+2-2p) below it.
EmbeddingExponent compute_embedding_exponent(double p, int N);

/// Allowed (p, N, r) combinations: any r >= 1 when p >= (N+2)/2, else
/// 1 <= r < (N+2)/(N+2-2p).
bool validate_H3(double p, int N, double r);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

struct HypothesisReport {
    std::string hypothesis;
    Verdict verdict = Verdict::inconclusive;
    double constant_estimate = 0.0;
    std::optional<Estimate> witness;
    double box = 0.0;
    long samples = 0;
    std::string note;

    nlohmann::json to_json() const;
};

/// Runs the H1/H2 (+ derived growth and sign constants) and H3/H4 checks.
/// When the descriptor declares a constant, the sampled estimate is compared
/// against it and an exceedance yields a fail verdict with witness.
std::vector<HypothesisReport> check_hypotheses(const NonlinearityDescriptor& F, double box,
                                               int samples, double p, int N);

}  // namespace caginalp

#endif
