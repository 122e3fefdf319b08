#include "caginalp/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace caginalp {

void NonlinearityDescriptor::validate() const {
    if (!eval) throw std::invalid_argument("NonlinearityDescriptor: missing evaluator");
    if (!(growth_exponent_r >= 1.0))
        throw std::invalid_argument("NonlinearityDescriptor: growth exponent r must be >= 1");
}

NonlinearityDescriptor NonlinearityDescriptor::autonomous(std::function<double(double)> f,
                                                          double r, std::string name) {
    NonlinearityDescriptor d;
    d.eval = [f = std::move(f)](double, double, double, double z) { return f(z); };
    d.growth_exponent_r = r;
    d.name = std::move(name);
    d.validate();
    return d;
}

NonlinearityDescriptor builtin_zero() {
    auto d = NonlinearityDescriptor::autonomous([](double) { return 0.0; }, 1.0, "zero");
    d.declared_a0 = 0.0;
    d.declared_d0 = 0.0;
    return d;
}

NonlinearityDescriptor builtin_linear(double slope) {
    auto d = NonlinearityDescriptor::autonomous([slope](double z) { return slope * z; }, 1.0,
                                                "linear");
    d.declared_a0 = slope;
    return d;
}

NonlinearityDescriptor builtin_double_well() {
    auto d = NonlinearityDescriptor::autonomous(
        [](double z) { return 0.5 * (z - z * z * z); }, 3.0, "double_well");
    d.declared_a0 = 0.5;  // sup F' = 1/2 at z = 0
    return d;
}

NonlinearityDescriptor builtin_power_law(double r1, double r2) {
    if (!(r2 >= 1.0 && r2 < r1))
        throw std::invalid_argument("builtin_power_law: need 1 <= r2 < r1");
    auto d = NonlinearityDescriptor::autonomous(
        [r1, r2](double z) {
            const double a = std::abs(z);
            return std::pow(a, r2 - 1.0) * z - std::pow(a, r1 - 1.0) * z;
        },
        r1, "power_law");
    return d;
}

NonlinearityDescriptor builtin_hoffman_jiang(double a_coef, double b_coef) {
    auto d = NonlinearityDescriptor::autonomous(
        [a_coef, b_coef](double z) { return a_coef * z + b_coef * z * z - z * z * z; }, 3.0,
        "hoffman_jiang");
    return d;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

// z samples in [-box, box]: dyadically nested uniform grids on
// [-box 2^-k, box 2^-k] plus an absolute-anchored quarter-decade ladder
// near zero.  Halving scales makes the sample set for box B a superset of
// the one for B/2^j, so the estimates are monotone under power-of-two box
// enlargement by construction; the anchored ladder covers the near-zero
// regime identically for every box.
std::vector<double> sample_z_points(double box, int samples) {
    if (!(box > 0.0)) throw std::invalid_argument("sampling box must be positive");
    if (samples < 100) throw std::invalid_argument("need at least 100 samples");
    std::vector<double> pts;
    pts.reserve(16 * samples);
    pts.push_back(0.0);
    int per_scale = samples / 4;
    if (per_scale % 2 != 0) ++per_scale;
    for (int k = 0; k <= 12; ++k) {
        const double scale = box * std::pow(2.0, -k);
        const double step = 2.0 * scale / (per_scale - 1);
        for (int i = 0; i < per_scale; ++i) pts.push_back(-scale + i * step);
    }
    for (double e = -12.0; e <= std::log10(box) + 1e-12; e += 0.25) {
        const double v = std::pow(10.0, e);
        if (v <= box) {
            pts.push_back(v);
            pts.push_back(-v);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

struct XtSample {
    double x, y, t;
};

std::vector<XtSample> sample_xt_points(const NonlinearityDescriptor& F) {
    if (!F.xt_dependent) return {{0.0, 0.0, 0.0}};
    std::vector<XtSample> pts;
    for (double x : {0.0, 0.5, 1.0})
        for (double t : {0.0, 0.5, 1.0}) pts.push_back({x, 0.0, t});
    return pts;
}

}  // namespace

Estimate estimate_a0(const NonlinearityDescriptor& F, double box, int samples) {
    F.validate();
    const auto zs = sample_z_points(box, samples);
    const auto xts = sample_xt_points(F);
    Estimate best;
    best.value = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& s : xts) {
        std::vector<double> fz(zs.size());
        for (size_t i = 0; i < zs.size(); ++i) fz[i] = F(s.x, s.y, s.t, zs[i]);
        for (size_t i = 0; i < zs.size(); ++i) {
            if (!std::isfinite(fz[i])) {
                best.conclusive = false;
                continue;
            }
            for (size_t j = i + 1; j < zs.size(); ++j) {
                if (!std::isfinite(fz[j])) continue;
                const double q = (fz[i] - fz[j]) / (zs[i] - zs[j]);
                if (!std::isfinite(q)) continue;
                any = true;
                if (q > best.value) {
                    best.value = q;
                    best.z1 = zs[i];
                    best.z2 = zs[j];
                    best.x = s.x;
                    best.t = s.t;
                }
            }
        }
    }
    if (!any) {
        best.value = std::numeric_limits<double>::quiet_NaN();
        best.conclusive = false;
    }
    return best;
}

GrowthEnvelope estimate_growth_envelope(const NonlinearityDescriptor& F, double box,
                                        int samples) {
    F.validate();
    const double r = F.growth_exponent_r;
    const auto zs = sample_z_points(box, samples);
    const auto xts = sample_xt_points(F);
    GrowthEnvelope env;
    env.c0.value = -std::numeric_limits<double>::infinity();
    env.a.value = -std::numeric_limits<double>::infinity();
    for (const auto& s : xts) {
        std::vector<double> fz(zs.size()), zpow(zs.size());
        for (size_t i = 0; i < zs.size(); ++i) {
            fz[i] = F(s.x, s.y, s.t, zs[i]);
            zpow[i] = std::pow(std::abs(zs[i]), 2.0 * r - 2.0);
        }
        for (size_t i = 0; i < zs.size(); ++i) {
            if (!std::isfinite(fz[i])) {
                env.c0.conclusive = env.a.conclusive = false;
                continue;
            }
            const double ga = std::abs(fz[i]) / (1.0 + std::pow(std::abs(zs[i]), r));
            if (std::isfinite(ga) && ga > env.a.value) {
                env.a.value = ga;
                env.a.z1 = zs[i];
                env.a.x = s.x;
                env.a.t = s.t;
            }
            for (size_t j = i + 1; j < zs.size(); ++j) {
                if (!std::isfinite(fz[j])) continue;
                const double d = fz[i] - fz[j];
                const double dz = zs[i] - zs[j];
                const double q = (d * d) / (dz * dz * (1.0 + zpow[i] + zpow[j]));
                if (std::isfinite(q) && q > env.c0.value) {
                    env.c0.value = q;
                    env.c0.z1 = zs[i];
                    env.c0.z2 = zs[j];
                    env.c0.x = s.x;
                    env.c0.t = s.t;
                }
            }
        }
    }
    return env;
}

Estimate estimate_d0(const NonlinearityDescriptor& F, double box, int samples) {
    F.validate();
    const auto zs = sample_z_points(box, samples);
    const auto xts = sample_xt_points(F);
    Estimate best;
    best.value = -std::numeric_limits<double>::infinity();
    for (const auto& s : xts) {
        for (double z : zs) {
            const double fz = F(s.x, s.y, s.t, z);
            if (!std::isfinite(fz)) {
                best.conclusive = false;
                continue;
            }
            const double q = fz * z / (1.0 + z * z);
            if (std::isfinite(q) && q > best.value) {
                best.value = q;
                best.z1 = z;
                best.x = s.x;
                best.t = s.t;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// (M4) violation search
// ---------------------------------------------------------------------------

void M4Params::validate() const {
    if (!(alpha > 0.0 && beta > 0.0))
        throw std::invalid_argument("M4Params: alpha and beta must be positive");
    if (!(p >= 2.0)) throw std::invalid_argument("M4Params: p must be >= 2");
    if (!(r >= 1.0)) throw std::invalid_argument("M4Params: r must be >= 1");
    if (r1 && r2 && !(*r2 >= 1.0 && *r2 < *r1))
        throw std::invalid_argument("M4Params: need 1 <= r2 < r1");
}

nlohmann::json M4Result::to_json() const {
    nlohmann::json j;
    j["box"] = box;
    j["samples_checked"] = samples_checked;
    if (witness) {
        j["witness"] = {{"z", witness->z}, {"lhs", witness->lhs}, {"rhs", witness->rhs}};
    } else {
        j["witness"] = nullptr;
        j["note"] = "no violation found in bounded search; inconclusive beyond the box";
    }
    return j;
}

M4Result check_M4_violation(const NonlinearityDescriptor& F, const M4Params& params,
                            double box) {
    F.validate();
    params.validate();
    if (!(box > 0.0)) throw std::invalid_argument("check_M4_violation: box must be positive");

    // Violations live at large |z|, so scan log-spaced magnitudes from the
    // box edge downward, positive branch first.
    std::vector<double> mags;
    const double lo = std::max(1e-6, box * 1e-9);
    const int n_mag = 600;
    const double ratio = std::pow(lo / box, 1.0 / (n_mag - 1));
    double m = box;
    for (int i = 0; i < n_mag; ++i, m *= ratio) mags.push_back(m);

    const double pr = params.p * params.r;
    M4Result result;
    result.box = box;
    for (double mag : mags) {
        for (double sign : {1.0, -1.0}) {
            const double z = sign * mag;
            ++result.samples_checked;
            const double fz = F(z);
            if (!std::isfinite(fz)) continue;
            const double apow = std::pow(mag, pr - params.r - 1.0);
            const double lhs = fz * apow * z;
            const double rhs = params.alpha * (1.0 + std::pow(mag, pr - 1.0)) -
                               params.beta * std::pow(mag, pr);
            if (!std::isfinite(lhs) || !std::isfinite(rhs)) continue;
            if (lhs > rhs) {
                result.witness = M4Witness{z, lhs, rhs};
                return result;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Exponent logic
// ---------------------------------------------------------------------------

EmbeddingExponent compute_embedding_exponent(double p, int N) {
    if (!(p >= 1.0)) throw std::invalid_argument("compute_embedding_exponent: p must be >= 1");
    if (N < 1) throw std::invalid_argument("compute_embedding_exponent: N must be >= 1");
    const double half = 0.5 * (N + 2);
    if (p > half) return {EmbeddingExponent::unbounded, 0.0};
    if (p == half) return {EmbeddingExponent::any_finite, 0.0};
    return {EmbeddingExponent::bounded, p * (N + 2) / (N + 2 - 2.0 * p)};
}

bool validate_H3(double p, int N, double r) {
    if (!(r >= 1.0)) return false;
    const double half = 0.5 * (N + 2);
    if (p >= half) return true;
    return r < (N + 2) / (N + 2 - 2.0 * p);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

nlohmann::json HypothesisReport::to_json() const {
    nlohmann::json j;
    j["hypothesis"] = hypothesis;
    j["verdict"] = to_string(verdict);
    j["constant_estimate"] = constant_estimate;
    if (witness) {
        j["witness"] = {{"z1", witness->z1}, {"z2", witness->z2},
                        {"x", witness->x}, {"t", witness->t}};
    } else {
        j["witness"] = nullptr;
    }
    j["box"] = box;
    j["samples"] = samples;
    if (!note.empty()) j["note"] = note;
    return j;
}

namespace {

HypothesisReport constant_report(const std::string& name, const Estimate& est,
                                 const std::optional<double>& declared, double box,
                                 long samples) {
    HypothesisReport rep;
    rep.hypothesis = name;
    rep.constant_estimate = est.value;
    rep.box = box;
    rep.samples = samples;
    if (!est.conclusive && !std::isfinite(est.value)) {
        rep.verdict = Verdict::inconclusive;
        rep.note = "evaluator overflowed in the sampling box";
        return rep;
    }
    if (declared && est.value > *declared + 1e-9 * std::max(1.0, std::abs(*declared))) {
        rep.verdict = Verdict::fail;
        rep.witness = est;
        rep.note = "sampled estimate exceeds the declared constant";
        return rep;
    }
    rep.verdict = est.conclusive ? Verdict::pass : Verdict::inconclusive;
    if (!est.conclusive) rep.note = "some samples overflowed; estimate is a partial sup";
    return rep;
}

}  // namespace

std::vector<HypothesisReport> check_hypotheses(const NonlinearityDescriptor& F, double box,
                                               int samples, double p, int N) {
    F.validate();
    std::vector<HypothesisReport> out;

    const Estimate a0 = estimate_a0(F, box, samples);
    out.push_back(constant_report("H1", a0, F.declared_a0, box, samples));

    const GrowthEnvelope env = estimate_growth_envelope(F, box, samples);
    out.push_back(constant_report("H2", env.c0, F.declared_c0, box, samples));
    out.push_back(constant_report("growth_bound", env.a, F.declared_a, box, samples));

    const Estimate d0 = estimate_d0(F, box, samples);
    out.push_back(constant_report("sign_bound", d0, F.declared_d0, box, samples));

    HypothesisReport h3;
    h3.hypothesis = "H3";
    h3.box = box;
    h3.samples = 0;
    h3.constant_estimate = F.growth_exponent_r;
    h3.verdict = validate_H3(p, N, F.growth_exponent_r) ? Verdict::pass : Verdict::fail;
    h3.note = "exponent admissibility of (p, N, r); no sampling involved";
    out.push_back(h3);

    HypothesisReport h4;
    h4.hypothesis = "H4";
    h4.box = box;
    h4.samples = samples;
    h4.constant_estimate = std::abs(F(0.0));
    h4.verdict = std::isfinite(F(0.0)) ? Verdict::pass : Verdict::fail;
    h4.note = "continuity is not numerically decidable; F(.,.,0) spot-checked finite";
    out.push_back(h4);

    return out;
}

}  // namespace caginalp
