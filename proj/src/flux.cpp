#include "fbdiff/flux.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace fbdiff {

void validate(const FluxParams& params) {
    if (!(params.p > 1.0 && params.p <= 2.0))
        throw std::invalid_argument("FluxParams: need 1 < p <= 2");
    if (!(params.delta > 0.0))
        throw std::invalid_argument("FluxParams: need delta > 0");
}

double potential_psi(double s, const FluxParams& params) {
    if (s < 0.0)
        throw std::domain_error("potential_psi: s must be >= 0");
    return 0.5 * std::log1p(s * s) + params.delta / params.p * std::pow(s, params.p);
}

double scalar_flux(double s, const FluxParams& params) {
    if (s < 0.0)
        throw std::domain_error("scalar_flux: s must be >= 0");
    if (s == 0.0) return 0.0;
    return s / (1.0 + s * s) + params.delta * std::pow(s, params.p - 1.0);
}

Vec2 flux_q(const Vec2& xi, const FluxParams& params) {
    const double norm = std::hypot(xi.x, xi.y);
    if (norm == 0.0) return {0.0, 0.0};
    const double rational = 1.0 / (1.0 + norm * norm);
    const double plap = params.delta * std::pow(norm, params.p - 2.0);
    return {xi.x * (rational + plap), xi.y * (rational + plap)};
}

namespace {

// derivative of the scalar flux; +inf at s=0 for p<2
double scalar_flux_slope(double s, const FluxParams& params) {
    const double s2 = s * s;
    const double rational = (1.0 - s2) / ((1.0 + s2) * (1.0 + s2));
    if (params.p == 2.0) return rational + params.delta;
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    return rational + params.delta * (params.p - 1.0) * std::pow(s, params.p - 2.0);
}

} // namespace

MinSlopeResult scalar_flux_min_slope(const FluxParams& params, double s_max, int n) {
    validate(params);
    if (!(s_max > 0.0) || n < 2)
        throw std::invalid_argument("scalar_flux_min_slope: need s_max > 0, n >= 2");
    const double ds = s_max / (n - 1);
    MinSlopeResult r{std::numeric_limits<double>::infinity(), 0.0};
    for (int i = 0; i < n; ++i) {
        const double s = i * ds;
        const double slope = scalar_flux_slope(s, params);
        if (slope < r.min_slope) {
            r.min_slope = slope;
            r.argmin = s;
        }
    }
    return r;
}

RadialProfile sample_radial_profile(const FluxParams& params, double s_max, int n) {
    validate(params);
    if (!(s_max > 0.0) || n < 2)
        throw std::invalid_argument("sample_radial_profile: need s_max > 0, n >= 2");
    RadialProfile prof;
    prof.s_max = s_max;
    prof.n_samples = n;
    prof.s_values.resize(n);
    prof.psi_values.resize(n);
    prof.q_values.resize(n);
    const double ds = s_max / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double s = i * ds;
        prof.s_values[i] = s;
        prof.psi_values[i] = potential_psi(s, params);
        prof.q_values[i] = scalar_flux(s, params);
    }
    return prof;
}

namespace {

double interpolate_uniform(const std::vector<double>& s, const std::vector<double>& v,
                           double x) {
    const int n = static_cast<int>(s.size());
    const double ds = s.back() / (n - 1);
    int k = static_cast<int>(x / ds);
    if (k >= n - 1) k = n - 2;
    if (k < 0) k = 0;
    const double t = (x - s[k]) / (s[k + 1] - s[k]);
    return v[k] + t * (v[k + 1] - v[k]);
}

} // namespace

double ConvexEnvelope::value_at(double s) const {
    if (s < 0.0 || s > base.s_max * (1.0 + 1e-12))
        throw std::domain_error("ConvexEnvelope::value_at: s out of [0, s_max]");
    return interpolate_uniform(base.s_values, env_values, std::min(s, base.s_max));
}

ConvexEnvelope convexify(const RadialProfile& profile) {
    const int n = profile.n_samples;
    if (n < 2 || static_cast<int>(profile.s_values.size()) != n ||
        static_cast<int>(profile.psi_values.size()) != n)
        throw std::invalid_argument("convexify: need at least 2 consistent samples");
    if (profile.s_values[0] != 0.0)
        throw std::invalid_argument("convexify: s grid must start at 0");
    const double ds0 = profile.s_values[1] - profile.s_values[0];
    for (int i = 1; i < n; ++i) {
        const double d = profile.s_values[i] - profile.s_values[i - 1];
        if (!(d > 0.0) || std::fabs(d - ds0) > 1e-9 * ds0)
            throw std::invalid_argument("convexify: s grid must be uniform and increasing");
    }

    const std::vector<double>& s = profile.s_values;
    const std::vector<double>& psi = profile.psi_values;

    // Andrew monotone chain, lower hull of points sorted by s. cross <= 0
    // pops collinear middle points, so consecutive hull edges have strictly
    // increasing slopes.
    std::vector<int> hull;
    hull.reserve(n);
    for (int i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2];
            const int b = hull[hull.size() - 1];
            const double cross = (s[b] - s[a]) * (psi[i] - psi[a]) -
                                 (psi[b] - psi[a]) * (s[i] - s[a]);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }

    const int nseg = static_cast<int>(hull.size()) - 1;
    std::vector<double> edge_slope(nseg);
    for (int k = 0; k < nseg; ++k)
        edge_slope[k] = (psi[hull[k + 1]] - psi[hull[k]]) / (s[hull[k + 1]] - s[hull[k]]);

    ConvexEnvelope env;
    env.base = profile;
    env.env_values.resize(n);
    env.slopes.resize(n);
    env.contact_mask.assign(n, false);

    const bool have_q = static_cast<int>(profile.q_values.size()) == n;
    auto derivative_estimate = [&](int i) {
        if (have_q) return profile.q_values[i];
        if (i == 0) return (psi[1] - psi[0]) / (s[1] - s[0]);
        if (i == n - 1) return (psi[n - 1] - psi[n - 2]) / (s[n - 1] - s[n - 2]);
        return (psi[i + 1] - psi[i - 1]) / (s[i + 1] - s[i - 1]);
    };

    int k = 0;
    for (int i = 0; i < n; ++i) {
        // advance to the edge whose span [hull[k], hull[k+1]] contains i
        while (k < nseg - 1 && i > hull[k + 1]) ++k;

        if (i == hull[k] || i == hull[k + 1]) {
            env.env_values[i] = psi[i];
            // vertex slope: derivative estimate clamped between the adjacent
            // edge slopes (slope 0 admissible at s=0 by even extension)
            const int kv = (i == hull[k]) ? k : k + 1;
            const double lo = kv > 0 ? edge_slope[kv - 1] : 0.0;
            const double hi = kv < nseg ? edge_slope[kv]
                                        : std::numeric_limits<double>::infinity();
            env.slopes[i] = std::clamp(derivative_estimate(i), std::min(lo, hi), hi);
        } else {
            const int a = hull[k];
            env.env_values[i] = std::min(psi[i], psi[a] + edge_slope[k] * (s[i] - s[a]));
            env.slopes[i] = edge_slope[k];
        }
    }

    // Contact needs value AND slope agreement. Near a tangency the grid hull
    // touches the profile at samples whose true flux still differs from the
    // chord slope by O(g' * ds); those are not contact points of the
    // continuum envelope and the flux identity q = q** would fail on them.
    for (int i = 0; i < n; ++i) {
        const double tol = 1e-8 * (1.0 + std::fabs(psi[i]));
        env.contact_mask[i] = std::fabs(env.env_values[i] - psi[i]) <= tol &&
                              std::fabs(env.slopes[i] - derivative_estimate(i)) <=
                                  1e-7 * (1.0 + std::fabs(env.slopes[i]));
    }

    for (int kk = 0; kk < nseg; ++kk)
        if (hull[kk + 1] - hull[kk] >= 2)
            env.affine_segments.emplace_back(hull[kk], hull[kk + 1]);

    return env;
}

double q_star(double s, const ConvexEnvelope& env) {
    if (s < 0.0 || s > env.base.s_max * (1.0 + 1e-12))
        throw std::domain_error("q_star: s out of [0, s_max]");
    return interpolate_uniform(env.base.s_values, env.slopes, std::min(s, env.base.s_max));
}

StructureReport verify_structure(const RadialProfile& profile, const ConvexEnvelope& env,
                                 const FluxParams& params, const GammaScan& scan) {
    const int n = profile.n_samples;
    const double p = params.p;

    // tightest admissible constants on this grid
    double g2_needed = 0.0;
    double g1_psi_cap = std::numeric_limits<double>::infinity();   // form max{g1 s^p - 1, 0} <= Psi
    double g1_env_cap = std::numeric_limits<double>::infinity();   // form g1 s^p <= Psi**
    for (int i = 0; i < n; ++i) {
        const double s = profile.s_values[i];
        if (s == 0.0) continue;
        const double sp = std::pow(s, p);
        const double sp1 = std::pow(s, p - 1.0);
        const double psi = profile.psi_values[i];
        const double g = scalar_flux(s, params);
        g2_needed = std::max(g2_needed, (psi - 1.0) / sp);
        g2_needed = std::max(g2_needed, std::fabs(g) / sp1);
        g2_needed = std::max(g2_needed, (env.env_values[i] - 1.0) / sp);
        g2_needed = std::max(g2_needed, (std::fabs(env.slopes[i]) - 1.0) / sp1);
        g1_psi_cap = std::min(g1_psi_cap, (psi + 1.0) / sp);
        g1_env_cap = std::min(g1_env_cap, env.env_values[i] / sp);
    }
    const double g1_cap = std::min(g1_psi_cap, g1_env_cap);

    std::vector<double> candidates(scan.count);
    if (scan.count == 1) {
        candidates[0] = scan.lo;
    } else {
        const double lr = std::log(scan.lo), hr = std::log(scan.hi);
        for (int i = 0; i < scan.count; ++i)
            candidates[i] = std::exp(lr + (hr - lr) * i / (scan.count - 1));
    }

    StructureReport rep;
    double best_g1 = 0.0, best_g2 = std::numeric_limits<double>::infinity();
    for (double c : candidates) {
        if (c <= g1_cap) best_g1 = std::max(best_g1, c);
        if (c >= g2_needed) best_g2 = std::min(best_g2, c);
    }
    best_g1 = std::min(best_g1, best_g2); // gamma1 <= gamma2 stays satisfiable
    rep.holds = best_g1 > 0.0 && std::isfinite(best_g2);
    if (rep.holds) {
        rep.gamma1 = best_g1;
        rep.gamma2 = best_g2;
    } else {
        rep.gamma1 = candidates.front();
        rep.gamma2 = candidates.back();
    }

    // locate the sample with the smallest slack at the reported pair
    double worst = std::numeric_limits<double>::infinity();
    bool psi_form = true, env_form = true;
    for (int i = 0; i < n; ++i) {
        const double s = profile.s_values[i];
        const double sp = std::pow(s, p);
        const double sp1 = s == 0.0 ? 0.0 : std::pow(s, p - 1.0);
        const double psi = profile.psi_values[i];
        const double g = scalar_flux(s, params);
        const double slacks[6] = {
            psi - std::max(rep.gamma1 * sp - 1.0, 0.0),
            rep.gamma2 * sp + 1.0 - psi,
            rep.gamma2 * sp1 - std::fabs(g),
            env.env_values[i] - rep.gamma1 * sp,
            rep.gamma2 * sp + 1.0 - env.env_values[i],
            rep.gamma2 * sp1 + 1.0 - std::fabs(env.slopes[i]),
        };
        if (slacks[0] < 0.0) psi_form = false;
        if (slacks[3] < 0.0) env_form = false;
        const double m = *std::min_element(slacks, slacks + 6);
        if (m < worst) {
            worst = m;
            rep.worst_point = s;
        }
    }
    rep.lower_bound_psi_holds = psi_form;
    rep.lower_bound_env_holds = env_form;
    if (rep.holds && worst < 0.0) rep.holds = false;
    return rep;
}

void export_envelope_tables(const ConvexEnvelope& env, const std::string& psi_path,
                            const std::string& q_path) {
    std::ofstream fp(psi_path), fq(q_path);
    if (!fp || !fq)
        throw std::runtime_error("export_envelope_tables: cannot open output file");
    fp.precision(17);
    fq.precision(17);
    for (int i = 0; i < env.base.n_samples; ++i) {
        fp << env.base.s_values[i] << ' ' << env.env_values[i] << '\n';
        fq << env.base.s_values[i] << ' ' << env.slopes[i] << '\n';
    }
}

} // namespace fbdiff
