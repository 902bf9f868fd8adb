#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fbdiff/flux.hpp"

using namespace fbdiff;

namespace {

// quadrature oracle: adaptive Simpson of the scalar flux from 0 to s
double simpson(double a, double b, const FluxParams& p) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 *
           (scalar_flux(a, p) + 4.0 * scalar_flux(m, p) + scalar_flux(b, p));
}

double integrate_flux(double a, double b, const FluxParams& p, double tol) {
    const double whole = simpson(a, b, p);
    const double m = 0.5 * (a + b);
    const double split = simpson(a, m, p) + simpson(m, b, p);
    if (std::fabs(split - whole) < 15.0 * tol) return split + (split - whole) / 15.0;
    return integrate_flux(a, m, p, tol / 2) + integrate_flux(m, b, p, tol / 2);
}

// brute-force hull oracle: Jarvis march by chord-slope minimization over all
// remaining sample pairs
std::vector<int> jarvis_lower_hull(const std::vector<double>& s,
                                   const std::vector<double>& psi) {
    const int n = static_cast<int>(s.size());
    std::vector<int> hull{0};
    int cur = 0;
    while (cur != n - 1) {
        int best = cur + 1;
        double best_slope = (psi[best] - psi[cur]) / (s[best] - s[cur]);
        for (int k = cur + 2; k < n; ++k) {
            const double slope = (psi[k] - psi[cur]) / (s[k] - s[cur]);
            if (slope < best_slope || (slope == best_slope && k > best)) {
                best = k;
                best_slope = slope;
            }
        }
        hull.push_back(best);
        cur = best;
    }
    return hull;
}

std::vector<double> hull_values(const std::vector<int>& hull, const std::vector<double>& s,
                                const std::vector<double>& psi) {
    std::vector<double> env(s.size());
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const int a = hull[k], b = hull[k + 1];
        const double slope = (psi[b] - psi[a]) / (s[b] - s[a]);
        for (int i = a; i <= b; ++i) env[i] = psi[a] + slope * (s[i] - s[a]);
    }
    return env;
}

} // namespace

TEST_CASE("potential anchored at zero and strictly increasing") {
    const FluxParams p{2.0, 0.1};
    CHECK(potential_psi(0.0, p) == 0.0);
    double prev = 0.0;
    for (double s = 0.1; s < 20.0; s += 0.1) {
        const double v = potential_psi(s, p);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(potential_psi(-1.0, p), std::domain_error);
}

TEST_CASE("potential matches the flux quadrature oracle") {
    {
        const FluxParams p{2.0, 0.1};
        const double expected = 0.5 * std::log(2.0) + 0.05; // 0.39657359027997264
        CHECK(potential_psi(1.0, p) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(integrate_flux(0.0, 1.0, p, 1e-12) ==
              doctest::Approx(potential_psi(1.0, p)).epsilon(1e-9));
    }
    {
        const FluxParams p{1.5, 0.3};
        const double expected = 0.5 * std::log(5.0) + 0.2 * std::pow(2.0, 1.5);
        CHECK(potential_psi(2.0, p) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(integrate_flux(0.0, 2.0, p, 1e-12) ==
              doctest::Approx(potential_psi(2.0, p)).epsilon(1e-9));
    }
}

TEST_CASE("vector flux point values") {
    const Vec2 zero = flux_q({0.0, 0.0}, FluxParams{1.7, 0.5});
    CHECK(zero.x == 0.0);
    CHECK(zero.y == 0.0);

    const Vec2 a = flux_q({1.0, 0.0}, FluxParams{2.0, 0.1});
    CHECK(a.x == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(a.y == 0.0);

    const Vec2 b = flux_q({0.0, 2.0}, FluxParams{1.5, 0.3});
    CHECK(b.x == 0.0);
    CHECK(b.y == doctest::Approx(0.4 + 0.3 * std::pow(2.0, -0.5) * 2.0).epsilon(1e-14));
}

TEST_CASE("vector flux matches central differences of the potential") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> mag(0.1, 10.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * 3.14159265358979);
    for (const FluxParams p : {FluxParams{2.0, 0.1}, FluxParams{1.5, 0.3}}) {
        for (int t = 0; t < 100; ++t) {
            const double r = mag(rng), th = ang(rng);
            const Vec2 xi{r * std::cos(th), r * std::sin(th)};
            const double h = 1e-6 * (1.0 + r);
            const auto psi_at = [&](double x, double y) {
                return potential_psi(std::hypot(x, y), p);
            };
            const double gx = (psi_at(xi.x + h, xi.y) - psi_at(xi.x - h, xi.y)) / (2 * h);
            const double gy = (psi_at(xi.x, xi.y + h) - psi_at(xi.x, xi.y - h)) / (2 * h);
            const Vec2 q = flux_q(xi, p);
            const double scale = std::max(1.0, std::hypot(q.x, q.y));
            CHECK(std::fabs(q.x - gx) / scale <= 1e-5);
            CHECK(std::fabs(q.y - gy) / scale <= 1e-5);
        }
    }
}

TEST_CASE("minimum flux slope marks the forward-backward transition") {
    // closed form for p = 2: min slope = delta - 1/8 at s = sqrt(3)
    const MinSlopeResult a = scalar_flux_min_slope({2.0, 0.2}, 10.0, 100001);
    CHECK(a.min_slope == doctest::Approx(0.075).epsilon(1e-6));
    CHECK(a.argmin == doctest::Approx(std::sqrt(3.0)).epsilon(1e-3));

    const MinSlopeResult b = scalar_flux_min_slope({2.0, 0.1}, 10.0, 100001);
    CHECK(b.min_slope == doctest::Approx(-0.025).epsilon(1e-6));

    const MinSlopeResult c = scalar_flux_min_slope({2.0, 0.125}, 10.0, 1000001);
    CHECK(std::fabs(c.min_slope) <= 1e-6);
}

TEST_CASE("bisection over delta finds the 1/8 threshold") {
    double lo = 0.01, hi = 0.3;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (scalar_flux_min_slope({2.0, mid}, 10.0, 20001).min_slope < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    CHECK(0.5 * (lo + hi) == doctest::Approx(0.125).epsilon(1e-3));
}

TEST_CASE("envelope of a convex profile is the profile itself") {
    const RadialProfile prof = sample_radial_profile({2.0, 0.2}, 20.0, 2001);
    const ConvexEnvelope env = convexify(prof);
    CHECK(env.affine_segments.empty());
    for (int i = 0; i < prof.n_samples; ++i) {
        CHECK(env.env_values[i] == doctest::Approx(prof.psi_values[i]).epsilon(1e-12));
        CHECK(env.contact_mask[i]);
    }
}

TEST_CASE("two-point profile collapses to its chord") {
    RadialProfile prof;
    prof.s_values = {0.0, 1.0};
    prof.psi_values = {0.0, 1.0};
    prof.s_max = 1.0;
    prof.n_samples = 2;
    const ConvexEnvelope env = convexify(prof);
    CHECK(env.env_values[0] == 0.0);
    CHECK(env.env_values[1] == 1.0);
    CHECK(env.slopes[0] == doctest::Approx(1.0));
    CHECK(env.slopes[1] == doctest::Approx(1.0));
}

TEST_CASE("convexify rejects degenerate profiles") {
    RadialProfile prof;
    prof.s_values = {0.0};
    prof.psi_values = {0.0};
    prof.s_max = 0.0;
    prof.n_samples = 1;
    CHECK_THROWS_AS(convexify(prof), std::invalid_argument);
}

TEST_CASE("nonconvex case matches the brute-force hull oracle") {
    const RadialProfile prof = sample_radial_profile({2.0, 0.05}, 50.0, 5001);
    const ConvexEnvelope env = convexify(prof);

    const std::vector<int> hull = jarvis_lower_hull(prof.s_values, prof.psi_values);
    const std::vector<double> oracle = hull_values(hull, prof.s_values, prof.psi_values);
    for (int i = 0; i < prof.n_samples; ++i)
        CHECK(env.env_values[i] == doctest::Approx(oracle[i]).epsilon(1e-10));

    // exactly one maximal affine segment, matching the oracle's skipping edge
    std::vector<std::pair<int, int>> oracle_segments;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k)
        if (hull[k + 1] - hull[k] >= 2) oracle_segments.emplace_back(hull[k], hull[k + 1]);
    REQUIRE(oracle_segments.size() == 1);
    REQUIRE(env.affine_segments.size() == 1);
    CHECK(env.affine_segments[0] == oracle_segments[0]);

    const auto [a, b] = env.affine_segments[0];
    const double chord = (prof.psi_values[b] - prof.psi_values[a]) /
                         (prof.s_values[b] - prof.s_values[a]);
    for (int i = a + 1; i < b; ++i) {
        CHECK(!env.contact_mask[i]);
        CHECK(env.slopes[i] == doctest::Approx(chord).epsilon(1e-12));
    }
    // q_star strictly inside the segment returns the chord slope
    const double mid = 0.5 * (prof.s_values[a + 1] + prof.s_values[b - 1]);
    CHECK(q_star(mid, env) == doctest::Approx(chord).epsilon(1e-12));
}

TEST_CASE("envelope invariants on sampled profiles") {
    std::mt19937_64 rng(77);
    for (const FluxParams p : {FluxParams{2.0, 0.05}, FluxParams{2.0, 0.2},
                               FluxParams{1.5, 0.3}}) {
        const RadialProfile prof = sample_radial_profile(p, 50.0, 50001);
        const ConvexEnvelope env = convexify(prof);

        for (int i = 0; i < prof.n_samples; ++i)
            CHECK(env.env_values[i] <= prof.psi_values[i]);

        // equality outside affine segments
        std::vector<bool> inside(prof.n_samples, false);
        for (const auto& [a, b] : env.affine_segments)
            for (int i = a + 1; i < b; ++i) inside[i] = true;
        for (int i = 0; i < prof.n_samples; ++i)
            if (!inside[i])
                CHECK(std::fabs(env.env_values[i] - prof.psi_values[i]) <=
                      1e-9 * (1.0 + std::fabs(prof.psi_values[i])));

        // midpoint convexity and monotone slopes on random pairs
        std::uniform_int_distribution<int> pick(0, prof.n_samples - 1);
        for (int t = 0; t < 2000; ++t) {
            int i = pick(rng), j = pick(rng);
            if (i > j) std::swap(i, j);
            const double si = prof.s_values[i], sj = prof.s_values[j];
            CHECK(env.value_at(0.5 * (si + sj)) <=
                  0.5 * (env.env_values[i] + env.env_values[j]) + 1e-9);
            CHECK(q_star(si, env) <= q_star(sj, env) + 1e-12);
        }

        // contact agreement with the scalar flux
        for (int i = 0; i < prof.n_samples; ++i)
            if (env.contact_mask[i])
                CHECK(std::fabs(q_star(prof.s_values[i], env) -
                                scalar_flux(prof.s_values[i], p)) <= 1e-6);

        CHECK(q_star(0.0, env) == 0.0);
        CHECK_THROWS_AS(q_star(-0.5, env), std::domain_error);
        CHECK_THROWS_AS(q_star(51.0, env), std::domain_error);
    }
}

TEST_CASE("structure conditions hold for the standard parameter sets") {
    for (const FluxParams p : {FluxParams{2.0, 0.1}, FluxParams{1.5, 0.3}}) {
        const RadialProfile prof = sample_radial_profile(p, 50.0, 20001);
        const ConvexEnvelope env = convexify(prof);
        const StructureReport rep = verify_structure(prof, env, p);
        REQUIRE(rep.holds);
        CHECK(rep.gamma1 > 0.0);
        CHECK(rep.gamma1 <= rep.gamma2);
        CHECK(rep.lower_bound_psi_holds);

        // oracle: re-check every condition directly at the reported pair
        for (int i = 0; i < prof.n_samples; ++i) {
            const double s = prof.s_values[i];
            const double sp = std::pow(s, p.p);
            const double sp1 = s == 0.0 ? 0.0 : std::pow(s, p.p - 1.0);
            CHECK(std::max(rep.gamma1 * sp - 1.0, 0.0) <=
                  prof.psi_values[i] * (1 + 1e-12) + 1e-12);
            CHECK(prof.psi_values[i] <= rep.gamma2 * sp + 1.0 + 1e-12);
            CHECK(std::fabs(scalar_flux(s, p)) <= rep.gamma2 * sp1 + 1e-12);
            CHECK(env.env_values[i] <= rep.gamma2 * sp + 1.0 + 1e-12);
            CHECK(std::fabs(env.slopes[i]) <= rep.gamma2 * sp1 + 1.0 + 1e-12);
            if (rep.lower_bound_env_holds)
                CHECK(rep.gamma1 * sp <= env.env_values[i] * (1 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("degenerate single-pair scan reports the violation") {
    const FluxParams p{2.0, 0.1};
    const RadialProfile prof = sample_radial_profile(p, 50.0, 5001);
    const ConvexEnvelope env = convexify(prof);
    const StructureReport rep = verify_structure(prof, env, p, GammaScan{1.0, 1.0, 1});
    CHECK(!rep.holds);
    // gamma1 = 1 fails the envelope lower bound hardest at the far end
    CHECK(rep.worst_point == doctest::Approx(50.0));
}
