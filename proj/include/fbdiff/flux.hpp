#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fbdiff {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Model constants of the diffusion flux, 1 < p <= 2, delta > 0.
struct FluxParams {
    double p = 2.0;
    double delta = 0.1;
};

void validate(const FluxParams& params);

/// Radial potential Psi(s) = 0.5*ln(1+s^2) + (delta/p)*s^p, the antiderivative
/// of the scalar flux anchored at Psi(0) = 0.
double potential_psi(double s, const FluxParams& params);

/// Scalar (radial) flux g(s) = s/(1+s^2) + delta*s^(p-1) = Psi'(s).
double scalar_flux(double s, const FluxParams& params);

/// Vector flux q(xi) = xi/(1+|xi|^2) + delta*|xi|^(p-2)*xi, q(0) = 0.
Vec2 flux_q(const Vec2& xi, const FluxParams& params);

struct MinSlopeResult {
    double min_slope = 0.0;
    double argmin = 0.0;
};

/// Minimum over a uniform sample grid on [0, s_max] of g'(s). The equation is
/// of purely forward type iff min_slope >= 0.
MinSlopeResult scalar_flux_min_slope(const FluxParams& params, double s_max, int n);

/// Uniformly sampled radial potential. q_values carries the generating scalar
/// flux at the same nodes when known (used for exact envelope slopes at
/// contact points); it may be left empty for a bare (s, Psi) table.
struct RadialProfile {
    std::vector<double> s_values;
    std::vector<double> psi_values;
    std::vector<double> q_values;
    double s_max = 0.0;
    int n_samples = 0;

    double spacing() const { return s_max / (n_samples - 1); }
};

RadialProfile sample_radial_profile(const FluxParams& params, double s_max = 50.0,
                                    int n = 50001);

/// Lower convex envelope of a radial profile on its sample grid.
/// env_values <= psi_values pointwise; slopes is a nondecreasing sampling of
/// the envelope derivative; contact_mask marks samples where the envelope
/// touches the profile; affine_segments lists maximal sample-index ranges
/// [first, last] spanned by hull edges that skip at least one sample.
struct ConvexEnvelope {
    RadialProfile base;
    std::vector<double> env_values;
    std::vector<double> slopes;
    std::vector<bool> contact_mask;
    std::vector<std::pair<int, int>> affine_segments;

    /// Envelope value at s by linear interpolation. Domain [0, s_max].
    double value_at(double s) const;
};

ConvexEnvelope convexify(const RadialProfile& profile);

/// Envelope slope at s (linear interpolation of the slope samples).
double q_star(double s, const ConvexEnvelope& env);

/// Candidate grid for the structure-condition scan: count values log-spaced
/// on [lo, hi] for each of gamma1, gamma2.
struct GammaScan {
    double lo = 1e-4;
    double hi = 16.0;
    int count = 81;
};

struct StructureReport {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    bool holds = false;
    double worst_point = 0.0;
    // which potential lower-bound form held for the reported pair
    bool lower_bound_psi_holds = false; // max{g1*s^p - 1, 0} <= Psi
    bool lower_bound_env_holds = false; // g1*s^p <= Psi**
};

/// Grid scan for constants 0 < gamma1 <= gamma2 such that on the sample grid
///   max{g1*s^p - 1, 0} <= Psi(s) <= g2*s^p + 1,
///   |Psi'(s)| <= g2*s^(p-1),
///   g1*s^p <= Psi**(s) <= g2*s^p + 1,
///   |q**(s)| <= g2*s^(p-1) + 1.
StructureReport verify_structure(const RadialProfile& profile, const ConvexEnvelope& env,
                                 const FluxParams& params, const GammaScan& scan = {});

/// Write the envelope as two-column text tables: (s, Psi**) and (s, q**).
void export_envelope_tables(const ConvexEnvelope& env, const std::string& psi_path,
                            const std::string& q_path);

} // namespace fbdiff
