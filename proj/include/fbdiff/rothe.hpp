#pragma once

#include <vector>

#include "fbdiff/flux.hpp"
#include "fbdiff/grid.hpp"

namespace fbdiff {

/// Semi-discrete (time-sliced) scheme controls. Grids are desk scale only:
/// at most 64x64, or 1D with at most 512 cells.
struct RotheConfig {
    int m = 8;               // time slices
    double T = 1.0;          // horizon
    double inner_tol = 1e-10; // energy-decrease stop for the slice minimizer
    int inner_max = 500;
    // backtracking line search
    double step0 = 1.0;
    double shrink = 0.5;
    double grow = 2.0;
    double armijo = 1e-4;
};

void validate(const RotheConfig& cfg);

struct EnergyBreakdown {
    double gradient_term = 0.0; // sum alpha * Psi**(|D+ v|)
    double coupling_term = 0.0; // (m/2T) ||v - u_prev||^2
    double fidelity_term = 0.0; // ||(v - f)/w||^2 / 2
    double total = 0.0;
};

/// Relaxed slice energy
///   E**(v; u_prev) = sum alpha*Psi**(|D+ v|) + (m/2T)(v-u_prev)^2
///                    + (v-f)^2 / (2 w^2)
/// with forward differences and mirrored ghosts. w must be >= min(f) > 0.
EnergyBreakdown energy(const ImageGrid& v, const ImageGrid& u_prev, const ImageGrid& w_j,
                       const ImageGrid& f, const ImageGrid& alpha, const ConvexEnvelope& env,
                       const RotheConfig& cfg);

/// Pointwise clamp to [l, d]; never increases the slice energy when u_prev,
/// f and w all lie in [l, d].
ImageGrid truncate(const ImageGrid& v, double l, double d);

/// Projected descent on E** starting from u_prev: gradient steps using the
/// envelope slope q** for the diffusion term, backtracking that only accepts
/// energy decrease, truncation to [min f, max f] after every step.
ImageGrid minimize_slice(const ImageGrid& u_prev, const ImageGrid& w_j, const ImageGrid& f,
                         const ImageGrid& alpha, const ConvexEnvelope& env,
                         const RotheConfig& cfg);

struct RotheTrajectory {
    std::vector<ImageGrid> slices; // m+1 grids, slices[0] = f
    int m = 0;
    double T = 0.0;
    double apriori_sum = 0.0; // (m/T) * sum_j ||u_j - u_{j-1}||_2^2

    /// Time-linear interpolant through the slices.
    ImageGrid u_at(double t) const;
    /// Piecewise-constant selector, u_m^j on ((j-1)T/m, jT/m].
    const ImageGrid& v_at(double t) const;
};

/// Chain of slice minimizations u^j = argmin E**(.; u^{j-1}) with the given
/// per-slice weights w (m grids, w[j-1] used for slice j).
RotheTrajectory rothe_sweep(const ImageGrid& f, const std::vector<ImageGrid>& w,
                            const ImageGrid& alpha, const ConvexEnvelope& env,
                            const RotheConfig& cfg);

struct FixedPointResult {
    RotheTrajectory trajectory;
    int iterations = 0;
    bool converged = false;
    std::vector<double> distances; // successive L2(Q_T) distances, one per sweep
};

/// Outer iteration w -> u_w: start from the constant-in-time extension of f,
/// re-sweep against the previous trajectory sampled at the slice times, stop
/// when the discrete L2(Q_T) distance between successive iterates falls
/// below outer_tol. Non-convergence within outer_max is flagged, not thrown.
FixedPointResult fixed_point(const ImageGrid& f, const ImageGrid& alpha,
                             const ConvexEnvelope& env, const RotheConfig& cfg,
                             double outer_tol, int outer_max);

} // namespace fbdiff
