#pragma once

#include <vector>

#include "fbdiff/flux.hpp"
#include "fbdiff/grid.hpp"
#include "fbdiff/indicator.hpp"

namespace fbdiff {

enum class StopKind {
    max_psnr_with_reference, // track best PSNR vs reference, patience window
    fixed_iters,             // exactly stop.fixed_iters steps
    relative_change,         // stop when ||u^{n+1}-u^n|| <= tol * ||u^n||
};

struct StopRule {
    StopKind kind = StopKind::max_psnr_with_reference;
    int fixed_iters = 0;
    double tol = 1e-6;
};

struct SolverConfig {
    double tau = 0.05;
    double lambda = 1.0;
    double p = 2.0;
    double delta = 0.1;
    double epsilon = 1e-8;     // regularizes (b + eps)^(2-p); unused for p = 2
    double clamp_low = 0.0;    // l
    double clamp_high = 0.0;   // d
    bool auto_clamp = true;    // derive [l, d] from the data per run
    int max_iters = 500;
    int patience = 10;
    StopRule stop{};
    IndicatorParams indicator{};
};

void validate(const SolverConfig& cfg);

struct StepReport {
    int iter = 0;
    double psnr = 0.0; // NaN without a reference
    double mae = 0.0;  // NaN without a reference
    double mean_value = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
};

/// b/c flux fields of the explicit scheme:
///   b_x = sqrt((D+x u)^2 + minmod(D+y u, D-y u)^2)
///   c_x = D+x u / (1 + (D+x u)^2 + (D+y u)^2) + delta * D+x u / (b_x + eps)^(2-p)
/// and symmetrically in y. For p = 2 the p-term is exactly delta * D+ u.
FluxField compute_c_fields(const ImageGrid& u, const SolverConfig& cfg);

/// One explicit step:
///   u^{n+1} = u^n + tau * div(alpha * c) + lambda * tau * (u0 - u^n)/(u^n)^2
/// clamped to [l, d]. With auto_clamp the bounds come from u0.
ImageGrid step(const ImageGrid& u_n, const ImageGrid& u0, const ImageGrid& alpha,
               const SolverConfig& cfg);

struct RunResult {
    ImageGrid u;
    std::vector<StepReport> history;
};

/// Full scheme: u^0 = f, alpha built once from f, iterate step() under the
/// configured stopping rule. Under max-PSNR stopping the best iterate seen
/// (including u^0) is returned.
RunResult run(const ImageGrid& f, const SolverConfig& cfg,
              const ImageGrid* reference = nullptr);

/// Max over steps of ||u1 - u2||_2^2 / ||f1 - f2||_2^2 for two trajectories
/// run with identical config and alpha built from f1. Returns 0 for f1 = f2.
double dependence_probe(const ImageGrid& f1, const ImageGrid& f2, const SolverConfig& cfg,
                        int n_steps);

/// Diffusion part of the discrete energy, sum of alpha * Psi(|D+ u|).
double diffusion_energy(const ImageGrid& u, const ImageGrid& alpha, const FluxParams& params);

} // namespace fbdiff
