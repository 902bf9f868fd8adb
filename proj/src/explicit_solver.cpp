#include "fbdiff/explicit_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fbdiff/noise_metrics.hpp"

namespace fbdiff {

void validate(const SolverConfig& cfg) {
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("SolverConfig: need tau > 0");
    if (cfg.lambda < 0.0) throw std::invalid_argument("SolverConfig: need lambda >= 0");
    validate(FluxParams{cfg.p, cfg.delta});
    if (cfg.epsilon < 0.0) throw std::invalid_argument("SolverConfig: need epsilon >= 0");
    if (!cfg.auto_clamp && !(cfg.clamp_low < cfg.clamp_high))
        throw std::invalid_argument("SolverConfig: need clamp_low < clamp_high");
    if (cfg.max_iters < 0) throw std::invalid_argument("SolverConfig: need max_iters >= 0");
}

FluxField compute_c_fields(const ImageGrid& u, const SolverConfig& cfg) {
    const double delta = cfg.delta, p = cfg.p, eps = cfg.epsilon;
    FluxField flux{ImageGrid(u.rows, u.cols), ImageGrid(u.rows, u.cols)};
    for (int i = 0; i < u.rows; ++i) {
        for (int j = 0; j < u.cols; ++j) {
            const double dxp = diff_forward_x(u, i, j);
            const double dyp = diff_forward_y(u, i, j);
            const double rational = 1.0 / (1.0 + dxp * dxp + dyp * dyp);

            double px = 0.0, py = 0.0;
            if (p == 2.0) {
                px = delta * dxp;
                py = delta * dyp;
            } else {
                if (dxp != 0.0) {
                    const double my = minmod(dyp, diff_backward_y(u, i, j));
                    const double bx = std::sqrt(dxp * dxp + my * my);
                    px = delta * dxp / std::pow(bx + eps, 2.0 - p);
                }
                if (dyp != 0.0) {
                    const double mx = minmod(dxp, diff_backward_x(u, i, j));
                    const double by = std::sqrt(dyp * dyp + mx * mx);
                    py = delta * dyp / std::pow(by + eps, 2.0 - p);
                }
            }
            flux.cx.at(i, j) = dxp * rational + px;
            flux.cy.at(i, j) = dyp * rational + py;
        }
    }
    return flux;
}

namespace {

void resolve_clamp(const SolverConfig& cfg, const ImageGrid& u0, double& lo, double& hi) {
    if (cfg.auto_clamp) {
        lo = u0.min();
        hi = u0.max();
    } else {
        lo = cfg.clamp_low;
        hi = cfg.clamp_high;
    }
}

} // namespace

ImageGrid step(const ImageGrid& u_n, const ImageGrid& u0, const ImageGrid& alpha,
               const SolverConfig& cfg) {
    if (!u_n.same_dims(u0) || !u_n.same_dims(alpha))
        throw std::invalid_argument("step: dimension mismatch");
    double lo, hi;
    resolve_clamp(cfg, u0, lo, hi);

    const FluxField flux = compute_c_fields(u_n, cfg);
    const ImageGrid div = divergence(flux, alpha);

    ImageGrid out(u_n.rows, u_n.cols);
    for (std::size_t k = 0; k < out.cells(); ++k) {
        const double un = u_n.values[k];
        double v = un + cfg.tau * div.values[k];
        if (cfg.lambda != 0.0)
            v += cfg.lambda * cfg.tau * (u0.values[k] - un) / (un * un);
        out.values[k] = std::clamp(v, lo, hi);
    }
    return out;
}

RunResult run(const ImageGrid& f, const SolverConfig& cfg, const ImageGrid* reference) {
    validate(cfg);
    if (f.rows < 2 || f.cols < 2)
        throw std::invalid_argument("run: grid must be at least 2x2");
    if (!f.all_finite() || f.min() <= 0.0)
        throw std::invalid_argument("run: input must be finite and strictly positive");
    if (cfg.stop.kind == StopKind::max_psnr_with_reference && reference == nullptr)
        throw std::invalid_argument("run: max-PSNR stopping needs a reference image");
    if (reference && !reference->same_dims(f))
        throw std::invalid_argument("run: reference dimension mismatch");

    const ImageGrid alpha = gray_indicator(f, cfg.indicator);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    auto report = [&](int iter, const ImageGrid& u) {
        StepReport r;
        r.iter = iter;
        r.psnr = reference ? psnr(u, *reference) : nan;
        r.mae = reference ? mae(u, *reference) : nan;
        r.mean_value = u.mean();
        r.min_u = u.min();
        r.max_u = u.max();
        return r;
    };

    RunResult res;
    res.u = f;
    res.history.push_back(report(0, res.u));

    ImageGrid best = res.u;
    double best_psnr = reference ? res.history.front().psnr : nan;
    int since_best = 0;

    const int total = cfg.stop.kind == StopKind::fixed_iters
                          ? cfg.stop.fixed_iters
                          : cfg.max_iters;
    for (int it = 1; it <= total; ++it) {
        ImageGrid next = step(res.u, f, alpha, cfg);
        const bool unchanged = next.values == res.u.values;

        double rel = 0.0;
        if (cfg.stop.kind == StopKind::relative_change) {
            double dn = 0.0, un = 0.0;
            for (std::size_t k = 0; k < next.cells(); ++k) {
                const double d = next.values[k] - res.u.values[k];
                dn += d * d;
                un += res.u.values[k] * res.u.values[k];
            }
            rel = std::sqrt(dn) / std::sqrt(un);
        }

        res.u = std::move(next);
        res.history.push_back(report(it, res.u));

        if (cfg.stop.kind == StopKind::max_psnr_with_reference) {
            const double cur = res.history.back().psnr;
            if (cur > best_psnr) {
                best_psnr = cur;
                best = res.u;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }
        if (unchanged) break; // exact fixed point, nothing further can change
        if (cfg.stop.kind == StopKind::relative_change && rel <= cfg.stop.tol) break;
    }

    if (cfg.stop.kind == StopKind::max_psnr_with_reference) res.u = std::move(best);
    return res;
}

double dependence_probe(const ImageGrid& f1, const ImageGrid& f2, const SolverConfig& cfg,
                        int n_steps) {
    validate(cfg);
    if (!f1.same_dims(f2))
        throw std::invalid_argument("dependence_probe: dimension mismatch");
    if (f1.min() <= 0.0 || f2.min() <= 0.0)
        throw std::invalid_argument("dependence_probe: inputs must be strictly positive");
    if (f1.values == f2.values) return 0.0;

    double denom = 0.0;
    for (std::size_t k = 0; k < f1.cells(); ++k) {
        const double d = f1.values[k] - f2.values[k];
        denom += d * d;
    }

    const ImageGrid alpha = gray_indicator(f1, cfg.indicator);
    SolverConfig c = cfg;
    if (c.auto_clamp) {
        // one shared clamp so both trajectories see identical config
        c.auto_clamp = false;
        c.clamp_low = std::min(f1.min(), f2.min());
        c.clamp_high = std::max(f1.max(), f2.max());
    }

    ImageGrid u1 = f1, u2 = f2;
    double worst = 0.0;
    for (int it = 0; it < n_steps; ++it) {
        u1 = step(u1, f1, alpha, c);
        u2 = step(u2, f2, alpha, c);
        double num = 0.0;
        for (std::size_t k = 0; k < u1.cells(); ++k) {
            const double d = u1.values[k] - u2.values[k];
            num += d * d;
        }
        worst = std::max(worst, num / denom);
    }
    return worst;
}

double diffusion_energy(const ImageGrid& u, const ImageGrid& alpha, const FluxParams& params) {
    double e = 0.0;
    for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < u.cols; ++j) {
            const double dx = diff_forward_x(u, i, j);
            const double dy = diff_forward_y(u, i, j);
            e += alpha.at(i, j) * potential_psi(std::hypot(dx, dy), params);
        }
    return e;
}

} // namespace fbdiff
