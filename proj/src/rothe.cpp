#include "fbdiff/rothe.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdiff {

void validate(const RotheConfig& cfg) {
    if (cfg.m < 1) throw std::invalid_argument("RotheConfig: need m >= 1");
    if (!(cfg.T > 0.0)) throw std::invalid_argument("RotheConfig: need T > 0");
    if (!(cfg.inner_tol > 0.0)) throw std::invalid_argument("RotheConfig: need inner_tol > 0");
    if (cfg.inner_max < 1) throw std::invalid_argument("RotheConfig: need inner_max >= 1");
    if (!(cfg.step0 > 0.0) || !(cfg.shrink > 0.0 && cfg.shrink < 1.0) || cfg.grow < 1.0)
        throw std::invalid_argument("RotheConfig: bad line-search parameters");
}

namespace {

void check_desk_scale(const ImageGrid& g) {
    const bool small_2d = g.rows <= 64 && g.cols <= 64;
    const bool line = (g.rows == 1 && g.cols <= 512) || (g.cols == 1 && g.rows <= 512);
    if (!small_2d && !line)
        throw std::invalid_argument("rothe: desk scale only (<= 64x64 or 1D <= 512)");
}

void check_inputs(const ImageGrid& v, const ImageGrid& u_prev, const ImageGrid& w_j,
                  const ImageGrid& f, const ImageGrid& alpha) {
    if (!v.same_dims(u_prev) || !v.same_dims(w_j) || !v.same_dims(f) || !v.same_dims(alpha))
        throw std::invalid_argument("rothe: dimension mismatch");
    const double l = f.min();
    if (!(l > 0.0)) throw std::invalid_argument("rothe: f must be strictly positive");
    if (w_j.min() < l)
        throw std::invalid_argument("rothe: w below min(f)");
}

} // namespace

EnergyBreakdown energy(const ImageGrid& v, const ImageGrid& u_prev, const ImageGrid& w_j,
                       const ImageGrid& f, const ImageGrid& alpha, const ConvexEnvelope& env,
                       const RotheConfig& cfg) {
    validate(cfg);
    check_desk_scale(v);
    check_inputs(v, u_prev, w_j, f, alpha);

    EnergyBreakdown e;
    const double half_m_over_t = 0.5 * cfg.m / cfg.T;
    for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < v.cols; ++j) {
            const double dx = diff_forward_x(v, i, j);
            const double dy = diff_forward_y(v, i, j);
            e.gradient_term += alpha.at(i, j) * env.value_at(std::hypot(dx, dy));
            const double dc = v.at(i, j) - u_prev.at(i, j);
            e.coupling_term += half_m_over_t * dc * dc;
            const double df = (v.at(i, j) - f.at(i, j)) / w_j.at(i, j);
            e.fidelity_term += 0.5 * df * df;
        }
    e.total = e.gradient_term + e.coupling_term + e.fidelity_term;
    return e;
}

ImageGrid truncate(const ImageGrid& v, double l, double d) {
    if (!(l < d)) throw std::invalid_argument("truncate: need l < d");
    ImageGrid out = v;
    for (double& x : out.values) x = std::clamp(x, l, d);
    return out;
}

namespace {

// exact gradient of the discrete slice energy; the diffusion part is the
// conservative divergence of the radial envelope flux
ImageGrid slice_gradient(const ImageGrid& v, const ImageGrid& u_prev, const ImageGrid& w_j,
                         const ImageGrid& f, const ImageGrid& alpha,
                         const ConvexEnvelope& env, const RotheConfig& cfg) {
    FluxField flux{ImageGrid(v.rows, v.cols), ImageGrid(v.rows, v.cols)};
    for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < v.cols; ++j) {
            const double dx = diff_forward_x(v, i, j);
            const double dy = diff_forward_y(v, i, j);
            const double norm = std::hypot(dx, dy);
            if (norm > 0.0) {
                const double q = q_star(norm, env) / norm;
                flux.cx.at(i, j) = q * dx;
                flux.cy.at(i, j) = q * dy;
            }
        }
    const ImageGrid div = divergence(flux, alpha);

    ImageGrid grad(v.rows, v.cols);
    const double m_over_t = cfg.m / cfg.T;
    for (int i = 0; i < v.rows; ++i)
        for (int j = 0; j < v.cols; ++j) {
            const double w = w_j.at(i, j);
            grad.at(i, j) = -div.at(i, j) + m_over_t * (v.at(i, j) - u_prev.at(i, j)) +
                            (v.at(i, j) - f.at(i, j)) / (w * w);
        }
    return grad;
}

} // namespace

ImageGrid minimize_slice(const ImageGrid& u_prev, const ImageGrid& w_j, const ImageGrid& f,
                         const ImageGrid& alpha, const ConvexEnvelope& env,
                         const RotheConfig& cfg) {
    validate(cfg);
    check_desk_scale(f);
    check_inputs(u_prev, u_prev, w_j, f, alpha);
    const double l = f.min(), d = f.max();
    const double slack = 1e-12 * (1.0 + std::fabs(d));
    if (u_prev.min() < l - slack || u_prev.max() > d + slack)
        throw std::invalid_argument("minimize_slice: u_prev outside [l, d]");

    ImageGrid v = u_prev;
    double e = energy(v, u_prev, w_j, f, alpha, env, cfg).total;
    if (!std::isfinite(e)) throw std::runtime_error("minimize_slice: non-finite energy");

    double eta = cfg.step0;
    for (int it = 0; it < cfg.inner_max; ++it) {
        const ImageGrid grad = slice_gradient(v, u_prev, w_j, f, alpha, env, cfg);

        bool accepted = false;
        ImageGrid candidate;
        double e_new = e;
        while (eta > 1e-16 * cfg.step0) {
            candidate = ImageGrid(v.rows, v.cols);
            for (std::size_t k = 0; k < v.cells(); ++k)
                candidate.values[k] =
                    std::clamp(v.values[k] - eta * grad.values[k], l, d);
            double move2 = 0.0;
            for (std::size_t k = 0; k < v.cells(); ++k) {
                const double dm = candidate.values[k] - v.values[k];
                move2 += dm * dm;
            }
            if (move2 == 0.0) break; // projected step does not move
            e_new = energy(candidate, u_prev, w_j, f, alpha, env, cfg).total;
            if (!std::isfinite(e_new))
                throw std::runtime_error("minimize_slice: non-finite energy");
            if (e_new <= e - cfg.armijo / eta * move2) {
                accepted = true;
                break;
            }
            eta *= cfg.shrink;
        }
        if (!accepted) break;

        const double drop = e - e_new;
        v = std::move(candidate);
        e = e_new;
        eta = std::min(eta * cfg.grow, 1e6 * cfg.step0);
        if (drop < cfg.inner_tol * (1.0 + std::fabs(e))) break;
    }
    return v;
}

ImageGrid RotheTrajectory::u_at(double t) const {
    const double pos = t * m / T;
    int j = static_cast<int>(std::floor(pos)) + 1;
    j = std::clamp(j, 1, m);
    const double lam = pos - (j - 1);
    ImageGrid out = slices[j - 1];
    for (std::size_t k = 0; k < out.cells(); ++k)
        out.values[k] += lam * (slices[j].values[k] - out.values[k]);
    return out;
}

const ImageGrid& RotheTrajectory::v_at(double t) const {
    int j = static_cast<int>(std::floor(t * m / T)) + 1;
    j = std::clamp(j, 1, m);
    return slices[j];
}

RotheTrajectory rothe_sweep(const ImageGrid& f, const std::vector<ImageGrid>& w,
                            const ImageGrid& alpha, const ConvexEnvelope& env,
                            const RotheConfig& cfg) {
    validate(cfg);
    if (static_cast<int>(w.size()) != cfg.m)
        throw std::invalid_argument("rothe_sweep: need m weight slices");

    RotheTrajectory traj;
    traj.m = cfg.m;
    traj.T = cfg.T;
    traj.slices.reserve(cfg.m + 1);
    traj.slices.push_back(f);

    const double m_over_t = cfg.m / cfg.T;
    for (int j = 1; j <= cfg.m; ++j) {
        ImageGrid next = minimize_slice(traj.slices.back(), w[j - 1], f, alpha, env, cfg);
        double diff2 = 0.0;
        for (std::size_t k = 0; k < next.cells(); ++k) {
            const double dd = next.values[k] - traj.slices.back().values[k];
            diff2 += dd * dd;
        }
        traj.apriori_sum += m_over_t * diff2;
        traj.slices.push_back(std::move(next));
    }
    return traj;
}

FixedPointResult fixed_point(const ImageGrid& f, const ImageGrid& alpha,
                             const ConvexEnvelope& env, const RotheConfig& cfg,
                             double outer_tol, int outer_max) {
    validate(cfg);
    if (outer_max < 1) throw std::invalid_argument("fixed_point: need outer_max >= 1");
    if (!(f.min() > 0.0)) throw std::invalid_argument("fixed_point: f must be positive");

    FixedPointResult res;
    std::vector<ImageGrid> w_cur(cfg.m, f);
    const double dt = cfg.T / cfg.m;

    for (int k = 1; k <= outer_max; ++k) {
        res.trajectory = rothe_sweep(f, w_cur, alpha, env, cfg);
        res.iterations = k;

        double dist2 = 0.0;
        for (int j = 1; j <= cfg.m; ++j) {
            const ImageGrid& nj = res.trajectory.slices[j];
            for (std::size_t c = 0; c < nj.cells(); ++c) {
                const double dd = nj.values[c] - w_cur[j - 1].values[c];
                dist2 += dt * dd * dd;
            }
            w_cur[j - 1] = nj;
        }
        res.distances.push_back(std::sqrt(dist2));
        if (res.distances.back() < outer_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace fbdiff
