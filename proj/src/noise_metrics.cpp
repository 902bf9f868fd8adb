#include "fbdiff/noise_metrics.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fbdiff {

namespace {

class GammaSampler {
public:
    GammaSampler(double shape, double scale, std::uint64_t seed)
        : shape_(shape), scale_(scale), rng_(seed) {
        d_ = shape_ - 1.0 / 3.0;
        c_ = 1.0 / std::sqrt(9.0 * d_);
    }

    double operator()() {
        // Marsaglia-Tsang, valid for shape >= 1
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c_ * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d_ * v * scale_;
            if (std::log(u) < 0.5 * x * x + d_ * (1.0 - v + std::log(v)))
                return d_ * v * scale_;
        }
    }

private:
    double uniform() {
        // 53-bit mantissa in (0, 1)
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double a, b, r2;
        do {
            a = 2.0 * uniform() - 1.0;
            b = 2.0 * uniform() - 1.0;
            r2 = a * a + b * b;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = b * f;
        have_spare_ = true;
        return a * f;
    }

    double shape_, scale_, d_, c_;
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace

ImageGrid gamma_noise_field(int rows, int cols, const NoiseSpec& spec) {
    if (spec.looks < 1)
        throw std::invalid_argument("gamma_noise_field: need looks >= 1");
    const double shape = static_cast<double>(spec.looks);
    GammaSampler sample(shape, 1.0 / shape, spec.seed);
    ImageGrid eta(rows, cols);
    for (double& v : eta.values) v = sample();
    return eta;
}

ImageGrid apply_multiplicative(const ImageGrid& u, const ImageGrid& eta) {
    if (!u.same_dims(eta))
        throw std::invalid_argument("apply_multiplicative: dimension mismatch");
    ImageGrid f(u.rows, u.cols);
    for (std::size_t k = 0; k < u.cells(); ++k)
        f.values[k] = std::max(1.0, u.values[k] * eta.values[k]);
    return f;
}

double psnr(const ImageGrid& u, const ImageGrid& ref) {
    if (!u.same_dims(ref))
        throw std::invalid_argument("psnr: dimension mismatch");
    double mse = 0.0;
    for (std::size_t k = 0; k < u.cells(); ++k) {
        const double d = u.values[k] - ref.values[k];
        mse += d * d;
    }
    mse /= static_cast<double>(u.cells());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double mae(const ImageGrid& u, const ImageGrid& ref) {
    if (!u.same_dims(ref))
        throw std::invalid_argument("mae: dimension mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < u.cells(); ++k)
        acc += std::fabs(u.values[k] - ref.values[k]);
    return acc / static_cast<double>(u.cells());
}

QualityReport quality(const ImageGrid& u, const ImageGrid& ref) {
    return {psnr(u, ref), mae(u, ref)};
}

} // namespace fbdiff
