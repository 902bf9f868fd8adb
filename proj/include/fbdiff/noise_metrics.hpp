#pragma once

#include <cstdint>

#include "fbdiff/grid.hpp"

namespace fbdiff {

/// Gamma noise controls: L looks give mean 1 and variance 1/L.
struct NoiseSpec {
    long looks = 1;
    std::uint64_t seed = 0;
};

struct QualityReport {
    double psnr_db = 0.0;
    double mae = 0.0;
};

/// i.i.d. Gamma(shape=L, scale=1/L) field. The sampler is Marsaglia-Tsang
/// shape-ratio rejection over mt19937_64 with a fixed uniform/normal
/// construction, so results are bit-reproducible across platforms.
ImageGrid gamma_noise_field(int rows, int cols, const NoiseSpec& spec);

/// f = u * eta, floored at 1.0 gray level so the noisy image stays strictly
/// positive.
ImageGrid apply_multiplicative(const ImageGrid& u, const ImageGrid& eta);

/// 10*log10(255^2 / MSE); +inf when the images coincide.
double psnr(const ImageGrid& u, const ImageGrid& ref);

/// Mean absolute deviation.
double mae(const ImageGrid& u, const ImageGrid& ref);

QualityReport quality(const ImageGrid& u, const ImageGrid& ref);

} // namespace fbdiff
