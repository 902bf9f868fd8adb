#pragma once

#include <vector>

#include "fbdiff/grid.hpp"

namespace fbdiff {

/// Gaussian smoothing and exponent controls for the gray-level indicator.
struct IndicatorParams {
    double sigma = 1.0;
    double beta = 1.0;
    int radius = 4;
};

/// Params with the conventional truncation radius ceil(4*sigma).
IndicatorParams make_indicator_params(double sigma, double beta);

void validate(const IndicatorParams& params);

/// Normalized separable 1D kernel of length 2*radius+1, entries
/// proportional to exp(-k^2/(2 sigma^2)).
std::vector<double> gaussian_kernel(const IndicatorParams& params);

/// Separable Gaussian convolution with reflective boundary handling.
ImageGrid convolve(const ImageGrid& f, const IndicatorParams& params);

/// Gray-level indicator alpha = (f_sigma / max f_sigma)^beta, in (0, 1].
/// Requires strictly positive input.
ImageGrid gray_indicator(const ImageGrid& f, const IndicatorParams& params);

} // namespace fbdiff
