#include "fbdiff/indicator.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdiff {

IndicatorParams make_indicator_params(double sigma, double beta) {
    IndicatorParams p;
    p.sigma = sigma;
    p.beta = beta;
    p.radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    return p;
}

void validate(const IndicatorParams& params) {
    if (!(params.sigma > 0.0) || !(params.beta > 0.0) || params.radius < 1)
        throw std::invalid_argument("IndicatorParams: need sigma > 0, beta > 0, radius >= 1");
}

std::vector<double> gaussian_kernel(const IndicatorParams& params) {
    validate(params);
    const int r = params.radius;
    std::vector<double> kernel(2 * r + 1);
    double sum = 0.0;
    for (int k = -r; k <= r; ++k) {
        const double w = std::exp(-0.5 * k * k / (params.sigma * params.sigma));
        kernel[k + r] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;
    return kernel;
}

namespace {

// fold an index into [0, n) by repeated half-sample reflection; handles
// kernels wider than the grid
int reflect(int idx, int n) {
    while (idx < 0 || idx >= n) {
        if (idx < 0) idx = -idx - 1;
        if (idx >= n) idx = 2 * n - 1 - idx;
    }
    return idx;
}

} // namespace

ImageGrid convolve(const ImageGrid& f, const IndicatorParams& params) {
    const std::vector<double> kernel = gaussian_kernel(params);
    const int r = params.radius;

    ImageGrid pass_x(f.rows, f.cols);
    for (int i = 0; i < f.rows; ++i)
        for (int j = 0; j < f.cols; ++j) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k)
                acc += kernel[k + r] * f.at(reflect(i + k, f.rows), j);
            pass_x.at(i, j) = acc;
        }

    ImageGrid out(f.rows, f.cols);
    for (int i = 0; i < f.rows; ++i)
        for (int j = 0; j < f.cols; ++j) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k)
                acc += kernel[k + r] * pass_x.at(i, reflect(j + k, f.cols));
            out.at(i, j) = acc;
        }
    return out;
}

ImageGrid gray_indicator(const ImageGrid& f, const IndicatorParams& params) {
    validate(params);
    for (double v : f.values)
        if (!(v > 0.0))
            throw std::invalid_argument("gray_indicator: input must be strictly positive");
    const ImageGrid smoothed = convolve(f, params);
    const double m = smoothed.max();
    ImageGrid alpha(f.rows, f.cols);
    for (std::size_t k = 0; k < alpha.cells(); ++k)
        alpha.values[k] = std::pow(smoothed.values[k] / m, params.beta);
    return alpha;
}

} // namespace fbdiff
