#include "fbdiff/grid.hpp"

#include <algorithm>
#include <cmath>

namespace fbdiff {

double ImageGrid::min() const {
    return *std::min_element(values.begin(), values.end());
}

double ImageGrid::max() const {
    return *std::max_element(values.begin(), values.end());
}

double ImageGrid::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

bool ImageGrid::all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

namespace {

void check_index(const ImageGrid& u, int i, int j) {
    if (i < 0 || i >= u.rows || j < 0 || j >= u.cols)
        throw std::out_of_range("grid index out of range");
}

} // namespace

double diff_forward_x(const ImageGrid& u, int i, int j) {
    check_index(u, i, j);
    return u.mirrored(i + 1, j) - u.at(i, j);
}

double diff_forward_y(const ImageGrid& u, int i, int j) {
    check_index(u, i, j);
    return u.mirrored(i, j + 1) - u.at(i, j);
}

double diff_backward_x(const ImageGrid& u, int i, int j) {
    check_index(u, i, j);
    return u.at(i, j) - u.mirrored(i - 1, j);
}

double diff_backward_y(const ImageGrid& u, int i, int j) {
    check_index(u, i, j);
    return u.at(i, j) - u.mirrored(i, j - 1);
}

double minmod(double a, double b) {
    const double sa = (a > 0.0) - (a < 0.0);
    const double sb = (b > 0.0) - (b < 0.0);
    return 0.5 * (sa + sb) * std::min(std::fabs(a), std::fabs(b));
}

ImageGrid divergence(const FluxField& flux, const ImageGrid& weights) {
    if (!flux.cx.same_dims(weights) || !flux.cy.same_dims(weights))
        throw std::invalid_argument("divergence: dimension mismatch");
    const int rows = weights.rows, cols = weights.cols;
    ImageGrid out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double vx = weights.at(i, j) * flux.cx.at(i, j);
            const double vxm = i > 0 ? weights.at(i - 1, j) * flux.cx.at(i - 1, j) : 0.0;
            const double vy = weights.at(i, j) * flux.cy.at(i, j);
            const double vym = j > 0 ? weights.at(i, j - 1) * flux.cy.at(i, j - 1) : 0.0;
            out.at(i, j) = (vx - vxm) + (vy - vym);
        }
    }
    return out;
}

} // namespace fbdiff
