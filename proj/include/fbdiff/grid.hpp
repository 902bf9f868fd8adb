#pragma once

#include <stdexcept>
#include <vector>

namespace fbdiff {

/// Rectangular grid of gray intensities, row-major, spatial step fixed to 1.
/// Out-of-range reads mirror into the nearest boundary cell, which realizes
/// the discrete Neumann condition of the scheme.
struct ImageGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    ImageGrid() = default;
    ImageGrid(int rows_, int cols_, double fill = 0.0)
        : rows(rows_), cols(cols_) {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("ImageGrid: dims must be >= 1");
        values.assign(static_cast<std::size_t>(rows) * cols, fill);
    }

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }

    // mirrored-ghost read: indices clamp to the nearest valid cell
    double mirrored(int i, int j) const {
        if (i < 0) i = 0;
        if (i >= rows) i = rows - 1;
        if (j < 0) j = 0;
        if (j >= cols) j = cols - 1;
        return at(i, j);
    }

    bool same_dims(const ImageGrid& o) const { return rows == o.rows && cols == o.cols; }
    std::size_t cells() const { return values.size(); }

    double min() const;
    double max() const;
    double sum() const;
    double mean() const { return sum() / static_cast<double>(cells()); }
    bool all_finite() const;
};

/// Per-cell flux components in the two grid directions.
struct FluxField {
    ImageGrid cx;
    ImageGrid cy;
};

// One-sided differences with mirrored ghosts. x runs along the row index i,
// y along the column index j.
double diff_forward_x(const ImageGrid& u, int i, int j);
double diff_forward_y(const ImageGrid& u, int i, int j);
double diff_backward_x(const ImageGrid& u, int i, int j);
double diff_backward_y(const ImageGrid& u, int i, int j);

/// Minmod limiter: 0.5*(sgn(a)+sgn(b))*min(|a|,|b|).
double minmod(double a, double b);

/// Conservative weighted divergence: backward differences of w*cx and w*cy
/// with zero flux through the domain boundary faces. Summed over the grid
/// this telescopes to the far-edge flux column/row, which vanishes for flux
/// fields built from mirrored forward differences.
ImageGrid divergence(const FluxField& flux, const ImageGrid& weights);

} // namespace fbdiff
