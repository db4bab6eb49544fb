#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "diskfit/image.hpp"

namespace diskfit {

/// Gaussian-derivative kernel parameters. The taps are left unnormalised
/// because only normalised gradient directions are consumed downstream.
struct KernelConfig {
    double s2 = 2.0;    // squared kernel width, pixels^2
    int half_width = 2; // taps cover [-half_width, half_width]

    void validate() const {
        if (s2 <= 0.0 || half_width < 1)
            throw Error(ErrorCode::InvalidInput, "kernel config: s2 > 0 and half_width >= 1 required");
    }
};

struct Kernels {
    std::vector<double> derivative; // d[p] = p * exp(-p^2 / (2 s^2))
    std::vector<double> smoothing;  // w[q] = exp(-q^2 / (2 s^2))
};

/// Per-pixel gradient components and norm. Values within `valid_margin` of
/// the border are zero and must not be used.
struct GradientField {
    int width = 0;
    int height = 0;
    int valid_margin = 0;
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> norm;

    double gx_at(int x, int y) const { return gx[static_cast<std::size_t>(y) * width + x]; }
    double gy_at(int x, int y) const { return gy[static_cast<std::size_t>(y) * width + x]; }
    double norm_at(int x, int y) const { return norm[static_cast<std::size_t>(y) * width + x]; }
};

/// One edge measurement: pixel position plus the unit gradient direction.
struct EdgePoint {
    double x = 0.0;
    double y = 0.0;
    double nx = 0.0;
    double ny = 0.0;
};

using EdgePointSet = std::vector<EdgePoint>;

Kernels make_kernels(const KernelConfig& config);

/// Horizontal and vertical gradient maps via separable correlation with the
/// Gaussian-derivative kernels. gx > 0 where intensity increases with x.
GradientField gradient_field(const GrayImage& image, const KernelConfig& config = {});

/// Histogram-based Otsu threshold over `values`; returns the bin boundary
/// maximising between-class variance, ties broken toward the lower boundary.
/// Throws DegenerateHistogram when all values are identical.
double otsu_threshold(std::span<const double> values, int bins = 256);

/// Thresholds the gradient-norm map with Otsu (interior pixels only) and
/// returns at most `max_points` edge points, subsampled uniformly without
/// replacement using `seed`. Throws InsufficientEdges below 3 candidates.
EdgePointSet extract_edge_points(const GradientField& field, std::size_t max_points,
                                 std::uint64_t seed, int bins = 256);

} // namespace diskfit
