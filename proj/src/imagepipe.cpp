#include "diskfit/imagepipe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace diskfit {

Kernels make_kernels(const KernelConfig& config) {
    config.validate();
    Kernels k;
    const int hw = config.half_width;
    k.derivative.resize(2 * hw + 1);
    k.smoothing.resize(2 * hw + 1);
    for (int t = -hw; t <= hw; ++t) {
        const double g = std::exp(-static_cast<double>(t) * t / (2.0 * config.s2));
        k.derivative[t + hw] = t * g;
        k.smoothing[t + hw] = g;
    }
    return k;
}

namespace {

// Correlation along x for every row, interior columns only.
void correlate_rows(const std::vector<double>& in, std::vector<double>& out, int width,
                    int height, const std::vector<double>& taps, int hw) {
    for (int y = 0; y < height; ++y) {
        const double* row = in.data() + static_cast<std::size_t>(y) * width;
        double* orow = out.data() + static_cast<std::size_t>(y) * width;
        for (int x = hw; x < width - hw; ++x) {
            double acc = 0.0;
            for (int t = -hw; t <= hw; ++t)
                acc += taps[t + hw] * row[x + t];
            orow[x] = acc;
        }
    }
}

// Correlation along y for every column, interior rows only.
void correlate_cols(const std::vector<double>& in, std::vector<double>& out, int width,
                    int height, const std::vector<double>& taps, int hw) {
    for (int y = hw; y < height - hw; ++y) {
        double* orow = out.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int t = -hw; t <= hw; ++t)
                acc += taps[t + hw] * in[static_cast<std::size_t>(y + t) * width + x];
            orow[x] = acc;
        }
    }
}

} // namespace

GradientField gradient_field(const GrayImage& image, const KernelConfig& config) {
    config.validate();
    const int hw = config.half_width;
    const int w = image.width();
    const int h = image.height();
    if (w <= 2 * hw || h <= 2 * hw)
        throw Error(ErrorCode::DimensionError, "image too small for the kernel extent");

    const Kernels k = make_kernels(config);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> tmp(n, 0.0);

    GradientField field;
    field.width = w;
    field.height = h;
    field.valid_margin = hw;
    field.gx.assign(n, 0.0);
    field.gy.assign(n, 0.0);
    field.norm.assign(n, 0.0);

    correlate_rows(image.pixels(), tmp, w, h, k.derivative, hw);
    correlate_cols(tmp, field.gx, w, h, k.smoothing, hw);

    std::fill(tmp.begin(), tmp.end(), 0.0);
    correlate_rows(image.pixels(), tmp, w, h, k.smoothing, hw);
    correlate_cols(tmp, field.gy, w, h, k.derivative, hw);

    for (int y = hw; y < h - hw; ++y)
        for (int x = hw; x < w - hw; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            field.norm[i] = std::hypot(field.gx[i], field.gy[i]);
        }
    return field;
}

double otsu_threshold(std::span<const double> values, int bins) {
    if (values.empty())
        throw Error(ErrorCode::InvalidInput, "otsu: empty value array");
    if (bins < 2)
        throw Error(ErrorCode::InvalidInput, "otsu: need at least 2 bins");

    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (lo == hi)
        throw Error(ErrorCode::DegenerateHistogram, "otsu: all values identical");

    std::vector<std::size_t> hist(bins, 0);
    const double scale = bins / (hi - lo);
    for (double v : values) {
        int b = static_cast<int>((v - lo) * scale);
        if (b >= bins) b = bins - 1;
        ++hist[b];
    }

    const double total = static_cast<double>(values.size());
    double sum_all = 0.0;
    for (int b = 0; b < bins; ++b)
        sum_all += b * static_cast<double>(hist[b]);

    // Scan every bin boundary; class 0 = bins [0, t), class 1 = [t, bins).
    double best_var = -1.0;
    int best_t = 1;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 1; t < bins; ++t) {
        w0 += static_cast<double>(hist[t - 1]);
        sum0 += (t - 1) * static_cast<double>(hist[t - 1]);
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0)
            continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best_var) { // strict: ties keep the lower threshold
            best_var = between;
            best_t = t;
        }
    }
    return lo + best_t / scale;
}

EdgePointSet extract_edge_points(const GradientField& field, std::size_t max_points,
                                 std::uint64_t seed, int bins) {
    if (max_points < 3)
        throw Error(ErrorCode::InvalidInput, "max_points must be >= 3");

    const int hw = field.valid_margin;
    std::vector<double> interior;
    interior.reserve(static_cast<std::size_t>(field.width) * field.height);
    for (int y = hw; y < field.height - hw; ++y)
        for (int x = hw; x < field.width - hw; ++x)
            interior.push_back(field.norm_at(x, y));

    double threshold;
    try {
        threshold = otsu_threshold(interior, bins);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateHistogram)
            throw Error(ErrorCode::InsufficientEdges, "no gradient structure in image");
        throw;
    }

    EdgePointSet candidates;
    for (int y = hw; y < field.height - hw; ++y)
        for (int x = hw; x < field.width - hw; ++x) {
            const double g = field.norm_at(x, y);
            if (g > threshold && g > 0.0) {
                candidates.push_back({static_cast<double>(x), static_cast<double>(y),
                                      field.gx_at(x, y) / g, field.gy_at(x, y) / g});
            }
        }

    if (candidates.size() < 3)
        throw Error(ErrorCode::InsufficientEdges, "fewer than 3 edge candidates");

    if (candidates.size() <= max_points)
        return candidates;

    // Partial Fisher-Yates: uniform subset without replacement, seed-stable.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < max_points; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(max_points);
    return candidates;
}

} // namespace diskfit
