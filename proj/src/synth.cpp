#include "diskfit/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace diskfit {

namespace {

constexpr int kSupersample = 8; // 8x8 subpixel grid on boundary pixels

// Area coverage of a membership predicate over the unit pixel square centred
// at (px, py), via subpixel sampling.
template <typename Inside>
double coverage(double px, double py, const Inside& inside) {
    int hits = 0;
    for (int i = 0; i < kSupersample; ++i) {
        const double sy = py + (i + 0.5) / kSupersample - 0.5;
        for (int j = 0; j < kSupersample; ++j) {
            const double sx = px + (j + 0.5) / kSupersample - 0.5;
            if (inside(sx, sy))
                ++hits;
        }
    }
    return static_cast<double>(hits) / (kSupersample * kSupersample);
}

// Renders fg/bg with anti-aliased boundaries. A pixel is supersampled when
// the predicate disagrees between its centre and corners.
template <typename Inside>
std::vector<double> rasterise(int width, int height, double fg, double bg,
                              const Inside& inside) {
    std::vector<double> pixels(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double px = static_cast<double>(x);
            const double py = static_cast<double>(y);
            const bool c = inside(px, py);
            const bool mixed = inside(px - 0.5, py - 0.5) != c || inside(px + 0.5, py - 0.5) != c ||
                               inside(px - 0.5, py + 0.5) != c || inside(px + 0.5, py + 0.5) != c;
            double v;
            if (!mixed)
                v = c ? fg : bg;
            else
                v = bg + (fg - bg) * coverage(px, py, inside);
            pixels[static_cast<std::size_t>(y) * width + x] = v;
        }
    return pixels;
}

} // namespace

DiskSample render_disk(const SynthDiskConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const double cx = std::uniform_real_distribution<double>(0.0, config.width)(rng);
    const double cy = std::uniform_real_distribution<double>(0.0, config.height)(rng);
    const double r = std::uniform_real_distribution<double>(config.r_min, config.r_max)(rng);

    const double r2 = r * r;
    auto inside = [&](double x, double y) {
        const double dx = x - cx;
        const double dy = y - cy;
        return dx * dx + dy * dy <= r2;
    };
    std::vector<double> pixels;
    if (config.antialias) {
        pixels = rasterise(config.width, config.height, config.foreground, config.background,
                           inside);
    } else {
        pixels.resize(static_cast<std::size_t>(config.width) * config.height);
        for (int y = 0; y < config.height; ++y)
            for (int x = 0; x < config.width; ++x)
                pixels[static_cast<std::size_t>(y) * config.width + x] =
                    inside(x, y) ? config.foreground : config.background;
    }
    GrayImage image(config.width, config.height, std::move(pixels));
    if (config.noise_lambda > 0.0) {
        std::uint64_t noise_seed = rng();
        image = apply_poisson_noise(image, config.noise_lambda, noise_seed);
    }
    return {std::move(image), {cx, cy, r, 0.0}};
}

AnnulusSample render_annulus(const SynthAnnulusConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const double r = std::uniform_real_distribution<double>(config.r_min, config.r_max)(rng);

    // Keep the full annulus in frame whenever it fits; a pupil camera is
    // aligned well enough that the outer edge is never truncated.
    auto centre_range = [&](int extent) {
        const double lo = std::min(r, extent - r);
        const double hi = std::max(r, extent - r);
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const double cx = centre_range(config.width);
    const double cy = centre_range(config.height);
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);

    std::vector<double> spoke_x, spoke_y;
    for (int k = 0; k < config.spider_count; ++k) {
        const double a = phase + 2.0 * std::numbers::pi * k / std::max(config.spider_count, 1);
        spoke_x.push_back(std::cos(a));
        spoke_y.push_back(std::sin(a));
    }

    const double half_band = config.spider_width / 2.0;
    auto inside = [&](double x, double y) {
        const double dx = x - cx;
        const double dy = y - cy;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= config.inner_r * config.inner_r || d2 > r * r)
            return false;
        for (std::size_t k = 0; k < spoke_x.size(); ++k) {
            const double along = dx * spoke_x[k] + dy * spoke_y[k];
            const double perp = dx * spoke_y[k] - dy * spoke_x[k];
            if (along >= 0.0 && std::abs(perp) <= half_band)
                return false;
        }
        return true;
    };

    GrayImage image(config.width, config.height,
                    rasterise(config.width, config.height, config.foreground, config.background,
                              inside));
    if (config.noise_lambda > 0.0) {
        std::uint64_t noise_seed = rng();
        image = apply_poisson_noise(image, config.noise_lambda, noise_seed);
    }
    return {std::move(image), {cx, cy, r, 0.0}, {cx, cy, config.inner_r, 0.0}};
}

GrayImage apply_poisson_noise(const GrayImage& image, double lambda, std::uint64_t seed) {
    if (lambda < 0.0)
        throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
    std::mt19937_64 rng(seed);
    std::vector<double> out(image.pixels().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double mean = image.pixels()[i] + lambda;
        if (mean <= 0.0) {
            out[i] = 0.0;
        } else {
            std::poisson_distribution<long> draw(mean);
            out[i] = static_cast<double>(draw(rng));
        }
    }
    return GrayImage(image.width(), image.height(), std::move(out));
}

} // namespace diskfit
