#pragma once

#include <cstdint>
#include <tuple>

#include "diskfit/circlefit.hpp"
#include "diskfit/image.hpp"

namespace diskfit {

struct SynthDiskConfig {
    int width = 640;
    int height = 480;
    double r_min = 30.0;
    double r_max = 270.0;
    double foreground = 255.0;
    double background = 0.0;
    double noise_lambda = 0.0;
    std::uint64_t seed = 0;
    // Area-coverage anti-aliasing on boundary pixels. Disable for hard-edged
    // rasterisation (pixel-centre membership only), which quantises the edge
    // and adds angular noise to gradient normals.
    bool antialias = true;

    void validate() const {
        if (!(r_min > 0.0 && r_min < r_max))
            throw Error(ErrorCode::InvalidInput, "require 0 < r_min < r_max");
        if (!(foreground > background && background >= 0.0))
            throw Error(ErrorCode::InvalidInput, "require foreground > background >= 0");
        if (noise_lambda < 0.0)
            throw Error(ErrorCode::InvalidInput, "noise_lambda must be >= 0");
        if (width <= 0 || height <= 0)
            throw Error(ErrorCode::InvalidInput, "image dimensions must be positive");
    }
};

struct SynthAnnulusConfig {
    int width = 640;
    int height = 480;
    double r_min = 80.0;
    double r_max = 200.0;
    double inner_r = 40.0; // must stay below the drawn outer radius
    int spider_count = 4;
    double spider_width = 6.0;
    double foreground = 255.0;
    double background = 0.0;
    double noise_lambda = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(r_min > 0.0 && r_min <= r_max))
            throw Error(ErrorCode::InvalidInput, "require 0 < r_min <= r_max");
        if (!(inner_r > 0.0 && inner_r < r_min))
            throw Error(ErrorCode::InvalidInput, "require 0 < inner_r < r_min");
        if (spider_count < 0 || spider_width < 0.0)
            throw Error(ErrorCode::InvalidInput, "spider fields must be nonnegative");
        if (!(foreground > background && background >= 0.0))
            throw Error(ErrorCode::InvalidInput, "require foreground > background >= 0");
        if (noise_lambda < 0.0)
            throw Error(ErrorCode::InvalidInput, "noise_lambda must be >= 0");
        if (width <= 0 || height <= 0)
            throw Error(ErrorCode::InvalidInput, "image dimensions must be positive");
    }
};

struct DiskSample {
    GrayImage image;
    CircleFit truth; // sigma2 = 0
};

struct AnnulusSample {
    GrayImage image;
    CircleFit outer;
    CircleFit inner;
};

/// Renders a filled disk with a random centre and radius; boundary pixels are
/// anti-aliased by area coverage. Deterministic per seed.
DiskSample render_disk(const SynthDiskConfig& config);

/// Renders an annulus with radial spider shadow bands. The centre is drawn so
/// the full annulus stays inside the frame when it fits.
AnnulusSample render_annulus(const SynthAnnulusConfig& config);

/// Replaces each pixel v with a Poisson(v + lambda) draw. Deterministic per seed.
GrayImage apply_poisson_noise(const GrayImage& image, double lambda, std::uint64_t seed);

} // namespace diskfit
