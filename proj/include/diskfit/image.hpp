#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "diskfit/errors.hpp"

namespace diskfit {

/// 2D nonnegative intensity raster, row-major. Pixel (x, y) is centred at
/// integer coordinates (x, y); immutable once constructed.
class GrayImage {
  public:
    GrayImage(int width, int height, std::vector<double> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width_ <= 0 || height_ <= 0)
            throw Error(ErrorCode::InvalidInput, "image dimensions must be positive");
        if (pixels_.size() != static_cast<std::size_t>(width_) * height_)
            throw Error(ErrorCode::InvalidInput, "pixel buffer size mismatch");
        for (double v : pixels_)
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorCode::InvalidInput, "pixel values must be finite and >= 0");
    }

    GrayImage(int width, int height, double fill = 0.0)
        : GrayImage(width, height,
                    std::vector<double>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                            (height > 0 ? height : 0),
                                        fill)) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const std::vector<double>& pixels() const noexcept { return pixels_; }

    double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  private:
    int width_;
    int height_;
    std::vector<double> pixels_;
};

} // namespace diskfit
