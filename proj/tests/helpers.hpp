#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "diskfit/circlefit.hpp"

namespace diskfit::testing {

// Points exactly on the circle with exact inward normals.
inline EdgePointSet exact_circle_points(double x0, double y0, double r, std::size_t n,
                                        std::uint64_t seed = 0, bool random_angles = false) {
    EdgePointSet points;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = random_angles ? angle(rng) : 2.0 * std::numbers::pi * i / n;
        const double c = std::cos(a);
        const double s = std::sin(a);
        points.push_back({x0 + r * c, y0 + r * s, -c, -s});
    }
    return points;
}

// Generative model: points on the circle, normals = inward unit normal plus
// i.i.d. zero-mean Gaussian noise on each component (left un-normalised).
inline EdgePointSet noisy_normal_points(double x0, double y0, double r, std::size_t n,
                                        double eps_sigma, std::uint64_t seed) {
    EdgePointSet points;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> eps(0.0, eps_sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = angle(rng);
        const double c = std::cos(a);
        const double s = std::sin(a);
        points.push_back({x0 + r * c, y0 + r * s, -c + eps(rng), -s + eps(rng)});
    }
    return points;
}

// Points on the circle with unit normals perturbed in angle; this is what the
// image pipeline emits (it normalises every gradient vector).
inline EdgePointSet unit_noisy_points(double x0, double y0, double r, std::size_t n,
                                      double angle_sigma, std::uint64_t seed) {
    EdgePointSet points;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> delta(0.0, angle_sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = angle(rng);
        const double b = a + delta(rng);
        points.push_back({x0 + r * std::cos(a), y0 + r * std::sin(a), -std::cos(b),
                          -std::sin(b)});
    }
    return points;
}

// Central-difference gradient of the gradient-likelihood penalty w.r.t.
// (x0, y0, r); the independent stationarity oracle.
inline std::array<double, 3> penalty_fd_gradient(const EdgePointSet& points, const CircleFit& fit,
                                                 double step = 1e-5) {
    std::array<double, 3> grad{};
    for (int k = 0; k < 3; ++k) {
        CircleFit lo = fit, hi = fit;
        double* plo = k == 0 ? &lo.x0 : k == 1 ? &lo.y0 : &lo.r;
        double* phi = k == 0 ? &hi.x0 : k == 1 ? &hi.y0 : &hi.r;
        *plo -= step;
        *phi += step;
        grad[k] = (gradient_penalty(points, hi) - gradient_penalty(points, lo)) / (2.0 * step);
    }
    return grad;
}

} // namespace diskfit::testing
