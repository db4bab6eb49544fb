#include "diskfit/empupil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace diskfit {

namespace {

// Residual scales are floored so exact data cannot collapse a density into
// division by zero.
constexpr double kSigmaFloor = 1e-9;

} // namespace

double density_circle(const EdgePoint& point, const MixtureParams& params) {
    params.validate();
    const EdgeResidual res = edge_residual(point, params.x01, params.y01);
    const double s2 = params.sigma1 * params.sigma1;
    const double q = (res.dl - params.r) * (res.dl - params.r) + res.dtau * res.dtau;
    return params.tau / (2.0 * std::numbers::pi * s2) * std::exp(-q / (2.0 * s2));
}

double density_background(const EdgePoint& point, const MixtureParams& params) {
    params.validate();
    const double dx = params.x02 - point.x;
    const double dy = params.y02 - point.y;
    const double s2 = params.sigma2 * params.sigma2;
    return (1.0 - params.tau) / (2.0 * std::numbers::pi * s2) *
           std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
}

double observed_loglik(const EdgePointSet& points, const MixtureParams& params) {
    double ll = 0.0;
    for (const EdgePoint& p : points)
        ll += std::log(density_circle(p, params) + density_background(p, params));
    return ll;
}

ResponsibilityMatrix e_step(const EdgePointSet& points, const MixtureParams& params) {
    params.validate();
    ResponsibilityMatrix resp;
    resp.circle.reserve(points.size());
    resp.background.reserve(points.size());
    resp.underflow.reserve(points.size());
    for (const EdgePoint& p : points) {
        const double p1 = density_circle(p, params);
        const double p2 = density_background(p, params);
        const double total = p1 + p2;
        if (total <= 0.0) {
            resp.circle.push_back(0.5);
            resp.background.push_back(0.5);
            resp.underflow.push_back(true);
        } else {
            resp.circle.push_back(p1 / total);
            resp.background.push_back(p2 / total);
            resp.underflow.push_back(false);
        }
    }
    return resp;
}

MixtureParams m_step(const EdgePointSet& points, const ResponsibilityMatrix& resp) {
    const std::size_t n = points.size();
    if (resp.circle.size() != n || resp.background.size() != n)
        throw Error(ErrorCode::InvalidInput, "responsibility size mismatch");

    double w1 = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w1 += resp.circle[i];
        w2 += resp.background[i];
    }
    if (w1 < 3.0 || w2 < 3.0)
        throw Error(ErrorCode::ClassCollapse, "class effective count below 3");

    const CircleFit circle = fit_closed_form_weighted(points, resp.circle);

    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cx += resp.background[i] * points[i].x;
        cy += resp.background[i] * points[i].y;
    }
    cx /= w2;
    cy /= w2;
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = points[i].x - cx;
        const double dy = points[i].y - cy;
        spread += resp.background[i] * (dx * dx + dy * dy);
    }

    MixtureParams out;
    out.tau = std::clamp(w1 / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
    out.x01 = circle.x0;
    out.y01 = circle.y0;
    out.r = circle.r;
    out.sigma1 = std::max(std::sqrt(circle.sigma2), kSigmaFloor);
    out.x02 = cx;
    out.y02 = cy;
    out.sigma2 = std::max(std::sqrt(spread / (2.0 * w2)), kSigmaFloor);
    return out;
}

MixtureParams init_params(const EdgePointSet& points, double image_diag) {
    const std::size_t n = points.size();
    if (n < 3)
        throw Error(ErrorCode::InvalidInput, "need at least 3 points");
    if (image_diag <= 0.0)
        throw Error(ErrorCode::InvalidInput, "image_diag must be positive");

    // Centre from the least-squares crossing of the normal lines:
    //   x0 S(ny^2)  - y0 S(nx ny) = S(ny (ny x - nx y))
    //   x0 S(nx ny) - y0 S(nx^2)  = S(nx (ny x - nx y))
    double snn = 0.0, sxy = 0.0, sxx = 0.0, rhs1 = 0.0, rhs2 = 0.0;
    for (const EdgePoint& p : points) {
        const double c = p.ny * p.x - p.nx * p.y;
        snn += p.ny * p.ny;
        sxy += p.nx * p.ny;
        sxx += p.nx * p.nx;
        rhs1 += p.ny * c;
        rhs2 += p.nx * c;
    }
    const double nn = static_cast<double>(n);
    const double det = -snn * sxx + sxy * sxy;
    if (std::abs(det / (nn * nn)) <= 1e-9)
        throw Error(ErrorCode::DegenerateGeometry, "normals effectively parallel");

    const double x0 = (-rhs1 * sxx + sxy * rhs2) / det;
    const double y0 = (snn * rhs2 - sxy * rhs1) / det;

    double msd = 0.0;
    for (const EdgePoint& p : points) {
        const double dx = p.x - x0;
        const double dy = p.y - y0;
        msd += dx * dx + dy * dy;
    }
    const double rms = std::sqrt(msd / nn);

    MixtureParams params;
    params.tau = 0.5;
    params.x01 = params.x02 = x0;
    params.y01 = params.y02 = y0;
    params.r = rms;
    params.sigma1 = image_diag / 2.0;
    params.sigma2 = rms;
    params.validate();
    return params;
}

std::pair<MixtureParams, EMTrace> fit_pupil_em(const EdgePointSet& points,
                                               const MixtureParams& init, double rel_tol,
                                               int max_iter) {
    init.validate();
    if (rel_tol <= 0.0 || max_iter < 1)
        throw Error(ErrorCode::InvalidInput, "rel_tol > 0 and max_iter >= 1 required");

    MixtureParams params = init;
    EMTrace trace;
    double prev_ll = observed_loglik(points, params);
    trace.iterations.push_back({prev_ll, params});

    for (int it = 1; it <= max_iter; ++it) {
        const ResponsibilityMatrix resp = e_step(points, params);
        double w2 = 0.0;
        for (double v : resp.background)
            w2 += v;
        if (w2 < 3.0 && it > 1) {
            // Background mass vanished: the mixture degenerated to the pure
            // circle component, which is a converged single-population fit.
            params.tau = std::clamp((static_cast<double>(points.size()) - w2) /
                                        static_cast<double>(points.size()),
                                    1e-12, 1.0 - 1e-12);
            trace.converged = true;
            break;
        }
        try {
            params = m_step(points, resp);
        } catch (const Error&) {
            trace.iteration_count = it;
            throw;
        }
        const double ll = observed_loglik(points, params);
        trace.iterations.push_back({ll, params});
        trace.iteration_count = it;

        const double rel = std::abs(ll - prev_ll) / std::max(std::abs(prev_ll), 1.0);
        prev_ll = ll;
        if (rel < rel_tol) {
            trace.converged = true;
            break;
        }
    }
    return {params, trace};
}

} // namespace diskfit
