#include "diskfit/circlefit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace diskfit {

namespace {

constexpr double kDegenerateDenom = 1e-9;

double signed_nx(const EdgePoint& p, EdgePolarity pol) {
    return pol == EdgePolarity::Inner ? -p.nx : p.nx;
}
double signed_ny(const EdgePoint& p, EdgePolarity pol) {
    return pol == EdgePolarity::Inner ? -p.ny : p.ny;
}

CircleFit closed_form_impl(const EdgePointSet& points, const double* weights,
                           EdgePolarity polarity) {
    const std::size_t n = points.size();
    if (n < 3)
        throw Error(ErrorCode::InvalidInput, "need at least 3 points");

    double total = 0.0;
    double mx = 0.0, my = 0.0, mnx = 0.0, mny = 0.0, mxnx = 0.0, myny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights ? weights[i] : 1.0;
        const double nx = signed_nx(points[i], polarity);
        const double ny = signed_ny(points[i], polarity);
        total += w;
        mx += w * points[i].x;
        my += w * points[i].y;
        mnx += w * nx;
        mny += w * ny;
        mxnx += w * points[i].x * nx;
        myny += w * points[i].y * ny;
    }
    if (total < 3.0)
        throw Error(ErrorCode::ClassCollapse, "effective point count below 3");
    mx /= total;
    my /= total;
    mnx /= total;
    mny /= total;
    mxnx /= total;
    myny /= total;

    const double denom = 1.0 - mnx * mnx - mny * mny;
    if (std::abs(denom) <= kDegenerateDenom)
        throw Error(ErrorCode::DegenerateGeometry, "normals effectively parallel");

    const double r = (mnx * mx + mny * my - mxnx - myny) / denom;
    if (!(r > 0.0))
        throw Error(ErrorCode::PolarityMismatch, "non-positive radius estimate");

    const double x0 = mx + r * mnx;
    const double y0 = my + r * mny;

    double penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights ? weights[i] : 1.0;
        const double nx = signed_nx(points[i], polarity);
        const double ny = signed_ny(points[i], polarity);
        const double dx = x0 - points[i].x;
        const double dy = y0 - points[i].y;
        const double dl = nx * dx + ny * dy;
        const double dtau = ny * dx - nx * dy;
        penalty += w * ((dl - r) * (dl - r) + dtau * dtau);
    }
    return {x0, y0, r, penalty / (2.0 * total)};
}

} // namespace

CircleFit fit_closed_form(const EdgePointSet& points, EdgePolarity polarity) {
    return closed_form_impl(points, nullptr, polarity);
}

CircleFit fit_closed_form_weighted(const EdgePointSet& points, std::span<const double> weights,
                                   EdgePolarity polarity) {
    if (weights.size() != points.size())
        throw Error(ErrorCode::InvalidInput, "weights size mismatch");
    return closed_form_impl(points, weights.data(), polarity);
}

double gradient_penalty(const EdgePointSet& points, const CircleFit& fit, EdgePolarity polarity) {
    const double sign = polarity == EdgePolarity::Outer ? -1.0 : 1.0;
    double penalty = 0.0;
    for (const EdgePoint& p : points) {
        const EdgeResidual res = edge_residual(p, fit.x0, fit.y0);
        const double lon = res.dl + sign * fit.r;
        penalty += lon * lon + res.dtau * res.dtau;
    }
    return penalty;
}

double gradient_loglik(const EdgePointSet& points, const CircleFit& fit, EdgePolarity polarity) {
    if (fit.sigma2 <= 0.0)
        throw Error(ErrorCode::InvalidInput, "sigma2 must be positive");
    const double n = static_cast<double>(points.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * fit.sigma2) -
           gradient_penalty(points, fit, polarity) / (2.0 * fit.sigma2);
}

double gradient_loglik_expanded(const EdgePointSet& points, const CircleFit& fit,
                                EdgePolarity polarity) {
    if (fit.sigma2 <= 0.0)
        throw Error(ErrorCode::InvalidInput, "sigma2 must be positive");
    // dl^2 + dtau^2 = dx^2 + dy^2 for unit normals, so the penalty collapses
    // to dx^2 + dy^2 + R^2 -+ 2 R dl.
    const double sign = polarity == EdgePolarity::Outer ? -1.0 : 1.0;
    double penalty = 0.0;
    for (const EdgePoint& p : points) {
        const double dx = fit.x0 - p.x;
        const double dy = fit.y0 - p.y;
        const double dl = p.nx * dx + p.ny * dy;
        penalty += dx * dx + dy * dy + fit.r * fit.r + 2.0 * sign * fit.r * dl;
    }
    const double n = static_cast<double>(points.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * fit.sigma2) -
           penalty / (2.0 * fit.sigma2);
}

double geometric_penalty(const EdgePointSet& points, const CircleFit& fit) {
    double penalty = 0.0;
    for (const EdgePoint& p : points) {
        const double d = std::hypot(p.x - fit.x0, p.y - fit.y0) - fit.r;
        penalty += d * d;
    }
    return penalty;
}

double geometric_loglik(const EdgePointSet& points, const CircleFit& fit) {
    if (fit.sigma2 <= 0.0)
        throw Error(ErrorCode::InvalidInput, "sigma2 must be positive");
    const double n = static_cast<double>(points.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * fit.sigma2) -
           geometric_penalty(points, fit) / (2.0 * fit.sigma2);
}

CircleFit fit_kasa(const EdgePointSet& points) {
    const std::size_t n = points.size();
    if (n < 3)
        throw Error(ErrorCode::InvalidInput, "need at least 3 points");

    // Normal equations for x^2 + y^2 + A x + B y + C = 0.
    double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0;
    double sxz = 0, syz = 0, sz = 0;
    for (const EdgePoint& p : points) {
        const double z = -(p.x * p.x + p.y * p.y);
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
        sx += p.x;
        sy += p.y;
        sxz += p.x * z;
        syz += p.y * z;
        sz += z;
    }
    const double nn = static_cast<double>(n);
    // 3x3 system [sxx sxy sx; sxy syy sy; sx sy nn] * [A B C]^T = [sxz syz sz]^T
    const double det = sxx * (syy * nn - sy * sy) - sxy * (sxy * nn - sy * sx) +
                       sx * (sxy * sy - syy * sx);
    // Scale-aware collinearity check.
    const double scale = (sxx + syy + nn) / 3.0;
    if (std::abs(det) <= 1e-12 * scale * scale * scale)
        throw Error(ErrorCode::DegenerateGeometry, "points are collinear");

    const double det_a = sxz * (syy * nn - sy * sy) - sxy * (syz * nn - sy * sz) +
                         sx * (syz * sy - syy * sz);
    const double det_b = sxx * (syz * nn - sz * sy) - sxz * (sxy * nn - sy * sx) +
                         sx * (sxy * sz - syz * sx);
    const double det_c = sxx * (syy * sz - syz * sy) - sxy * (sxy * sz - syz * sx) +
                         sxz * (sxy * sy - syy * sx);
    const double a = det_a / det;
    const double b = det_b / det;
    const double c = det_c / det;

    CircleFit fit;
    fit.x0 = -a / 2.0;
    fit.y0 = -b / 2.0;
    const double r2 = fit.x0 * fit.x0 + fit.y0 * fit.y0 - c;
    if (!(r2 > 0.0))
        throw Error(ErrorCode::DegenerateGeometry, "non-positive squared radius");
    fit.r = std::sqrt(r2);
    fit.sigma2 = geometric_penalty(points, fit) / nn;
    return fit;
}

FitReport fit_geometric_iterative(const EdgePointSet& points, const CircleFit& init,
                                  double rel_tol, int max_iter) {
    if (points.size() < 3)
        throw Error(ErrorCode::InvalidInput, "need at least 3 points");
    if (rel_tol <= 0.0 || max_iter < 1)
        throw Error(ErrorCode::InvalidInput, "rel_tol > 0 and max_iter >= 1 required");

    CircleFit cur = init;
    double loss = geometric_penalty(points, cur);
    if (!std::isfinite(loss))
        throw Error(ErrorCode::NumericalFailure, "non-finite objective at the initial point");

    FitReport report;
    report.converged = false;
    double lambda = 1e-6; // Levenberg damping on the normal equations

    for (int it = 1; it <= max_iter; ++it) {
        // Residual f_i = dist_i - R; accumulate J^T J and J^T f.
        double h00 = 0, h01 = 0, h02 = 0, h11 = 0, h12 = 0;
        double g0 = 0, g1 = 0, g2 = 0;
        const double h22 = static_cast<double>(points.size());
        for (const EdgePoint& p : points) {
            const double dx = cur.x0 - p.x;
            const double dy = cur.y0 - p.y;
            const double dist = std::hypot(dx, dy);
            if (dist <= 1e-12)
                continue; // point at the centre carries no direction
            const double f = dist - cur.r;
            const double jx = dx / dist;
            const double jy = dy / dist;
            h00 += jx * jx;
            h01 += jx * jy;
            h02 += -jx;
            h11 += jy * jy;
            h12 += -jy;
            g0 += jx * f;
            g1 += jy * f;
            g2 += -f;
        }

        double step[3] = {0, 0, 0};
        bool accepted = false;
        for (int attempt = 0; attempt < 20 && !accepted; ++attempt) {
            const double a00 = h00 + lambda, a11 = h11 + lambda, a22 = h22 + lambda;
            const double det = a00 * (a11 * a22 - h12 * h12) - h01 * (h01 * a22 - h12 * h02) +
                               h02 * (h01 * h12 - a11 * h02);
            if (std::abs(det) <= 1e-300) {
                lambda *= 10.0;
                continue;
            }
            step[0] = -(g0 * (a11 * a22 - h12 * h12) - h01 * (g1 * a22 - h12 * g2) +
                        h02 * (g1 * h12 - a11 * g2)) /
                      det;
            step[1] = -(a00 * (g1 * a22 - g2 * h12) - g0 * (h01 * a22 - h12 * h02) +
                        h02 * (h01 * g2 - g1 * h02)) /
                      det;
            step[2] = -(a00 * (a11 * g2 - h12 * g1) - h01 * (h01 * g2 - h12 * g0) +
                        g0 * (h01 * h12 - a11 * h02)) /
                      det;

            CircleFit trial = cur;
            trial.x0 += step[0];
            trial.y0 += step[1];
            trial.r += step[2];
            const double trial_loss = geometric_penalty(points, trial);
            if (!std::isfinite(trial_loss))
                throw Error(ErrorCode::NumericalFailure, "non-finite objective during iteration");
            if (trial_loss <= loss) {
                cur = trial;
                loss = trial_loss;
                lambda = std::max(lambda * 0.5, 1e-12);
                accepted = true;
            } else {
                lambda *= 10.0;
            }
        }
        report.iterations = it;

        const double scale = std::max(std::abs(cur.r), 1e-12);
        const double rel =
            std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])}) / scale;
        if (!accepted || rel < rel_tol) {
            report.converged = true;
            break;
        }
    }

    cur.sigma2 = loss / static_cast<double>(points.size());
    report.fit = cur;
    report.loss = loss;
    return report;
}

} // namespace diskfit
