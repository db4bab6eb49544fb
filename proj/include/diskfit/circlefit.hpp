#pragma once

#include <cstddef>
#include <span>

#include "diskfit/imagepipe.hpp"

namespace diskfit {

/// Estimated circle: centre, radius and residual variance.
struct CircleFit {
    double x0 = 0.0;
    double y0 = 0.0;
    double r = 0.0;
    double sigma2 = 0.0;
};

/// Which annulus edge the normals belong to. Outer-edge gradients point
/// toward the centre, inner-edge gradients away from it.
enum class EdgePolarity { Outer, Inner };

/// Signed distances from a candidate centre to the lines through an edge
/// point orthogonal / collinear to its normal.
struct EdgeResidual {
    double dl = 0.0;   // longitudinal, E[dl] = R on-model
    double dtau = 0.0; // transverse, E[dtau] = 0 on-model
};

inline EdgeResidual edge_residual(const EdgePoint& p, double x0, double y0) {
    const double dx = x0 - p.x;
    const double dy = y0 - p.y;
    return {p.nx * dx + p.ny * dy, p.ny * dx - p.nx * dy};
}

struct FitReport {
    CircleFit fit;
    int iterations = 0;
    bool converged = true;
    double loss = 0.0;
};

/// Closed-form maximum-likelihood circle estimate from edge points with
/// normals. Inner polarity is handled by negating the normals first.
/// Throws DegenerateGeometry when the normals are effectively parallel and
/// PolarityMismatch when the estimated radius is non-positive.
CircleFit fit_closed_form(const EdgePointSet& points, EdgePolarity polarity = EdgePolarity::Outer);

/// Weighted variant used by the EM M-step: per-point weights replace unit
/// counts in every sample mean. Weights must be nonnegative with sum >= 3.
CircleFit fit_closed_form_weighted(const EdgePointSet& points, std::span<const double> weights,
                                   EdgePolarity polarity = EdgePolarity::Outer);

/// Gradient-based log-likelihood, direct residual form.
double gradient_loglik(const EdgePointSet& points, const CircleFit& fit,
                       EdgePolarity polarity = EdgePolarity::Outer);

/// Same value computed from the expanded-and-collected form; agrees with the
/// direct form to machine precision for unit normals.
double gradient_loglik_expanded(const EdgePointSet& points, const CircleFit& fit,
                                EdgePolarity polarity = EdgePolarity::Outer);

/// Quadratic penalty of the gradient likelihood (the sum inside the exponent).
double gradient_penalty(const EdgePointSet& points, const CircleFit& fit,
                        EdgePolarity polarity = EdgePolarity::Outer);

/// Geometric (radial-distance) log-likelihood; ignores normals.
double geometric_loglik(const EdgePointSet& points, const CircleFit& fit);

/// Sum of squared radial residuals.
double geometric_penalty(const EdgePointSet& points, const CircleFit& fit);

/// Algebraic Kasa fit via the linear least-squares reduction. Throws
/// DegenerateGeometry for collinear points.
CircleFit fit_kasa(const EdgePointSet& points);

/// Damped Gauss-Newton minimisation of the geometric objective. Terminates
/// when max(|dx0|,|dy0|,|dR|)/R < rel_tol or at max_iter.
FitReport fit_geometric_iterative(const EdgePointSet& points, const CircleFit& init,
                                  double rel_tol = 1e-4, int max_iter = 100);

} // namespace diskfit
