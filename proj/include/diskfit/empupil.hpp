#pragma once

#include <vector>

#include "diskfit/circlefit.hpp"

namespace diskfit {

/// Two-component mixture: a gradient-circle component for the outer annulus
/// edge plus an isotropic Gaussian soaking up inner-edge and spider clutter.
struct MixtureParams {
    double tau = 0.5; // circle-component mixing weight, in (0, 1)
    double x01 = 0.0, y01 = 0.0;
    double r = 0.0;
    double sigma1 = 0.0;
    double x02 = 0.0, y02 = 0.0;
    double sigma2 = 0.0;

    void validate() const {
        if (!(tau > 0.0 && tau < 1.0) || sigma1 <= 0.0 || sigma2 <= 0.0 || r <= 0.0)
            throw Error(ErrorCode::InvalidInput, "mixture params out of range");
    }
};

/// Per-point class responsibilities; rows sum to 1. `underflow[i]` marks
/// points where both densities vanished and a neutral 0.5/0.5 was assigned.
struct ResponsibilityMatrix {
    std::vector<double> circle;     // class-1 responsibility per point
    std::vector<double> background; // class-2 responsibility per point
    std::vector<bool> underflow;
};

struct EMIterationRecord {
    double loglik = 0.0;
    MixtureParams params;
};

struct EMTrace {
    std::vector<EMIterationRecord> iterations;
    bool converged = false;
    int iteration_count = 0;
};

double density_circle(const EdgePoint& point, const MixtureParams& params);
double density_background(const EdgePoint& point, const MixtureParams& params);

/// Observed-data log-likelihood sum(ln(p1 + p2)).
double observed_loglik(const EdgePointSet& points, const MixtureParams& params);

ResponsibilityMatrix e_step(const EdgePointSet& points, const MixtureParams& params);

/// Weighted re-estimation: circle parameters from the weighted closed form,
/// background from the weighted Gaussian centroid, tau from the class mass.
/// Throws ClassCollapse when a class's effective count drops below 3.
MixtureParams m_step(const EdgePointSet& points, const ResponsibilityMatrix& resp);

/// Initial estimate: centre from the normal-line crossing system, R and
/// sigma2 from the RMS point distance, sigma1 wide enough to cover the frame.
MixtureParams init_params(const EdgePointSet& points, double image_diag);

/// EM loop alternating e_step/m_step until the relative log-likelihood change
/// falls below rel_tol or max_iter is reached.
std::pair<MixtureParams, EMTrace> fit_pupil_em(const EdgePointSet& points,
                                               const MixtureParams& init,
                                               double rel_tol = 1e-6, int max_iter = 200);

} // namespace diskfit
