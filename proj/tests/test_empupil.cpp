#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "diskfit/empupil.hpp"
#include "helpers.hpp"

using namespace diskfit;
using namespace diskfit::testing;

namespace {

MixtureParams sample_params() {
    MixtureParams p;
    p.tau = 0.4;
    p.x01 = 10.0;
    p.y01 = -3.0;
    p.r = 20.0;
    p.sigma1 = 1.5;
    p.x02 = 12.0;
    p.y02 = -1.0;
    p.sigma2 = 25.0;
    return p;
}

// Outer-edge points (inward normals) plus inner-edge points (outward
// normals), mimicking an annulus edge set.
EdgePointSet annulus_points(double x0, double y0, double r_out, double r_in, std::size_t n_out,
                            std::size_t n_in, double eps, std::uint64_t seed) {
    EdgePointSet points = unit_noisy_points(x0, y0, r_out, n_out, eps, seed);
    EdgePointSet inner = unit_noisy_points(x0, y0, r_in, n_in, eps, seed + 1);
    for (EdgePoint& p : inner) {
        p.nx = -p.nx;
        p.ny = -p.ny;
        points.push_back(p);
    }
    return points;
}

} // namespace

TEST_CASE("circle density at an exact on-circle point") {
    const MixtureParams p = sample_params();
    const EdgePoint on_circle{p.x01 + p.r, p.y01, -1.0, 0.0};
    const double expected = p.tau / (2.0 * std::numbers::pi * p.sigma1 * p.sigma1);
    CHECK(density_circle(on_circle, p) == doctest::Approx(expected).epsilon(1e-12));

    // flipping the normal makes (dl - R)^2 = 4 R^2
    const EdgePoint flipped{p.x01 + p.r, p.y01, 1.0, 0.0};
    const double suppression = std::exp(-4.0 * p.r * p.r / (2.0 * p.sigma1 * p.sigma1));
    CHECK(density_circle(flipped, p) ==
          doctest::Approx(expected * suppression).epsilon(1e-9));
}

TEST_CASE("circle density is linear in tau") {
    MixtureParams p = sample_params();
    const EdgePoint pt{p.x01 + p.r + 0.7, p.y01 - 0.2, -1.0, 0.0};
    const double base = density_circle(pt, p);
    p.tau *= 2.0;
    CHECK(density_circle(pt, p) == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("background density ignores normals and peaks at its centre") {
    const MixtureParams p = sample_params();
    const EdgePoint at_centre{p.x02, p.y02, 0.3, 0.954};
    CHECK(density_background(at_centre, p) ==
          doctest::Approx((1.0 - p.tau) / (2.0 * std::numbers::pi * p.sigma2 * p.sigma2))
              .epsilon(1e-12));

    const EdgePoint a{p.x02 + 5.0, p.y02, -1.0, 0.0};
    const EdgePoint b{p.x02, p.y02 + 5.0, 0.0, 1.0};
    CHECK(density_background(a, p) == doctest::Approx(density_background(b, p)).epsilon(1e-12));
}

TEST_CASE("background density integrates to 1 - tau") {
    // midpoint quadrature on a grid wide enough to hold the Gaussian mass
    MixtureParams p = sample_params();
    p.sigma2 = 4.0;
    const double extent = 10.0 * p.sigma2;
    const int steps = 400;
    const double h = 2.0 * extent / steps;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i)
        for (int j = 0; j < steps; ++j) {
            const EdgePoint pt{p.x02 - extent + (i + 0.5) * h, p.y02 - extent + (j + 0.5) * h,
                               1.0, 0.0};
            integral += density_background(pt, p) * h * h;
        }
    CHECK(integral == doctest::Approx(1.0 - p.tau).epsilon(1e-6));
}

TEST_CASE("e_step rows are normalised responsibilities") {
    const MixtureParams p = sample_params();
    const EdgePointSet points = annulus_points(p.x01, p.y01, p.r, 8.0, 30, 30, 0.05, 42);
    const ResponsibilityMatrix resp = e_step(points, p);
    REQUIRE(resp.circle.size() == points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(resp.circle[i] >= 0.0);
        CHECK(resp.circle[i] <= 1.0);
        CHECK(resp.circle[i] + resp.background[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("e_step favours the circle class for tight on-circle points") {
    MixtureParams p = sample_params();
    p.sigma1 = 0.5;
    p.x02 = p.x01 + 500.0; // far background centre
    p.y02 = p.y01;
    const EdgePoint on_circle{p.x01, p.y01 + p.r, 0.0, -1.0};
    const ResponsibilityMatrix resp = e_step({on_circle}, p);
    CHECK(resp.circle[0] >= 0.99);
}

TEST_CASE("m_step with unit circle weights reproduces the closed form") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const EdgePointSet circle = noisy_normal_points(5, 7, 12, 40, 0.05, 600 + rep);
        // a handful of far-away clutter points carrying the background class
        EdgePointSet points = circle;
        std::uniform_real_distribution<double> clutter(200.0, 240.0);
        ResponsibilityMatrix resp;
        resp.circle.assign(circle.size(), 1.0);
        resp.background.assign(circle.size(), 0.0);
        for (int i = 0; i < 5; ++i) {
            points.push_back({clutter(rng), clutter(rng), 1.0, 0.0});
            resp.circle.push_back(0.0);
            resp.background.push_back(1.0);
        }
        const MixtureParams fitted = m_step(points, resp);
        const CircleFit direct = fit_closed_form(circle);
        CHECK(fitted.x01 == doctest::Approx(direct.x0).epsilon(1e-12));
        CHECK(fitted.y01 == doctest::Approx(direct.y0).epsilon(1e-12));
        CHECK(fitted.r == doctest::Approx(direct.r).epsilon(1e-12));
        CHECK(fitted.sigma1 == doctest::Approx(std::sqrt(direct.sigma2)).epsilon(1e-12));
        CHECK(fitted.tau ==
              doctest::Approx(static_cast<double>(circle.size()) / points.size())
                  .epsilon(1e-12));
    }
}

TEST_CASE("hard 0/1 responsibilities split into per-subset fits") {
    const EdgePointSet circle = noisy_normal_points(0, 0, 10, 30, 0.02, 88);
    EdgePointSet points = circle;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> cloud(-3.0, 3.0);
    std::vector<double> bg_x, bg_y;
    for (int i = 0; i < 20; ++i) {
        const double x = 50.0 + cloud(rng);
        const double y = -20.0 + cloud(rng);
        points.push_back({x, y, 1.0, 0.0});
        bg_x.push_back(x);
        bg_y.push_back(y);
    }
    ResponsibilityMatrix resp;
    resp.circle.assign(points.size(), 0.0);
    resp.background.assign(points.size(), 1.0);
    for (std::size_t i = 0; i < circle.size(); ++i) {
        resp.circle[i] = 1.0;
        resp.background[i] = 0.0;
    }
    const MixtureParams fitted = m_step(points, resp);

    double mx = 0, my = 0;
    for (std::size_t i = 0; i < bg_x.size(); ++i) {
        mx += bg_x[i];
        my += bg_y[i];
    }
    mx /= bg_x.size();
    my /= bg_y.size();
    double spread = 0;
    for (std::size_t i = 0; i < bg_x.size(); ++i)
        spread += (bg_x[i] - mx) * (bg_x[i] - mx) + (bg_y[i] - my) * (bg_y[i] - my);

    CHECK(fitted.x02 == doctest::Approx(mx).epsilon(1e-12));
    CHECK(fitted.y02 == doctest::Approx(my).epsilon(1e-12));
    CHECK(fitted.sigma2 ==
          doctest::Approx(std::sqrt(spread / (2.0 * bg_x.size()))).epsilon(1e-12));
    const CircleFit direct = fit_closed_form(circle);
    CHECK(fitted.x01 == doctest::Approx(direct.x0).epsilon(1e-12));
}

TEST_CASE("weighted fit on exact circle points recovers the circle") {
    const EdgePointSet points = exact_circle_points(2, 3, 5, 25);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> weight(0.2, 2.0);
    std::vector<double> weights;
    for (std::size_t i = 0; i < points.size(); ++i)
        weights.push_back(weight(rng));
    const CircleFit fit = fit_closed_form_weighted(points, weights);
    CHECK(fit.x0 == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.y0 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.r == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("m_step detects class collapse") {
    const EdgePointSet points = exact_circle_points(0, 0, 5, 10);
    ResponsibilityMatrix resp;
    resp.circle.assign(points.size(), 1.0);
    resp.background.assign(points.size(), 0.0);
    CHECK_THROWS_AS(m_step(points, resp), Error);
}

TEST_CASE("init_params solves the normal-crossing system") {
    SUBCASE("two orthogonal normal lines cross at the origin") {
        const EdgePointSet points = {{1, 0, -1, 0}, {0, 1, 0, -1}, {-1, 0, 1, 0}};
        const MixtureParams p = init_params(points, 100.0);
        CHECK(p.x01 == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(p.y01 == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("exact circle data gives the true centre and RMS radius") {
        const EdgePointSet points = exact_circle_points(2, 3, 5, 40);
        const MixtureParams p = init_params(points, 200.0);
        CHECK(p.x01 == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(p.y01 == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(p.r == doctest::Approx(5.0).epsilon(1e-9));
        CHECK(p.sigma2 == doctest::Approx(5.0).epsilon(1e-9));
        CHECK(p.sigma1 == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(p.tau == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("parallel normals are singular") {
        const EdgePointSet points = {{0, 0, 1, 0}, {1, 5, 1, 0}, {2, -3, 1, 0}};
        CHECK_THROWS_AS(init_params(points, 100.0), Error);
    }
}

TEST_CASE("EM on a single population matches the closed form") {
    const EdgePointSet points = unit_noisy_points(20, 25, 15, 200, 0.02, 51);
    const MixtureParams init = init_params(points, std::hypot(64.0, 48.0));
    const auto [params, trace] = fit_pupil_em(points, init);
    CHECK(trace.converged);
    const CircleFit direct = fit_closed_form(points);
    CHECK(params.x01 == doctest::Approx(direct.x0).epsilon(1e-4));
    CHECK(params.y01 == doctest::Approx(direct.y0).epsilon(1e-4));
    CHECK(params.r == doctest::Approx(direct.r).epsilon(1e-4));
    CHECK(params.tau > 0.9);
}

TEST_CASE("EM log-likelihood never decreases") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const EdgePointSet points = annulus_points(30, 32, 25, 9, 160, 160, 0.08, 1000 + seed);
        const MixtureParams init = init_params(points, 120.0);
        const auto [params, trace] = fit_pupil_em(points, init);
        for (std::size_t i = 1; i < trace.iterations.size(); ++i)
            CHECK(trace.iterations[i].loglik >= trace.iterations[i - 1].loglik - 1e-8);
    }
}

TEST_CASE("EM separates the outer edge from inner-edge clutter") {
    const double r_out = 25.0;
    const EdgePointSet points = annulus_points(30, 32, r_out, 9, 160, 160, 0.05, 2024);
    const MixtureParams init = init_params(points, 120.0);
    const auto [params, trace] = fit_pupil_em(points, init);
    CHECK(std::abs(params.r - r_out) < 0.5);

    // mean class-1 responsibility must be higher on true outer-edge points
    const ResponsibilityMatrix resp = e_step(points, params);
    double outer_mean = 0.0, inner_mean = 0.0;
    for (std::size_t i = 0; i < 160; ++i)
        outer_mean += resp.circle[i];
    for (std::size_t i = 160; i < 320; ++i)
        inner_mean += resp.circle[i];
    CHECK(outer_mean / 160.0 > inner_mean / 160.0);
}

TEST_CASE("EM argument validation") {
    const EdgePointSet points = exact_circle_points(0, 0, 5, 10);
    const MixtureParams init = init_params(points, 50.0);
    CHECK_THROWS_AS(fit_pupil_em(points, init, -1.0, 10), Error);
    CHECK_THROWS_AS(fit_pupil_em(points, init, 1e-6, 0), Error);
}
