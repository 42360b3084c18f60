#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "riggeo/errors.hpp"
#include "riggeo/geodesics.hpp"
#include "riggeo/rigging.hpp"

using namespace riggeo;

namespace {

constexpr double kPi = 3.14159265358979323846;

ChartedSpacetime minkowski() {
    return ChartedSpacetime::create(
        "minkowski", {"t", "x", "y", "z"}, {{-4, 4}, {-2, 2}, {-2, 2}, {-2, 2}},
        {std::nullopt, std::nullopt, std::nullopt, std::nullopt},
        {"-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"});
}

ChartedSpacetime desitter_static() {
    return ChartedSpacetime::create(
        "desitter_static", {"t", "r", "theta", "phi"},
        {{-1, 4}, {0.1, 0.9}, {0.4, 2.7}, {0.0, 6.283185307179586}},
        {std::nullopt, std::nullopt, std::nullopt, 6.283185307179586},
        {"-(1 - r^2)", "0", "0", "0", "1/(1 - r^2)", "0", "0", "r^2", "0",
         "r^2*sin(theta)^2"});
}

ChartedSpacetime flat_torus() {
    return ChartedSpacetime::create("flat_torus", {"t", "x", "y"},
                                    {{0, 1}, {0, 1}, {0, 1}}, {1.0, 1.0, 1.0},
                                    {"-1", "0", "0", "1", "0", "1"});
}

std::shared_ptr<const ChartedSpacetime> minkowski4() {
    return std::make_shared<const ChartedSpacetime>(minkowski());
}

std::shared_ptr<const ChartedSpacetime> ppwave4() {
    return std::make_shared<const ChartedSpacetime>(ChartedSpacetime::create(
        "ppwave", {"u", "v", "x", "y"}, {{-3, 3}, {-3, 3}, {-1.5, 1.5}, {-1.5, 1.5}},
        {std::nullopt, std::nullopt, std::nullopt, std::nullopt},
        {"x^2 - y^2", "1", "0", "0", "0", "0", "0", "1", "0", "1"}));
}

std::shared_ptr<const ChartedSpacetime> horizon_chart() {
    return std::make_shared<const ChartedSpacetime>(ChartedSpacetime::create(
        "desitter_horizon", {"u", "r", "theta", "phi"},
        {{-2, 2}, {0.5, 1.5}, {0.4, 2.7}, {0.0, 6.283185307179586}},
        {std::nullopt, std::nullopt, std::nullopt, 6.283185307179586},
        {"-(1 - r^2)", "-1", "0", "0", "0", "0", "0", "r^2", "0", "r^2*sin(theta)^2"}));
}

const std::vector<std::string> kDt{"1", "0", "0", "0"};

RiggedHypersurface hyperplane(std::span<const std::string> rig) {
    return RiggedHypersurface::create(minkowski4(), "t - x", rig, "t",
                                      {{-1, 1}, {-1, 1}, {-1, 1}});
}

RiggedHypersurface cone() {
    return RiggedHypersurface::create(minkowski4(), "t - sqrt(x^2 + y^2 + z^2)", kDt, "t",
                                      {{0.7, 1.1}, {0.6, 1.0}, {0.5, 0.9}});
}

RiggedHypersurface wavefront(std::span<const std::string> rig) {
    return RiggedHypersurface::create(ppwave4(), "u", rig, "u",
                                      {{-1, 1}, {-1, 1}, {-1, 1}});
}

const std::vector<std::string> kDr{"0", "1", "0", "0"};

RiggedHypersurface horizon() {
    return RiggedHypersurface::create(horizon_chart(), "r - 1", kDr, "r",
                                      {{-1, 1}, {0.6, 2.5}, {0.3, 6.0}});
}

GeodesicState ambient_state(std::vector<double> x, std::vector<double> v) {
    GeodesicState s;
    s.position = std::move(x);
    s.velocity = std::move(v);
    s.kind = MetricKind::ambient;
    return s;
}

GeodesicState induced_state(std::vector<double> q, std::vector<double> w, MetricKind kind) {
    GeodesicState s;
    s.position = std::move(q);
    s.velocity = std::move(w);
    s.kind = kind;
    return s;
}

double max_component_gap(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST_CASE("straight lines integrate exactly in a flat chart") {
    ChartedSpacetime M = minkowski();
    const GeodesicState start = ambient_state({0.0, -0.5, 0.2, 0.1}, {1.0, 0.8, -0.3, 0.4});
    const Trajectory tr = integrate(M, start, 2.0);

    CHECK(tr.kind == MetricKind::ambient);
    CHECK(tr.steps > 0);
    CHECK(tr.rhs_evaluations > tr.steps);
    CHECK(tr.energy_drift < 1e-12);
    CHECK(tr.samples.size() == 64);
    CHECK(tr.samples.front().t == 0.0);
    CHECK(tr.samples.back().t == 2.0);
    CHECK(max_component_gap(tr.samples.front().position, start.position) == 0.0);
    CHECK(max_component_gap(tr.samples.back().position, tr.final_state.position) == 0.0);

    for (const TrajectorySample& s : tr.samples) {
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(s.position[i] - (start.position[i] + s.t * start.velocity[i])) <
                  1e-12);
            CHECK(std::abs(s.velocity[i] - start.velocity[i]) < 1e-12);
            CHECK(std::abs(s.acceleration[i]) < 1e-12);
        }
    }

    CHECK_THROWS_AS(integrate(M, start, 0.0), NumericsError);
    CHECK_THROWS_AS(integrate(M, ambient_state({0, 0, 0}, {1, 0, 0}), 1.0), GeometryError);
    GeodesicState wrong_kind = start;
    wrong_kind.kind = MetricKind::rigged;
    CHECK_THROWS_AS(integrate(M, wrong_kind, 1.0), GeometryError);
}

TEST_CASE("a static-chart orbit conserves its Killing charges") {
    ChartedSpacetime M = desitter_static();
    const GeodesicState start =
        ambient_state({0.0, 0.5, kPi / 2, 0.0}, {1.0, 0.0, 0.0, 0.3});
    const Trajectory tr = integrate(M, start, 1.0);

    CHECK(tr.energy_drift < 1e-8);
    const double e0 = -(1.0 - 0.25) * 1.0;     // g_tt t'
    const double j0 = 0.25 * 0.3;              // r^2 sin(theta)^2 phi'
    for (const TrajectorySample& s : tr.samples) {
        const double r = s.position[1], th = s.position[2];
        const double e = -(1.0 - r * r) * s.velocity[0];
        const double j = r * r * std::sin(th) * std::sin(th) * s.velocity[3];
        CHECK(std::abs(e - e0) < 1e-8);
        CHECK(std::abs(j - j0) < 1e-8);
        CHECK(std::abs(s.position[2] - kPi / 2) < 1e-9);  // equatorial plane
    }
    // the cosmological term pushes the orbit outward
    CHECK(tr.final_state.position[1] > 0.6);

    SUBCASE("reversing the final velocity runs the orbit back") {
        GeodesicState back = tr.final_state;
        for (double& v : back.velocity) v = -v;
        back.parameter = 0.0;
        const Trajectory rtr = integrate(M, back, 1.0);
        CHECK(max_component_gap(rtr.final_state.position, start.position) < 1e-8);
        for (int i = 0; i < 4; ++i)
            CHECK(std::abs(rtr.final_state.velocity[i] + start.velocity[i]) < 1e-8);
    }

    SUBCASE("dense samples match a direct integration to the same parameter") {
        IntegrationControl coarse;
        coarse.samples = 11;
        const Trajectory full = integrate(M, start, 1.0, coarse);
        const TrajectorySample& s = full.samples[4];
        CHECK(s.t == doctest::Approx(0.4).epsilon(1e-15));
        const Trajectory direct = integrate(M, start, s.t);
        CHECK(max_component_gap(s.position, direct.final_state.position) < 1e-8);
        CHECK(max_component_gap(s.velocity, direct.final_state.velocity) < 1e-8);
    }
}

TEST_CASE("leaving the chart raises a located exit error") {
    ChartedSpacetime M = desitter_static();
    const GeodesicState start =
        ambient_state({0.0, 0.5, kPi / 2, 0.0}, {1.0, 0.0, 0.0, 0.3});

    double t_exit = 0.0;
    try {
        integrate(M, start, 3.0);
        FAIL("expected a chart exit");
    } catch (const ChartExitError& e) {
        t_exit = e.exit_parameter();
        CHECK(e.coordinate() == 1);  // the radial coordinate escapes
        CHECK(t_exit > 0.0);
        CHECK(t_exit < 3.0);
        CHECK(std::string(e.what()).find("'r'") != std::string::npos);
    }
    // stopping just short of the located exit parameter succeeds
    const Trajectory tr = integrate(M, start, 0.9 * t_exit);
    CHECK(tr.final_state.position[1] < 0.9);
}

TEST_CASE("rigged geodesics are straight when the induced metric is flat") {
    SUBCASE("cone") {
        RiggedHypersurface h = cone();
        const std::vector<double> q0{0.9, 0.8, 0.7};
        const std::vector<double> w{0.05, -0.04, 0.03};
        const Trajectory tr = integrate(h, induced_state(q0, w, MetricKind::rigged), 1.0);
        CHECK(tr.energy_drift < 1e-12);
        for (const TrajectorySample& s : tr.samples)
            for (int a = 0; a < 3; ++a) {
                CHECK(std::abs(s.position[a] - (q0[a] + s.t * w[a])) < 1e-9);
                CHECK(std::abs(s.velocity[a] - w[a]) < 1e-9);
            }
    }
    SUBCASE("an induced line that crosses the ambient bounds exits") {
        RiggedHypersurface h = cone();
        CHECK_THROWS_AS(
            integrate(h, induced_state({0.9, 0.8, 0.7}, {1.0, 0.0, 0.0}, MetricKind::rigged),
                      2.0),
            ChartExitError);
    }
}

TEST_CASE("horizon rigged geodesics split into a line and a great circle") {
    RiggedHypersurface h = horizon();
    SUBCASE("null-generator direction runs straight") {
        const Trajectory tr =
            integrate(h, induced_state({0.0, 1.2, 0.7}, {1.0, 0.0, 0.0}, MetricKind::rigged),
                      1.5);
        CHECK(std::abs(tr.final_state.position[0] - 1.5) < 1e-9);
        CHECK(std::abs(tr.final_state.position[1] - 1.2) < 1e-9);
        CHECK(std::abs(tr.final_state.position[2] - 0.7) < 1e-9);
        CHECK(tr.energy_drift < 1e-12);
    }
    SUBCASE("the equator is a geodesic of the spherical factor") {
        const Trajectory tr = integrate(
            h, induced_state({0.0, kPi / 2, 0.5}, {0.0, 0.0, 0.4}, MetricKind::rigged), 2.0);
        CHECK(std::abs(tr.final_state.position[1] - kPi / 2) < 1e-9);
        CHECK(std::abs(tr.final_state.position[2] - (0.5 + 0.8)) < 1e-9);
        CHECK(tr.energy_drift < 1e-10);
    }
}

TEST_CASE("cross-metric residuals separate shared geodesics from tilted ones") {
    SUBCASE("a screen line on the wavefront is a geodesic of every structure") {
        RiggedHypersurface h = wavefront(kDt);
        const Trajectory tr = integrate(
            h, induced_state({0.1, 0.2, -0.3}, {0.0, 0.4, -0.2}, MetricKind::leaf), 1.0);
        for (int a = 0; a < 3; ++a)
            CHECK(std::abs(tr.final_state.velocity[a] - (a == 1 ? 0.4 : a == 2 ? -0.2 : 0.0)) <
                  1e-8);
        const CrossMetricResult res = cross_metric_residual(h, tr);
        CHECK(res.level_drift < 1e-10);
        CHECK(res.defect < 1e-8);
        CHECK(res.cbar < 1e-9);
    }
    SUBCASE("an ambient line in a canonical null hyperplane has no defect") {
        RiggedHypersurface h = hyperplane(kDt);
        const std::vector<double> p0 = h.solve_point(std::vector<double>{0.3, 0.1, -0.2});
        const Trajectory tr =
            integrate(h, ambient_state(p0, {0.3, 0.3, 0.2, -0.1}), 1.0);
        const CrossMetricResult res = cross_metric_residual(h, tr);
        CHECK(res.level_drift < 1e-10);
        CHECK(res.defect < 1e-9);
        CHECK(res.cbar < 1e-12);
    }
    SUBCASE("a tilted rigging bends the induced connection away from the ambient one") {
        const std::vector<std::string> tilted{"1 + x", "0", "0", "0"};
        RiggedHypersurface h = hyperplane(tilted);
        const std::vector<double> p0 = h.solve_point(std::vector<double>{0.0, 0.2, -0.1});
        const Trajectory tr =
            integrate(h, ambient_state(p0, {-1.0, -1.0, 0.0, 0.0}), 0.5);
        const CrossMetricResult res = cross_metric_residual(h, tr);
        CHECK(res.level_drift < 1e-10);
        CHECK(res.defect > 1e-3);
        // the extended screen form degenerates to a constant along this line
        CHECK(res.cbar == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("the three geodesic notions coincide on integrable screens") {
    SUBCASE("null hyperplane") {
        RiggedHypersurface h = hyperplane(kDt);
        const std::vector<double> q0{0.3, 0.1, -0.2};
        const std::vector<double> w{0.0, 0.5, -0.3};
        const LeafCorrespondenceResult res = leaf_correspondence_check(h, q0, w, 0.8);
        CHECK(res.second_fundamental < 1e-10);
        CHECK(res.frobenius < 1e-10);
        CHECK(res.c_symmetric < 1e-10);
        CHECK(res.worst_pair() < 1e-10);
    }
    SUBCASE("wavefront") {
        RiggedHypersurface h = wavefront(kDt);
        const std::vector<double> q0{0.1, 0.2, -0.3};
        const std::vector<double> w{0.0, 0.4, -0.2};
        const LeafCorrespondenceResult res = leaf_correspondence_check(h, q0, w, 1.0);
        CHECK(res.worst_pair() < 1e-7);
    }
    SUBCASE("a twisted rigging is rejected before any integration") {
        const std::vector<std::string> twisted{"1", "0", "y", "0"};
        RiggedHypersurface h = wavefront(twisted);
        CHECK_THROWS_AS(
            leaf_correspondence_check(h, std::vector<double>{0.1, 0.2, -0.3},
                                      std::vector<double>{0.0, 0.4, -0.2}, 1.0),
            GeometryError);
    }
    SUBCASE("a velocity with a rigging component is rejected") {
        RiggedHypersurface h = wavefront(kDt);
        CHECK_THROWS_AS(
            leaf_correspondence_check(h, std::vector<double>{0.1, 0.2, -0.3},
                                      std::vector<double>{0.5, 0.4, -0.2}, 1.0),
            GeometryError);
    }
}

TEST_CASE("periodic search closes torus geodesics and classifies them") {
    ChartedSpacetime M = flat_torus();

    SUBCASE("an exact lattice line is recognized immediately") {
        const PeriodicOrbitResult res =
            find_periodic_geodesic(M, ambient_state({0, 0, 0}, {0, 1, 0}), 1.0);
        CHECK(res.converged);
        CHECK(res.closure_error < 1e-10);
        CHECK(res.character == CausalCharacter::spacelike);
        CHECK(std::abs(res.period - 1.0) < 1e-9);
    }
    SUBCASE("a perturbed guess is pulled onto a nearby lattice line") {
        const PeriodicOrbitResult res =
            find_periodic_geodesic(M, ambient_state({0, 0, 0}, {0.1, 0.95, 0.05}), 1.2);
        CHECK(res.converged);
        CHECK(res.closure_error < 1e-8);
        CHECK(!res.trace.empty());
    }
    SUBCASE("a diagonal lattice line is null") {
        PeriodicSearchOptions opt;
        opt.target = CausalCharacter::null;
        const PeriodicOrbitResult res =
            find_periodic_geodesic(M, ambient_state({0, 0, 0}, {1, 1, 0}), 1.0, opt);
        CHECK(res.converged);
        CHECK(res.character == CausalCharacter::null);
        CHECK(res.matches_target);
    }
    SUBCASE("the hunt dedups repeated orbits and keeps distinct characters") {
        const std::vector<GeodesicState> guesses{
            ambient_state({0, 0, 0}, {0, 1, 0}),
            ambient_state({0, 0, 0}, {1, 1, 0}),
            ambient_state({0, 0, 0}, {1, 0, 0}),
            ambient_state({0, 0, 0}, {0, 1, 0}),  // duplicate of the first
        };
        const std::vector<PeriodicOrbitResult> found =
            hunt_periodic_geodesics(M, guesses, 1.0);
        int converged = 0, null_count = 0, spacelike_count = 0, timelike_count = 0;
        for (const auto& r : found) {
            if (!r.converged) continue;
            ++converged;
            if (r.character == CausalCharacter::null) ++null_count;
            if (r.character == CausalCharacter::spacelike) ++spacelike_count;
            if (r.character == CausalCharacter::timelike) ++timelike_count;
            CHECK(r.closure_error < 1e-8);
        }
        CHECK(converged == 3);  // the near-duplicate merged away
        CHECK(null_count >= 1);
        CHECK(spacelike_count >= 1);
        CHECK(timelike_count >= 1);
    }
    SUBCASE("invalid searches are rejected") {
        CHECK_THROWS_AS(
            find_periodic_geodesic(M, ambient_state({0, 0, 0}, {0, 1, 0}), -1.0),
            GeometryError);
        GeodesicState bad = ambient_state({0, 0}, {0, 1});
        bad.kind = MetricKind::rigged;
        CHECK_THROWS_AS(find_periodic_geodesic(M, bad, 1.0), GeometryError);
    }
}

TEST_CASE("metric kinds and causal characters print their names") {
    CHECK(std::string(to_string(MetricKind::ambient)) == "ambient");
    CHECK(std::string(to_string(MetricKind::rigged)) == "rigged");
    CHECK(std::string(to_string(MetricKind::leaf)) == "leaf");
    CHECK(std::string(to_string(CausalCharacter::timelike)) == "timelike");
    CHECK(std::string(to_string(CausalCharacter::null)) == "null");
    CHECK(std::string(to_string(CausalCharacter::spacelike)) == "spacelike");
}
