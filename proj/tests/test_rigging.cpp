#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "riggeo/errors.hpp"
#include "riggeo/rigging.hpp"
#include "test_support.hpp"

using namespace riggeo;
using testsupport::SplitMix64;

namespace {

std::shared_ptr<const ChartedSpacetime> minkowski4() {
    return std::make_shared<const ChartedSpacetime>(ChartedSpacetime::create(
        "minkowski", {"t", "x", "y", "z"}, {{-4, 4}, {-2, 2}, {-2, 2}, {-2, 2}},
        {std::nullopt, std::nullopt, std::nullopt, std::nullopt},
        {"-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"}));
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

RiggedHypersurface hyperplane(std::span<const std::string> rig) {
    return RiggedHypersurface::create(minkowski4(), "t - x", rig, "t",
                                      {{-1, 1}, {-1, 1}, {-1, 1}});
}

RiggedHypersurface cone(std::span<const std::string> rig) {
    return RiggedHypersurface::create(minkowski4(), "t - sqrt(x^2 + y^2 + z^2)", rig, "t",
                                      {{0.7, 1.1}, {0.6, 1.0}, {0.5, 0.9}});
}

RiggedHypersurface wavefront(std::span<const std::string> rig) {
    return RiggedHypersurface::create(ppwave4(), "u", rig, "u",
                                      {{-1, 1}, {-1, 1}, {-1, 1}});
}

const std::vector<std::string> kDt{"1", "0", "0", "0"};

double worst_frame_identity(const RiggedFrame& fr) {
    const std::vector<double> xv = fr.xi_values();
    const std::vector<double> nv = fr.transverse_values();
    const std::vector<double> zv = fr.zeta_values();
    double worst = std::abs(fr.inner(xv, xv));                       // xi null
    worst = std::max(worst, std::abs(fr.inner(nv, nv)));             // N null
    worst = std::max(worst, std::abs(fr.inner(nv, xv) - 1.0));       // pairing
    worst = std::max(worst, std::abs(omega_form(fr, xv) - 1.0));     // omega(xi) = 1
    for (int a = 0; a < fr.screen_count(); ++a) {
        std::vector<double> e = fr.values_of(fr.screen[a]);
        worst = std::max(worst, std::abs(fr.inner(e, xv)));
        worst = std::max(worst, std::abs(fr.inner(e, nv)));
        worst = std::max(worst, std::abs(omega_form(fr, e)));
        for (int b = 0; b <= a; ++b) {
            std::vector<double> f = fr.values_of(fr.screen[b]);
            worst = std::max(worst,
                             std::abs(fr.inner(e, f) - (a == b ? 1.0 : 0.0)));
        }
        double dfe = 0.0;
        for (int i = 0; i < fr.n; ++i) dfe += fr.level.d1(i) * e[i];
        worst = std::max(worst, std::abs(dfe));
    }
    // zeta reconstructs from the null pair
    for (int i = 0; i < fr.n; ++i)
        worst = std::max(worst, std::abs(zv[i] - (nv[i] + 0.5 * fr.zeta_sq.value() * xv[i])));
    return worst;
}

} // namespace

TEST_CASE("hyperplane frame has the expected exact components") {
    RiggedHypersurface h = hyperplane(kDt);
    const std::vector<double> p = h.solve_point(std::vector<double>{0.4, -0.3, 0.8});
    CHECK(p[0] == doctest::Approx(0.4));  // t = x on the plane
    RiggedFrame fr = build_frame(h, p);

    const std::vector<double> xv = fr.xi_values();
    CHECK(xv[0] == doctest::Approx(-1.0));
    CHECK(xv[1] == doctest::Approx(-1.0));
    CHECK(xv[2] == doctest::Approx(0.0).scale(1.0));
    CHECK(xv[3] == doctest::Approx(0.0).scale(1.0));

    const std::vector<double> nv = fr.transverse_values();
    CHECK(nv[0] == doctest::Approx(0.5));
    CHECK(nv[1] == doctest::Approx(-0.5));

    REQUIRE(fr.screen_count() == 2);
    CHECK(fr.screen[0][2].value() == doctest::Approx(1.0));
    CHECK(fr.screen[1][3].value() == doctest::Approx(1.0));
    CHECK(worst_frame_identity(fr) < 1e-12);

    // totally geodesic and parallel rigging: B, tau, C all vanish
    const auto basis = fr.tangent_values();
    for (const auto& u : basis) {
        CHECK(std::abs(rotation_form(fr, u)) < 1e-13);
        for (const auto& x : basis) {
            CHECK(std::abs(null_fundamental(fr, u, x)) < 1e-13);
            CHECK(std::abs(screen_fundamental(fr, u, x)) < 1e-13);
        }
    }
}

TEST_CASE("position-dependent rigging turns on rotation but keeps xi parallel") {
    const std::vector<std::string> tilted{"1 + x", "0", "0", "0"};
    RiggedHypersurface h = hyperplane(tilted);
    // at x = 0 the two riggings coincide, so xi is (-1,-1,0,0) there
    const std::vector<double> p = h.solve_point(std::vector<double>{0.0, 0.3, -0.2});
    RiggedFrame fr = build_frame(h, p);
    CHECK(worst_frame_identity(fr) < 1e-12);

    const std::vector<double> xv = fr.xi_values();
    CHECK(xv[0] == doctest::Approx(-1.0));
    CHECK(xv[1] == doctest::Approx(-1.0));

    CHECK(rotation_form(fr, xv) == doctest::Approx(-1.0));
    CHECK(extended_screen_fundamental(fr, xv, xv) == doctest::Approx(1.0));

    // the two rotation-form routes differentiate different fields
    SplitMix64 rng(0x7a11ULL);
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<double> u(4);
        for (double& c : u) c = rng.sym();
        CHECK(rotation_form(fr, u) ==
              doctest::Approx(rotation_form_via_transverse(fr, u)).epsilon(1e-12));
    }

    // scaling the rigging rescales xi at points where the factor is not 1
    RiggedHypersurface h0 = hyperplane(kDt);
    const std::vector<double> q = h0.solve_point(std::vector<double>{0.5, 0.1, 0.2});
    RiggedFrame fr0 = build_frame(h0, q);
    RiggedFrame fr1 = build_frame(h, q);
    const std::vector<double> a = fr0.xi_values();
    const std::vector<double> b = fr1.xi_values();
    for (int i = 0; i < 4; ++i) CHECK(b[i] == doctest::Approx(a[i] / 1.5).epsilon(1e-12));
}

TEST_CASE("light cone: expansion 1/r in every screen direction") {
    RiggedHypersurface h = cone(kDt);
    SplitMix64 rng(0xc0deULL);
    for (int rep = 0; rep < 4; ++rep) {
        const std::vector<double> base{rng.in(0.7, 1.1), rng.in(0.6, 1.0), rng.in(0.5, 0.9)};
        const std::vector<double> p = h.solve_point(base);
        const double r = p[0];  // t = r on the cone
        RiggedFrame fr = build_frame(h, p);
        CHECK(worst_frame_identity(fr) < 1e-11);

        const auto basis = fr.tangent_values();
        // B(xi, anything) = 0; B symmetric; B = 1/r on unit screen directions
        for (const auto& x : basis) {
            CHECK(null_fundamental(fr, basis[0], x) == doctest::Approx(0.0).scale(1.0));
            CHECK(null_fundamental(fr, x, basis[0]) == doctest::Approx(0.0).scale(1.0));
        }
        for (int a = 0; a < 2; ++a) {
            const std::vector<double> ea = fr.values_of(fr.screen[a]);
            CHECK(null_fundamental(fr, ea, ea) == doctest::Approx(1.0 / r).epsilon(1e-10));
            for (int b = 0; b < 2; ++b) {
                const std::vector<double> eb = fr.values_of(fr.screen[b]);
                CHECK(null_fundamental(fr, ea, eb) ==
                      doctest::Approx(null_fundamental(fr, eb, ea)).epsilon(1e-11));
                // with a parallel unit-timelike rigging, C = B/2
                CHECK(screen_fundamental(fr, ea, eb) ==
                      doctest::Approx(0.5 * null_fundamental(fr, ea, eb)).epsilon(1e-11));
            }
        }

        // two independent routes to B: differentiate xi against a value
        // vector, or differentiate the screen field against xi
        for (const auto& u : basis)
            for (int b = 0; b < 2; ++b) {
                const double r1 = null_fundamental(fr, u, fr.values_of(fr.screen[b]));
                const double r2 = null_fundamental_via_field(fr, u, fr.screen[b]);
                CHECK(r1 == doctest::Approx(r2).epsilon(1e-11).scale(1.0));
            }

        // C against the transverse pairing route, screen arguments
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const std::vector<double> ea = fr.values_of(fr.screen[a]);
                const std::vector<double> de =
                    covariant_derivative(fr.curv, ea, fr.screen[b]);
                const double via_pairing = fr.inner(de, fr.transverse_values());
                CHECK(screen_fundamental(fr, ea, fr.values_of(fr.screen[b])) ==
                      doctest::Approx(via_pairing).epsilon(1e-11).scale(1.0));
            }
    }

    // doubling the rigging halves xi and B
    const std::vector<std::string> doubled{"2", "0", "0", "0"};
    RiggedHypersurface h2 = cone(doubled);
    const std::vector<double> p = h.solve_point(std::vector<double>{0.9, 0.8, 0.7});
    RiggedFrame fr1 = build_frame(h, p);
    RiggedFrame fr2 = build_frame(h2, p);
    const std::vector<double> e = fr1.values_of(fr1.screen[0]);
    CHECK(null_fundamental(fr2, e, e) ==
          doctest::Approx(0.5 * null_fundamental(fr1, e, e)).epsilon(1e-12));
    for (int i = 0; i < 4; ++i)
        CHECK(fr2.xi_values()[i] == doctest::Approx(0.5 * fr1.xi_values()[i]).scale(1.0));
}

TEST_CASE("wavefront of a plane-fronted wave is totally geodesic") {
    const std::vector<std::string> du{"1", "0", "0", "0"};
    RiggedHypersurface h = wavefront(du);
    const std::vector<double> p = h.solve_point(std::vector<double>{0.4, 0.8, -0.6});
    RiggedFrame fr = build_frame(h, p);
    CHECK(worst_frame_identity(fr) < 1e-12);

    // xi = d_v, N = d_u - H/2 d_v, screen {d_x, d_y}
    const double H = p[2] * p[2] - p[3] * p[3];
    CHECK(fr.xi_values()[1] == doctest::Approx(1.0));
    CHECK(fr.transverse_values()[0] == doctest::Approx(1.0));
    CHECK(fr.transverse_values()[1] == doctest::Approx(-0.5 * H));
    CHECK(fr.screen[0][2].value() == doctest::Approx(1.0));
    CHECK(fr.screen[1][3].value() == doctest::Approx(1.0));

    const auto basis = fr.tangent_values();
    for (const auto& u : basis) {
        CHECK(std::abs(rotation_form(fr, u)) < 1e-12);
        for (const auto& x : basis)
            CHECK(std::abs(null_fundamental(fr, u, x)) < 1e-12);
    }
}

TEST_CASE("twisting the rigging reshapes the screen as expected") {
    const std::vector<std::string> twisted{"1", "0", "y", "0"};
    RiggedHypersurface h = wavefront(twisted);
    const std::vector<double> p = h.solve_point(std::vector<double>{0.2, 0.5, 0.7});
    RiggedFrame fr = build_frame(h, p);
    CHECK(worst_frame_identity(fr) < 1e-12);

    // screen turns into {d_x - y d_v, d_y}; xi stays d_v
    const double y = p[3];
    CHECK(fr.xi_values()[1] == doctest::Approx(1.0));
    CHECK(fr.screen[0][1].value() == doctest::Approx(-y));
    CHECK(fr.screen[0][2].value() == doctest::Approx(1.0));
    CHECK(fr.screen[1][3].value() == doctest::Approx(1.0));

    // still totally geodesic: B is a property of the surface, not the rigging
    const auto basis = fr.tangent_values();
    for (const auto& u : basis)
        for (const auto& x : basis)
            CHECK(std::abs(null_fundamental(fr, u, x)) < 1e-12);
}

TEST_CASE("null rigging on a totally geodesic horizon") {
    const std::vector<std::string> dr{"0", "1", "0", "0"};
    RiggedHypersurface h = RiggedHypersurface::create(
        horizon_chart(), "r - 1", dr, "r",
        {{-1, 1}, {0.6, 2.5}, {0.3, 6.0}});
    const std::vector<double> p = h.solve_point(std::vector<double>{0.3, 1.2, 2.0});
    CHECK(p[1] == doctest::Approx(1.0));
    RiggedFrame fr = build_frame(h, p);
    CHECK(worst_frame_identity(fr) < 1e-11);

    // the rigging itself is null here, so N = zeta = d_r and xi = -d_u
    CHECK(fr.zeta_sq.value() == doctest::Approx(0.0).scale(1.0));
    CHECK(fr.xi_values()[0] == doctest::Approx(-1.0));
    CHECK(std::abs(fr.xi_values()[1]) < 1e-12);
    CHECK(fr.transverse_values()[1] == doctest::Approx(1.0));

    const auto basis = fr.tangent_values();
    for (const auto& u : basis)
        for (const auto& x : basis)
            CHECK(std::abs(null_fundamental(fr, u, x)) < 1e-10);
}

TEST_CASE("screen shape operator lands in the screen") {
    RiggedHypersurface h = cone(kDt);
    const std::vector<double> p = h.solve_point(std::vector<double>{1.0, 0.7, 0.6});
    RiggedFrame fr = build_frame(h, p);
    SplitMix64 rng(0xa5a5ULL);
    const auto basis = fr.tangent_values();
    for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> u(4, 0.0);
        for (const auto& b : basis) {
            const double c = rng.sym();
            for (int i = 0; i < 4; ++i) u[i] += c * b[i];
        }
        const std::vector<double> as = screen_shape_operator(fr, u);
        CHECK(std::abs(omega_form(fr, as)) < 1e-10);
        double dfa = 0.0;
        for (int i = 0; i < 4; ++i) dfa += fr.level.d1(i) * as[i];
        CHECK(std::abs(dfa) < 1e-10);
        // shape operator of the rigging is tangent as well
        const std::vector<double> a = shape_operator(fr, u);
        double dfs = 0.0;
        for (int i = 0; i < 4; ++i) dfs += fr.level.d1(i) * a[i];
        CHECK(std::abs(dfs) < 1e-10);
    }
}

TEST_CASE("point solving and re-anchoring") {
    RiggedHypersurface h = cone(kDt);
    const std::vector<double> base{0.8, 0.9, 0.6};
    std::vector<double> p = h.solve_point(base);
    CHECK(std::abs(h.level_value(p)) < 1e-12);
    CHECK(p[1] == 0.8);
    CHECK(p[0] == doctest::Approx(std::sqrt(0.64 + 0.81 + 0.36)));

    p[0] += 1e-3;  // drift off the surface, then re-anchor
    const std::vector<double> q = h.refine_point(p);
    CHECK(std::abs(h.level_value(q)) < 1e-12);
    CHECK(q[1] == p[1]);
    CHECK(q[2] == p[2]);

    CHECK_THROWS_AS(h.solve_point(std::vector<double>{0.8, 0.9}), NumericsError);
    CHECK_THROWS_AS(build_frame(h, p), NumericsError);  // p is off the surface
}

TEST_CASE("scenario validation refuses broken input") {
    // a non-null level set
    CHECK_THROWS_AS(RiggedHypersurface::create(minkowski4(), "t", kDt, "t",
                                               {{-1, 1}, {-1, 1}, {-1, 1}}),
                    GeometryError);
    // a rigging tangent to the surface
    const std::vector<std::string> dy{"0", "0", "1", "0"};
    CHECK_THROWS_AS(hyperplane(dy), GeometryError);
    // periodic graph coordinate
    const std::vector<std::string> dr{"0", "1", "0", "0"};
    CHECK_THROWS_AS(RiggedHypersurface::create(horizon_chart(), "phi - 1", dr, "phi",
                                               {{-1, 1}, {0.6, 1.4}, {0.6, 2.5}}),
                    GeometryError);
    // wrong box arity and boxes outside the chart
    CHECK_THROWS_AS(RiggedHypersurface::create(minkowski4(), "t - x", kDt, "t",
                                               {{-1, 1}, {-1, 1}}),
                    GeometryError);
    CHECK_THROWS_AS(RiggedHypersurface::create(minkowski4(), "t - x", kDt, "t",
                                               {{-1, 1}, {-1, 1}, {-3, 3}}),
                    GeometryError);
    CHECK_THROWS_AS(RiggedHypersurface::create(minkowski4(), "t - x", kDt, "t",
                                               {{-1, 1}, {-1, 1}, {1, 1}}),
                    GeometryError);
}
