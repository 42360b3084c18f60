#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "riggeo/errors.hpp"
#include "riggeo/jet_space.hpp"
#include "riggeo/rigging.hpp"
#include "riggeo/transverse.hpp"
#include "test_support.hpp"

using namespace riggeo;

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

const std::vector<std::string> kDt{"1", "0", "0", "0"};

RiggedHypersurface cone() {
    return RiggedHypersurface::create(minkowski4(), "t - sqrt(x^2 + y^2 + z^2)", kDt, "t",
                                      {{0.7, 1.1}, {0.6, 1.0}, {0.5, 0.9}});
}

RiggedHypersurface wavefront(std::span<const std::string> rig) {
    return RiggedHypersurface::create(ppwave4(), "u", rig, "u",
                                      {{-1, 1}, {-1, 1}, {-1, 1}});
}

RiggedHypersurface horizon() {
    const std::vector<std::string> dr{"0", "1", "0", "0"};
    return RiggedHypersurface::create(horizon_chart(), "r - 1", dr, "r",
                                      {{-1, 1}, {0.6, 2.5}, {0.3, 6.0}});
}

double max_abs(const Mat& m) {
    double worst = 0.0;
    for (double v : m.a) worst = std::max(worst, std::abs(v));
    return worst;
}

std::vector<double> vals(const std::vector<Jet3>& field) {
    std::vector<double> out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i].value();
    return out;
}

/// Ambient components of the coordinate tangent d(phi)/d(x_a).
std::vector<double> chart_tangent(const InducedChart& ch, int a) {
    std::vector<double> out(ch.phi.size());
    for (std::size_t i = 0; i < ch.phi.size(); ++i) out[i] = ch.phi[i].d1(a);
    return out;
}

/// Worst deviation of the transported frame from rigged-metric orthonormality:
/// gr(xi, xi) = 1, gr(xi, E_a) = 0, gr(E_a, E_b) = delta_ab.
double worst_rigged_orthonormality(const InducedChart& ch) {
    double worst = std::abs(field_pairing(ch.rigged, ch.xi_ind, ch.xi_ind).value() - 1.0);
    const int k = static_cast<int>(ch.screen_ind.size());
    for (int a = 0; a < k; ++a) {
        worst = std::max(
            worst, std::abs(field_pairing(ch.rigged, ch.xi_ind, ch.screen_ind[a]).value()));
        for (int b = 0; b <= a; ++b) {
            const double want = (a == b) ? 1.0 : 0.0;
            worst = std::max(worst,
                             std::abs(field_pairing(ch.rigged, ch.screen_ind[a],
                                                    ch.screen_ind[b]).value() -
                                      want));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("light cone chart carries an exactly Euclidean rigged metric") {
    RiggedHypersurface h = cone();
    const std::vector<double> p = h.solve_point(std::vector<double>{0.9, 0.8, 0.7});
    RiggedFrame fr = build_frame(h, p);
    InducedChart ch = build_induced_chart(h, fr);
    REQUIRE(ch.m == 3);

    // The degenerate direction of i*g is killed by adding omega (x) omega,
    // and on the cone the two effects cancel slot by slot: gr = delta.
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b) {
            const Jet3& g = ch.rigged.at(a, b);
            for (int s = 0; s < g.size(); ++s) {
                const double want = (s == 0 && a == b) ? 1.0 : 0.0;
                CHECK(std::abs(g.mono(s) - want) < 1e-12);
            }
        }

    // i*g itself is degenerate, gr is genuinely Riemannian
    CHECK(std::abs(determinant(ch.pullback.values())) < 1e-12);
    const std::vector<double> eig = sym_eigenvalues(ch.rigged_values());
    for (double ev : eig) CHECK(ev == doctest::Approx(1.0));

    // chart transport of the ambient metric agrees with re-evaluating it
    CHECK(pullback_consistency(ch, h, fr) < 1e-12);

    // the level function composed with the chart is the zero function
    const Jet3 f = compose_with_chart(ch, fr.level);
    for (int s = 0; s < f.size(); ++s) CHECK(std::abs(f.mono(s)) < 1e-10);
}

TEST_CASE("transported frames stay orthonormal for the rigged metric") {
    {
        RiggedHypersurface h = cone();
        RiggedFrame fr = build_frame(h, h.solve_point(std::vector<double>{0.9, 0.8, 0.7}));
        CHECK(worst_rigged_orthonormality(build_induced_chart(h, fr)) < 1e-10);
    }
    {
        const std::vector<std::string> twisted{"1", "0", "y", "0"};
        RiggedHypersurface h = wavefront(twisted);
        RiggedFrame fr = build_frame(h, h.solve_point(std::vector<double>{0.2, 0.5, 0.7}));
        CHECK(worst_rigged_orthonormality(build_induced_chart(h, fr)) < 1e-10);
    }
    {
        RiggedHypersurface h = horizon();
        RiggedFrame fr = build_frame(h, h.solve_point(std::vector<double>{0.3, 1.2, 2.0}));
        CHECK(worst_rigged_orthonormality(build_induced_chart(h, fr)) < 1e-10);
    }
}

TEST_CASE("dragging the rigged metric along xi measures the second fundamental form") {
    // On the cone B != 0, so the Lie derivative of gr is genuinely nonzero and
    // the identity L_xi gr = -2B is a real cancellation, not 0 = 0.
    RiggedHypersurface h = cone();
    const std::vector<std::vector<double>> bases{
        {0.9, 0.8, 0.7}, {0.75, 0.95, 0.55}, {1.05, 0.65, 0.85}};
    for (const auto& base : bases) {
        RiggedFrame fr = build_frame(h, h.solve_point(base));
        InducedChart ch = build_induced_chart(h, fr);

        double big = 0.0;
        for (int a = 0; a < ch.m; ++a)
            for (int b = 0; b < ch.m; ++b)
                big = std::max(big, std::abs(null_fundamental(fr, chart_tangent(ch, a),
                                                              chart_tangent(ch, b))));
        CHECK(big > 0.1);
        CHECK(max_abs(xi_killing_residual(ch)) > 0.1);  // xi is not a gr-Killing field here
        CHECK(max_abs(flow_residual(ch, fr)) < 1e-10);
    }

    // Totally geodesic cases: B = 0, so the flow fixes gr and xi is Killing.
    {
        RiggedHypersurface hw = wavefront(kDt);
        RiggedFrame fr = build_frame(hw, hw.solve_point(std::vector<double>{0.2, 0.5, 0.7}));
        InducedChart ch = build_induced_chart(hw, fr);
        CHECK(max_abs(xi_killing_residual(ch)) < 1e-11);
        CHECK(max_abs(flow_residual(ch, fr)) < 1e-11);
    }
    {
        RiggedHypersurface hh = horizon();
        RiggedFrame fr = build_frame(hh, hh.solve_point(std::vector<double>{0.3, 1.2, 2.0}));
        InducedChart ch = build_induced_chart(hh, fr);
        CHECK(max_abs(xi_killing_residual(ch)) < 1e-10);
        CHECK(max_abs(flow_residual(ch, fr)) < 1e-10);
    }
}

TEST_CASE("null horizon chart reduces to a round cylinder") {
    RiggedHypersurface h = horizon();
    const std::vector<double> p = h.solve_point(std::vector<double>{0.3, 1.2, 2.0});
    RiggedFrame fr = build_frame(h, p);
    InducedChart ch = build_induced_chart(h, fr);
    const double theta = p[2];

    // gr = du^2 + dtheta^2 + sin(theta)^2 dphi^2 in the induced (u, theta, phi)
    const Mat g = ch.rigged_values();
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(1.0));
    CHECK(g(2, 2) == doctest::Approx(std::sin(theta) * std::sin(theta)));
    CHECK(std::abs(g(0, 1)) < 1e-12);
    CHECK(std::abs(g(0, 2)) < 1e-12);
    CHECK(std::abs(g(1, 2)) < 1e-12);
    CHECK(ch.rigged.at(2, 2).d1(1) == doctest::Approx(std::sin(2.0 * theta)));

    // the sphere factor carries curvature 1, planes through the u-line are flat
    const std::vector<double> e_th{0.0, 1.0, 0.0};
    const std::vector<double> e_ph{0.0, 0.0, 1.0};
    CHECK(sectional_curvature(g, ch.rigged_curv, e_th, e_ph) == doctest::Approx(1.0));
    CHECK(std::abs(transverse_sectional(ch, vals(ch.xi_ind), e_th)) < 1e-8);

    // rotation form is closed, so the twist correction vanishes:
    // transverse curvature = rigged-metric curvature = 1 on the screen plane
    CHECK(max_abs(domega(ch)) < 1e-12);
    CHECK(transverse_sectional_frame(ch, 0, 1) == doctest::Approx(1.0));
    CHECK(transverse_sectional_connection(ch, 0, 1) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(transverse_sectional_connection(ch, 1, 0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(transverse_ricci_frame(ch, 0) == doctest::Approx(1.0));
    CHECK(transverse_ricci_frame(ch, 1) == doctest::Approx(1.0));
    CHECK(transverse_scalar(ch) == doctest::Approx(2.0));

    // same numbers through the ambient curvature alone
    for (int a = 0; a < fr.screen_count(); ++a) {
        const std::vector<double> e = fr.values_of(fr.screen[a]);
        CHECK(ambient_transverse_ricci(fr, e) == doctest::Approx(1.0).epsilon(1e-7));
    }
    const std::vector<double> s0 = fr.values_of(fr.screen[0]);
    const std::vector<double> s1 = fr.values_of(fr.screen[1]);
    CHECK(sectional_curvature(fr.gv, fr.curv, s0, s1) ==
          doctest::Approx(transverse_sectional_frame(ch, 0, 1)).epsilon(1e-7));

    // xi is parallel for gr, and both connections agree (totally geodesic)
    CHECK(xi_parallel_residual(ch) < 1e-10);
    CHECK(connection_coincidence_residual(ch, fr) < 1e-10);
}

TEST_CASE("plane wavefront is transversally flat") {
    RiggedHypersurface h = wavefront(kDt);
    const std::vector<double> p = h.solve_point(std::vector<double>{0.2, 0.5, 0.7});
    RiggedFrame fr = build_frame(h, p);
    InducedChart ch = build_induced_chart(h, fr);

    // gr = dv^2 + dx^2 + dy^2, exactly
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b) {
            const Jet3& g = ch.rigged.at(a, b);
            for (int s = 0; s < g.size(); ++s) {
                const double want = (s == 0 && a == b) ? 1.0 : 0.0;
                CHECK(std::abs(g.mono(s) - want) < 1e-12);
            }
        }

    CHECK(max_abs(domega(ch)) < 1e-12);
    CHECK(std::abs(transverse_sectional_frame(ch, 0, 1)) < 1e-9);
    CHECK(std::abs(transverse_sectional_connection(ch, 0, 1)) < 1e-9);
    CHECK(std::abs(transverse_scalar(ch)) < 1e-9);
    CHECK(xi_parallel_residual(ch) < 1e-11);
    CHECK(connection_coincidence_residual(ch, fr) < 1e-10);
    for (int a = 0; a < fr.screen_count(); ++a) {
        const std::vector<double> e = fr.values_of(fr.screen[a]);
        CHECK(std::abs(ambient_transverse_ricci(fr, e)) < 1e-9);
    }
}

TEST_CASE("twisted rigging yields a Nil rigged metric with flat transverse curvature") {
    const std::vector<std::string> twisted{"1", "0", "y", "0"};
    RiggedHypersurface h = wavefront(twisted);
    const std::vector<std::vector<double>> bases{{0.2, 0.5, 0.7}, {-0.4, 0.8, -0.3}};
    for (const auto& base : bases) {
        const std::vector<double> p = h.solve_point(base);
        RiggedFrame fr = build_frame(h, p);
        InducedChart ch = build_induced_chart(h, fr);
        const double y = p[3];

        // omega = dv + y dx pulls gr into the Heisenberg-group metric
        //   gr = (dv + y dx)^2 + dx^2 + dy^2
        const Mat g = ch.rigged_values();
        CHECK(g(0, 0) == doctest::Approx(1.0));
        CHECK(g(0, 1) == doctest::Approx(y));
        CHECK(g(1, 1) == doctest::Approx(1.0 + y * y));
        CHECK(g(2, 2) == doctest::Approx(1.0));
        CHECK(std::abs(g(0, 2)) < 1e-12);
        CHECK(std::abs(g(1, 2)) < 1e-12);
        CHECK(ch.rigged.at(0, 1).d1(2) == doctest::Approx(1.0));
        CHECK(ch.rigged.at(1, 1).d1(2) == doctest::Approx(2.0 * y));

        // the rotation form is genuinely non-closed: d(omega)(d_x, d_y) = -1
        const Mat dom = domega(ch);
        CHECK(dom(1, 2) == doctest::Approx(-1.0));
        CHECK(dom(2, 1) == doctest::Approx(1.0));
        CHECK(std::abs(dom(0, 1)) < 1e-12);
        CHECK(std::abs(dom(0, 2)) < 1e-12);

        // chart route and ambient route of d(omega) agree on the screen plane
        const std::vector<double> e1 = vals(ch.screen_ind[0]);
        const std::vector<double> e2 = vals(ch.screen_ind[1]);
        const double tw = domega_pair(ch, e1, e2);
        CHECK(std::abs(tw) == doctest::Approx(1.0));
        CHECK(domega_ambient_pair(fr, fr.screen[0], fr.screen[1]) ==
              doctest::Approx(tw).epsilon(1e-9));

        // the bare rigged metric is Nil: horizontal sectional curvature -3/4;
        // the twist correction 3/4 |domega|^2 cancels it exactly, which is the
        // flatness the ambient geometry demands from a plane wavefront
        CHECK(sectional_curvature(g, ch.rigged_curv, e1, e2) == doctest::Approx(-0.75));
        CHECK(std::abs(transverse_sectional_frame(ch, 0, 1)) < 1e-9);
        // the connection route reaches the same flatness without the
        // -3/4 + 3/4 cancellation: it never forms the twist correction
        CHECK(std::abs(transverse_sectional_connection(ch, 0, 1)) < 1e-8);
        const std::vector<double> s0 = fr.values_of(fr.screen[0]);
        const std::vector<double> s1 = fr.values_of(fr.screen[1]);
        CHECK(std::abs(sectional_curvature(fr.gv, fr.curv, s0, s1)) < 1e-9);

        // xi stays Killing (gr does not see v), but is no longer gr-parallel
        CHECK(max_abs(xi_killing_residual(ch)) < 1e-11);
        CHECK(xi_parallel_residual(ch) > 1e-3);

        // the surface is still totally geodesic, so the connections coincide
        CHECK(connection_coincidence_residual(ch, fr) < 1e-9);
    }
}

TEST_CASE("screen and transverse connections agree only when totally geodesic") {
    // the cone has B != 0; projecting the ambient derivative onto the screen
    // and differentiating inside the rigged metric genuinely disagree there
    RiggedHypersurface h = cone();
    RiggedFrame fr = build_frame(h, h.solve_point(std::vector<double>{0.9, 0.8, 0.7}));
    InducedChart ch = build_induced_chart(h, fr);
    CHECK(connection_coincidence_residual(ch, fr) > 1e-3);

    // non-closed rotation alone does not break the coincidence (see the
    // twisted-rigging case); only extrinsic curvature does.
}

TEST_CASE("induced chart rejects jets from a foreign space") {
    RiggedHypersurface h = cone();
    RiggedFrame fr = build_frame(h, h.solve_point(std::vector<double>{0.9, 0.8, 0.7}));
    InducedChart ch = build_induced_chart(h, fr);
    const Jet3 stray = Jet3::variable(JetSpace::get(1), 0, 0.5);
    CHECK_THROWS_AS(compose_with_chart(ch, stray), JetError);
}
