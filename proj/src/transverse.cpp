#include "riggeo/transverse.hpp"

#include <algorithm>
#include <cmath>

#include "riggeo/errors.hpp"

namespace riggeo {

InducedChart build_induced_chart(const RiggedHypersurface& hyp, const RiggedFrame& fr) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();
    const int m = n - 1;

    InducedChart ch;
    ch.m = m;
    ch.graph = hyp.graph_coord();
    ch.base = hyp.base_coords();
    ch.point = fr.point;
    ch.base_point.reserve(m);
    for (int a = 0; a < m; ++a) ch.base_point.push_back(fr.point[ch.base[a]]);

    // phi: base coordinates are the chart variables, the graph coordinate is
    // the implicit function solved from the level equation by a chord Newton
    // iteration. The chord slope is the plain partial at the base point; each
    // sweep settles one more truncation order, so three suffice for order 3.
    const JetSpace& sp = JetSpace::get(m);
    ch.phi.assign(n, Jet3());
    for (int a = 0; a < m; ++a)
        ch.phi[ch.base[a]] = Jet3::variable(sp, a, fr.point[ch.base[a]]);
    ch.phi[ch.graph] = Jet3::constant(sp, fr.point[ch.graph]);
    const double slope = fr.level.d1(ch.graph);
    if (std::abs(slope) < 1e-10)
        throw NumericsError("level equation is degenerate in the graph coordinate "
                            "at the chart base point");
    Jet3 residual;
    for (int sweep = 0; sweep < 3; ++sweep) {
        residual = hyp.level().eval_jet(ch.phi);
        ch.phi[ch.graph] = ch.phi[ch.graph] - residual / slope;
    }
    residual = hyp.level().eval_jet(ch.phi);
    double worst = 0.0;
    for (int s = 0; s < sp.size(); ++s) worst = std::max(worst, std::abs(residual.mono(s)));
    if (worst > 1e-9)
        throw NumericsError("implicit solve for the induced chart did not converge "
                            "(residual " + std::to_string(worst) + ")");

    // Composition table: jets of the ambient monomials (phi - p0)^alpha. With
    // it, composing any ambient jet with phi is one pass of scaled adds.
    const JetSpace& ambient_sp = JetSpace::get(n);
    std::vector<Jet3> delta;
    delta.reserve(n);
    for (int i = 0; i < n; ++i) {
        Jet3 d = ch.phi[i];
        d.mono(0) = 0.0;
        delta.push_back(d);
    }
    ch.monomials.reserve(ambient_sp.size());
    for (int s = 0; s < ambient_sp.size(); ++s) {
        Jet3 mono = Jet3::constant(sp, 1.0);
        const auto& e = ambient_sp.exponents(s);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < e[i]; ++k) mono = mono * delta[i];
        ch.monomials.push_back(std::move(mono));
    }

    // Metric data along phi and the two induced metrics.
    const MetricJets along = M.metric_jets_at(ch.phi);
    std::vector<std::vector<Jet3>> dphi(m);
    for (int a = 0; a < m; ++a) {
        dphi[a].reserve(n);
        for (int i = 0; i < n; ++i) dphi[a].push_back(ch.phi[i].derivative(a));
    }
    ch.pullback.n = m;
    ch.pullback.g.assign(static_cast<std::size_t>(m) * m, Jet3());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            Jet3 s = field_pairing(along, dphi[a], dphi[b]);
            ch.pullback.at(a, b) = s;
            ch.pullback.at(b, a) = s;
        }

    const std::vector<Jet3> zeta_along = hyp.rigging().jets_at(ch.phi);
    ch.omega.reserve(m);
    for (int a = 0; a < m; ++a)
        ch.omega.push_back(field_pairing(along, zeta_along, dphi[a]));

    ch.rigged.n = m;
    ch.rigged.g.assign(static_cast<std::size_t>(m) * m, Jet3());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            Jet3 s = ch.pullback.at(a, b) + ch.omega[a] * ch.omega[b];
            ch.rigged.at(a, b) = s;
            ch.rigged.at(b, a) = s;
        }
    ch.rigged_gamma = christoffel_jets(ch.rigged);
    ch.rigged_curv = curvature_from(ch.rigged_gamma);

    ch.xi_ind = transport_field(ch, fr.xi);
    ch.screen_ind.reserve(fr.screen.size());
    for (const auto& e : fr.screen) ch.screen_ind.push_back(transport_field(ch, e));
    return ch;
}

Jet3 compose_with_chart(const InducedChart& ch, const Jet3& ambient_jet) {
    const JetSpace& ambient_sp = ambient_jet.space();
    if (ambient_sp.size() != static_cast<int>(ch.monomials.size()))
        throw JetError("compose_with_chart: jet does not live in the chart's ambient space");
    Jet3 out = Jet3::constant(ch.monomials[0].space(), 0.0);
    for (int s = 0; s < ambient_sp.size(); ++s) {
        const double c = ambient_jet.mono(s);
        if (c != 0.0) out = out + c * ch.monomials[s];
    }
    return out;
}

std::vector<Jet3> transport_field(const InducedChart& ch, const std::vector<Jet3>& field) {
    std::vector<Jet3> out;
    out.reserve(ch.m);
    for (int a = 0; a < ch.m; ++a)
        out.push_back(compose_with_chart(ch, field[ch.base[a]]));
    return out;
}

double pullback_consistency(const InducedChart& ch, const RiggedHypersurface& hyp,
                            const RiggedFrame& fr) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();
    std::vector<std::vector<Jet3>> dphi(ch.m);
    for (int a = 0; a < ch.m; ++a) {
        dphi[a].reserve(n);
        for (int i = 0; i < n; ++i) dphi[a].push_back(ch.phi[i].derivative(a));
    }
    // Route B: compose the ambient metric jets (expanded at the base point)
    // with phi, instead of evaluating the metric expressions along phi.
    MetricJets composed;
    composed.n = n;
    composed.g.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            composed.g.push_back(compose_with_chart(ch, fr.metric.at(i, j)));

    double worst = 0.0;
    const JetSpace& sp = ch.phi[0].space();
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b) {
            const Jet3 alt = field_pairing(composed, dphi[a], dphi[b]);
            const Jet3& ref = ch.pullback.at(a, b);
            // derivatives of phi are order-2 data, so compare through order 2
            for (int s = 0; s < sp.size(); ++s) {
                if (sp.degree(s) > 2) continue;
                worst = std::max(worst, std::abs(alt.mono(s) - ref.mono(s)));
            }
        }
    return worst;
}

namespace {

Mat lie_derivative_values(const MetricJets& g, const std::vector<Jet3>& X) {
    const int m = g.n;
    Mat out(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double s = 0.0;
            for (int c = 0; c < m; ++c) {
                s += X[c].value() * g.at(a, b).d1(c);
                s += g.at(c, b).value() * X[c].d1(a);
                s += g.at(a, c).value() * X[c].d1(b);
            }
            out(a, b) = s;
        }
    return out;
}

} // namespace

Mat xi_killing_residual(const InducedChart& ch) {
    return lie_derivative_values(ch.rigged, ch.xi_ind);
}

Mat flow_residual(const InducedChart& ch, const RiggedFrame& fr) {
    Mat out = lie_derivative_values(ch.rigged, ch.xi_ind);
    const int n = fr.n;
    std::vector<std::vector<double>> dphi_v(ch.m, std::vector<double>(n));
    for (int a = 0; a < ch.m; ++a)
        for (int i = 0; i < n; ++i) dphi_v[a][i] = ch.phi[i].derivative(a).value();
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b)
            out(a, b) += 2.0 * null_fundamental(fr, dphi_v[a], dphi_v[b]);
    return out;
}

double xi_parallel_residual(const InducedChart& ch) {
    double worst = 0.0;
    for (int c = 0; c < ch.m; ++c) {
        std::vector<double> dir(ch.m, 0.0);
        dir[c] = 1.0;
        const std::vector<double> d = covariant_derivative(ch.rigged_curv, dir, ch.xi_ind);
        for (double v : d) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

Mat domega(const InducedChart& ch) {
    Mat out(ch.m, ch.m);
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b)
            out(a, b) = ch.omega[b].d1(a) - ch.omega[a].d1(b);
    return out;
}

double domega_pair(const InducedChart& ch, std::span<const double> x,
                   std::span<const double> y) {
    const Mat d = domega(ch);
    double s = 0.0;
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b) s += d(a, b) * x[a] * y[b];
    return s;
}

double domega_ambient_pair(const RiggedFrame& fr, const std::vector<Jet3>& X,
                           const std::vector<Jet3>& Y) {
    const Jet3 wy = field_pairing(fr.metric, fr.zeta, Y);
    const Jet3 wx = field_pairing(fr.metric, fr.zeta, X);
    double xwy = 0.0, ywx = 0.0;
    for (int i = 0; i < fr.n; ++i) {
        xwy += X[i].value() * wy.d1(i);
        ywx += Y[i].value() * wx.d1(i);
    }
    const std::vector<double> br = bracket_values(X, Y);
    return xwy - ywx - omega_form(fr, br);
}

double transverse_sectional(const InducedChart& ch, std::span<const double> x,
                            std::span<const double> y) {
    const Mat g = ch.rigged.values();
    const double base = sectional_curvature(g, ch.rigged_curv, x, y);
    const double tw = domega_pair(ch, x, y);
    // normalize the twist term the same way the sectional is normalized
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (int a = 0; a < ch.m; ++a)
        for (int b = 0; b < ch.m; ++b) {
            xx += g(a, b) * x[a] * x[b];
            yy += g(a, b) * y[a] * y[b];
            xy += g(a, b) * x[a] * y[b];
        }
    return base + 0.75 * tw * tw / (xx * yy - xy * xy);
}

namespace {

std::vector<double> jet_values(const std::vector<Jet3>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
    return out;
}

} // namespace

double transverse_sectional_frame(const InducedChart& ch, int a, int b) {
    return transverse_sectional(ch, jet_values(ch.screen_ind[a]), jet_values(ch.screen_ind[b]));
}

namespace {

/// (nabla_U X)^j = U^i (d_i X^j + Gamma^j_il X^l) carried as jets; the result
/// is trustworthy one order below its inputs.
std::vector<Jet3> covariant_jets(const ChristoffelJets& C, const std::vector<Jet3>& U,
                                 const std::vector<Jet3>& X) {
    const int m = C.n;
    std::vector<Jet3> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        Jet3 s(U[0].space());
        for (int i = 0; i < m; ++i) {
            Jet3 t = X[j].derivative(i);
            for (int l = 0; l < m; ++l) t += C.at(j, i, l) * X[l];
            s += U[i] * t;
        }
        out.push_back(s);
    }
    return out;
}

/// g(a, b) at the point only.
double value_pairing(const Mat& g, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) s += g(i, j) * a[i] * b[j];
    return s;
}

} // namespace

double transverse_sectional_connection(const InducedChart& ch, int a, int b) {
    const int k = static_cast<int>(ch.screen_ind.size());
    if (k < 2 || a == b) throw GeometryError("transverse_sectional_connection: need a screen plane");

    // Frame coefficients of nabla^T as jets: gam(u, c, d) is the component of
    // nabla^T_{E_u} E_c on E_d. Pairing with E_d implements the screen
    // projection, since xi is gr-orthogonal to every screen field.
    std::vector<Jet3> gam(static_cast<std::size_t>(k) * k * k);
    const auto at = [k](int u, int c, int d) -> std::size_t {
        return (static_cast<std::size_t>(u) * k + c) * k + d;
    };
    for (int u = 0; u < k; ++u)
        for (int c = 0; c < k; ++c) {
            const std::vector<Jet3> w =
                covariant_jets(ch.rigged_gamma, ch.screen_ind[u], ch.screen_ind[c]);
            for (int d = 0; d < k; ++d)
                gam[at(u, c, d)] = field_pairing(ch.rigged, w, ch.screen_ind[d]);
        }

    // Flow-direction transport: nabla^T_xi E_c is the screen part of
    // [xi, E_c]; only point values enter the curvature formula.
    const Mat g = ch.rigged.values();
    const std::vector<double> ed_a = jet_values(ch.screen_ind[a]);
    const std::vector<double> lie_b = bracket_values(ch.xi_ind, ch.screen_ind[b]);
    const double lambda_ab = value_pairing(g, lie_b, ed_a);

    // Bracket of the plane's frame fields, decomposed in the gr-orthonormal
    // frame {xi, E_*}: [E_a, E_b] = phi xi + beta^e E_e.
    const std::vector<double> br = bracket_values(ch.screen_ind[a], ch.screen_ind[b]);
    const double phi = value_pairing(g, br, jet_values(ch.xi_ind));
    std::vector<double> beta(static_cast<std::size_t>(k));
    for (int e = 0; e < k; ++e) beta[e] = value_pairing(g, br, jet_values(ch.screen_ind[e]));

    const auto along = [&](int u, const Jet3& f) {
        double s = 0.0;
        for (int i = 0; i < ch.m; ++i) s += ch.screen_ind[u][i].value() * f.d1(i);
        return s;
    };

    // Curvature of the connection in the frame, evaluated on (E_a, E_b) E_b
    // against E_a; the frame is orthonormal, so no area normalization.
    double kt = along(a, gam[at(b, b, a)]) - along(b, gam[at(a, b, a)]);
    for (int e = 0; e < k; ++e) {
        kt += gam[at(b, b, e)].value() * gam[at(a, e, a)].value();
        kt -= gam[at(a, b, e)].value() * gam[at(b, e, a)].value();
        kt -= beta[e] * gam[at(e, b, a)].value();
    }
    kt -= phi * lambda_ab;
    return kt;
}

double transverse_ricci_frame(const InducedChart& ch, int a) {
    double s = 0.0;
    for (int b = 0; b < static_cast<int>(ch.screen_ind.size()); ++b)
        if (b != a) s += transverse_sectional_frame(ch, a, b);
    return s;
}

double transverse_scalar(const InducedChart& ch) {
    double s = 0.0;
    const int k = static_cast<int>(ch.screen_ind.size());
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            if (b != a) s += transverse_sectional_frame(ch, a, b);
    return s;
}

double ambient_transverse_ricci(const RiggedFrame& fr, std::span<const double> x) {
    double ric = 0.0;
    for (int j = 0; j < fr.n; ++j)
        for (int k = 0; k < fr.n; ++k) ric += fr.curv.ricci_at(j, k) * x[j] * x[k];
    const std::vector<double> xv = fr.xi_values();
    const std::vector<double> nv = fr.transverse_values();
    return ric - 2.0 * riemann_lowered(fr.gv, fr.curv, xv, x, x, nv);
}

std::vector<double> transverse_connection(const InducedChart& ch, int dir, int b) {
    std::vector<double> w;
    if (dir == 0) {
        w = bracket_values(ch.xi_ind, ch.screen_ind[b]);
    } else {
        const std::vector<double> x = jet_values(ch.screen_ind[dir - 1]);
        w = covariant_derivative(ch.rigged_curv, x, ch.screen_ind[b]);
    }
    // project out the flow direction with the rigged metric
    const Mat g = ch.rigged.values();
    const std::vector<double> xiv = jet_values(ch.xi_ind);
    double wx = 0.0, xx = 0.0;
    for (int a = 0; a < ch.m; ++a)
        for (int c = 0; c < ch.m; ++c) {
            wx += g(a, c) * w[a] * xiv[c];
            xx += g(a, c) * xiv[a] * xiv[c];
        }
    for (int a = 0; a < ch.m; ++a) w[a] -= (wx / xx) * xiv[a];
    return w;
}

std::vector<double> screen_connection(const RiggedFrame& fr, int dir, int b) {
    const std::vector<double> u =
        dir == 0 ? fr.xi_values() : fr.values_of(fr.screen[dir - 1]);
    std::vector<double> w = covariant_derivative(fr.curv, u, fr.screen[b]);
    const std::vector<double> xv = fr.xi_values();
    const std::vector<double> nv = fr.transverse_values();
    const double wn = fr.inner(w, nv);  // xi component (pairs with N)
    const double wx = fr.inner(w, xv);  // transverse component (pairs with xi)
    for (int i = 0; i < fr.n; ++i) w[i] -= wn * xv[i] + wx * nv[i];
    return w;
}

double connection_coincidence_residual(const InducedChart& ch, const RiggedFrame& fr) {
    double worst = 0.0;
    const int k = static_cast<int>(ch.screen_ind.size());
    for (int dir = 0; dir <= k; ++dir)
        for (int b = 0; b < k; ++b) {
            const std::vector<double> t = transverse_connection(ch, dir, b);
            const std::vector<double> s = screen_connection(fr, dir, b);
            for (int a = 0; a < ch.m; ++a)
                worst = std::max(worst, std::abs(t[a] - s[ch.base[a]]));
        }
    return worst;
}

} // namespace riggeo
