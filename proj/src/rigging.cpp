#include "riggeo/rigging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "riggeo/errors.hpp"
#include "riggeo/sampling.hpp"

namespace riggeo {

namespace {

std::string point_str(std::span<const double> p) {
    std::string s = "(";
    char buf[40];
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g", p[i]);
        if (i) s += ", ";
        s += buf;
    }
    return s + ")";
}

// Level value and derivative with respect to the graph coordinate only, for
// the 1-d root solve. Other coordinates enter as constants.
struct GraphSlice {
    const CompiledExpr* level;
    std::vector<double> point;
    int graph;

    std::pair<double, double> eval(double s) const {
        const JetSpace& sp = JetSpace::get(1);
        std::vector<Jet3> seeds;
        seeds.reserve(point.size());
        for (std::size_t i = 0; i < point.size(); ++i) {
            if (static_cast<int>(i) == graph)
                seeds.push_back(Jet3::variable(sp, 0, s));
            else
                seeds.push_back(Jet3::constant(sp, point[i]));
        }
        const Jet3 f = level->eval_jet(seeds);
        return {f.value(), f.d1(0)};
    }
};

constexpr double kOnSurfaceTol = 1e-12;

double solve_graph(const GraphSlice& slice, const Interval& gb, double start,
                   std::span<const double> base_for_error) {
    double s = std::clamp(start, gb.lo, gb.hi);
    for (int iter = 0; iter < 60; ++iter) {
        const auto [val, dv] = slice.eval(s);
        if (std::abs(val) < 1e-13) return s;
        if (std::abs(dv) < 1e-300) break;
        const double step = val / dv;
        s = std::clamp(s - step, gb.lo, gb.hi);
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(s))) break;
    }
    if (std::abs(slice.eval(s).first) < kOnSurfaceTol) return s;

    // Bisection fallback: scan the graph bounds for the sign change closest
    // to the Newton start. Evaluation failures (domain errors at extreme
    // coordinate values) just exclude that sample.
    const int kScan = 128;
    double best_lo = 0.0, best_hi = 0.0, best_dist = -1.0;
    double prev_s = gb.lo, prev_v = 0.0;
    bool have_prev = false;
    for (int k = 0; k <= kScan; ++k) {
        const double t = gb.lo + gb.width() * k / kScan;
        double v;
        try {
            v = slice.eval(t).first;
        } catch (const EvalError&) {
            have_prev = false;
            continue;
        }
        if (have_prev && ((prev_v < 0.0) != (v < 0.0) || v == 0.0)) {
            const double mid = 0.5 * (prev_s + t);
            const double dist = std::abs(mid - start);
            if (best_dist < 0.0 || dist < best_dist) {
                best_dist = dist;
                best_lo = prev_s;
                best_hi = t;
            }
        }
        prev_s = t;
        prev_v = v;
        have_prev = true;
    }
    if (best_dist >= 0.0) {
        double lo = best_lo, hi = best_hi;
        double flo = slice.eval(lo).first;
        for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi));
             ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double fm = slice.eval(mid).first;
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        s = 0.5 * (lo + hi);
        if (std::abs(slice.eval(s).first) < kOnSurfaceTol) return s;
    }
    throw NumericsError("could not solve the level equation for the graph coordinate "
                        "over base point " +
                        point_str(base_for_error));
}

} // namespace

RiggedHypersurface RiggedHypersurface::create(
    std::shared_ptr<const ChartedSpacetime> ambient, const std::string& level_source,
    std::span<const std::string> rigging_components, const std::string& graph_coordinate,
    std::vector<Interval> sampling_box) {
    if (!ambient) throw GeometryError("rigged hypersurface: null ambient chart");
    const ChartedSpacetime& M = *ambient;
    const int n = M.dim();

    RiggedHypersurface h;
    h.ambient_ = std::move(ambient);
    h.level_ = CompiledExpr::compile(level_source, M.coords());
    h.rigging_ = VectorFieldExpr::create(M, rigging_components);
    h.graph_ = M.coord_index(graph_coordinate);
    if (M.period(h.graph_))
        throw GeometryError("hypersurface on '" + M.name() + "': graph coordinate '" +
                            graph_coordinate + "' is periodic; the graph solve needs a "
                            "non-periodic coordinate");
    for (int i = 0; i < n; ++i)
        if (i != h.graph_) h.base_.push_back(i);

    if (static_cast<int>(sampling_box.size()) != n - 1)
        throw GeometryError("hypersurface on '" + M.name() + "': sampling box needs " +
                            std::to_string(n - 1) + " intervals, got " +
                            std::to_string(sampling_box.size()));
    for (std::size_t a = 0; a < sampling_box.size(); ++a) {
        const Interval& box = sampling_box[a];
        const Interval& bb = M.bounds(h.base_[a]);
        const std::string& cname = M.coords()[h.base_[a]];
        if (!(box.lo < box.hi))
            throw GeometryError("hypersurface on '" + M.name() + "': empty sampling interval "
                                "for coordinate '" + cname + "'");
        if (box.lo < bb.lo - 1e-12 || box.hi > bb.hi + 1e-12)
            throw GeometryError("hypersurface on '" + M.name() + "': sampling interval for '" +
                                cname + "' leaves the chart bounds");
    }
    h.box_ = std::move(sampling_box);

    // Probe the surface: the level set must be null (its gradient has zero
    // ambient norm on it) and the rigging must stay transverse. Both are
    // modeling errors, reported immediately rather than as check residuals.
    for (std::uint64_t k = 1; k <= 8; ++k) {
        const std::vector<double> base = halton_box(k, h.box_);
        const std::vector<double> p = h.solve_point(base);
        const std::vector<Jet3> cj = M.coordinate_jets(p);
        const Jet3 f = h.level_.eval_jet(cj);
        std::vector<double> dfv(n);
        for (int i = 0; i < n; ++i) dfv[i] = f.d1(i);
        const Mat g = M.metric_values(p);
        const std::vector<double> raised = lu_solve(g, dfv);
        const double grad_norm = dot(dfv, raised);
        if (std::abs(grad_norm) > 1e-9)
            throw GeometryError("hypersurface on '" + M.name() + "': level set is not null at " +
                                point_str(p) + " (gradient norm " + std::to_string(grad_norm) +
                                ")");
        const std::vector<double> zv = h.rigging_.values(M, p);
        if (std::abs(dot(dfv, zv)) < 1e-6)
            throw GeometryError("hypersurface on '" + M.name() +
                                "': rigging is tangent to the level set at " + point_str(p));
    }
    return h;
}

double RiggedHypersurface::level_value(std::span<const double> p) const {
    return level_.eval(ambient_->reduce(p));
}

std::vector<double> RiggedHypersurface::solve_point(std::span<const double> base) const {
    const ChartedSpacetime& M = *ambient_;
    if (base.size() != base_.size())
        throw NumericsError("solve_point: expected " + std::to_string(base_.size()) +
                            " base coordinates, got " + std::to_string(base.size()));
    std::vector<double> p(M.dim(), 0.0);
    for (std::size_t a = 0; a < base_.size(); ++a) p[base_[a]] = base[a];
    const Interval& gb = M.bounds(graph_);
    GraphSlice slice{&level_, p, graph_};
    p[graph_] = solve_graph(slice, gb, 0.5 * (gb.lo + gb.hi), base);
    M.require_inside(p, "hypersurface point");
    return p;
}

std::vector<double> RiggedHypersurface::refine_point(std::span<const double> p) const {
    const ChartedSpacetime& M = *ambient_;
    std::vector<double> q = M.reduce(p);
    GraphSlice slice{&level_, q, graph_};
    q[graph_] = solve_graph(slice, M.bounds(graph_), q[graph_], q);
    M.require_inside(q, "hypersurface point");
    return q;
}

std::vector<double> RiggedFrame::values_of(const std::vector<Jet3>& field) const {
    std::vector<double> v(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) v[i] = field[i].value();
    return v;
}

std::vector<std::vector<double>> RiggedFrame::tangent_values() const {
    std::vector<std::vector<double>> basis;
    basis.push_back(values_of(xi));
    for (const auto& e : screen) basis.push_back(values_of(e));
    return basis;
}

double RiggedFrame::inner(std::span<const double> u, std::span<const double> v) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += gv(i, j) * u[i] * v[j];
    return s;
}

Jet3 field_pairing(const MetricJets& m, const std::vector<Jet3>& a,
                   const std::vector<Jet3>& b) {
    Jet3 s = Jet3::constant(a[0].space(), 0.0);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) s = s + m.at(i, j) * a[i] * b[j];
    return s;
}

RiggedFrame build_frame(const RiggedHypersurface& hyp, std::span<const double> point) {
    const ChartedSpacetime& M = hyp.ambient();
    const int n = M.dim();

    RiggedFrame fr;
    fr.point = M.reduce(point);
    fr.n = n;
    M.require_inside(fr.point, "frame point");
    if (std::abs(hyp.level_value(fr.point)) > 1e-10)
        throw NumericsError("frame point " + point_str(fr.point) +
                            " is not on the hypersurface (|level| = " +
                            std::to_string(std::abs(hyp.level_value(fr.point))) + ")");

    const std::vector<Jet3> cj = M.coordinate_jets(fr.point);
    fr.metric = M.metric_jets_at(cj);
    fr.metric_inv = jet_matrix_inverse(fr.metric);
    fr.gamma = christoffel_jets(fr.metric);
    fr.curv = curvature_from(fr.gamma);
    fr.gv = fr.metric.values();

    fr.level = hyp.level().eval_jet(cj);
    fr.df.reserve(n);
    for (int i = 0; i < n; ++i) fr.df.push_back(fr.level.derivative(i));
    fr.zeta = hyp.rigging().jets_at(cj);

    // xi = grad F / dF(zeta): the null tangent scaled to pair to 1 with the
    // rigging (dF(zeta) = g(grad F, zeta)).
    std::vector<Jet3> grad;
    grad.reserve(n);
    for (int i = 0; i < n; ++i) {
        Jet3 gi = fr.metric_inv[static_cast<std::size_t>(i) * n] * fr.df[0];
        for (int j = 1; j < n; ++j)
            gi = gi + fr.metric_inv[static_cast<std::size_t>(i) * n + j] * fr.df[j];
        grad.push_back(gi);
    }
    Jet3 denom = fr.df[0] * fr.zeta[0];
    for (int i = 1; i < n; ++i) denom = denom + fr.df[i] * fr.zeta[i];
    if (std::abs(denom.value()) < 1e-10)
        throw GeometryError("rigging is tangent to the level set at " + point_str(fr.point));
    fr.xi.reserve(n);
    for (int i = 0; i < n; ++i) fr.xi.push_back(grad[i] / denom);

    fr.zeta_sq = field_pairing(fr.metric, fr.zeta, fr.zeta);
    fr.transverse.reserve(n);
    for (int i = 0; i < n; ++i)
        fr.transverse.push_back(fr.zeta[i] - 0.5 * fr.zeta_sq * fr.xi[i]);

    // Tangent pre-basis: project coordinate directions onto ker dF with the
    // Euclidean inner product, keep a well-conditioned subset (greedy
    // modified Gram-Schmidt on the values), and carry the kept projections
    // as fields.
    std::vector<double> dfv(n);
    double dnrm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        dfv[i] = fr.level.d1(i);
        dnrm2 += dfv[i] * dfv[i];
    }
    if (dnrm2 < 1e-20)
        throw GeometryError("level function has vanishing differential at " +
                            point_str(fr.point));
    std::vector<int> kept;
    std::vector<std::vector<double>> ortho;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(n, 0.0);
        v[i] = 1.0;
        for (int k = 0; k < n; ++k) v[k] -= dfv[i] * dfv[k] / dnrm2;
        for (const auto& w : ortho) {
            double c = dot(v, w);
            for (int k = 0; k < n; ++k) v[k] -= c * w[k];
        }
        const double r2 = dot(v, v);
        if (r2 > 1e-10) {
            kept.push_back(i);
            const double inv = 1.0 / std::sqrt(r2);
            for (double& x : v) x *= inv;
            ortho.push_back(v);
        }
    }
    if (static_cast<int>(kept.size()) != n - 1)
        throw GeometryError("tangent basis construction found " +
                            std::to_string(kept.size()) + " directions at " +
                            point_str(fr.point) + ", expected " + std::to_string(n - 1));

    Jet3 dnrm2_jet = fr.df[0] * fr.df[0];
    for (int i = 1; i < n; ++i) dnrm2_jet = dnrm2_jet + fr.df[i] * fr.df[i];

    // Screen: remove the xi component of each tangent field with the rigging
    // pairing, then g-orthonormalize. The screen of a null hypersurface is
    // spacelike, so the square norms stay positive for every kept vector.
    for (int a : kept) {
        std::vector<Jet3> t;
        t.reserve(n);
        for (int k = 0; k < n; ++k) {
            Jet3 c = Jet3::constant(cj[0].space(), k == a ? 1.0 : 0.0);
            t.push_back(c - fr.df[a] * fr.df[k] / dnrm2_jet);
        }
        const Jet3 om = field_pairing(fr.metric, fr.zeta, t);
        std::vector<Jet3> w;
        w.reserve(n);
        for (int k = 0; k < n; ++k) w.push_back(t[k] - om * fr.xi[k]);
        for (const auto& e : fr.screen) {
            const Jet3 c = field_pairing(fr.metric, w, e);
            for (int k = 0; k < n; ++k) w[k] = w[k] - c * e[k];
        }
        const Jet3 q = field_pairing(fr.metric, w, w);
        if (q.value() < -1e-10)
            throw GeometryError("screen direction with negative square norm at " +
                                point_str(fr.point) +
                                "; the level set / rigging pair is not admissible");
        if (q.value() <= 1e-10) continue;
        const Jet3 s = sqrt_jet(q);
        for (int k = 0; k < n; ++k) w[k] = w[k] / s;
        fr.screen.push_back(std::move(w));
    }
    if (fr.screen_count() != n - 2)
        throw GeometryError("screen construction found " + std::to_string(fr.screen_count()) +
                            " directions at " + point_str(fr.point) + ", expected " +
                            std::to_string(n - 2));
    return fr;
}

std::vector<double> bracket_values(const std::vector<Jet3>& a, const std::vector<Jet3>& b) {
    const int n = static_cast<int>(a.size());
    std::vector<double> out(a.size(), 0.0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            out[k] += a[i].value() * b[k].d1(i) - b[i].value() * a[k].d1(i);
    return out;
}

double omega_form(const RiggedFrame& fr, std::span<const double> x) {
    const std::vector<double> zv = fr.zeta_values();
    return fr.inner(zv, x);
}

double null_fundamental(const RiggedFrame& fr, std::span<const double> u,
                        std::span<const double> x) {
    const std::vector<double> dxi = covariant_derivative(fr.curv, u, fr.xi);
    return -fr.inner(dxi, x);
}

double null_fundamental_via_field(const RiggedFrame& fr, std::span<const double> u,
                                  const std::vector<Jet3>& field) {
    const std::vector<double> dw = covariant_derivative(fr.curv, u, field);
    return fr.inner(dw, fr.xi_values());
}

double screen_fundamental(const RiggedFrame& fr, std::span<const double> u,
                          std::span<const double> x) {
    const std::vector<double> dz = covariant_derivative(fr.curv, u, fr.zeta);
    return -fr.inner(dz, x) - 0.5 * fr.zeta_sq.value() * null_fundamental(fr, u, x);
}

double rotation_form(const RiggedFrame& fr, std::span<const double> u) {
    const std::vector<double> dz = covariant_derivative(fr.curv, u, fr.zeta);
    return fr.inner(dz, fr.xi_values());
}

double rotation_form_via_transverse(const RiggedFrame& fr, std::span<const double> u) {
    const std::vector<double> dn = covariant_derivative(fr.curv, u, fr.transverse);
    return fr.inner(dn, fr.xi_values());
}

std::vector<double> shape_operator(const RiggedFrame& fr, std::span<const double> u) {
    const std::vector<double> dz = covariant_derivative(fr.curv, u, fr.zeta);
    const double t = fr.inner(dz, fr.xi_values());
    std::vector<double> out(fr.n);
    for (int i = 0; i < fr.n; ++i) out[i] = t * fr.zeta[i].value() - dz[i];
    return out;
}

std::vector<double> screen_shape_operator(const RiggedFrame& fr, std::span<const double> u) {
    const std::vector<double> dxi = covariant_derivative(fr.curv, u, fr.xi);
    const double t = rotation_form(fr, u);
    std::vector<double> out(fr.n);
    for (int i = 0; i < fr.n; ++i) out[i] = -dxi[i] - t * fr.xi[i].value();
    return out;
}

double extended_screen_fundamental(const RiggedFrame& fr, std::span<const double> u,
                                   std::span<const double> v) {
    const std::vector<double> xv = fr.xi_values();
    const double ou = omega_form(fr, u);
    const double ov = omega_form(fr, v);
    std::vector<double> pu(fr.n), pv(fr.n);
    for (int i = 0; i < fr.n; ++i) {
        pu[i] = u[i] - ou * xv[i];
        pv[i] = v[i] - ov * xv[i];
    }
    return screen_fundamental(fr, pu, pv) - ou * rotation_form(fr, pv) -
           ov * rotation_form(fr, pu) - ou * ov * rotation_form(fr, xv);
}

} // namespace riggeo
