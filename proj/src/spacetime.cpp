#include "riggeo/spacetime.hpp"

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

constexpr int kPrimes[kMaxVars] = {2, 3, 5, 7, 11, 13};

} // namespace

ChartedSpacetime ChartedSpacetime::create(std::string name, std::vector<std::string> coords,
                                          std::vector<Interval> bounds,
                                          std::vector<std::optional<double>> periods,
                                          std::vector<std::string> metric_upper) {
    ChartedSpacetime M;
    M.name_ = std::move(name);
    const int n = static_cast<int>(coords.size());
    if (n < 2 || n > kMaxVars)
        throw GeometryError("chart '" + M.name_ + "': dimension must be between 2 and " +
                            std::to_string(kMaxVars));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coords[i] == coords[j])
                throw GeometryError("chart '" + M.name_ + "': duplicate coordinate name '" +
                                    coords[i] + "'");
    if (static_cast<int>(bounds.size()) != n || static_cast<int>(periods.size()) != n)
        throw GeometryError("chart '" + M.name_ + "': bounds/periodic arrays must have one "
                            "entry per coordinate");
    for (int i = 0; i < n; ++i) {
        if (!(bounds[i].lo < bounds[i].hi))
            throw GeometryError("chart '" + M.name_ + "': empty bounds for coordinate '" +
                                coords[i] + "'");
        if (periods[i] && !(*periods[i] > 0.0))
            throw GeometryError("chart '" + M.name_ + "': period of '" + coords[i] +
                                "' must be positive");
    }
    if (static_cast<int>(metric_upper.size()) != n * (n + 1) / 2)
        throw GeometryError("chart '" + M.name_ + "': expected " +
                            std::to_string(n * (n + 1) / 2) +
                            " upper-triangle metric entries, got " +
                            std::to_string(metric_upper.size()));

    M.coords_ = std::move(coords);
    M.bounds_ = std::move(bounds);
    M.periods_ = std::move(periods);
    M.metric_.resize(static_cast<std::size_t>(n) * n);
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            CompiledExpr e = CompiledExpr::compile(metric_upper[idx++], M.coords_);
            M.metric_[static_cast<std::size_t>(i) * n + j] = e;
            M.metric_[static_cast<std::size_t>(j) * n + i] = e;
        }
    M.validate();
    return M;
}

int ChartedSpacetime::coord_index(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
        if (coords_[i] == name) return i;
    throw GeometryError("chart '" + name_ + "': unknown coordinate '" + name + "'");
}

std::vector<double> ChartedSpacetime::reduce(std::span<const double> p) const {
    std::vector<double> out(p.begin(), p.end());
    for (int i = 0; i < dim(); ++i)
        if (periods_[i]) {
            const double P = *periods_[i];
            out[i] = bounds_[i].lo + std::fmod(out[i] - bounds_[i].lo, P);
            if (out[i] < bounds_[i].lo) out[i] += P;
        }
    return out;
}

bool ChartedSpacetime::inside(std::span<const double> p, double slack) const {
    const std::vector<double> q = reduce(p);
    for (int i = 0; i < dim(); ++i) {
        if (periods_[i]) continue;
        if (q[i] < bounds_[i].lo - slack || q[i] > bounds_[i].hi + slack) return false;
    }
    return true;
}

void ChartedSpacetime::require_inside(std::span<const double> p,
                                      const std::string& what) const {
    if (!inside(p))
        throw NumericsError(what + ": point " + point_str(p) + " left the chart '" +
                            name_ + "'");
}

std::vector<Jet3> ChartedSpacetime::coordinate_jets(std::span<const double> p) const {
    const std::vector<double> q = reduce(p);
    const JetSpace& s = JetSpace::get(dim());
    std::vector<Jet3> out;
    out.reserve(dim());
    for (int i = 0; i < dim(); ++i) out.push_back(Jet3::variable(s, i, q[i]));
    return out;
}

MetricJets ChartedSpacetime::metric_jets(std::span<const double> p) const {
    return metric_jets_at(coordinate_jets(p));
}

MetricJets ChartedSpacetime::metric_jets_at(std::span<const Jet3> coord_jets) const {
    const int n = dim();
    MetricJets m;
    m.n = n;
    m.g.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet3 e = metric_entry(i, j).eval_jet(coord_jets);
            m.at(i, j) = e;
            if (i != j) m.at(j, i) = e;
        }
    return m;
}

Mat ChartedSpacetime::metric_values(std::span<const double> p) const {
    const std::vector<double> q = reduce(p);
    const int n = dim();
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            out(i, j) = metric_entry(i, j).eval(q);
            out(j, i) = out(i, j);
        }
    return out;
}

double ChartedSpacetime::inner(std::span<const double> p, std::span<const double> u,
                               std::span<const double> v) const {
    const Mat g = metric_values(p);
    double acc = 0.0;
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) acc += g(i, j) * u[i] * v[j];
    return acc;
}

ChristoffelJets ChartedSpacetime::christoffel(std::span<const double> p) const {
    return christoffel_jets(metric_jets(p));
}

CurvatureData ChartedSpacetime::curvature(std::span<const double> p) const {
    return curvature_from(christoffel(p));
}

void ChartedSpacetime::validate() const {
    const int n = dim();
    // Signature scan on a midpoint grid, 8 samples per axis: exactly one
    // negative eigenvalue everywhere, no near-zero ones.
    const int per_axis = 8;
    std::vector<int> digit(n, 0);
    std::vector<double> p(n);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= per_axis;
    for (long it = 0; it < total; ++it) {
        long rem = it;
        for (int i = 0; i < n; ++i) {
            digit[i] = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            p[i] = bounds_[i].lo + bounds_[i].width() * (digit[i] + 0.5) / per_axis;
        }
        Mat g(n, n);
        try {
            g = metric_values(p);
        } catch (const EvalError& e) {
            throw GeometryError("chart '" + name_ + "': metric undefined at " + point_str(p) +
                                ": " + e.what());
        }
        const std::vector<double> ev = sym_eigenvalues(g);
        int negative = 0;
        double min_abs = 1e300;
        for (double v : ev) {
            if (v < 0.0) ++negative;
            min_abs = std::min(min_abs, std::abs(v));
        }
        if (min_abs < 1e-10)
            throw GeometryError("chart '" + name_ + "': metric is degenerate at " +
                                point_str(p) + " (|eigenvalue| = " + std::to_string(min_abs) +
                                ")");
        if (negative != 1)
            throw GeometryError("chart '" + name_ + "': metric has " +
                                std::to_string(negative) + " negative eigenvalues at " +
                                point_str(p) + "; expected Lorentzian signature (-,+,...,+)");
    }

    // Periodic declaration check: metric entries must be invariant under a
    // full period shift.
    for (int ax = 0; ax < n; ++ax) {
        if (!periods_[ax]) continue;
        for (int k = 0; k < 64; ++k) {
            for (int i = 0; i < n; ++i)
                p[i] = bounds_[i].lo + bounds_[i].width() * halton(k + 1, kPrimes[i]);
            std::vector<double> shifted = p;
            shifted[ax] += *periods_[ax];
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    const double a = metric_entry(i, j).eval(p);
                    const double b = metric_entry(i, j).eval(shifted);
                    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
                    if (std::abs(a - b) > 1e-9 * scale)
                        throw GeometryError(
                            "chart '" + name_ + "': metric entry g_" + coords_[i] + "," +
                            coords_[j] + " is not periodic in '" + coords_[ax] +
                            "' with the declared period");
                }
        }
    }
}

VectorFieldExpr VectorFieldExpr::create(const ChartedSpacetime& M,
                                        std::span<const std::string> component_sources) {
    if (static_cast<int>(component_sources.size()) != M.dim())
        throw GeometryError("vector field on '" + M.name() + "' needs " +
                            std::to_string(M.dim()) + " components, got " +
                            std::to_string(component_sources.size()));
    VectorFieldExpr f;
    for (const std::string& src : component_sources)
        f.comp.push_back(CompiledExpr::compile(src, M.coords()));
    return f;
}

std::vector<double> VectorFieldExpr::values(const ChartedSpacetime& M,
                                            std::span<const double> p) const {
    const std::vector<double> q = M.reduce(p);
    std::vector<double> out;
    out.reserve(comp.size());
    for (const auto& c : comp) out.push_back(c.eval(q));
    return out;
}

std::vector<Jet3> VectorFieldExpr::jets(const ChartedSpacetime& M,
                                        std::span<const double> p) const {
    return jets_at(M.coordinate_jets(p));
}

std::vector<Jet3> VectorFieldExpr::jets_at(std::span<const Jet3> coord_jets) const {
    std::vector<Jet3> out;
    out.reserve(comp.size());
    for (const auto& c : comp) out.push_back(c.eval_jet(coord_jets));
    return out;
}

std::vector<double> covariant_derivative(const CurvatureData& curv,
                                         std::span<const double> u,
                                         std::span<const Jet3> field) {
    const int n = curv.n;
    std::vector<double> out(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = field[k].d1(i);
            for (int m = 0; m < n; ++m) v += curv.gamma_at(k, i, m) * field[m].value();
            acc += u[i] * v;
        }
        out[k] = acc;
    }
    return out;
}

Mat killing_residual(const ChartedSpacetime& M, std::span<const double> p,
                     const VectorFieldExpr& Z) {
    const int n = M.dim();
    const MetricJets g = M.metric_jets(p);
    const std::vector<Jet3> z = Z.jets(M, p);
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                acc += z[k].value() * g.at(i, j).d1(k);
                acc += g.at(k, j).value() * z[k].d1(i);
                acc += g.at(i, k).value() * z[k].d1(j);
            }
            out(i, j) = acc;
            out(j, i) = acc;
        }
    return out;
}

Mat closedness_residual(const ChartedSpacetime& M, std::span<const double> p,
                        const VectorFieldExpr& Z) {
    const int n = M.dim();
    const MetricJets g = M.metric_jets(p);
    const std::vector<Jet3> z = Z.jets(M, p);
    // flat = g . Z as jets
    std::vector<Jet3> flat;
    flat.reserve(n);
    for (int j = 0; j < n; ++j) {
        Jet3 acc(z[0].space());
        for (int k = 0; k < n; ++k) acc += g.at(j, k) * z[k];
        flat.push_back(acc);
    }
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = flat[j].d1(i) - flat[i].d1(j);
    return out;
}

double sectional_curvature(const ChartedSpacetime& M, std::span<const double> p,
                           std::span<const double> u, std::span<const double> v) {
    return sectional_curvature(M.metric_values(p), M.curvature(p), u, v);
}

double null_sectional_curvature(const ChartedSpacetime& M, std::span<const double> p,
                                std::span<const double> x, std::span<const double> xi) {
    const Mat g = M.metric_values(p);
    const CurvatureData R = M.curvature(p);
    double gxx = 0.0;
    for (int i = 0; i < M.dim(); ++i)
        for (int j = 0; j < M.dim(); ++j) gxx += g(i, j) * x[i] * x[j];
    if (std::abs(gxx) < 1e-10)
        throw NumericsError("null_sectional_curvature: direction x must be non-null "
                            "(|g(x,x)| too small)");
    return riemann_lowered(g, R, x, xi, xi, x) / gxx;
}

double ricci_quadratic(const ChartedSpacetime& M, std::span<const double> p,
                       std::span<const double> u) {
    const CurvatureData R = M.curvature(p);
    double acc = 0.0;
    for (int j = 0; j < M.dim(); ++j)
        for (int k = 0; k < M.dim(); ++k) acc += R.ricci_at(j, k) * u[j] * u[k];
    return acc;
}

HessianIdentityParts hessian_identity_parts(const ChartedSpacetime& M,
                                            std::span<const double> p,
                                            const VectorFieldExpr& Z,
                                            std::span<const double> x,
                                            std::span<const double> y) {
    const int n = M.dim();
    const MetricJets g = M.metric_jets(p);
    const std::vector<Jet3> z = Z.jets(M, p);
    const ChristoffelJets chris = christoffel_jets(g);
    const CurvatureData R = curvature_from(chris);
    const Mat gv = g.values();

    // f = 1/2 g(Z, Z) as a jet
    Jet3 f(z[0].space());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f += g.at(i, j) * z[i] * z[j];
    f *= 0.5;

    HessianIdentityParts parts{};
    // Hess f(x, y) = x^i y^j (d_i d_j f - Gamma^k_ij d_k f)
    double hess = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = f.d2(i, j);
            for (int k = 0; k < n; ++k) v -= chris.at(k, i, j).value() * f.d1(k);
            hess += x[i] * y[j] * v;
        }
    parts.hess = hess;

    std::vector<double> zv(n);
    for (int i = 0; i < n; ++i) zv[i] = z[i].value();
    parts.curvature = -riemann_lowered(gv, R, x, zv, zv, y);

    const std::vector<double> dxz = covariant_derivative(R, x, z);
    const std::vector<double> dyz = covariant_derivative(R, y, z);
    double gz = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gz += gv(i, j) * dxz[i] * dyz[j];
    parts.gradsq = gz;
    return parts;
}

} // namespace riggeo
