#include "riggeo/metric_geometry.hpp"

#include <cmath>

#include "riggeo/errors.hpp"

namespace riggeo {

Mat MetricJets::values() const {
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = at(i, j).value();
    return out;
}

std::vector<Jet3> jet_matrix_inverse(const MetricJets& m) {
    const int n = m.n;
    const JetSpace& s = m.g.front().space();
    const Mat inv0 = mat_inverse(m.values());

    std::vector<Jet3> x(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            x[static_cast<std::size_t>(i) * n + j] = Jet3::constant(s, inv0(i, j));

    // X <- X (2I - G X); quadratic convergence in the graded sense, so two
    // passes clear all terms up to total degree 3.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<Jet3> gx(static_cast<std::size_t>(n) * n, Jet3(s));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet3 acc(s);
                for (int k = 0; k < n; ++k)
                    acc += m.at(i, k) * x[static_cast<std::size_t>(k) * n + j];
                gx[static_cast<std::size_t>(i) * n + j] = -acc;
            }
        for (int i = 0; i < n; ++i) gx[static_cast<std::size_t>(i) * n + i] += 2.0;
        std::vector<Jet3> nx(static_cast<std::size_t>(n) * n, Jet3(s));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet3 acc(s);
                for (int k = 0; k < n; ++k)
                    acc += x[static_cast<std::size_t>(i) * n + k] *
                           gx[static_cast<std::size_t>(k) * n + j];
                nx[static_cast<std::size_t>(i) * n + j] = acc;
            }
        x = std::move(nx);
    }
    return x;
}

ChristoffelJets christoffel_jets(const MetricJets& m) {
    const int n = m.n;
    const JetSpace& s = m.g.front().space();
    const std::vector<Jet3> ginv = jet_matrix_inverse(m);

    // dg[i][j][l] = d_i g_{jl}
    std::vector<Jet3> dg(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = j; l < n; ++l) {
                Jet3 d = m.at(j, l).derivative(i);
                dg[(static_cast<std::size_t>(i) * n + j) * n + l] = d;
                dg[(static_cast<std::size_t>(i) * n + l) * n + j] = d;
            }
    auto dg_at = [&](int i, int j, int l) -> const Jet3& {
        return dg[(static_cast<std::size_t>(i) * n + j) * n + l];
    };

    ChristoffelJets out;
    out.n = n;
    out.gamma.assign(static_cast<std::size_t>(n) * n * n, Jet3(s));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                Jet3 acc(s);
                for (int l = 0; l < n; ++l) {
                    Jet3 sum = dg_at(i, j, l) + dg_at(j, i, l) - dg_at(l, i, j);
                    acc += ginv[static_cast<std::size_t>(k) * n + l] * sum;
                }
                acc *= 0.5;
                out.at(k, i, j) = acc;
                out.at(k, j, i) = acc;
            }
        }
    return out;
}

std::vector<double> christoffel_values(const MetricJets& m) {
    const int n = m.n;
    const Mat ginv = mat_inverse(m.values());
    std::vector<double> out(static_cast<std::size_t>(n) * n * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int l = 0; l < n; ++l)
                    acc += ginv(k, l) * (m.at(j, l).d1(i) + m.at(i, l).d1(j) -
                                         m.at(i, j).d1(l));
                acc *= 0.5;
                out[(static_cast<std::size_t>(k) * n + i) * n + j] = acc;
                out[(static_cast<std::size_t>(k) * n + j) * n + i] = acc;
            }
    return out;
}

CurvatureData curvature_from(const ChristoffelJets& c) {
    const int n = c.n;
    CurvatureData out;
    out.n = n;
    out.gamma.resize(static_cast<std::size_t>(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.gamma[(static_cast<std::size_t>(k) * n + i) * n + j] =
                    c.at(k, i, j).value();

    out.riemann.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double v = c.at(l, j, k).d1(i) - c.at(l, i, k).d1(j);
                    for (int m = 0; m < n; ++m)
                        v += out.gamma_at(l, i, m) * out.gamma_at(m, j, k) -
                             out.gamma_at(l, j, m) * out.gamma_at(m, i, k);
                    out.riemann[((static_cast<std::size_t>(l) * n + i) * n + j) * n + k] = v;
                }

    out.ricci.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double v = 0.0;
            for (int i = 0; i < n; ++i) v += out.riemann_at(i, i, j, k);
            out.ricci[static_cast<std::size_t>(j) * n + k] = v;
        }
    return out;
}

std::vector<double> CurvatureData::apply(std::span<const double> u, std::span<const double> v,
                                         std::span<const double> w) const {
    std::vector<double> out(n, 0.0);
    for (int l = 0; l < n; ++l) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    acc += riemann_at(l, i, j, k) * u[i] * v[j] * w[k];
        out[l] = acc;
    }
    return out;
}

double riemann_lowered(const Mat& g, const CurvatureData& R, std::span<const double> u,
                       std::span<const double> v, std::span<const double> w,
                       std::span<const double> z) {
    const std::vector<double> rv = R.apply(u, v, w);
    double acc = 0.0;
    for (int l = 0; l < R.n; ++l)
        for (int m = 0; m < R.n; ++m) acc += g(l, m) * rv[l] * z[m];
    return acc;
}

double sectional_curvature(const Mat& g, const CurvatureData& R, std::span<const double> u,
                           std::span<const double> v, double tol) {
    double guu = 0.0, gvv = 0.0, guv = 0.0;
    for (int i = 0; i < R.n; ++i)
        for (int j = 0; j < R.n; ++j) {
            guu += g(i, j) * u[i] * u[j];
            gvv += g(i, j) * v[i] * v[j];
            guv += g(i, j) * u[i] * v[j];
        }
    const double denom = guu * gvv - guv * guv;
    if (std::abs(denom) < tol)
        throw NumericsError("sectional_curvature: degenerate plane (|g(u,u)g(v,v)-g(u,v)^2| = " +
                            std::to_string(std::abs(denom)) + ")");
    return riemann_lowered(g, R, u, v, v, u) / denom;
}

} // namespace riggeo
