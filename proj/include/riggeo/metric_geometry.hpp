#pragma once

#include <span>
#include <vector>

#include "riggeo/jets.hpp"
#include "riggeo/linalg.hpp"

namespace riggeo {

/// Metric components as jets around a point: full n x n symmetric storage,
/// row-major. Signature-agnostic — the same machinery serves the ambient
/// Lorentzian metric, the induced Riemannian metric of a rigged hypersurface
/// chart, and screen-leaf metrics.
struct MetricJets {
    int n = 0;
    std::vector<Jet3> g;  ///< [i*n + j]

    const Jet3& at(int i, int j) const { return g[static_cast<std::size_t>(i) * n + j]; }
    Jet3& at(int i, int j) { return g[static_cast<std::size_t>(i) * n + j]; }
    Mat values() const;
};

/// Jets of the inverse metric: Newton iteration X <- X(2I - GX) seeded with
/// the value-level LU inverse. Two iterations are exact at truncation order 3.
std::vector<Jet3> jet_matrix_inverse(const MetricJets& m);

/// Christoffel symbols of the second kind as jets (trustworthy to order 2):
/// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
struct ChristoffelJets {
    int n = 0;
    std::vector<Jet3> gamma;  ///< [(k*n + i)*n + j], symmetric in (i, j)

    const Jet3& at(int k, int i, int j) const {
        return gamma[(static_cast<std::size_t>(k) * n + i) * n + j];
    }
    Jet3& at(int k, int i, int j) {
        return gamma[(static_cast<std::size_t>(k) * n + i) * n + j];
    }
};

ChristoffelJets christoffel_jets(const MetricJets& m);

/// Connection coefficients at the point only (no derivative data); cheaper
/// path for ODE right-hand sides.
std::vector<double> christoffel_values(const MetricJets& m);

/// Pointwise curvature data extracted from Christoffel jets:
///   R(e_i, e_j) e_k = R^l_{ijk} e_l,
///   R^l_{ijk} = d_i Gamma^l_jk - d_j Gamma^l_ik
///             + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik,
///   Ric_jk = R^i_{ijk}.
struct CurvatureData {
    int n = 0;
    std::vector<double> gamma;    ///< [(k*n+i)*n+j]
    std::vector<double> riemann;  ///< [((l*n+i)*n+j)*n+k]
    std::vector<double> ricci;    ///< [j*n+k]

    double gamma_at(int k, int i, int j) const {
        return gamma[(static_cast<std::size_t>(k) * n + i) * n + j];
    }
    double riemann_at(int l, int i, int j, int k) const {
        return riemann[((static_cast<std::size_t>(l) * n + i) * n + j) * n + k];
    }
    double ricci_at(int j, int k) const { return ricci[static_cast<std::size_t>(j) * n + k]; }

    /// Components of R(u, v) w.
    std::vector<double> apply(std::span<const double> u, std::span<const double> v,
                              std::span<const double> w) const;
};

CurvatureData curvature_from(const ChristoffelJets& c);

/// Sectional curvature K(u, v) = g(R(u,v)v, u) / (g(u,u)g(v,v) - g(u,v)^2).
/// Throws when the plane is degenerate (|denominator| below `tol`).
double sectional_curvature(const Mat& g, const CurvatureData& R, std::span<const double> u,
                           std::span<const double> v, double tol = 1e-10);

/// g(R(u,v)w, z) with all indices down via the supplied metric values.
double riemann_lowered(const Mat& g, const CurvatureData& R, std::span<const double> u,
                       std::span<const double> v, std::span<const double> w,
                       std::span<const double> z);

} // namespace riggeo
