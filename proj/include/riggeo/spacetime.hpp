#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riggeo/expr.hpp"
#include "riggeo/metric_geometry.hpp"

namespace riggeo {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
};

/// A coordinate chart with a Lorentzian metric given by expressions.
/// Construction validates: dimension limits, bounds sanity, metric signature
/// (exactly one negative eigenvalue on a sampled grid) and consistency of the
/// metric under each declared period.
class ChartedSpacetime {
public:
    ChartedSpacetime() = default;

    /// `metric_upper` holds the n(n+1)/2 upper-triangle entries row-major:
    /// g_00, g_01, ..., g_0{n-1}, g_11, ...
    static ChartedSpacetime create(std::string name, std::vector<std::string> coords,
                                   std::vector<Interval> bounds,
                                   std::vector<std::optional<double>> periods,
                                   std::vector<std::string> metric_upper);

    const std::string& name() const { return name_; }
    int dim() const { return static_cast<int>(coords_.size()); }
    const std::vector<std::string>& coords() const { return coords_; }
    int coord_index(const std::string& name) const;  ///< throws if unknown
    const Interval& bounds(int i) const { return bounds_[i]; }
    const std::optional<double>& period(int i) const { return periods_[i]; }
    const CompiledExpr& metric_entry(int i, int j) const {
        return metric_[static_cast<std::size_t>(i) * dim() + j];
    }

    /// Wrap periodic coordinates into [lo, lo + period); leave others alone.
    std::vector<double> reduce(std::span<const double> p) const;
    bool inside(std::span<const double> p, double slack = 1e-9) const;
    void require_inside(std::span<const double> p, const std::string& what) const;

    /// Variable-seeded coordinate jets at the (reduced) point.
    std::vector<Jet3> coordinate_jets(std::span<const double> p) const;

    /// Metric jets at a point (reduces periodics first).
    MetricJets metric_jets(std::span<const double> p) const;
    /// Metric jets at arbitrary coordinate jets (induced-chart evaluation);
    /// the caller is responsible for the jets describing an in-chart point.
    MetricJets metric_jets_at(std::span<const Jet3> coord_jets) const;

    Mat metric_values(std::span<const double> p) const;
    double inner(std::span<const double> p, std::span<const double> u,
                 std::span<const double> v) const;

    ChristoffelJets christoffel(std::span<const double> p) const;
    CurvatureData curvature(std::span<const double> p) const;

private:
    std::string name_;
    std::vector<std::string> coords_;
    std::vector<Interval> bounds_;
    std::vector<std::optional<double>> periods_;
    std::vector<CompiledExpr> metric_;  ///< full n*n, shared upper entries
    void validate() const;
};

/// A vector field with expression components in a fixed chart.
struct VectorFieldExpr {
    std::vector<CompiledExpr> comp;

    static VectorFieldExpr create(const ChartedSpacetime& M,
                                  std::span<const std::string> component_sources);
    std::vector<double> values(const ChartedSpacetime& M, std::span<const double> p) const;
    std::vector<Jet3> jets(const ChartedSpacetime& M, std::span<const double> p) const;
    std::vector<Jet3> jets_at(std::span<const Jet3> coord_jets) const;
};

/// A tangent vector anchored at a chart point.
struct TangentVector {
    std::vector<double> point;
    std::vector<double> comp;
};

/// Covariant derivative values (nabla_u X)^k = u^i (d_i X^k + Gamma^k_im X^m)
/// for a field X given by jets at p.
std::vector<double> covariant_derivative(const CurvatureData& curv,
                                         std::span<const double> u,
                                         std::span<const Jet3> field);

/// (L_Z g)_{ij} = Z^k d_k g_ij + g_kj d_i Z^k + g_ik d_j Z^k at p.
Mat killing_residual(const ChartedSpacetime& M, std::span<const double> p,
                     const VectorFieldExpr& Z);

/// (d Z^flat)_{ij} = d_i (g_jk Z^k) - d_j (g_ik Z^k) at p.
Mat closedness_residual(const ChartedSpacetime& M, std::span<const double> p,
                        const VectorFieldExpr& Z);

/// Sectional curvature of span(u, v) at p.
double sectional_curvature(const ChartedSpacetime& M, std::span<const double> p,
                           std::span<const double> u, std::span<const double> v);

/// Null-plane curvature with the fixed normalization
///   K_null(x) = g(R(x, xi) xi, x) / g(x, x),
/// xi null, x spacelike and orthogonal to xi (not enforced here beyond the
/// nonzero denominator).
double null_sectional_curvature(const ChartedSpacetime& M, std::span<const double> p,
                                std::span<const double> x, std::span<const double> xi);

/// Ric(u, u); the null convergence condition asks this to be >= 0 for null u.
double ricci_quadratic(const ChartedSpacetime& M, std::span<const double> p,
                       std::span<const double> u);

/// Pieces of the Hessian identity for f = 1/2 g(Z, Z):
///   Hess f (x, y)  vs  -g(R(x,Z)Z, y) + g(nabla_x Z, nabla_y Z).
/// The identity holds when Z is Killing; the residual is their difference.
struct HessianIdentityParts {
    double hess;       ///< Hess f(x, y)
    double curvature;  ///< -g(R(x,Z)Z, y)
    double gradsq;     ///< g(nabla_x Z, nabla_y Z)
    double residual() const { return hess - curvature - gradsq; }
};
HessianIdentityParts hessian_identity_parts(const ChartedSpacetime& M,
                                            std::span<const double> p,
                                            const VectorFieldExpr& Z,
                                            std::span<const double> x,
                                            std::span<const double> y);

} // namespace riggeo
