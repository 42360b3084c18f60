#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "riggeo/spacetime.hpp"

namespace riggeo {

/// A null hypersurface L presented as the zero set of a level function F
/// inside an ambient chart, together with a chosen transverse vector field
/// (the rigging). One coordinate is designated the graph coordinate: it is
/// solved from F = 0 given the others, which is how points of L are produced.
///
/// Construction performs hard validation: the level set must actually be
/// null (degenerate induced metric) and the rigging transverse to it at
/// probe points spread over the sampling box. Violations throw GeometryError
/// immediately rather than surfacing as residuals later.
class RiggedHypersurface {
public:
    RiggedHypersurface() = default;

    static RiggedHypersurface create(std::shared_ptr<const ChartedSpacetime> ambient,
                                     const std::string& level_source,
                                     std::span<const std::string> rigging_components,
                                     const std::string& graph_coordinate,
                                     std::vector<Interval> sampling_box);

    const ChartedSpacetime& ambient() const { return *ambient_; }
    const std::shared_ptr<const ChartedSpacetime>& ambient_ptr() const { return ambient_; }
    const CompiledExpr& level() const { return level_; }
    const VectorFieldExpr& rigging() const { return rigging_; }
    int graph_coord() const { return graph_; }
    /// Ambient indices of the n-1 coordinates that parametrize L, in chart
    /// order; entry a corresponds to sampling_box()[a].
    const std::vector<int>& base_coords() const { return base_; }
    const std::vector<Interval>& sampling_box() const { return box_; }

    double level_value(std::span<const double> p) const;

    /// Produce the point of L over the given base-coordinate values by
    /// solving F = 0 for the graph coordinate (Newton, bisection fallback).
    /// The result satisfies |F| < 1e-12 or NumericsError is thrown.
    std::vector<double> solve_point(std::span<const double> base) const;

    /// Re-anchor a full ambient point onto L by polishing its graph
    /// coordinate from the current value (Newton only). Same residual bound.
    std::vector<double> refine_point(std::span<const double> p) const;

private:
    std::shared_ptr<const ChartedSpacetime> ambient_;
    std::string name_;
    CompiledExpr level_;
    VectorFieldExpr rigging_;
    int graph_ = -1;
    std::vector<int> base_;
    std::vector<Interval> box_;
};

/// The rigged frame at one point of L, with every field carried as jets of
/// its ambient components so that covariant derivatives of the frame stay
/// exact. Follows the usual rigging construction: xi is the null tangent
/// direction scaled so that g(zeta, xi) = 1, the transverse field
/// N = zeta - 1/2 g(zeta,zeta) xi is null with g(N, xi) = 1, and the screen
/// is the g-orthonormal spacelike complement of xi inside TL.
///
/// Order contract: metric/zeta jets are trustworthy to order 3; level
/// derivatives, and hence xi / transverse / screen jets, to order 2. That is
/// exactly enough for one curvature evaluation of frame-based connections.
struct RiggedFrame {
    std::vector<double> point;
    int n = 0;

    MetricJets metric;             ///< ambient metric jets at point
    std::vector<Jet3> metric_inv;  ///< inverse metric jets [i*n+j]
    ChristoffelJets gamma;         ///< ambient Christoffels (jets)
    CurvatureData curv;            ///< pointwise Gamma / Riemann / Ricci
    Mat gv;                        ///< metric values

    Jet3 level;                 ///< F
    std::vector<Jet3> df;       ///< components dF_i (order 2)
    std::vector<Jet3> zeta;     ///< rigging field
    Jet3 zeta_sq;               ///< g(zeta, zeta)
    std::vector<Jet3> xi;       ///< null tangent, g(zeta, xi) = 1
    std::vector<Jet3> transverse;            ///< N, null, g(N, xi) = 1
    std::vector<std::vector<Jet3>> screen;   ///< n-2 orthonormal spacelike fields

    int screen_count() const { return static_cast<int>(screen.size()); }

    std::vector<double> values_of(const std::vector<Jet3>& field) const;
    std::vector<double> xi_values() const { return values_of(xi); }
    std::vector<double> transverse_values() const { return values_of(transverse); }
    std::vector<double> zeta_values() const { return values_of(zeta); }
    /// Basis of TL at the point: xi first, then the screen fields.
    std::vector<std::vector<double>> tangent_values() const;

    double inner(std::span<const double> u, std::span<const double> v) const;
};

/// Build the frame at a point that already lies on L (|F| <= 1e-10 enforced).
RiggedFrame build_frame(const RiggedHypersurface& hyp, std::span<const double> point);

/// Components of the Lie bracket [a, b]^k = a^i d_i b^k - b^i d_i a^k at the
/// frame's base point.
std::vector<double> bracket_values(const std::vector<Jet3>& a, const std::vector<Jet3>& b);

/// g(a, b) for component-jet fields, as a jet.
Jet3 field_pairing(const MetricJets& m, const std::vector<Jet3>& a,
                   const std::vector<Jet3>& b);

/// omega(x) = g(zeta, x): the 1-form dual to the rigging along L.
double omega_form(const RiggedFrame& fr, std::span<const double> x);

/// Null second fundamental form B(u, x) = -g(nabla_u xi, x) for tangent
/// arguments. Symmetric, independent of how xi is extended off L, and
/// vanishing identically exactly when L is totally geodesic.
double null_fundamental(const RiggedFrame& fr, std::span<const double> u,
                        std::span<const double> x);

/// Same bilinear form computed through the opposite route,
/// B(u, w) = g(nabla_u W, xi) for a tangent frame field W given by jets.
/// Agreement of the two routes exercises independent differentiations.
double null_fundamental_via_field(const RiggedFrame& fr, std::span<const double> u,
                                  const std::vector<Jet3>& field);

/// Screen fundamental form C(u, x) = -g(nabla_u zeta, x) - 1/2 g(zeta,zeta) B(u, x).
double screen_fundamental(const RiggedFrame& fr, std::span<const double> u,
                          std::span<const double> x);

/// Rotation 1-form tau(u) = g(nabla_u zeta, xi); equals g(nabla_u N, xi).
double rotation_form(const RiggedFrame& fr, std::span<const double> u);
double rotation_form_via_transverse(const RiggedFrame& fr, std::span<const double> u);

/// Shape operator of the rigging: A(u) = tau(u) zeta - nabla_u zeta, the
/// tangent part of -nabla_u zeta.
std::vector<double> shape_operator(const RiggedFrame& fr, std::span<const double> u);

/// Screen shape operator: A*(u) = -nabla_u xi - tau(u) xi, valued in the
/// screen, so that nabla_u xi = -A*(u) - tau(u) xi.
std::vector<double> screen_shape_operator(const RiggedFrame& fr, std::span<const double> u);

/// Symmetric extension of C to all of TL:
///   Cbar(u, v) = C(Pu, Pv) - omega(u) tau(Pv) - omega(v) tau(Pu)
///              - omega(u) omega(v) tau(xi),
/// where P(x) = x - omega(x) xi is the screen projection.
double extended_screen_fundamental(const RiggedFrame& fr, std::span<const double> u,
                                   std::span<const double> v);

} // namespace riggeo
