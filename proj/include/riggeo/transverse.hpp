#pragma once

#include <vector>

#include "riggeo/rigging.hpp"

namespace riggeo {

/// A chart on the hypersurface itself around one of its points. The n-1
/// non-graph ambient coordinates serve as the induced coordinates; the graph
/// coordinate becomes a dependent jet solved from the level equation. On top
/// of it sit the two induced metrics: the (degenerate) pullback of the
/// ambient metric, and the Riemannian rigged metric
///   gr = pullback + omega (x) omega,
/// whose geometry the transverse machinery studies.
///
/// Order contract: phi and the rigged metric expression data are exact to
/// order 3; derivatives of phi, hence pullback / omega / rigged jets, to
/// order 2 — one full curvature evaluation of the rigged metric.
struct InducedChart {
    int m = 0;                       ///< induced dimension n-1
    int graph = -1;                  ///< ambient index of the dependent coordinate
    std::vector<int> base;           ///< ambient indices of the induced coordinates
    std::vector<double> point;       ///< ambient base point (on L)
    std::vector<double> base_point;  ///< its induced coordinates

    std::vector<Jet3> phi;        ///< ambient coordinates as jets of the induced ones
    MetricJets pullback;          ///< i*g, degenerate
    std::vector<Jet3> omega;      ///< pulled-back rigging 1-form components
    MetricJets rigged;            ///< the Riemannian metric gr
    ChristoffelJets rigged_gamma;
    CurvatureData rigged_curv;

    std::vector<Jet3> monomials;  ///< composition table: ambient monomials of phi - p0

    std::vector<Jet3> xi_ind;                      ///< xi in induced components
    std::vector<std::vector<Jet3>> screen_ind;     ///< screen frame, induced components

    Mat rigged_values() const { return rigged.values(); }
};

InducedChart build_induced_chart(const RiggedHypersurface& hyp, const RiggedFrame& fr);

/// Compose an ambient jet at the chart's base point with phi, yielding the
/// same function's jet in induced coordinates.
Jet3 compose_with_chart(const InducedChart& ch, const Jet3& ambient_jet);

/// Induced components of a tangent field given by ambient component jets.
/// (For tangent fields these are just the base-coordinate components,
/// re-expanded in the induced coordinates.)
std::vector<Jet3> transport_field(const InducedChart& ch, const std::vector<Jet3>& field);

/// Cross-check of the composition machinery: the pullback metric computed by
/// evaluating metric expressions along phi versus by composing the ambient
/// metric jets with phi. Returns the largest coefficient difference.
double pullback_consistency(const InducedChart& ch, const RiggedHypersurface& hyp,
                            const RiggedFrame& fr);

/// (L_xi gr)_ab in the induced chart.
Mat xi_killing_residual(const InducedChart& ch);

/// (L_xi gr)_ab + 2 B(dphi_a, dphi_b): zero identically, for every rigging,
/// by the structural link between the rigged-metric flow of xi and the null
/// second fundamental form.
Mat flow_residual(const InducedChart& ch, const RiggedFrame& fr);

/// max_{c,d} |(nabla^r_c xi)^d| for the rigged connection: xi is parallel
/// for gr exactly on totally geodesic hypersurfaces with closed omega.
double xi_parallel_residual(const InducedChart& ch);

/// Exterior derivative of the pulled-back 1-form: (domega)_ab.
Mat domega(const InducedChart& ch);
double domega_pair(const InducedChart& ch, std::span<const double> x,
                   std::span<const double> y);

/// Same 2-form evaluated upstairs, on tangent fields in ambient components:
///   domega(X, Y) = X(omega(Y)) - Y(omega(X)) - omega([X, Y]).
double domega_ambient_pair(const RiggedFrame& fr, const std::vector<Jet3>& X,
                           const std::vector<Jet3>& Y);

/// Transverse sectional curvature of the plane of two screen directions
/// (induced components, gr-orthonormal): the sectional curvature of gr
/// corrected by the flow's integrability defect,
///   K^T = K_gr(x, y) + 3/4 domega(x, y)^2.
double transverse_sectional(const InducedChart& ch, std::span<const double> x,
                            std::span<const double> y);
/// K^T over the screen-frame plane (a, b).
double transverse_sectional_frame(const InducedChart& ch, int a, int b);

/// K^T of the same plane computed from the transverse connection itself,
/// with no reference to K_gr or the twist correction: the frame coefficients
/// of nabla^T (gr-covariant derivative projected to the screen for screen
/// directions, projected Lie transport along xi for the flow direction) are
/// carried as jets, and the curvature-of-a-connection formula in the
/// orthonormal screen frame — including the frame-bracket corrections —
/// yields the sectional value. An independent route: transverse_sectional
/// never differentiates connection coefficients.
double transverse_sectional_connection(const InducedChart& ch, int a, int b);

/// Transverse Ricci quadratic form on the a-th screen direction, and the
/// transverse scalar curvature (sums of frame sectionals).
double transverse_ricci_frame(const InducedChart& ch, int a);
double transverse_scalar(const InducedChart& ch);

/// The ambient-curvature route to the same Ricci quadratic form on a screen
/// direction x: Ric(x, x) - 2 g(R(xi, x) x, N). Matches
/// transverse_ricci_frame on totally geodesic hypersurfaces.
double ambient_transverse_ricci(const RiggedFrame& fr, std::span<const double> x);

/// Transverse covariant derivative of the b-th screen field:
/// along the flow (dir = 0) the projected Lie bracket with xi, along the
/// a-th screen direction (dir = a+1) the projected rigged-metric derivative.
/// Induced components of the result.
std::vector<double> transverse_connection(const InducedChart& ch, int dir, int b);

/// The null-geometry screen connection: ambient covariant derivative of the
/// b-th screen field along the same direction, with its xi and transverse
/// parts removed. Ambient components of the result.
std::vector<double> screen_connection(const RiggedFrame& fr, int dir, int b);

/// Largest component difference between the two connections over all frame
/// directions and screen fields (compared in induced components).
double connection_coincidence_residual(const InducedChart& ch, const RiggedFrame& fr);

} // namespace riggeo
