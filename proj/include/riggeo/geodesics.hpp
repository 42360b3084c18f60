#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riggeo/rigging.hpp"

namespace riggeo {

/// Which metric's geodesic equation a state refers to:
///  - ambient: the chart metric g, coordinates are the full chart tuple;
///  - rigged:  the Riemannian metric gr of a hypersurface's induced chart,
///             coordinates are the n-1 base (non-graph) coordinates;
///  - leaf:    the metric induced on a screen leaf, integrated in the same
///             induced coordinates by projecting the gr-acceleration onto
///             the screen (valid as a leaf geodesic when the screen
///             distribution is integrable).
enum class MetricKind { ambient, rigged, leaf };

enum class CausalCharacter { timelike, null, spacelike };

const char* to_string(MetricKind k);
const char* to_string(CausalCharacter c);

struct GeodesicState {
    std::vector<double> position;
    std::vector<double> velocity;
    MetricKind kind = MetricKind::ambient;
    double parameter = 0.0;
};

struct IntegrationControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_steps = 200000;  ///< accepted + rejected attempts
    int samples = 64;        ///< dense-output rows, uniform in parameter, >= 2
};

struct TrajectorySample {
    double t = 0.0;
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> acceleration;  ///< right-hand side at the sample
};

struct Trajectory {
    MetricKind kind = MetricKind::ambient;
    GeodesicState initial;
    GeodesicState final_state;
    std::vector<TrajectorySample> samples;
    double energy_drift = 0.0;  ///< max |g(v,v)(t) - g(v,v)(0)| at accepted steps
    int steps = 0;              ///< accepted steps
    int rhs_evaluations = 0;
};

/// A non-periodic coordinate left the chart mid-integration. The exit
/// parameter locates the crossing on the dense interpolant.
class ChartExitError : public NumericsError {
public:
    ChartExitError(const std::string& what, double exit_parameter, int coordinate)
        : NumericsError(what), exit_parameter_(exit_parameter), coordinate_(coordinate) {}
    double exit_parameter() const { return exit_parameter_; }
    int coordinate() const { return coordinate_; }

private:
    double exit_parameter_ = 0.0;
    int coordinate_ = -1;
};

/// Integrate the ambient geodesic equation x'' + Gamma(x', x') = 0 with an
/// adaptive embedded Runge-Kutta pair (Dormand-Prince 5(4)) and dense output.
/// T may be negative. state.kind must be ambient.
Trajectory integrate(const ChartedSpacetime& M, const GeodesicState& state, double T,
                     const IntegrationControl& control = {});

/// Same entry point for states living on a rigged hypersurface; dispatches on
/// state.kind (ambient uses the ambient chart, rigged/leaf the induced one).
Trajectory integrate(const RiggedHypersurface& hyp, const GeodesicState& state, double T,
                     const IntegrationControl& control = {});

/// Evaluate a trajectory computed in one metric against the other metric's
/// geodesic equation: an ambient trajectory is projected into the induced
/// chart and measured against gr; a rigged/leaf trajectory is lifted to the
/// ambient chart and measured against g. Alongside the defect, the corrected
/// screen fundamental form cbar(v, v) is sampled: the trajectory is a
/// geodesic of both metrics exactly when it vanishes.
struct CrossMetricResult {
    double defect = 0.0;       ///< max |x'' + Gamma_other(x', x')| over samples
    double cbar = 0.0;         ///< max |cbar(v, v)| over samples
    double level_drift = 0.0;  ///< max |F| over samples (must stay < 1e-8)
};
CrossMetricResult cross_metric_residual(const RiggedHypersurface& hyp,
                                        const Trajectory& trajectory);

/// Starting from leaf-tangent initial data, integrate the same curve as a
/// gr-geodesic, an ambient g-geodesic, and a leaf geodesic, and compare the
/// endpoints pairwise. On a totally geodesic hypersurface with integrable
/// screen and symmetric-part-free C the three curves coincide.
/// Preconditions are measured on seeded hypersurface samples and violations
/// throw GeometryError before any integration runs.
struct LeafCorrespondenceResult {
    // measured preconditions
    double second_fundamental = 0.0;  ///< max |B| on tangent frames
    double frobenius = 0.0;           ///< max |d(omega)(E_a, E_b)| = screen non-integrability
    double c_symmetric = 0.0;         ///< max |C(E_a,E_b) + C(E_b,E_a)| / 2
    // pairwise endpoint discrepancies: |position delta| + |velocity delta|,
    // compared in ambient coordinates with periodic reduction
    double rigged_vs_ambient = 0.0;
    double rigged_vs_leaf = 0.0;
    double ambient_vs_leaf = 0.0;
    double worst_pair() const;
};
LeafCorrespondenceResult leaf_correspondence_check(const RiggedHypersurface& hyp,
                                                   std::span<const double> base_point,
                                                   std::span<const double> leaf_velocity,
                                                   double T,
                                                   const IntegrationControl& control = {});

/// Search for a periodic geodesic gamma with gamma(T) = gamma(0) and
/// gamma'(T) = gamma'(0), quotienting position mismatch by the chart's
/// periodic lattice. Derivative-free simplex descent followed by a damped
/// least-squares polish of the shooting map; the reported closure error is
/// re-measured by a fresh integration from the polished data.
struct PeriodicSearchOptions {
    double closure_tol = 1e-8;
    int simplex_iterations = 300;
    int polish_iterations = 30;
    double jacobian_step = 1e-6;  ///< finite-difference step for the shooting map
    std::optional<CausalCharacter> target;  ///< post-filter, never constrains the search
    IntegrationControl control{1e-11, 1e-13, 200000, 2};
};

struct PeriodicOrbitResult {
    GeodesicState initial;  ///< polished initial data, position reduced into the chart
    double period = 0.0;
    double closure_error = 0.0;
    CausalCharacter character = CausalCharacter::spacelike;
    bool converged = false;      ///< closure_error < closure_tol
    bool matches_target = true;  ///< false when a causal target was set and missed
    std::vector<double> trace;   ///< objective after each optimizer improvement
};

PeriodicOrbitResult find_periodic_geodesic(const ChartedSpacetime& M,
                                           const GeodesicState& guess, double period_guess,
                                           const PeriodicSearchOptions& options = {});

/// Run the periodic search over a guess grid. Converged orbits are
/// deduplicated by state distance below 1e-6 (positions compared after
/// lattice reduction) and sorted by closure error, then lexicographically by
/// initial data. Failed searches are kept at the tail so callers can report
/// them. Note that on charts with translation symmetry a continuous family
/// of closed orbits exists; representatives further apart than the merge
/// distance count as distinct.
std::vector<PeriodicOrbitResult> hunt_periodic_geodesics(
    const ChartedSpacetime& M, std::span<const GeodesicState> guesses, double period_guess,
    const PeriodicSearchOptions& options = {});

} // namespace riggeo
