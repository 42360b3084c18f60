#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riggeo/catalog.hpp"
#include "riggeo/geodesics.hpp"

namespace riggeo {

/// Version string stamped into every report; reports are byte-stable for a
/// fixed (scenario, seed, sample count, version) tuple.
inline constexpr const char* kEngineVersion = "0.1.0";

enum class CheckStatus { pass, fail, skipped };
const char* to_string(CheckStatus s);

/// One identity check, executed or skipped. `anchor` states the identity
/// itself in plain ASCII. A check passes iff max_residual < tolerance;
/// checks whose hypotheses the scenario does not satisfy are skipped with
/// the measured classification residual in `reason`, never failed.
struct CheckRecord {
    std::string id;
    std::string anchor;
    int samples = 0;  ///< measured sample points (0 when skipped)
    double max_residual = 0.0;
    double tolerance = 0.0;
    CheckStatus status = CheckStatus::skipped;
    std::string reason;  ///< skip rationale or failure detail
};

struct CheckReport {
    std::string scenario;
    std::string engine_version;
    std::uint64_t seed = 0;
    int samples = 0;
    std::vector<std::string> suites;  ///< executed suites, sorted
    std::vector<CheckRecord> checks;  ///< ordered by id
    double wall_seconds = 0.0;        ///< human output only, never in JSON

    bool all_passed() const;  ///< true when no record has status fail
};

/// The check suite names, sorted: curvat, flow, frame, geodesic, induced,
/// periodic, transverse.
std::span<const std::string> check_suites();

struct CheckOptions {
    int samples = 100;
    std::uint64_t seed = 42;
    std::vector<std::string> suites;           ///< empty selects all suites
    std::map<std::string, double> tolerances;  ///< per-check-id overrides
};

/// Run the selected suites on a scenario. Unknown suite names or tolerance
/// override ids throw ScenarioError. Deterministic: checks are assembled in
/// id order and samples visited by index, never by completion time.
CheckReport run_checks(const Scenario& sc, const CheckOptions& opt = {});

/// Byte-stable JSON serialization: residuals and tolerances as decimal
/// strings with 17 significant digits; wall time excluded.
std::string report_json(const CheckReport& rep);

/// Human-readable summary, one line per check, wall time at the end.
std::string report_text(const CheckReport& rep);

/// Periodic-orbit grid search over a chart with periodic coordinates: one
/// velocity grid of per_axis points per component spanning [-speed, speed],
/// launched from the chart box center. The all-zero velocity cell is
/// degenerate (every constant curve closes) and is omitted.
struct HuntOptions {
    int per_axis = 3;
    double speed = 1.0;
    double period_guess = 1.0;
    std::uint64_t seed = 42;
    PeriodicSearchOptions search;
};

struct HuntReport {
    std::string scenario;
    std::string engine_version;
    std::uint64_t seed = 0;
    int per_axis = 0;
    double speed = 0.0;
    double period_guess = 0.0;
    std::vector<PeriodicOrbitResult> orbits;  ///< converged, deduplicated, sorted
    std::vector<PeriodicOrbitResult> failed;  ///< cells that did not close up
    double wall_seconds = 0.0;
};

/// Throws ScenarioError when the chart has no periodic coordinate. An empty
/// grid (per_axis = 0) yields an empty table.
HuntReport run_hunt(const Scenario& sc, const HuntOptions& opt = {});

std::string hunt_json(const HuntReport& rep);
std::string hunt_text(const HuntReport& rep);

} // namespace riggeo
