#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riggeo/errors.hpp"
#include "riggeo/rigging.hpp"
#include "riggeo/spacetime.hpp"

namespace riggeo {

/// A scenario definition (built-in or user file) failed validation. The
/// message names the source and the offending field path.
class ScenarioError : public Error {
public:
    using Error::Error;
};

/// One row of a scenario's expected-values table. Semantics: at every sample
/// point, each instance of the named quantity (one per applicable frame
/// direction or pair), multiplied by the optional `scale` expression
/// evaluated at the ambient sample point, must lie within `tolerance` of
/// `value`.
struct ExpectedValue {
    std::string quantity;
    double value = 0.0;
    double tolerance = 0.0;
    std::string scale;  ///< ambient-coordinate expression; empty means 1
    std::string note;   ///< free-text remark carried through to reports
};

/// A named geometry with ground truth: an ambient chart, optionally a rigged
/// null hypersurface in it, and the expected-values table that pins the
/// engine's output (the catalog's regression suite).
struct Scenario {
    std::string name;
    std::shared_ptr<const ChartedSpacetime> spacetime;
    std::optional<RiggedHypersurface> hypersurface;
    std::vector<ExpectedValue> expected;
    std::uint64_t seed = 42;
};

/// Built-in scenario names, in catalog order.
std::vector<std::string> list_scenarios();

/// Load a built-in scenario by name.
Scenario load_scenario(const std::string& name);

/// Load a user scenario file; the schema is identical to the built-ins'.
Scenario load_scenario_file(const std::string& path);

/// Parse scenario JSON text. `source` labels error messages (file path or
/// catalog entry name).
Scenario parse_scenario_text(const std::string& text, const std::string& source);

/// The names accepted in ExpectedValue::quantity.
std::span<const std::string> expected_quantities();

/// Result of checking one expected-values row over the sample set.
struct ExpectedOutcome {
    ExpectedValue entry;
    int measurements = 0;      ///< number of (sample, direction) instances
    double max_residual = 0.0; ///< max |measured * scale - value|
    bool pass = false;         ///< max_residual < entry.tolerance
};

/// Evaluate every expected-values row of the scenario over `samples` Halton
/// points projected onto the hypersurface. Outcomes appear in table order.
std::vector<ExpectedOutcome> evaluate_expected(const Scenario& sc, int samples);

} // namespace riggeo
