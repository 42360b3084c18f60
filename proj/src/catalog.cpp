#include "riggeo/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "riggeo/expr.hpp"
#include "riggeo/sampling.hpp"
#include "riggeo/transverse.hpp"

namespace riggeo {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Built-in scenario definitions. User files use exactly this schema.
// ---------------------------------------------------------------------------

constexpr const char* kMinkowskiHyperplane = R"raw({
  "name": "minkowski_hyperplane",
  "dimension": 4,
  "coordinates": ["t", "x", "y", "z"],
  "bounds": {"t": [-4, 4], "x": [-2, 2], "y": [-2, 2], "z": [-2, 2]},
  "metric": ["-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"],
  "level_function": "t - x",
  "rigging": ["1", "0", "0", "0"],
  "graph_coordinate": "t",
  "sampling_domain": {"x": [-1, 1], "y": [-1, 1], "z": [-1, 1]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-10,
     "note": "totally geodesic null hyperplane"},
    {"quantity": "kt_screen", "value": 0.0, "tolerance": 1e-9,
     "note": "flat transverse geometry"},
    {"quantity": "scalar_transverse", "value": 0.0, "tolerance": 1e-9},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-10,
     "note": "closed rigging form"},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "cbar_xi", "value": 0.0, "tolerance": 1e-10}
  ]
})raw";

constexpr const char* kMinkowskiHyperplaneTilted = R"raw({
  "name": "minkowski_hyperplane_tilted",
  "dimension": 4,
  "coordinates": ["t", "x", "y", "z"],
  "bounds": {"t": [-4, 4], "x": [-2, 2], "y": [-2, 2], "z": [-2, 2]},
  "metric": ["-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"],
  "level_function": "t - x",
  "rigging": ["1 + x", "0", "0", "0"],
  "graph_coordinate": "t",
  "sampling_domain": {"x": [-0.5, 1], "y": [-1, 1], "z": [-1, 1]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-10,
     "note": "rescaling the rigging cannot bend the hypersurface"},
    {"quantity": "cbar_xi", "value": 1.0, "tolerance": 1e-8,
     "scale": "(1 + x)^2",
     "note": "position-dependent rigging makes the extended screen form nonzero"},
    {"quantity": "kt_screen", "value": 0.0, "tolerance": 1e-9},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-10}
  ]
})raw";

constexpr const char* kMinkowskiCone = R"raw({
  "name": "minkowski_cone",
  "dimension": 4,
  "coordinates": ["t", "x", "y", "z"],
  "bounds": {"t": [-4, 4], "x": [-2, 2], "y": [-2, 2], "z": [-2, 2]},
  "metric": ["-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"],
  "level_function": "t - sqrt(x^2 + y^2 + z^2)",
  "rigging": ["1", "0", "0", "0"],
  "graph_coordinate": "t",
  "sampling_domain": {"x": [0.7, 1.1], "y": [0.6, 1.0], "z": [0.5, 0.9]},
  "seed": 42,
  "expected": [
    {"quantity": "b_screen_diag", "value": 1.0, "tolerance": 1e-6,
     "scale": "sqrt(x^2 + y^2 + z^2)",
     "note": "light-cone expansion 1/r on unit screen directions"},
    {"quantity": "kt_screen", "value": 0.0, "tolerance": 1e-9,
     "note": "the rigged metric of the cone is flat"},
    {"quantity": "scalar_transverse", "value": 0.0, "tolerance": 1e-9},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-9,
     "note": "holds without the totally geodesic hypothesis"}
  ]
})raw";

constexpr const char* kPpwaveWavefront = R"raw({
  "name": "ppwave_wavefront",
  "dimension": 4,
  "coordinates": ["u", "v", "x", "y"],
  "bounds": {"u": [-3, 3], "v": [-3, 3], "x": [-1.5, 1.5], "y": [-1.5, 1.5]},
  "metric": ["x^2 - y^2", "1", "0", "0", "0", "0", "0", "1", "0", "1"],
  "level_function": "u",
  "rigging": ["1", "0", "0", "0"],
  "graph_coordinate": "u",
  "sampling_domain": {"v": [-1, 1], "x": [-1, 1], "y": [-1, 1]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-10,
     "note": "wavefronts of a plane-fronted wave are totally geodesic"},
    {"quantity": "kt_screen", "value": 0.0, "tolerance": 1e-9},
    {"quantity": "scalar_transverse", "value": 0.0, "tolerance": 1e-9},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-10}
  ]
})raw";

constexpr const char* kPpwaveWavefrontTwisted = R"raw({
  "name": "ppwave_wavefront_twisted",
  "dimension": 4,
  "coordinates": ["u", "v", "x", "y"],
  "bounds": {"u": [-3, 3], "v": [-3, 3], "x": [-1.5, 1.5], "y": [-1.5, 1.5]},
  "metric": ["x^2 - y^2", "1", "0", "0", "0", "0", "0", "1", "0", "1"],
  "level_function": "u",
  "rigging": ["1", "0", "y", "0"],
  "graph_coordinate": "u",
  "sampling_domain": {"v": [-1, 1], "x": [-1, 1], "y": [-1, 1]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-10,
     "note": "the twist lives in the rigging, not the hypersurface"},
    {"quantity": "domega_screen", "value": 1.0, "tolerance": 1e-9,
     "note": "non-closed rigging form; the screen bundle is non-integrable"},
    {"quantity": "kt_screen", "value": 0.0, "tolerance": 1e-8,
     "note": "the twist correction cancels the rigged-metric curvature"},
    {"quantity": "scalar_transverse", "value": 0.0, "tolerance": 1e-8},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-10}
  ]
})raw";

constexpr const char* kPpwaveFlat = R"raw({
  "name": "ppwave_flat",
  "dimension": 4,
  "coordinates": ["u", "v", "x", "y"],
  "bounds": {"u": [-3, 3], "v": [-3, 3], "x": [-1.5, 1.5], "y": [-1.5, 1.5]},
  "metric": ["0", "1", "0", "0", "0", "0", "0", "1", "0", "1"],
  "level_function": "u",
  "rigging": ["1", "0", "0", "0"],
  "graph_coordinate": "u",
  "sampling_domain": {"v": [-1, 1], "x": [-1, 1], "y": [-1, 1]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-12},
    {"quantity": "kt_screen", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "scalar_transverse", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-12},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-12},
    {"quantity": "cbar_xi", "value": 0.0, "tolerance": 1e-12,
     "note": "null rigging with vanishing ambient derivative"}
  ]
})raw";

constexpr const char* kDesitterHorizon = R"raw({
  "name": "desitter_horizon",
  "dimension": 4,
  "coordinates": ["u", "r", "theta", "phi"],
  "bounds": {"u": [-2, 2], "r": [0.5, 1.5], "theta": [0.3, 2.841592653589793],
             "phi": [0, 6.283185307179586]},
  "periodic": {"phi": 6.283185307179586},
  "metric": ["-(1 - r^2)", "-1", "0", "0", "0", "0", "0", "r^2", "0",
             "r^2*sin(theta)^2"],
  "level_function": "r - 1",
  "rigging": ["0", "1", "0", "0"],
  "graph_coordinate": "r",
  "sampling_domain": {"u": [-1, 1], "theta": [0.6, 2.5], "phi": [0.3, 6.0]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-10,
     "note": "the cosmological horizon is totally geodesic"},
    {"quantity": "kt_screen", "value": 1.0, "tolerance": 1e-5,
     "note": "unit-radius normalization"},
    {"quantity": "ricci_transverse_diag", "value": 1.0, "tolerance": 1e-5},
    {"quantity": "scalar_transverse", "value": 2.0, "tolerance": 1e-5},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-10}
  ]
})raw";

constexpr const char* kAdsSlice = R"raw({
  "name": "ads_slice",
  "dimension": 4,
  "coordinates": ["u", "r", "chi", "phi"],
  "bounds": {"u": [-2, 2], "r": [0.5, 1.5], "chi": [0.3, 2.0],
             "phi": [0, 6.283185307179586]},
  "periodic": {"phi": 6.283185307179586},
  "metric": ["-(r^2 - 1)", "-1", "0", "0", "0", "0", "0", "r^2", "0",
             "r^2*((exp(chi) - exp(-chi))/2)^2"],
  "level_function": "r - 1",
  "rigging": ["0", "1", "0", "0"],
  "graph_coordinate": "r",
  "sampling_domain": {"u": [-1, 1], "chi": [0.4, 1.8], "phi": [0.3, 6.0]},
  "seed": 42,
  "expected": [
    {"quantity": "b_tangent", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "kt_screen", "value": -1.0, "tolerance": 1e-5,
     "note": "unit-radius normalization, hyperbolic screen geometry"},
    {"quantity": "ricci_transverse_diag", "value": -1.0, "tolerance": 1e-5},
    {"quantity": "scalar_transverse", "value": -2.0, "tolerance": 1e-5},
    {"quantity": "domega_screen", "value": 0.0, "tolerance": 1e-10},
    {"quantity": "flow_identity", "value": 0.0, "tolerance": 1e-10}
  ]
})raw";

constexpr const char* kFlatTorus = R"raw({
  "name": "flat_torus",
  "dimension": 3,
  "coordinates": ["t", "x", "y"],
  "bounds": {"t": [0, 1], "x": [0, 1], "y": [0, 1]},
  "periodic": {"t": 1.0, "x": 1.0, "y": 1.0},
  "metric": ["-1", "0", "0", "1", "0", "1"],
  "seed": 42,
  "expected": []
})raw";

const std::pair<const char*, const char*> kBuiltins[] = {
    {"minkowski_hyperplane", kMinkowskiHyperplane},
    {"minkowski_hyperplane_tilted", kMinkowskiHyperplaneTilted},
    {"minkowski_cone", kMinkowskiCone},
    {"ppwave_wavefront", kPpwaveWavefront},
    {"ppwave_wavefront_twisted", kPpwaveWavefrontTwisted},
    {"ppwave_flat", kPpwaveFlat},
    {"desitter_horizon", kDesitterHorizon},
    {"ads_slice", kAdsSlice},
    {"flat_torus", kFlatTorus},
};

const std::vector<std::string> kQuantities{
    "b_tangent",        "b_screen_diag",     "cbar_xi",       "kt_screen",
    "ricci_transverse_diag", "scalar_transverse", "domega_screen", "flow_identity",
};

// ---------------------------------------------------------------------------
// Schema validation. Every failure names the source and the field path.
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const std::string& source, const std::string& field,
                       const std::string& what) {
    throw ScenarioError(source + ": " + field + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& source) {
    if (!j.contains(key)) fail(source, key, "missing required key");
    return j.at(key);
}

std::string need_string(const json& j, const char* key, const std::string& source) {
    const json& v = need(j, key, source);
    if (!v.is_string() || v.get<std::string>().empty())
        fail(source, key, "expected a non-empty string");
    return v.get<std::string>();
}

Interval need_interval(const json& v, const std::string& source, const std::string& field) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(source, field, "expected [lo, hi]");
    Interval iv{v[0].get<double>(), v[1].get<double>()};
    if (!(iv.lo < iv.hi)) fail(source, field, "lower bound must be below upper bound");
    return iv;
}

void check_expr(const std::string& text, const std::vector<std::string>& coords,
                const std::string& source, const std::string& field) {
    try {
        (void)CompiledExpr::compile(text, coords);
    } catch (const Error& e) {
        fail(source, field, e.what());
    }
}

Scenario parse_scenario_json(const json& j, const std::string& source) {
    if (!j.is_object()) fail(source, "$", "expected a JSON object");

    static const std::vector<std::string> kKeys{
        "name",     "dimension",      "coordinates",      "bounds",
        "periodic", "metric",         "level_function",   "rigging",
        "graph_coordinate", "sampling_domain", "expected", "seed"};
    for (const auto& item : j.items())
        if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end())
            fail(source, item.key(), "unknown key");

    Scenario sc;
    sc.name = need_string(j, "name", source);

    const json& jdim = need(j, "dimension", source);
    if (!jdim.is_number_integer()) fail(source, "dimension", "expected an integer");
    const int n = jdim.get<int>();
    if (n < 2 || n > 6) fail(source, "dimension", "supported chart dimensions are 2..6");

    const json& jc = need(j, "coordinates", source);
    if (!jc.is_array() || static_cast<int>(jc.size()) != n)
        fail(source, "coordinates", "expected " + std::to_string(n) + " names");
    std::vector<std::string> coords;
    for (std::size_t i = 0; i < jc.size(); ++i) {
        if (!jc[i].is_string() || jc[i].get<std::string>().empty())
            fail(source, "coordinates[" + std::to_string(i) + "]",
                 "expected a non-empty name");
        coords.push_back(jc[i].get<std::string>());
    }
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (coords[i] == coords[k])
                fail(source, "coordinates", "duplicate name '" + coords[i] + "'");

    auto coord_index = [&](const std::string& name) {
        for (int i = 0; i < n; ++i)
            if (coords[i] == name) return i;
        return -1;
    };

    const json& jb = need(j, "bounds", source);
    if (!jb.is_object()) fail(source, "bounds", "expected an object keyed by coordinate");
    for (const auto& item : jb.items())
        if (coord_index(item.key()) < 0) fail(source, "bounds." + item.key(), "unknown coordinate");
    std::vector<Interval> bounds;
    for (const std::string& c : coords) {
        if (!jb.contains(c)) fail(source, "bounds." + c, "missing interval");
        bounds.push_back(need_interval(jb.at(c), source, "bounds." + c));
    }

    std::vector<std::optional<double>> periods(n);
    if (j.contains("periodic")) {
        const json& jp = j.at("periodic");
        if (!jp.is_object())
            fail(source, "periodic", "expected an object keyed by coordinate");
        for (const auto& item : jp.items()) {
            const int idx = coord_index(item.key());
            if (idx < 0) fail(source, "periodic." + item.key(), "unknown coordinate");
            if (!item.value().is_number())
                fail(source, "periodic." + item.key(), "expected a number");
            const double p = item.value().get<double>();
            if (!(p > 0.0)) fail(source, "periodic." + item.key(), "period must be positive");
            periods[idx] = p;
        }
    }

    const json& jm = need(j, "metric", source);
    const int upper = n * (n + 1) / 2;
    if (!jm.is_array() || static_cast<int>(jm.size()) != upper)
        fail(source, "metric",
             "expected the row-major upper triangle: " + std::to_string(upper) +
                 " expressions");
    std::vector<std::string> metric;
    for (int i = 0; i < upper; ++i) {
        const std::string field = "metric[" + std::to_string(i) + "]";
        if (!jm[i].is_string()) fail(source, field, "expected an expression string");
        metric.push_back(jm[i].get<std::string>());
        check_expr(metric.back(), coords, source, field);
    }

    try {
        sc.spacetime = std::make_shared<const ChartedSpacetime>(
            ChartedSpacetime::create(sc.name, coords, bounds, periods, metric));
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        fail(source, "metric", e.what());
    }

    const bool has_level = j.contains("level_function");
    for (const char* key : {"rigging", "graph_coordinate", "sampling_domain"}) {
        if (has_level && !j.contains(key))
            fail(source, key, "required alongside level_function");
        if (!has_level && j.contains(key)) fail(source, key, "requires level_function");
    }

    if (has_level) {
        const std::string level = need_string(j, "level_function", source);
        check_expr(level, coords, source, "level_function");

        const json& jr = need(j, "rigging", source);
        if (!jr.is_array() || static_cast<int>(jr.size()) != n)
            fail(source, "rigging",
                 "expected " + std::to_string(n) + " component expressions");
        std::vector<std::string> rig;
        for (int i = 0; i < n; ++i) {
            const std::string field = "rigging[" + std::to_string(i) + "]";
            if (!jr[i].is_string()) fail(source, field, "expected an expression string");
            rig.push_back(jr[i].get<std::string>());
            check_expr(rig.back(), coords, source, field);
        }

        const std::string graph = need_string(j, "graph_coordinate", source);
        const int gidx = coord_index(graph);
        if (gidx < 0) fail(source, "graph_coordinate", "unknown coordinate '" + graph + "'");

        const json& js = need(j, "sampling_domain", source);
        if (!js.is_object())
            fail(source, "sampling_domain",
                 "expected an object keyed by the non-graph coordinates");
        for (const auto& item : js.items()) {
            const int idx = coord_index(item.key());
            if (idx < 0) fail(source, "sampling_domain." + item.key(), "unknown coordinate");
            if (idx == gidx)
                fail(source, "sampling_domain." + item.key(),
                     "the graph coordinate is solved, not sampled");
        }
        std::vector<Interval> box;
        for (int i = 0; i < n; ++i) {
            if (i == gidx) continue;
            const std::string field = "sampling_domain." + coords[i];
            if (!js.contains(coords[i])) fail(source, field, "missing interval");
            box.push_back(need_interval(js.at(coords[i]), source, field));
        }

        try {
            sc.hypersurface = RiggedHypersurface::create(sc.spacetime, level, rig, graph,
                                                         std::move(box));
        } catch (const ScenarioError&) {
            throw;
        } catch (const Error& e) {
            fail(source, "hypersurface", e.what());
        }
    }

    if (j.contains("expected")) {
        const json& je = j.at("expected");
        if (!je.is_array()) fail(source, "expected", "expected an array of rows");
        if (!sc.hypersurface && !je.empty())
            fail(source, "expected", "expected values need a hypersurface");
        for (std::size_t i = 0; i < je.size(); ++i) {
            const std::string row = "expected[" + std::to_string(i) + "]";
            const json& r = je[i];
            if (!r.is_object()) fail(source, row, "expected an object");
            for (const auto& item : r.items()) {
                static const std::vector<std::string> kRowKeys{"quantity", "value",
                                                               "tolerance", "scale", "note"};
                if (std::find(kRowKeys.begin(), kRowKeys.end(), item.key()) == kRowKeys.end())
                    fail(source, row + "." + item.key(), "unknown key");
            }
            auto row_str = [&](const char* key, bool required) -> std::string {
                if (!r.contains(key)) {
                    if (required) fail(source, row + "." + key, "missing required key");
                    return "";
                }
                if (!r.at(key).is_string())
                    fail(source, row + "." + key, "expected a string");
                return r.at(key).get<std::string>();
            };
            ExpectedValue ev;
            ev.quantity = row_str("quantity", true);
            if (std::find(kQuantities.begin(), kQuantities.end(), ev.quantity) ==
                kQuantities.end()) {
                std::string all;
                for (const auto& q : kQuantities) {
                    if (!all.empty()) all += ", ";
                    all += q;
                }
                fail(source, row + ".quantity",
                     "unknown quantity '" + ev.quantity + "' (known: " + all + ")");
            }
            if (!r.contains("value") || !r.at("value").is_number())
                fail(source, row + ".value", "expected a number");
            ev.value = r.at("value").get<double>();
            if (!r.contains("tolerance") || !r.at("tolerance").is_number())
                fail(source, row + ".tolerance", "expected a number");
            ev.tolerance = r.at("tolerance").get<double>();
            if (!(ev.tolerance > 0.0))
                fail(source, row + ".tolerance", "tolerance must be positive");
            ev.scale = row_str("scale", false);
            if (!ev.scale.empty()) check_expr(ev.scale, coords, source, row + ".scale");
            ev.note = row_str("note", false);
            sc.expected.push_back(std::move(ev));
        }
    }

    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_integer()) fail(source, "seed", "expected an integer");
        const long long v = s.get<long long>();
        if (v < 0) fail(source, "seed", "seed must be non-negative");
        sc.seed = static_cast<std::uint64_t>(v);
    }

    return sc;
}

} // namespace

std::vector<std::string> list_scenarios() {
    std::vector<std::string> names;
    for (const auto& [name, text] : kBuiltins) {
        (void)text;
        names.emplace_back(name);
    }
    return names;
}

Scenario load_scenario(const std::string& name) {
    for (const auto& [key, text] : kBuiltins)
        if (name == key) return parse_scenario_text(text, "catalog:" + name);
    std::string all;
    for (const auto& [key, text] : kBuiltins) {
        (void)text;
        if (!all.empty()) all += ", ";
        all += key;
    }
    throw ScenarioError("unknown scenario '" + name + "' (catalog: " + all + ")");
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(source + ": invalid JSON: " + e.what());
    }
    return parse_scenario_json(j, source);
}

std::span<const std::string> expected_quantities() { return kQuantities; }

std::vector<ExpectedOutcome> evaluate_expected(const Scenario& sc, int samples) {
    std::vector<ExpectedOutcome> out;
    out.reserve(sc.expected.size());
    for (const ExpectedValue& ev : sc.expected) {
        ExpectedOutcome oc;
        oc.entry = ev;
        out.push_back(std::move(oc));
    }
    if (sc.expected.empty()) return out;
    if (!sc.hypersurface)
        throw ScenarioError("scenario " + sc.name + ": expected values need a hypersurface");
    if (samples < 1)
        throw ScenarioError("scenario " + sc.name + ": sample count must be positive");

    const RiggedHypersurface& hyp = *sc.hypersurface;
    const ChartedSpacetime& M = hyp.ambient();

    std::vector<CompiledExpr> scales(sc.expected.size());
    for (std::size_t i = 0; i < sc.expected.size(); ++i)
        if (!sc.expected[i].scale.empty())
            scales[i] = CompiledExpr::compile(sc.expected[i].scale, M.coords());

    bool needs_chart = false;
    for (const ExpectedValue& ev : sc.expected)
        needs_chart = needs_chart || ev.quantity == "kt_screen" ||
                      ev.quantity == "ricci_transverse_diag" ||
                      ev.quantity == "scalar_transverse" || ev.quantity == "flow_identity";

    std::vector<double> measured;
    for (int k = 1; k <= samples; ++k) {
        const std::vector<double> base =
            halton_box(static_cast<std::uint64_t>(k), hyp.sampling_box());
        const std::vector<double> p = hyp.solve_point(base);
        const RiggedFrame fr = build_frame(hyp, p);
        std::optional<InducedChart> ch;
        if (needs_chart) ch.emplace(build_induced_chart(hyp, fr));

        for (std::size_t i = 0; i < sc.expected.size(); ++i) {
            const ExpectedValue& ev = sc.expected[i];
            measured.clear();
            if (ev.quantity == "b_tangent") {
                const auto tangents = fr.tangent_values();
                for (std::size_t a = 0; a < tangents.size(); ++a)
                    for (std::size_t b = a; b < tangents.size(); ++b)
                        measured.push_back(
                            std::abs(null_fundamental(fr, tangents[a], tangents[b])));
            } else if (ev.quantity == "b_screen_diag") {
                for (int a = 0; a < fr.screen_count(); ++a) {
                    const std::vector<double> e = fr.values_of(fr.screen[a]);
                    measured.push_back(null_fundamental(fr, e, e));
                }
            } else if (ev.quantity == "cbar_xi") {
                const std::vector<double> xv = fr.xi_values();
                measured.push_back(extended_screen_fundamental(fr, xv, xv));
            } else if (ev.quantity == "kt_screen") {
                for (int a = 0; a < fr.screen_count(); ++a)
                    for (int b = a + 1; b < fr.screen_count(); ++b)
                        measured.push_back(transverse_sectional_frame(*ch, a, b));
            } else if (ev.quantity == "ricci_transverse_diag") {
                for (int a = 0; a < fr.screen_count(); ++a)
                    measured.push_back(transverse_ricci_frame(*ch, a));
            } else if (ev.quantity == "scalar_transverse") {
                measured.push_back(transverse_scalar(*ch));
            } else if (ev.quantity == "domega_screen") {
                for (int a = 0; a < fr.screen_count(); ++a)
                    for (int b = a + 1; b < fr.screen_count(); ++b)
                        measured.push_back(std::abs(
                            domega_ambient_pair(fr, fr.screen[a], fr.screen[b])));
            } else {  // flow_identity
                const Mat res = flow_residual(*ch, fr);
                double worst = 0.0;
                for (int a = 0; a < res.rows; ++a)
                    for (int b = 0; b < res.cols; ++b)
                        worst = std::max(worst, std::abs(res(a, b)));
                measured.push_back(worst);
            }

            const double s = scales[i].valid() ? scales[i].eval(p) : 1.0;
            for (double mv : measured) {
                out[i].max_residual =
                    std::max(out[i].max_residual, std::abs(mv * s - ev.value));
                ++out[i].measurements;
            }
        }
    }

    for (ExpectedOutcome& oc : out) oc.pass = oc.max_residual < oc.entry.tolerance;
    return out;
}

} // namespace riggeo
