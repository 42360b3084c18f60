#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "riggeo/checks.hpp"

using namespace riggeo;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

bool mentions(const std::string& message, const std::string& needle) {
    return message.find(needle) != std::string::npos;
}

const CheckRecord& record(const CheckReport& rep, const std::string& id) {
    for (const CheckRecord& c : rep.checks)
        if (c.id == id) return c;
    FAIL("no check record with id ", id);
    static CheckRecord none;
    return none;
}

int count_status(const CheckReport& rep, CheckStatus s) {
    return static_cast<int>(std::count_if(rep.checks.begin(), rep.checks.end(),
                                          [&](const CheckRecord& c) { return c.status == s; }));
}

} // namespace

TEST_CASE("run_checks on the flat hyperplane passes every applicable check") {
    CheckOptions opt;
    opt.samples = 25;
    const CheckReport rep = run_checks(load_scenario("minkowski_hyperplane"), opt);

    CHECK(rep.scenario == "minkowski_hyperplane");
    CHECK(rep.engine_version == kEngineVersion);
    CHECK(rep.samples == 25);
    CHECK(rep.suites.size() == 7);
    CHECK(std::is_sorted(rep.suites.begin(), rep.suites.end()));
    CHECK(std::is_sorted(rep.checks.begin(), rep.checks.end(),
                         [](const CheckRecord& a, const CheckRecord& b) { return a.id < b.id; }));
    CHECK(rep.all_passed());

    // every hypothesis holds here, so nothing but the compactness-gated
    // periodic search is skipped
    CHECK(count_status(rep, CheckStatus::fail) == 0);
    CHECK(count_status(rep, CheckStatus::skipped) == 1);
    const CheckRecord& periodic = record(rep, "periodic.closure");
    CHECK(periodic.status == CheckStatus::skipped);
    CHECK(mentions(periodic.reason, "not periodic"));

    const CheckRecord& xi_null = record(rep, "frame.xi_null");
    CHECK(xi_null.status == CheckStatus::pass);
    CHECK(xi_null.samples == 25);
    CHECK(xi_null.max_residual < 1e-12);

    // a flat ambient chart keeps every curvature route at zero
    CHECK(record(rep, "curvat.sectional_two_route").status == CheckStatus::pass);
    CHECK(record(rep, "curvat.kt_constant").status == CheckStatus::pass);
    CHECK(record(rep, "flow.xi_killing").status == CheckStatus::pass);
    CHECK(record(rep, "geodesic.leaf_correspondence").status == CheckStatus::pass);
    CHECK(record(rep, "geodesic.leaf_correspondence").max_residual < 1e-8);
    CHECK(record(rep, "geodesic.energy_conservation").status == CheckStatus::pass);
}

TEST_CASE("hypothesis-gated checks are skipped, not failed, on the light cone") {
    CheckOptions opt;
    opt.samples = 15;
    const CheckReport rep = run_checks(load_scenario("minkowski_cone"), opt);

    // the cone is nowhere totally geodesic; B = 1/r on screen directions
    for (const char* id : {"curvat.sectional_two_route", "curvat.ricci_two_route",
                           "curvat.kt_constant", "flow.xi_killing", "flow.xi_parallel",
                           "transverse.connection_coincidence", "geodesic.leaf_correspondence"}) {
        const CheckRecord& c = record(rep, id);
        CHECK(c.status == CheckStatus::skipped);
        CHECK(mentions(c.reason, "not totally geodesic (max |B| = "));
    }

    // the structural flow identity holds with both sides nonzero
    const CheckRecord& flow = record(rep, "flow.lie_vs_b");
    CHECK(flow.status == CheckStatus::pass);
    CHECK(record(rep, "frame.b_symmetric").status == CheckStatus::pass);
    CHECK(record(rep, "frame.b_two_route").status == CheckStatus::pass);
    CHECK(record(rep, "frame.screen_fundamental_split").status == CheckStatus::pass);
    CHECK(rep.all_passed());
}

TEST_CASE("the twisted rigging trips the closedness and integrability gates only") {
    CheckOptions opt;
    opt.samples = 15;
    const CheckReport rep = run_checks(load_scenario("ppwave_wavefront_twisted"), opt);

    const CheckRecord& killing = record(rep, "flow.xi_killing");
    CHECK(killing.status == CheckStatus::skipped);
    CHECK(mentions(killing.reason, "not closed"));
    CHECK(record(rep, "flow.xi_parallel").status == CheckStatus::skipped);
    CHECK(record(rep, "curvat.ricci_two_route").status == CheckStatus::skipped);

    const CheckRecord& leaf = record(rep, "geodesic.leaf_correspondence");
    CHECK(leaf.status == CheckStatus::skipped);
    CHECK(mentions(leaf.reason, "not integrable"));

    // totally geodesic still, so the geodesic-gated checks run and pass
    CHECK(record(rep, "transverse.connection_coincidence").status == CheckStatus::pass);
    CHECK(record(rep, "curvat.sectional_two_route").status == CheckStatus::pass);
    CHECK(record(rep, "flow.lie_vs_b").status == CheckStatus::pass);
    CHECK(rep.all_passed());
}

TEST_CASE("a chart without hypersurface runs only the geodesic and periodic suites") {
    CheckOptions opt;
    opt.samples = 10;
    const CheckReport rep = run_checks(load_scenario("flat_torus"), opt);

    for (const CheckRecord& c : rep.checks) {
        if (c.id == "geodesic.energy_conservation" || c.id == "periodic.closure") continue;
        CHECK(c.status == CheckStatus::skipped);
        CHECK(c.reason == "scenario has no hypersurface");
    }

    const CheckRecord& energy = record(rep, "geodesic.energy_conservation");
    CHECK(energy.status == CheckStatus::pass);
    CHECK(energy.samples == 8);

    const CheckRecord& closure = record(rep, "periodic.closure");
    CHECK(closure.status == CheckStatus::pass);
    CHECK(closure.samples == 9);  // three axes plus six two-axis diagonals
    CHECK(closure.max_residual < 1e-8);
    CHECK(rep.all_passed());
}

TEST_CASE("reports are byte-stable for fixed scenario, seed and sample count") {
    CheckOptions opt;
    opt.samples = 12;
    opt.seed = 7;
    const Scenario sc = load_scenario("desitter_horizon");
    const CheckReport a = run_checks(sc, opt);
    const CheckReport b = run_checks(sc, opt);

    const std::string ja = report_json(a);
    CHECK(ja == report_json(b));
    CHECK(!mentions(ja, "wall"));
    CHECK(mentions(ja, "\"seed\": 7"));
    CHECK(mentions(ja, "\"status\": \"pass\""));

    const std::string text = report_text(a);
    CHECK(mentions(text, "wall"));
    CHECK(mentions(text, "desitter_horizon"));

    // the constant-curvature record is live on this chart
    CHECK(record(a, "curvat.kt_constant").status == CheckStatus::pass);
    CHECK(record(a, "curvat.ricci_two_route").status == CheckStatus::pass);
    CHECK(a.all_passed());
}

TEST_CASE("suite selection and option validation") {
    const Scenario sc = load_scenario("minkowski_hyperplane");

    CheckOptions frame_only;
    frame_only.samples = 5;
    frame_only.suites = {"frame"};
    const CheckReport rep = run_checks(sc, frame_only);
    CHECK(rep.suites == std::vector<std::string>{"frame"});
    CHECK(!rep.checks.empty());
    for (const CheckRecord& c : rep.checks) CHECK(c.id.rfind("frame.", 0) == 0);

    CheckOptions bad_suite;
    bad_suite.suites = {"curvature"};
    CHECK(mentions(error_of([&] { run_checks(sc, bad_suite); }), "unknown suite 'curvature'"));
    CHECK(mentions(error_of([&] { run_checks(sc, bad_suite); }), "transverse"));

    CheckOptions bad_id;
    bad_id.tolerances["frame.xi_nul"] = 1e-6;
    CHECK(mentions(error_of([&] { run_checks(sc, bad_id); }), "unknown check id 'frame.xi_nul'"));

    CheckOptions bad_samples;
    bad_samples.samples = 0;
    CHECK(mentions(error_of([&] { run_checks(sc, bad_samples); }), "samples must be positive"));

    // an override below the achievable residual turns the check into a failure
    // (on a curved chart, where the integrator drift is genuinely nonzero)
    CheckOptions strict;
    strict.samples = 5;
    strict.suites = {"geodesic"};
    strict.tolerances["geodesic.energy_conservation"] = 1e-30;
    const CheckReport failing = run_checks(load_scenario("desitter_horizon"), strict);
    CHECK(record(failing, "geodesic.energy_conservation").status == CheckStatus::fail);
    CHECK(record(failing, "geodesic.energy_conservation").tolerance == 1e-30);
    CHECK(!failing.all_passed());
}

TEST_CASE("periodic hunt over the torus grid") {
    const Scenario sc = load_scenario("flat_torus");
    HuntOptions opt;

    const HuntReport rep = run_hunt(sc, opt);
    CHECK(rep.scenario == "flat_torus");
    CHECK(rep.per_axis == 3);
    CHECK(rep.orbits.size() >= 3);
    CHECK(rep.failed.empty());

    bool has_null = false, has_spacelike = false;
    for (const auto& orbit : rep.orbits) {
        CHECK(orbit.closure_error < 1e-8);
        has_null = has_null || orbit.character == CausalCharacter::null;
        has_spacelike = has_spacelike || orbit.character == CausalCharacter::spacelike;
    }
    CHECK(has_null);
    CHECK(has_spacelike);

    // sorted by closure error, then byte-identical on rerun
    for (std::size_t i = 1; i < rep.orbits.size(); ++i)
        CHECK(rep.orbits[i - 1].closure_error <= rep.orbits[i].closure_error);
    CHECK(hunt_json(rep) == hunt_json(run_hunt(sc, opt)));
    CHECK(mentions(hunt_text(rep), "distinct orbits"));

    HuntOptions empty;
    empty.per_axis = 0;
    const HuntReport none = run_hunt(sc, empty);
    CHECK(none.orbits.empty());
    CHECK(none.failed.empty());

    CHECK(mentions(error_of([&] { return run_hunt(load_scenario("minkowski_hyperplane"), opt); }),
                   "no periodic coordinates"));
}
