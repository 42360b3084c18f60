// Command-line front end: scenario validation, check-suite runs with JSON or
// text reports, and the periodic-geodesic grid search.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riggeo/checks.hpp"
#include "riggeo/jet_kernels.hpp"

namespace {

riggeo::Scenario resolve_scenario(const std::string& ref) {
    const std::vector<std::string> names = riggeo::list_scenarios();
    if (std::find(names.begin(), names.end(), ref) == names.end() &&
        std::filesystem::exists(ref))
        return riggeo::load_scenario_file(ref);
    return riggeo::load_scenario(ref);  // unknown names throw with the catalog list
}

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& entries) {
    std::map<std::string, double> out;
    for (const std::string& entry : entries) {
        const std::size_t eq = entry.find('=');
        std::size_t tail = 0;
        double value = 0.0;
        if (eq != std::string::npos && eq > 0) {
            try {
                value = std::stod(entry.substr(eq + 1), &tail);
            } catch (const std::exception&) {
                tail = 0;
            }
        }
        if (eq == std::string::npos || eq == 0 || tail != entry.size() - eq - 1)
            throw riggeo::ScenarioError("--tol expects <check-id>=<value>, got '" + entry +
                                        "'");
        out[entry.substr(0, eq)] = value;
    }
    return out;
}

bool write_report(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.flush();
    if (!out) {
        std::fprintf(stderr, "error: cannot write report to '%s'\n", path.c_str());
        return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rigged-geometry engine for null hypersurfaces"};
    app.require_subcommand(1);

    std::string isa;
    app.add_option("--isa", isa, "force the jet-kernel instruction set")
        ->check(CLI::IsMember({"scalar", "avx2"}));

    CLI::App* cmd_list = app.add_subcommand("list", "list the built-in scenarios");

    std::string scenario;
    CLI::App* cmd_validate =
        app.add_subcommand("validate", "parse and validate a scenario (name or file)");
    cmd_validate->add_option("scenario", scenario, "built-in name or file path")->required();

    CLI::App* cmd_run = app.add_subcommand("run", "run check suites and emit a report");
    cmd_run->add_option("scenario", scenario, "built-in name or file path")->required();
    std::vector<std::string> suites;
    cmd_run->add_option("--suites", suites, "suites to run (default: all)")
        ->delimiter(',')
        ->check(CLI::IsMember(std::vector<std::string>(riggeo::check_suites().begin(),
                                                       riggeo::check_suites().end())));
    riggeo::CheckOptions check_opt;
    cmd_run->add_option("--samples", check_opt.samples, "sample points per check");
    cmd_run->add_option("--seed", check_opt.seed, "sampling seed");
    std::vector<std::string> tol_entries;
    cmd_run->add_option("--tol", tol_entries, "tolerance override <check-id>=<value>");
    std::string report_path;
    cmd_run->add_option("--report", report_path, "also write the JSON report to this path");
    std::string format = "text";
    cmd_run->add_option("--format", format, "stdout format")
        ->check(CLI::IsMember({"json", "text"}));

    CLI::App* cmd_hunt =
        app.add_subcommand("hunt", "grid-search for periodic geodesics on a compact chart");
    cmd_hunt->add_option("scenario", scenario, "built-in name or file path")->required();
    riggeo::HuntOptions hunt_opt;
    cmd_hunt->add_option("--grid", hunt_opt.per_axis, "velocity grid points per axis");
    cmd_hunt->add_option("--speed", hunt_opt.speed, "velocity grid half-width");
    cmd_hunt->add_option("--period", hunt_opt.period_guess, "initial period guess");
    cmd_hunt->add_option("--seed", hunt_opt.seed, "recorded seed");
    cmd_hunt->add_option("--report", report_path, "also write the JSON table to this path");
    cmd_hunt->add_option("--format", format, "stdout format")
        ->check(CLI::IsMember({"json", "text"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (!isa.empty())
            riggeo::kernels::force(isa == "avx2" ? riggeo::kernels::Isa::avx2
                                                 : riggeo::kernels::Isa::scalar);

        if (cmd_list->parsed()) {
            for (const std::string& name : riggeo::list_scenarios())
                std::printf("%s\n", name.c_str());
            return 0;
        }

        if (cmd_validate->parsed()) {
            const riggeo::Scenario sc = resolve_scenario(scenario);
            std::printf("ok: %s (dimension %d, %s, %zu expected-value rows)\n",
                        sc.name.c_str(), sc.spacetime->dim(),
                        sc.hypersurface ? "with hypersurface" : "no hypersurface",
                        sc.expected.size());
            return 0;
        }

        if (cmd_run->parsed()) {
            const riggeo::Scenario sc = resolve_scenario(scenario);
            check_opt.suites = suites;
            check_opt.tolerances = parse_tolerances(tol_entries);
            const riggeo::CheckReport rep = riggeo::run_checks(sc, check_opt);
            const std::string json = riggeo::report_json(rep);
            std::fputs((format == "json" ? json : riggeo::report_text(rep)).c_str(), stdout);
            if (!report_path.empty() && !write_report(report_path, json)) return 2;
            return rep.all_passed() ? 0 : 1;
        }

        if (cmd_hunt->parsed()) {
            const riggeo::Scenario sc = resolve_scenario(scenario);
            const riggeo::HuntReport rep = riggeo::run_hunt(sc, hunt_opt);
            const std::string json = riggeo::hunt_json(rep);
            std::fputs((format == "json" ? json : riggeo::hunt_text(rep)).c_str(), stdout);
            if (!report_path.empty() && !write_report(report_path, json)) return 2;
            return 0;
        }
    } catch (const riggeo::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
