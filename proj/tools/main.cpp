#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varitherm/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"varitherm: nonequilibrium-thermodynamics simulations with first/second-law "
                 "audits"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    if (const char* env = std::getenv("VARITHERM_OUT_DIR")) out_dir = env;
    bool quiet = false;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_flag("--quiet", quiet, "suppress progress output");
    app.add_option("--out-dir", out_dir, "output directory (default: $VARITHERM_OUT_DIR or .)");
    app.add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) {
        seed_set = true;
    });

    auto* run = app.add_subcommand("run", "run a scenario file");
    std::string scenario_path;
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();

    auto* cat = app.add_subcommand("catalog", "list the built-in models");
    std::string filter;
    bool machine = false;
    cat->add_option("filter", filter, "substring filter");
    cat->add_flag("--machine", machine, "machine-readable JSON listing");

    auto* audit = app.add_subcommand("audit", "re-audit a trajectory CSV");
    std::string csv_path, report_path;
    audit->add_option("trajectory", csv_path, "trajectory CSV file")->required();
    audit->add_option("report", report_path, "optional report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            varitherm::Scenario sc = varitherm::parse_scenario(scenario_path);
            varitherm::RunOptions options;
            options.out_dir = out_dir;
            options.quiet = quiet;
            if (seed_set) options.seed_override = seed;
            return varitherm::run_scenario(sc, options);
        }
        if (cat->parsed()) {
            std::cout << varitherm::catalog_listing(filter, machine);
            return 0;
        }
        if (audit->parsed()) {
            const varitherm::AuditReport report = varitherm::audit_csv(csv_path);
            if (!report_path.empty()) {
                std::ofstream os(report_path);
                varitherm::write_audit_report(os, report);
            }
            varitherm::write_audit_report(std::cout, report);
            return report.passed ? 0 : 1;
        }
    } catch (const varitherm::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return varitherm::kExitParseError;
    } catch (const varitherm::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return varitherm::kExitParseError;
    } catch (const varitherm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return varitherm::kExitRuntimeError;
    }
    return 0;
}
