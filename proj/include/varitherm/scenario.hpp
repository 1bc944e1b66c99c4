#pragma once

#include <optional>
#include <string>

#include "varitherm/models.hpp"

namespace varitherm {

inline constexpr const char* kVersion = "0.1.0";

/// A fully validated run description: model + parameters + initial state +
/// integrator + outputs + audits. Model invariants (symmetry, PSD, mass
/// conservation) are checked eagerly while building.
struct Scenario {
    std::string model;
    nlohmann::json params;     // merged over catalog defaults
    nlohmann::json initial;    // per-model initial-state keys
    nlohmann::json integrator; // optional overrides
    nlohmann::json outputs;    // file names / snapshot cadence
    nlohmann::json audits;     // enabled checks + thresholds
    std::uint64_t seed = 0;
    nlohmann::json echo;       // normalized scenario for the manifest

    ModelRuntime build() const;  // throws ParseError / InvariantViolation
};

Scenario scenario_from_json(const nlohmann::json& doc);
Scenario parse_scenario(const std::string& path);

struct RunOptions {
    std::string out_dir = ".";
    bool quiet = false;
    std::optional<std::uint64_t> seed_override;
};

/// Exit codes for run_scenario.
inline constexpr int kExitOk = 0;
inline constexpr int kExitAuditFailed = 1;
inline constexpr int kExitParseError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Run a scenario to completion: writes the trajectory CSV (or field
/// snapshots for continuum models), the audit report and a run manifest.
/// Returns nonzero iff an enabled audit fails or the run errors out.
int run_scenario(const Scenario& scenario, const RunOptions& options);

/// Text listing of the catalog, optionally filtered by substring.
std::string catalog_listing(const std::string& filter = "", bool machine = false);

/// Recompute the audits from a trajectory CSV written by run_scenario.
/// Returns the report; throws on malformed input.
AuditReport audit_csv(const std::string& path, const AuditThresholds& thresholds = {});

}  // namespace varitherm
