#include "varitherm/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "varitherm/csv.hpp"

namespace varitherm {

using nlohmann::json;

namespace {

void apply_integrator_overrides(IntegratorConfig& cfg, const json& j) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ParseError("integrator must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "method") {
            const std::string m = it.value().get<std::string>();
            if (m == "rk4")
                cfg.method = IntegratorConfig::Method::rk4;
            else if (m == "rk45")
                cfg.method = IntegratorConfig::Method::rk45;
            else
                throw ParseError("unknown integrator method: " + m);
        } else if (key == "dt")
            cfg.dt = it.value().get<double>();
        else if (key == "t_end")
            cfg.t_end = it.value().get<double>();
        else if (key == "t_start")
            cfg.t_start = it.value().get<double>();
        else if (key == "tol_rel")
            cfg.tol_rel = it.value().get<double>();
        else if (key == "tol_abs")
            cfg.tol_abs = it.value().get<double>();
        else if (key == "dt_min")
            cfg.dt_min = it.value().get<double>();
        else if (key == "dt_max")
            cfg.dt_max = it.value().get<double>();
        else if (key == "record_every")
            cfg.record_every = it.value().get<int>();
        else if (key == "max_steps")
            cfg.max_steps = it.value().get<long>();
        else
            throw ParseError("unknown integrator key: " + key);
    }
    cfg.validate();
}

}  // namespace

ModelRuntime Scenario::build() const {
    const ResolvedModel resolved = resolve_model(model);
    if (!resolved.entry) throw ParseError("unknown model: " + model);
    json user = params;
    for (auto it = resolved.implied_params.begin(); it != resolved.implied_params.end(); ++it)
        user[it.key()] = it.value();
    const json merged = merge_params(*resolved.entry, user);
    ModelRuntime rt = resolved.entry->build(merged, initial.is_null() ? json::object() : initial);
    apply_integrator_overrides(rt.config, integrator);

    if (!audits.is_null()) {
        if (audits.contains("energy")) rt.audit_energy = audits.at("energy").get<bool>();
        if (audits.contains("second_law"))
            rt.audit_second_law = audits.at("second_law").get<bool>();
        if (audits.contains("mass")) rt.audit_mass = audits.at("mass").get<bool>();
        if (audits.contains("energy_tol"))
            rt.thresholds.energy_rel = audits.at("energy_tol").get<double>();
        if (audits.contains("production_floor"))
            rt.thresholds.production_floor = audits.at("production_floor").get<double>();
        if (audits.contains("mass_tol"))
            rt.thresholds.mass_abs = audits.at("mass_tol").get<double>();
        if (audits.contains("equilibrium")) {
            for (auto it = audits.at("equilibrium").begin(); it != audits.at("equilibrium").end();
                 ++it)
                rt.equilibrium_thresholds[it.key()] = it.value().get<double>();
        }
        if (audits.contains("stop_at_equilibrium"))
            rt.stop_at_equilibrium = audits.at("stop_at_equilibrium").get<bool>();
    }
    return rt;
}

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario sc;
    if (!doc.contains("model")) throw ParseError("scenario is missing 'model'");
    sc.model = doc.at("model").get<std::string>();
    sc.params = doc.value("params", json(nullptr));
    sc.initial = doc.value("initial", json(nullptr));
    sc.integrator = doc.value("integrator", json(nullptr));
    sc.outputs = doc.value("outputs", json(nullptr));
    sc.audits = doc.value("audits", json(nullptr));
    sc.seed = doc.value("seed", 0ULL);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        static const char* known[] = {"model",   "params",  "initial", "integrator",
                                      "outputs", "audits",  "seed"};
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ParseError("unknown scenario key: " + it.key());
    }
    // Validate eagerly: building checks all model invariants. Structural
    // violations surface as InvariantViolation naming the failed invariant.
    try {
        (void)sc.build();
    } catch (const AsymmetricConductivity& e) {
        throw InvariantViolation(std::string("conductivity symmetry: ") + e.what());
    } catch (const NegativeConductivity& e) {
        throw InvariantViolation(std::string("conductivity sign: ") + e.what());
    } catch (const StoichiometryMassViolation& e) {
        throw InvariantViolation(std::string("Lavoisier: ") + e.what());
    } catch (const InvalidOnsager& e) {
        throw InvariantViolation(std::string("Onsager: ") + e.what());
    } catch (const DimensionMismatch& e) {
        throw InvariantViolation(std::string("dimensions: ") + e.what());
    }

    json echo = doc;
    echo["model"] = sc.model;
    const ResolvedModel resolved = resolve_model(sc.model);
    json user = sc.params;
    for (auto it = resolved.implied_params.begin(); it != resolved.implied_params.end(); ++it)
        user[it.key()] = it.value();
    echo["params"] = merge_params(*resolved.entry, user);
    sc.echo = echo;
    return sc;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    return scenario_from_json(doc);
}

namespace {

std::string output_name(const json& outputs, const char* key, const char* fallback) {
    if (!outputs.is_null() && outputs.contains(key))
        return outputs.at(key).get<std::string>();
    return fallback;
}

}  // namespace

int run_scenario(const Scenario& scenario, const RunOptions& options) {
    namespace fs = std::filesystem;
    try {
        ModelRuntime rt = scenario.build();
        fs::create_directories(options.out_dir);

        Trajectory traj;
        std::string run_error;
        if (rt.stop_at_equilibrium && !rt.equilibrium_thresholds.empty()) {
            auto thresholds = rt.equilibrium_thresholds;
            rt.hooks.stop = [thresholds](double, const Vec&, const DiagRecord& rec) {
                bool any = false;
                for (const auto& [key, limit] : thresholds) {
                    if (!rec.has(key)) return false;
                    any = true;
                    if (std::abs(rec.get(key)) > limit) return false;
                }
                return any;
            };
        }
        try {
            traj = simulate(rt.rhs, rt.y0, rt.config, rt.hooks);
        } catch (const IntegrationError& e) {
            run_error = e.what();
            if (e.partial) traj = *e.partial;  // last valid samples
        }

        const fs::path dir(options.out_dir);
        int snapshots_written = 0;
        if (rt.continuum) {
            const int every =
                scenario.outputs.is_null() ? 1 : scenario.outputs.value("snapshot_every", 1);
            std::size_t index = 0;
            for (std::size_t k = 0; k < traj.size(); ++k) {
                if (k % static_cast<std::size_t>(std::max(1, every)) != 0 &&
                    k + 1 != traj.size())
                    continue;
                std::ostringstream name;
                name << "fields_" << std::setw(6) << std::setfill('0') << index++ << ".csv";
                std::ofstream os(dir / name.str());
                rt.write_snapshot(os, traj.samples[k].t, traj.samples[k].y);
                ++snapshots_written;
            }
        }
        {
            std::ofstream os(dir / output_name(scenario.outputs, "trajectory",
                                               rt.continuum ? "series.csv" : "trajectory.csv"));
            std::string header;
            for (std::size_t i = 0; i < rt.csv_header.size(); ++i) {
                if (i) header += ',';
                header += rt.csv_header[i];
            }
            os << header << "\n";
            for (const Sample& s : traj.samples) os << csv::row(rt.csv_row(s.t, s.y));
        }

        AuditReport report;
        if (traj.size() >= 2)
            report = run_audits(traj, rt.thresholds, rt.audit_energy, rt.audit_second_law,
                                rt.audit_mass);
        else {
            report.passed = false;
            report.notes.push_back("trajectory too short for audits");
        }
        if (!rt.equilibrium_thresholds.empty()) {
            const EquilibriumReport eq = equilibrium_report(traj, rt.equilibrium_thresholds);
            if (eq.found) report.equilibrium_time = eq.t_star;
            report.equilibrium_gaps = eq.final_gaps;
        }
        if (rt.continuum) {
            double min_cfl = std::numeric_limits<double>::infinity();
            for (const Sample& s : traj.samples)
                if (s.diag.has("cfl_dt")) min_cfl = std::min(min_cfl, s.diag.get("cfl_dt"));
            if (rt.config.dt > min_cfl)
                report.notes.push_back("CFL advisory: dt exceeds 0.4 dx / max wave speed");
        }
        if (!run_error.empty()) {
            report.passed = false;
            report.notes.push_back("integration aborted: " + run_error);
        }
        {
            std::ofstream os(dir / output_name(scenario.outputs, "report", "audit.txt"));
            write_audit_report(os, report);
        }
        {
            std::ofstream os(dir / output_name(scenario.outputs, "manifest", "manifest.txt"));
            os << "tool = varitherm " << kVersion << "\n";
            os << "seed = " << (options.seed_override ? *options.seed_override : scenario.seed)
               << "\n";
            os << "samples = " << traj.size() << "\n";
            if (rt.continuum) os << "snapshots = " << snapshots_written << "\n";
            os << "scenario = " << scenario.echo.dump(2) << "\n";
        }

        if (!options.quiet) {
            std::cout << (report.passed ? "[ok] " : "[FAILED] ") << scenario.model
                      << ": energy residual " << report.max_energy_residual
                      << ", min production " << report.min_internal_production;
            if (report.equilibrium_time)
                std::cout << ", equilibrium at t = " << *report.equilibrium_time;
            std::cout << "\n";
        }
        if (!run_error.empty()) return kExitRuntimeError;
        return report.passed ? kExitOk : kExitAuditFailed;
    } catch (const ParseError& e) {
        if (!options.quiet) std::cerr << "parse error: " << e.what() << "\n";
        return kExitParseError;
    } catch (const InvariantViolation& e) {
        if (!options.quiet) std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitParseError;
    } catch (const Error& e) {
        if (!options.quiet) std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

std::string catalog_listing(const std::string& filter, bool machine) {
    std::ostringstream os;
    json doc = json::array();
    for (const CatalogEntry& entry : catalog()) {
        if (!filter.empty() && entry.name.find(filter) == std::string::npos) continue;
        if (machine) {
            json e;
            e["name"] = entry.name;
            e["summary"] = entry.summary;
            json params = json::object();
            for (const ParamSpec& spec : entry.params) params[spec.name] = spec.default_value;
            e["params"] = params;
            doc.push_back(e);
        } else {
            os << entry.name << "\n  " << entry.summary << "\n  parameters:";
            for (const ParamSpec& spec : entry.params) {
                os << " " << spec.name << "=" << spec.default_value.dump();
            }
            os << "\n";
        }
    }
    if (machine) return doc.dump(2) + "\n";
    return os.str();
}

AuditReport audit_csv(const std::string& path, const AuditThresholds& thresholds) {
    const csv::Table table = csv::read(path);
    const int ct = table.column("t");
    const int cE = table.column("E");
    const int cW = table.column("P_W_ext");
    const int cH = table.column("P_H_ext");
    const int cI = table.column("I_internal");
    const int cS = table.column("S_total");
    if (ct < 0 || cE < 0 || cW < 0 || cH < 0 || cI < 0 || cS < 0)
        throw ParseError("trajectory CSV is missing required columns");

    Trajectory traj;
    for (const auto& row : table.rows) {
        Sample s;
        s.t = row[static_cast<std::size_t>(ct)];
        s.diag.E = row[static_cast<std::size_t>(cE)];
        s.diag.P_W = row[static_cast<std::size_t>(cW)];
        s.diag.P_H = row[static_cast<std::size_t>(cH)];
        s.diag.I = row[static_cast<std::size_t>(cI)];
        s.diag.S_total = row[static_cast<std::size_t>(cS)];
        const int cm = table.column("mass");
        if (cm >= 0) s.diag.set("mass", row[static_cast<std::size_t>(cm)]);
        const int ci = table.column("i_min");
        if (ci >= 0) s.diag.set("i_min", row[static_cast<std::size_t>(ci)]);
        traj.samples.push_back(std::move(s));
    }
    const bool has_mass = table.column("mass") >= 0;
    return run_audits(traj, thresholds, true, true, has_mass);
}

}  // namespace varitherm
