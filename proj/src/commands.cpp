#include "prast/commands.hpp"

#include "prast/parser.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace prast {

using json = nlohmann::ordered_json;

std::string show(const Rational& r) { return r.pretty(); }

namespace {

std::string decimal(const Rational& r) {
    std::string p = r.pretty();
    auto open = p.find(" (");
    if (open == std::string::npos) return p;
    return p.substr(open + 2, p.size() - open - 3);
}

json diag_json(const Diagnostic& d) {
    return json{{"line", d.span.line}, {"col", d.span.col}, {"message", d.message}, {"rule", d.rule}};
}

struct Loaded {
    std::optional<Signature> sig;
    int code = ExitOk;
};

Loaded load(const std::string& path, const RunConfig& rc, std::ostream& err, json* diags) {
    Loaded l;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << path << ": cannot open file\n";
        l.code = ExitUsage;
        return l;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    ParseResult pr = parse_program(ss.str());
    if (!pr.ok()) {
        for (const auto& d : pr.diags) {
            if (diags) diags->push_back(diag_json(d));
            err << render(d, path) << "\n";
        }
        l.code = ExitTypeError;
        return l;
    }
    l.sig = rc.strip_work ? strip_work(*pr.sig) : *pr.sig;
    return l;
}

InferResult solve(const std::string& path, const Signature& sig, const RunConfig& rc, std::ostream& err, json* diags) {
    ReconstructOptions ro;
    ro.dump_lp = !rc.dump_lp_path.empty();
    InferResult ir = infer_potential(sig, rc.model, ro);
    if (ro.dump_lp) {
        std::ofstream lp(rc.dump_lp_path);
        lp << ir.rec.lp_text;
    }
    for (const auto& d : ir.rec.diags) {
        if (diags) diags->push_back(diag_json(d));
        err << render(d, path) << "\n";
    }
    return ir;
}

void emit(const json& j, std::ostream& out) { out << j.dump(2) << "\n"; }

json decls_json(const InferResult& ir) {
    json a = json::array();
    for (const auto& d : ir.report.decls)
        a.push_back({{"name", d.name},
                     {"potential", d.potential.str()},
                     {"potential_decimal", decimal(d.potential)},
                     {"least", d.least.str()},
                     {"inferred", d.inferred}});
    return a;
}

std::string pick_entry(const Signature& sig, const std::string& requested) {
    if (!requested.empty()) return requested;
    if (sig.find_proc("main")) return "main";
    for (const auto& d : sig.procs)
        if (d.used.empty()) return d.name;
    return "";
}

struct SimOutcome {
    RunResult run;
    LabelDist labels;
    std::string root;
    Rational q0;
    bool bound_ok = true;
    int code = ExitOk;
};

SimOutcome simulate(const Signature& solved, const std::string& entry, const RunConfig& rc, const Rational& q0,
                    std::ostream* trace) {
    SimOutcome s;
    Machine m(solved);
    Config c0 = m.initial(entry);
    s.root = c0.front()->chan;
    s.q0 = q0;
    RunOptions ro;
    ro.seed = rc.seed;
    ro.scheduler = rc.scheduler;
    ro.budget = rc.budget;
    ro.mass_floor = rc.mass_floor;
    ro.check_steps = rc.check_steps;
    ro.trace = trace;
    s.run = run(m, c0, q0, ro);
    for (const auto& w : s.run.work)
        if (w > q0) s.bound_ok = false;
    s.labels = first_label(s.run.final, s.root, rc.mass_floor);
    if (!s.run.violations.empty() || !s.bound_ok || !s.run.monotone) s.code = ExitInternal;
    return s;
}

json sim_json(const SimOutcome& s, const std::string& entry) {
    json labels = json::object();
    for (const auto& [l, p] : s.labels.labels) labels[l] = {{"p", p.str()}, {"decimal", decimal(p)}};
    return json{{"entry", entry},
                {"channel", s.root},
                {"status", run_status_name(s.run.status)},
                {"steps", s.run.steps},
                {"expected_work", s.run.work.back().str()},
                {"expected_work_decimal", decimal(s.run.work.back())},
                {"potential", s.q0.str()},
                {"potential_decimal", decimal(s.q0)},
                {"bound_holds", s.bound_ok},
                {"monotone", s.run.monotone},
                {"first_label", labels},
                {"pending_mass", s.labels.pending.str()},
                {"truncated_mass", (s.labels.dropped + s.run.unsettled).str()},
                {"unsettled_mass", s.run.unsettled.str()},
                {"violations", s.run.violations}};
}

void sim_text(const SimOutcome& s, const std::string& entry, std::ostream& out) {
    out << "entry " << entry << " on '" << s.root << "': " << run_status_name(s.run.status) << " after " << s.run.steps
        << " steps\n";
    out << "first label on '" << s.root << "':\n";
    for (const auto& [l, p] : s.labels.labels) out << "  " << l << ": " << show(p) << "\n";
    if (!s.labels.pending.is_zero()) out << "  (no label yet): " << show(s.labels.pending) << "\n";
    if (!s.labels.dropped.is_zero()) out << "  (below mass floor): " << show(s.labels.dropped) << "\n";
    out << "unsettled mass: " << show(s.run.unsettled) << "\n";
    out << "E[work] = " << show(s.run.work.back()) << (s.bound_ok ? " <= " : " > ") << "q = " << show(s.q0) << "\n";
    if (!s.run.monotone) out << "expected work decreased during the run\n";
    for (const auto& v : s.run.violations) out << "violation: " << v << "\n";
}

}  // namespace

int cmd_check(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    int code = ExitOk;
    json all = json::array();
    for (const auto& path : rc.paths) {
        json j{{"file", path}};
        json diags = json::array();
        Loaded l = load(path, rc, err, &diags);
        if (!l.sig) {
            code = std::max(code, l.code);
            j["ok"] = false;
            j["diagnostics"] = diags;
            all.push_back(j);
            continue;
        }
        InferResult ir = solve(path, *l.sig, rc, err, &diags);
        j["ok"] = ir.ok();
        j["diagnostics"] = diags;
        if (!ir.ok()) {
            code = std::max(code, ir.rec.audit_failed ? int(ExitInternal) : int(ExitTypeError));
            all.push_back(j);
            if (!rc.json) out << path << ": rejected\n";
            continue;
        }
        const Signature& s = *ir.rec.sig;
        json types = json::array();
        for (const auto& t : s.types) types.push_back({{"name", t.name}, {"type", print_type(t.type)}});
        j["types"] = types;
        j["decls"] = decls_json(ir);
        j["vars"] = ir.rec.stats.vars;
        j["constraints"] = ir.rec.stats.cons;
        all.push_back(j);
        if (rc.json) continue;
        if (s.procs.empty() && s.types.empty()) {
            out << path << ": ok, no declarations\n";
            continue;
        }
        out << path << ": ok (" << s.types.size() << " types, " << s.procs.size() << " processes, " << ir.rec.stats.vars
            << " variables, " << ir.rec.stats.cons << " constraints)\n";
        for (const auto& t : s.types) out << "  type " << t.name << " = " << print_type(t.type) << "\n";
        for (const auto& d : s.procs) out << "  " << print_decl(d) << "\n";
    }
    if (rc.json) emit(all, out);
    return code;
}

int cmd_infer(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    int code = ExitOk;
    json all = json::array();
    for (const auto& path : rc.paths) {
        json j{{"file", path}, {"model", cost_model_name(rc.model)}};
        json diags = json::array();
        Loaded l = load(path, rc, err, &diags);
        if (!l.sig) {
            code = std::max(code, l.code);
            j["ok"] = false;
            j["diagnostics"] = diags;
            all.push_back(j);
            continue;
        }
        InferResult ir = solve(path, *l.sig, rc, err, &diags);
        j["ok"] = ir.ok();
        j["diagnostics"] = diags;
        if (!ir.ok()) {
            code = std::max(code, ir.rec.audit_failed ? int(ExitInternal) : int(ExitTypeError));
            all.push_back(j);
            if (!rc.json) out << path << ": no bound\n";
            continue;
        }
        json ann = json::array();
        for (const auto& [sp, v] : ir.report.annotations)
            ann.push_back({{"line", sp.line}, {"col", sp.col}, {"value", v.str()}, {"decimal", decimal(v)}});
        j["decls"] = decls_json(ir);
        j["annotations"] = ann;
        j["objective"] = ir.report.objective.str();
        j["program"] = pretty_print(*ir.rec.sig);
        all.push_back(j);
        if (rc.json) continue;
        out << "% " << path << " (cost model " << cost_model_name(rc.model) << ")\n";
        out << pretty_print(*ir.rec.sig) << "\n";
        out << "% potentials\n";
        for (const auto& d : ir.report.decls)
            out << "%   " << d.name << " : " << show(d.potential) << (d.inferred ? "" : " (declared)") << ", least "
                << show(d.least) << "\n";
        for (const auto& [sp, v] : ir.report.annotations)
            out << "%   annotation at " << sp.line << ":" << sp.col << " : " << show(v) << "\n";
    }
    if (rc.json) emit(all, out);
    return code;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    if (rc.paths.size() != 1) {
        err << "simulate takes exactly one file\n";
        return ExitUsage;
    }
    const std::string& path = rc.paths.front();
    Loaded l = load(path, rc, err, nullptr);
    if (!l.sig) return l.code;
    InferResult ir = solve(path, *l.sig, rc, err, nullptr);
    if (!ir.ok()) return ir.rec.audit_failed ? ExitInternal : ExitTypeError;
    std::string entry = pick_entry(*ir.rec.sig, rc.entry);
    const ProcDef* f = entry.empty() ? nullptr : ir.rec.sig->find_proc(entry);
    if (!f) {
        err << path << ": no entry process" << (entry.empty() ? "" : " named '" + entry + "'") << "\n";
        return ExitUsage;
    }
    if (!f->used.empty()) {
        err << path << ": entry '" << entry << "' must have an empty context\n";
        return ExitUsage;
    }
    std::ofstream trace;
    if (!rc.trace_path.empty()) {
        trace.open(rc.trace_path);
        if (!trace) {
            err << rc.trace_path << ": cannot write trace\n";
            return ExitUsage;
        }
    }
    SimOutcome s = simulate(*ir.rec.sig, entry, rc, ir.rec.potentials.at(entry), trace.is_open() ? &trace : nullptr);
    if (rc.json) {
        json j = sim_json(s, entry);
        j["file"] = path;
        j["model"] = cost_model_name(rc.model);
        emit(j, out);
    } else {
        sim_text(s, entry, out);
    }
    return s.code;
}

int cmd_report(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    int code = ExitOk;
    json all = json::array();
    for (const auto& path : rc.paths) {
        json j{{"file", path}, {"model", cost_model_name(rc.model)}};
        Loaded l = load(path, rc, err, nullptr);
        if (!l.sig) {
            code = std::max(code, l.code);
            j["ok"] = false;
            all.push_back(j);
            if (!rc.json) out << path << ": parse errors\n";
            continue;
        }
        InferResult ir = solve(path, *l.sig, rc, err, nullptr);
        j["ok"] = ir.ok();
        if (!ir.ok()) {
            code = std::max(code, ir.rec.audit_failed ? int(ExitInternal) : int(ExitTypeError));
            all.push_back(j);
            if (!rc.json) out << path << ": rejected\n";
            continue;
        }
        j["decls"] = decls_json(ir);
        j["vars"] = ir.rec.stats.vars;
        j["constraints"] = ir.rec.stats.cons;
        json sims = json::array();
        if (!rc.json) {
            out << path << ": ok (" << ir.rec.stats.vars << " variables, " << ir.rec.stats.cons << " constraints)\n";
            for (const auto& d : ir.report.decls) out << "  " << d.name << " : " << show(d.potential) << "\n";
        }
        for (const auto& d : ir.rec.sig->procs) {
            if (!d.used.empty()) continue;
            SimOutcome s = simulate(*ir.rec.sig, d.name, rc, d.potential.value, nullptr);
            code = std::max(code, s.code);
            sims.push_back(sim_json(s, d.name));
            if (!rc.json) {
                out << "  simulate " << d.name << ": " << run_status_name(s.run.status) << " after " << s.run.steps
                    << " steps, E[work] = " << show(s.run.work.back()) << " <= " << show(s.q0) << ", labels";
                for (const auto& [lab, p] : s.labels.labels) out << " " << lab << "=" << p.str();
                out << ", unsettled " << s.run.unsettled.str() << ", violations " << s.run.violations.size() << "\n";
            }
        }
        j["simulations"] = sims;
        all.push_back(j);
    }
    if (rc.json) emit(all, out);
    return code;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"prast: probabilistic resource-aware session types"};
    app.require_subcommand(1);
    RunConfig rc;
    std::string model = "explicit", floor, format = "text";
    std::optional<std::uint64_t> seed;
    std::string entry_pos, sim_file, sched = "leftmost";
    bool no_check = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--cost-model", model, "none | flips | send | explicit")->capture_default_str();
        sub->add_option("--dump-lp", rc.dump_lp_path, "write the linear program to this file");
        sub->add_flag("--strip-work", rc.strip_work, "remove source work statements first");
        sub->add_option("--format", format, "text | json")->capture_default_str();
    };
    auto sim_opts = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "random scheduler seed (default: $PRAST_SEED)");
        sub->add_option("--scheduler", sched, "leftmost | heaviest, used when no seed is given")->capture_default_str();
        sub->add_option("--budget", rc.budget, "step budget")->capture_default_str();
        sub->add_option("--mass-floor", floor, "universes below this mass are not stepped (default 2^-64)");
        sub->add_option("--trace", rc.trace_path, "write one line per step to this file");
        sub->add_flag("--no-check-steps", no_check, "skip re-typing every configuration");
    };
    auto* check = app.add_subcommand("check", "type check and reconstruct annotations");
    check->add_option("files", rc.paths)->required();
    common(check);
    auto* infer = app.add_subcommand("infer", "infer potentials under a cost model");
    infer->add_option("files", rc.paths)->required();
    common(infer);
    auto* sim = app.add_subcommand("simulate", "run a closed process");
    sim->add_option("file", sim_file)->required();
    sim->add_option("entry_pos", entry_pos, "entry process (same as --entry)");
    sim->add_option("--entry", rc.entry, "entry process");
    common(sim);
    sim_opts(sim);
    auto* rep = app.add_subcommand("report", "check, infer and simulate every closed process");
    rep->add_option("files", rc.paths)->required();
    common(rep);
    sim_opts(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int c = app.exit(e, out, err);
        return c == 0 ? ExitOk : ExitUsage;
    }
    auto m = parse_cost_model(model);
    if (!m) {
        err << "unknown cost model '" << model << "'\n";
        return ExitUsage;
    }
    rc.model = *m;
    if (format != "text" && format != "json") {
        err << "unknown format '" << format << "'\n";
        return ExitUsage;
    }
    rc.json = format == "json";
    if (sched != "leftmost" && sched != "heaviest") {
        err << "unknown scheduler '" << sched << "'\n";
        return ExitUsage;
    }
    rc.scheduler = sched == "heaviest" ? Scheduler::Heaviest : Scheduler::Leftmost;
    if (rc.budget == 0) {
        err << "budget must be positive\n";
        return ExitUsage;
    }
    if (!floor.empty()) {
        auto f = Rational::try_parse(floor);
        if (!f || f->sign() <= 0 || *f >= Rational(1)) {
            err << "mass floor must be a rational in (0,1)\n";
            return ExitUsage;
        }
        rc.mass_floor = *f;
    }
    if (seed) {
        rc.seed = seed;
    } else if (const char* env = std::getenv("PRAST_SEED")) {
        try {
            rc.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "PRAST_SEED must be an unsigned integer\n";
            return ExitUsage;
        }
    }
    rc.check_steps = !no_check;
    if (rc.entry.empty()) rc.entry = entry_pos;
    if (!sim_file.empty()) rc.paths = {sim_file};
    try {
        if (check->parsed()) return cmd_check(rc, out, err);
        if (infer->parsed()) return cmd_infer(rc, out, err);
        if (sim->parsed()) return cmd_simulate(rc, out, err);
        return cmd_report(rc, out, err);
    } catch (const std::logic_error& e) {
        err << "internal error: " << e.what() << "\n";
        return ExitInternal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return ExitInternal;
    }
}

}  // namespace prast
