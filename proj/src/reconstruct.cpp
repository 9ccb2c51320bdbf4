#include "prast/reconstruct.hpp"
#include "prast/parser.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

namespace prast {

namespace {

struct Eqn {
    Poly diff;  // diff rel 0
    Rel rel;
};

bool closed_holds(const Poly& d, Rel rel) {
    int s = d.constant().sign();
    return rel == Rel::Eq ? s == 0 : (rel == Rel::Le ? s <= 0 : s >= 0);
}

LinConstraint to_lin(const Eqn& e, const Origin& o) {
    LinExpr l = e.diff.to_lin();
    return LinConstraint{l, e.rel, LinExpr(0), o};
}

LinExpr objective(const ConstraintSet& cs, const std::map<int, Rational>& fixed) {
    LinExpr obj;
    Rational eps(1, 65536);
    auto add = [&](int v, const Rational& w) {
        auto it = fixed.find(v);
        if (it != fixed.end())
            obj.constant += w * it->second;
        else
            obj.add_term(v, w);
    };
    for (const auto& [name, v] : cs.decl_potential) add(v, Rational(1));
    for (int v : cs.annotation_vars) add(v, eps);
    return obj;
}

}  // namespace

SystemSolution solve_system(const ConstraintSet& cs, const std::vector<std::size_t>& subset, bool dump) {
    SystemSolution res;
    const std::size_t nv = cs.vars.size();
    std::vector<Eqn> eq;
    std::vector<std::size_t> src;
    for (std::size_t i : subset) {
        const auto& c = cs.cons[i];
        eq.push_back({c.lhs - c.rhs, c.rel});
        src.push_back(i);
    }

    // singleton propagation
    std::map<int, Rational> fixed;
    std::vector<std::vector<std::size_t>> occ(nv);
    for (std::size_t k = 0; k < eq.size(); ++k)
        for (const auto& [key, c] : eq[k].diff.terms) {
            if (key.first >= 0) occ[key.first].push_back(k);
            if (key.second >= 0) occ[key.second].push_back(k);
        }
    std::vector<std::size_t> queue(eq.size());
    for (std::size_t k = 0; k < eq.size(); ++k) queue[k] = k;
    while (!queue.empty()) {
        std::size_t k = queue.back();
        queue.pop_back();
        const Poly& d = eq[k].diff;
        if (eq[k].rel != Rel::Eq || d.degree() != 1) continue;
        int var = -1;
        Rational a, c;
        bool single = true;
        for (const auto& [key, coeff] : d.terms) {
            if (key.second < 0) {
                c = coeff;
                continue;
            }
            if (var >= 0) {
                single = false;
                break;
            }
            var = key.second;
            a = coeff;
        }
        if (!single || var < 0) continue;
        Rational val = -c / a;
        if (val.sign() < 0 || (cs.vars[var].kind == VarKind::Prob && val > Rational(1))) {
            res.status = SolveStatus::Infeasible;
            return res;
        }
        fixed[var] = val;
        for (std::size_t j : occ[var]) {
            Poly nd = eq[j].diff.substitute(var, val);
            if (nd.terms == eq[j].diff.terms) continue;
            eq[j].diff = std::move(nd);
            if (eq[j].diff.degree() == 0) {
                if (!closed_holds(eq[j].diff, eq[j].rel)) {
                    res.status = SolveStatus::Infeasible;
                    return res;
                }
            } else {
                queue.push_back(j);
            }
        }
    }

    std::vector<std::size_t> open;
    bool linear = true;
    for (std::size_t k = 0; k < eq.size(); ++k) {
        if (eq[k].diff.degree() == 0) {
            if (!closed_holds(eq[k].diff, eq[k].rel)) {
                res.status = SolveStatus::Infeasible;
                return res;
            }
            continue;
        }
        open.push_back(k);
        for (auto [a, b] : eq[k].diff.bilinear_terms()) {
            linear = false;
            if (cs.vars[a].kind == VarKind::Prob && cs.vars[b].kind == VarKind::Prob) {
                res.status = SolveStatus::NonLinear;
                res.nonlinear_at = src[k];
                return res;
            }
        }
    }

    std::vector<Rational> values(nv, Rational(0));
    for (const auto& [v, x] : fixed) values[v] = x;

    auto run_lp = [&](const std::vector<std::size_t>& which, const LinExpr& obj, const char* title) -> LPResult {
        LPProblem lp;
        lp.vars = cs.vars;
        for (std::size_t k : which) lp.constraints.push_back(to_lin(eq[k], cs.cons[src[k]].origin));
        lp.objective = obj;
        if (dump) res.lp_text += std::string("\\ ") + title + "\n" + dump_lp(lp);
        return solve(lp);
    };

    if (linear) {
        LPResult r = run_lp(open, objective(cs, fixed), "joint probability and potential problem");
        if (r.status == LPStatus::Infeasible) {
            res.status = SolveStatus::Infeasible;
            return res;
        }
        if (r.status == LPStatus::Unbounded) {
            res.status = SolveStatus::Unbounded;
            return res;
        }
        for (std::size_t v = 0; v < nv; ++v)
            if (!fixed.count(static_cast<int>(v))) values[v] = r.values[v];
    } else {
        res.sequential = true;
        std::vector<std::size_t> probs, rest;
        for (std::size_t k : open) {
            bool only_prob = eq[k].diff.is_linear();
            for (const auto& [key, c] : eq[k].diff.terms)
                if (key.second >= 0 && cs.vars[key.second].kind != VarKind::Prob) only_prob = false;
            (only_prob ? probs : rest).push_back(k);
        }
        LPResult r1 = run_lp(probs, LinExpr(), "probability problem");
        if (r1.status != LPStatus::Optimal) {
            res.status = r1.status == LPStatus::Infeasible ? SolveStatus::Infeasible : SolveStatus::Unbounded;
            return res;
        }
        for (std::size_t v = 0; v < nv; ++v)
            if (cs.vars[v].kind == VarKind::Prob && !fixed.count(static_cast<int>(v))) {
                values[v] = r1.values[v];
                fixed[static_cast<int>(v)] = r1.values[v];
            }
        for (std::size_t k : rest) {
            Poly d;
            for (const auto& [key, c] : eq[k].diff.terms) {
                Poly t(c);
                for (int v : {key.first, key.second}) {
                    if (v < 0) continue;
                    auto it = fixed.find(v);
                    t = t * (it != fixed.end() ? Poly(it->second) : Poly::var(v));
                }
                d += t;
            }
            eq[k].diff = d;
        }
        std::vector<std::size_t> rest2;
        for (std::size_t k : rest) {
            if (eq[k].diff.degree() == 0) {
                if (!closed_holds(eq[k].diff, eq[k].rel)) {
                    res.status = SolveStatus::Infeasible;
                    return res;
                }
                continue;
            }
            rest2.push_back(k);
        }
        LPResult r2 = run_lp(rest2, objective(cs, fixed), "potential problem");
        if (r2.status != LPStatus::Optimal) {
            res.status = r2.status == LPStatus::Infeasible ? SolveStatus::Infeasible : SolveStatus::Unbounded;
            return res;
        }
        for (std::size_t v = 0; v < nv; ++v)
            if (!fixed.count(static_cast<int>(v))) values[v] = r2.values[v];
    }
    res.status = SolveStatus::Feasible;
    res.values = std::move(values);
    res.objective = objective(cs, {}).eval(res.values);
    return res;
}

// ---------------------------------------------------------------- substitution

namespace {

struct Subst {
    const std::vector<Rational>& v;

    Prob prob(const Prob& p) const { return p.kind == ScalarKind::Var ? Prob::constant(v.at(p.var)) : p; }
    Pot pot(const Pot& p) const { return p.kind == ScalarKind::Var ? Pot::constant(v.at(p.var)) : p; }

    TypePtr type(const TypePtr& t) const {
        switch (t->kind) {
            case TypeKind::One:
            case TypeKind::Name: return t;
            case TypeKind::Tensor:
            case TypeKind::Lolli: return make_binary(t->kind, type(t->left), type(t->right), t->span);
            case TypeKind::PayPot:
            case TypeKind::GetPot: return make_pot(t->kind, pot(t->pot), type(t->left), t->span);
            default: break;
        }
        std::vector<Branch> bs;
        for (const auto& b : t->branches) bs.push_back({b.label, prob(b.prob), type(b.cont)});
        return make_choice(t->kind, bs, t->span);
    }

    ProcPtr proc(const ProcPtr& p) const {
        if (!p) return p;
        auto n = std::make_shared<ProcExpr>(*p);
        n->pot = pot(p->pot);
        n->prob = prob(p->prob);
        for (auto& a : n->alts) a.body = proc(a.body);
        n->cont = proc(p->cont);
        return n;
    }
};

void collect_annotations(const TypePtr& t, const std::set<int>& vars, const std::vector<Rational>& values,
                         std::vector<std::pair<Span, Rational>>& out) {
    if (!t) return;
    if ((t->kind == TypeKind::PayPot || t->kind == TypeKind::GetPot) && t->pot.kind == ScalarKind::Var &&
        vars.count(t->pot.var))
        out.emplace_back(t->span, values[t->pot.var]);
    collect_annotations(t->left, vars, values, out);
    collect_annotations(t->right, vars, values, out);
    for (const auto& b : t->branches) collect_annotations(b.cont, vars, values, out);
}

void collect_annotations(const ProcPtr& p, const std::set<int>& vars, const std::vector<Rational>& values,
                         std::vector<std::pair<Span, Rational>>& out) {
    if (!p) return;
    if ((p->kind == ProcKind::Pay || p->kind == ProcKind::Get) && p->pot.kind == ScalarKind::Var && vars.count(p->pot.var))
        out.emplace_back(p->span, values[p->pot.var]);
    for (const auto& a : p->alts) collect_annotations(a.body, vars, values, out);
    collect_annotations(p->cont, vars, values, out);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Deletion filter: smallest set of declarations whose constraints are jointly infeasible,
// then an irreducible subset of their constraints.
std::vector<Diagnostic> explain_infeasible(const ConstraintSet& cs, const Signature& sig) {
    std::vector<std::string> decls;
    for (const auto& d : sig.procs) decls.push_back(d.name);
    auto subset_for = [&](const std::vector<std::string>& keep) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < cs.cons.size(); ++i) {
            const auto& owner = cs.cons[i].origin.decl;
            if (owner.empty() || std::find(keep.begin(), keep.end(), owner) != keep.end()) s.push_back(i);
        }
        return s;
    };
    auto infeasible = [&](const std::vector<std::size_t>& s) {
        auto r = solve_system(cs, s);
        return r.status == SolveStatus::Infeasible;
    };
    std::vector<std::string> keep = decls;
    for (const auto& d : decls) {
        std::vector<std::string> trial;
        for (const auto& k : keep)
            if (k != d) trial.push_back(k);
        if (infeasible(subset_for(trial))) keep = trial;
    }
    std::vector<std::size_t> core = subset_for(keep);
    for (std::size_t i = 0; i < core.size();) {
        std::vector<std::size_t> trial = core;
        trial.erase(trial.begin() + static_cast<long>(i));
        if (infeasible(trial))
            core = std::move(trial);
        else
            ++i;
    }
    std::vector<Diagnostic> out;
    std::string names;
    for (const auto& k : keep) names += (names.empty() ? "" : ", ") + k;
    Span s;
    if (!keep.empty())
        if (const ProcDef* d = sig.find_proc(keep.front())) s = d->decl_span;
    out.push_back({s, "no probability/potential assignment exists; conflicting declarations: " +
                          (names.empty() ? std::string("(type definitions)") : names),
                   "solve"});
    for (std::size_t i : core) {
        const auto& c = cs.cons[i];
        std::string msg = "involved constraint: " + poly_str(c.lhs, cs.vars) + " " + rel_str(c.rel) + " " +
                          poly_str(c.rhs, cs.vars);
        if (!c.origin.note.empty()) msg += " (" + c.origin.note + ")";
        out.push_back({c.origin.span, msg, c.origin.rule});
    }
    return out;
}

}  // namespace

Signature substitute(const Signature& sig, const std::vector<Rational>& values) {
    Subst s{values};
    Signature out;
    for (const auto& t : sig.types) out.types.push_back({t.name, s.type(t.type), t.span});
    for (const auto& d : sig.procs) {
        ProcDef nd = d;
        for (auto& u : nd.used) u.type = s.type(u.type);
        nd.offered.type = s.type(nd.offered.type);
        nd.potential = s.pot(d.potential);
        nd.body = s.proc(d.body);
        out.procs.push_back(std::move(nd));
    }
    return out;
}

ReconstructResult reconstruct(const Signature& sig, const ReconstructOptions& opts) {
    ReconstructResult res;
    auto t0 = std::chrono::steady_clock::now();
    ConstraintSet cs;
    Signature vsig;
    try {
        vsig = varify(sig, cs);
    } catch (const DiagnosticError& e) {
        res.diags.push_back(e.diag);
        return res;
    }
    Coercions co;
    for (const auto& d : vsig.procs) {
        try {
            check_decl_constraints(vsig, d, cs, co);
        } catch (const DiagnosticError& e) {
            res.diags.push_back(e.diag);
        } catch (const TypeError& e) {
            res.diags.push_back({e.span, e.what(), "unfold"});
        }
    }
    res.stats.check_ms = ms_since(t0);
    res.stats.vars = cs.vars.size();
    res.stats.cons = cs.cons.size();
    if (!res.diags.empty()) return res;

    auto t1 = std::chrono::steady_clock::now();
    std::vector<std::size_t> all(cs.cons.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    SystemSolution sol = solve_system(cs, all, opts.dump_lp);
    res.stats.solve_ms = ms_since(t1);
    res.lp_text = sol.lp_text;
    if (sol.status == SolveStatus::NonLinear) {
        const auto& c = cs.cons[sol.nonlinear_at];
        res.diags.push_back({c.origin.span, "requires non-linear solving; provide concrete annotations", c.origin.rule});
        return res;
    }
    if (sol.status == SolveStatus::Unbounded) {
        res.diags.push_back({Span{}, "internal error: unbounded linear program", "solve"});
        return res;
    }
    if (sol.status == SolveStatus::Infeasible) {
        res.diags = explain_infeasible(cs, vsig);
        return res;
    }

    Signature solved = substitute(vsig, sol.values);
    for (const auto& d : vsig.procs) {
        for (const auto& u : d.used) collect_annotations(u.type, cs.annotation_vars, sol.values, res.annotations);
        collect_annotations(d.offered.type, cs.annotation_vars, sol.values, res.annotations);
        collect_annotations(d.body, cs.annotation_vars, sol.values, res.annotations);
    }
    for (const auto& t : vsig.types) collect_annotations(t.type, cs.annotation_vars, sol.values, res.annotations);
    AuditResult audit = audit_signature(solved);
    if (!audit.ok()) {
        res.audit_failed = true;
        for (auto d : audit.diags) {
            d.message = "self-audit rejected the solved program: " + d.message;
            res.diags.push_back(d);
        }
        return res;
    }
    for (const auto& d : solved.procs) res.potentials[d.name] = d.potential.value;
    for (const auto& a : audit.decls) res.min_potentials[a.name] = a.min_potential;
    res.objective = sol.objective;
    res.sig = std::move(solved);
    return res;
}

}  // namespace prast
