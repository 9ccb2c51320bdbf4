#include "prast/check.hpp"
#include "prast/parser.hpp"

#include <algorithm>
#include <functional>

namespace prast {

namespace {

int find_chan(const Context& ctx, const std::string& x) {
    for (std::size_t i = 0; i < ctx.size(); ++i)
        if (ctx[i].first == x) return static_cast<int>(i);
    return -1;
}

std::string ctx_names(const Context& ctx) {
    std::string s;
    for (const auto& [n, t] : ctx) s += (s.empty() ? "'" : ", '") + n + "'";
    return s;
}

TypePtr split_one(const TypePtr& h, const std::vector<Poly>& weights, ConstraintSet& cs, const Origin& origin,
                  std::vector<TypePtr>& out) {
    const std::size_t n = weights.size();
    std::vector<std::vector<int>> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        Poly sum;
        for (const auto& b : h->branches) {
            int v = cs.new_var(VarKind::Prob, "");
            cs.vars[v].name = "p" + std::to_string(v) + "_" + b.label;
            q[i].push_back(v);
            sum += Poly::var(v);
        }
        cs.add(sum, Rel::Eq, Poly(1), origin, "branch distribution does not sum to 1");
        std::vector<Prob> probs;
        for (int v : q[i]) probs.push_back(Prob::variable(v));
        out.push_back(with_probs(h, probs));
    }
    for (std::size_t l = 0; l < h->branches.size(); ++l) {
        Poly mix;
        for (std::size_t i = 0; i < n; ++i) mix += weights[i] * Poly::var(q[i][l]);
        Origin o = origin;
        o.note = "weighted sum for label '" + h->branches[l].label + "'";
        cs.add(prob_poly(h->branches[l].prob), Rel::Eq, mix, o, "weighted sum mismatch");
    }
    return h;
}

}  // namespace

std::vector<BranchTyping> split_context_weighted(const Context& delta, const TypePtr& offered,
                                                 const std::vector<Poly>& weights, const Signature& sig,
                                                 ConstraintSet& cs, const Origin& origin) {
    const std::size_t n = weights.size();
    std::vector<BranchTyping> res(n);
    for (const auto& [name, t] : delta) {
        TypePtr h = head(t, sig);
        if (h->kind == TypeKind::PEChoice) {
            std::vector<TypePtr> parts;
            split_one(h, weights, cs, origin, parts);
            for (std::size_t i = 0; i < n; ++i) res[i].ctx.emplace_back(name, parts[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) res[i].ctx.emplace_back(name, t);
        }
    }
    if (offered) {
        TypePtr h = head(offered, sig);
        if (h->kind == TypeKind::PIChoice) {
            std::vector<TypePtr> parts;
            split_one(h, weights, cs, origin, parts);
            for (std::size_t i = 0; i < n; ++i) res[i].offered = parts[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) res[i].offered = offered;
        }
    }
    return res;
}

namespace {

struct Checker {
    const Signature& sig;
    const ProcDef& decl;
    ConstraintSet& cs;
    Coercions& co;

    Origin org(const ProcExpr& p, const std::string& rule, std::string note = "") const {
        return Origin{p.span, rule, decl.name, std::move(note)};
    }

    [[noreturn]] void err(const ProcExpr& p, const std::string& rule, const std::string& msg) const {
        throw DiagnosticError(Diagnostic{p.span, msg, rule});
    }

    int new_pot() {
        int v = cs.new_var(VarKind::Pot, "");
        cs.vars[v].name = "q" + std::to_string(v);
        return v;
    }

    TypePtr hd(const TypePtr& t, const ProcExpr& p) {
        try {
            return head(t, sig);
        } catch (const TypeError& e) {
            err(p, "unfold", e.what());
        }
    }

    void fresh_binder(const ProcExpr& p, const Context& ctx, const std::string& y, const char* rule) {
        if (y == decl.offered.name || find_chan(ctx, y) >= 0)
            err(p, rule, "channel '" + y + "' is already in use");
    }

    int need(const ProcExpr& p, const Context& ctx, const std::string& x, const char* rule) {
        int i = find_chan(ctx, x);
        if (i < 0) err(p, rule, "unknown channel '" + x + "'");
        return i;
    }

    const Branch& branch(const ProcExpr& p, const TypePtr& h, const std::string& label, const char* rule) {
        int k = h->branch_index(label);
        if (k < 0) err(p, rule, "label '" + label + "' is not part of " + print_type(h));
        return h->branches[k];
    }

    // p_k = 1, p_j = 0 for j != k
    void point_mass(const ProcExpr& p, const TypePtr& h, const std::string& label, const char* rule) {
        for (const auto& b : h->branches) {
            bool chosen = b.label == label;
            std::string what = "label '" + b.label + "' on '" + p.x + "' has probability " +
                               (b.prob.is_const() ? b.prob.value.str() : std::string("?")) + " here, must be " +
                               (chosen ? "1" : "0") + (chosen ? " to send it" : " when sending '" + label + "'");
            cs.add(prob_poly(b.prob), Rel::Eq, Poly(chosen ? 1 : 0), org(p, rule, "probabilistic send"), what);
        }
    }

    void potential_ge(const ProcExpr& p, const Poly& q, const Poly& r, const char* rule) {
        std::string what = "insufficient potential: " + (q.degree() == 0 ? q.constant().str() : std::string("?")) +
                           " available, " + (r.degree() == 0 ? r.constant().str() : std::string("?")) + " needed";
        cs.add(q, Rel::Ge, r, org(p, rule, "potential"), what);
    }

    void match_alts(const ProcExpr& p, const TypePtr& h, const char* rule) {
        for (const auto& a : p.alts)
            if (h->branch_index(a.label) < 0) err(p, rule, "branch '" + a.label + "' is not a label of " + print_type(h));
        for (const auto& b : h->branches) {
            bool found = std::any_of(p.alts.begin(), p.alts.end(), [&](const Alt& a) { return a.label == b.label; });
            if (!found) err(p, rule, "missing branch for label '" + b.label + "'");
        }
    }

    const ProcPtr& alt_body(const ProcExpr& p, const std::string& label) {
        for (const auto& a : p.alts)
            if (a.label == label) return a.body;
        throw std::logic_error("missing alternative");
    }

    // Probabilistic branching (flip, ⊕P L, &P R): split, mint branch potentials, recurse.
    void prob_branch(const ProcExpr& p, const char* rule, const Context& delta, const TypePtr& offered_to_split,
                     const std::vector<Poly>& weights, const Poly& q,
                     const std::function<void(std::size_t, BranchTyping&, const Poly&)>& go) {
        auto parts = split_context_weighted(delta, offered_to_split, weights, sig, cs, org(p, rule, "split"));
        Poly mix;
        std::vector<int> qs;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            int v = new_pot();
            qs.push_back(v);
            mix += weights[i] * Poly::var(v);
        }
        try {
            cs.add(q, Rel::Eq, mix, org(p, rule, "expected potential"), "expected potential mismatch");
        } catch (const std::domain_error&) {
            err(p, rule, "requires non-linear solving; provide concrete annotations");
        }
        for (std::size_t i = 0; i < weights.size(); ++i) go(i, parts[i], Poly::var(qs[i]));
    }

    void check(const ProcPtr& pp, Context ctx, TypePtr offered, Poly q) {
        const ProcExpr& p = *pp;
        const std::string& z = decl.offered.name;
        switch (p.kind) {
            case ProcKind::SendLabel:
            case ProcKind::PSendLabel: {
                bool prob_syntax = p.kind == ProcKind::PSendLabel;
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind == TypeKind::IChoice) {
                        if (prob_syntax) err(p, "⊕P R", "probabilistic send on '" + p.x + "' of deterministic type " + print_type(offered));
                        return check(p.cont, ctx, branch(p, h, p.label, "⊕R").cont, q);
                    }
                    if (h->kind == TypeKind::PIChoice) {
                        if (!prob_syntax) co.insert(&p);
                        const Branch& b = branch(p, h, p.label, "⊕P R");
                        point_mass(p, h, p.label, "⊕P R");
                        return check(p.cont, ctx, b.cont, q);
                    }
                    err(p, "⊕R", "cannot send a label on '" + p.x + "' of type " + print_type(offered));
                }
                int i = need(p, ctx, p.x, "&L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind == TypeKind::EChoice) {
                    if (prob_syntax) err(p, "&P L", "probabilistic send on '" + p.x + "' of deterministic type " + print_type(ctx[i].second));
                    ctx[i].second = branch(p, h, p.label, "&L").cont;
                    return check(p.cont, ctx, offered, q);
                }
                if (h->kind == TypeKind::PEChoice) {
                    if (!prob_syntax) co.insert(&p);
                    ctx[i].second = branch(p, h, p.label, "&P L").cont;
                    point_mass(p, h, p.label, "&P L");
                    return check(p.cont, ctx, offered, q);
                }
                err(p, "&L", "cannot send a label on '" + p.x + "' of type " + print_type(ctx[i].second));
            }
            case ProcKind::Case:
            case ProcKind::PCase: {
                bool prob_syntax = p.kind == ProcKind::PCase;
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind == TypeKind::EChoice) {
                        if (prob_syntax) err(p, "&P R", "pcase on '" + p.x + "' of deterministic type " + print_type(offered));
                        match_alts(p, h, "&R");
                        for (const auto& b : h->branches) check(alt_body(p, b.label), ctx, b.cont, q);
                        return;
                    }
                    if (h->kind == TypeKind::PEChoice) {
                        if (!prob_syntax) co.insert(&p);
                        match_alts(p, h, "&P R");
                        std::vector<Poly> w;
                        for (const auto& b : h->branches) w.push_back(prob_poly(b.prob));
                        prob_branch(p, "&P R", ctx, nullptr, w, q, [&](std::size_t l, BranchTyping& bt, const Poly& ql) {
                            check(alt_body(p, h->branches[l].label), bt.ctx, h->branches[l].cont, ql);
                        });
                        return;
                    }
                    err(p, "&R", "cannot branch on '" + p.x + "' of type " + print_type(offered));
                }
                int i = need(p, ctx, p.x, "⊕L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind == TypeKind::IChoice) {
                    if (prob_syntax) err(p, "⊕P L", "pcase on '" + p.x + "' of deterministic type " + print_type(ctx[i].second));
                    match_alts(p, h, "⊕L");
                    for (const auto& b : h->branches) {
                        Context c2 = ctx;
                        c2[i].second = b.cont;
                        check(alt_body(p, b.label), c2, offered, q);
                    }
                    return;
                }
                if (h->kind == TypeKind::PIChoice) {
                    if (!prob_syntax) co.insert(&p);
                    match_alts(p, h, "⊕P L");
                    Context rest = ctx;
                    rest.erase(rest.begin() + i);
                    std::vector<Poly> w;
                    for (const auto& b : h->branches) w.push_back(prob_poly(b.prob));
                    prob_branch(p, "⊕P L", rest, offered, w, q, [&](std::size_t l, BranchTyping& bt, const Poly& ql) {
                        bt.ctx.insert(bt.ctx.begin() + i, {p.x, h->branches[l].cont});
                        check(alt_body(p, h->branches[l].label), bt.ctx, bt.offered, ql);
                    });
                    return;
                }
                err(p, "⊕L", "cannot branch on '" + p.x + "' of type " + print_type(ctx[i].second));
            }
            case ProcKind::Flip: {
                if (!p.prob.is_const()) err(p, "flip", "flip probability must be a constant");
                std::vector<Poly> w{Poly(p.prob.value), Poly(Rational(1) - p.prob.value)};
                prob_branch(p, "flip", ctx, offered, w, q, [&](std::size_t i, BranchTyping& bt, const Poly& qi) {
                    check(p.alts[i].body, bt.ctx, bt.offered, qi);
                });
                return;
            }
            case ProcKind::SendChan: {
                if (p.y == z) err(p, "⊗R", "cannot send the offered channel '" + z + "'");
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind != TypeKind::Tensor) err(p, "⊗R", "cannot send a channel on '" + p.x + "' of type " + print_type(offered));
                    int j = need(p, ctx, p.y, "⊗R");
                    equate_types(h->left, ctx[j].second, sig, &cs, org(p, "⊗R"));
                    ctx.erase(ctx.begin() + j);
                    return check(p.cont, ctx, h->right, q);
                }
                int i = need(p, ctx, p.x, "⊸L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != TypeKind::Lolli) err(p, "⊸L", "cannot send a channel on '" + p.x + "' of type " + print_type(ctx[i].second));
                if (p.y == p.x) err(p, "⊸L", "cannot send '" + p.x + "' along itself");
                int j = need(p, ctx, p.y, "⊸L");
                equate_types(h->left, ctx[j].second, sig, &cs, org(p, "⊸L"));
                ctx[i].second = h->right;
                ctx.erase(ctx.begin() + j);
                return check(p.cont, ctx, offered, q);
            }
            case ProcKind::RecvChan: {
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind != TypeKind::Lolli) err(p, "⊸R", "cannot receive a channel on '" + p.x + "' of type " + print_type(offered));
                    fresh_binder(p, ctx, p.y, "⊸R");
                    ctx.emplace_back(p.y, h->left);
                    return check(p.cont, ctx, h->right, q);
                }
                int i = need(p, ctx, p.x, "⊗L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != TypeKind::Tensor) err(p, "⊗L", "cannot receive a channel on '" + p.x + "' of type " + print_type(ctx[i].second));
                fresh_binder(p, ctx, p.y, "⊗L");
                ctx[i].second = h->right;
                ctx.emplace_back(p.y, h->left);
                return check(p.cont, ctx, offered, q);
            }
            case ProcKind::Close: {
                if (p.x != z) err(p, "1R", "can only close the offered channel '" + z + "'");
                if (hd(offered, p)->kind != TypeKind::One) err(p, "1R", "cannot close '" + p.x + "' of type " + print_type(offered));
                if (!ctx.empty()) err(p, "1R", "channels " + ctx_names(ctx) + " are still in use at close");
                return;
            }
            case ProcKind::Wait: {
                int i = need(p, ctx, p.x, "1L");
                if (hd(ctx[i].second, p)->kind != TypeKind::One) err(p, "1L", "cannot wait on '" + p.x + "' of type " + print_type(ctx[i].second));
                ctx.erase(ctx.begin() + i);
                return check(p.cont, ctx, offered, q);
            }
            case ProcKind::Fwd: {
                if (p.x != z) err(p, "id", "the left side of a forward must be the offered channel '" + z + "'");
                int j = need(p, ctx, p.y, "id");
                if (ctx.size() != 1) {
                    Context rest = ctx;
                    rest.erase(rest.begin() + j);
                    err(p, "id", "channels " + ctx_names(rest) + " are still in use at the forward");
                }
                equate_types(offered, ctx[j].second, sig, &cs, org(p, "id"));
                return;
            }
            case ProcKind::Spawn: {
                const ProcDef* f = sig.find_proc(p.callee);
                if (!f) err(p, "spawn", "unknown process '" + p.callee + "'");
                if (f->used.size() != p.args.size())
                    err(p, "spawn", "'" + p.callee + "' expects " + std::to_string(f->used.size()) + " channels, given " +
                                        std::to_string(p.args.size()));
                for (std::size_t k = 0; k < p.args.size(); ++k) {
                    if (p.args[k] == z) err(p, "spawn", "cannot pass the offered channel '" + z + "'");
                    int j = need(p, ctx, p.args[k], "spawn");
                    equate_types(f->used[k].type, ctx[j].second, sig, &cs, org(p, "spawn", "argument '" + p.args[k] + "'"));
                    ctx.erase(ctx.begin() + j);
                }
                fresh_binder(p, ctx, p.x, "spawn");
                Poly pf = pot_poly(f->potential);
                potential_ge(p, q, pf, "spawn");
                ctx.emplace_back(p.x, f->offered.type);
                return check(p.cont, ctx, offered, q - pf);
            }
            case ProcKind::Pay:
            case ProcKind::Get: {
                bool pay = p.kind == ProcKind::Pay;
                Poly rp = pot_poly(p.pot);
                if (p.x == z) {
                    const char* rule = pay ? "▷R" : "◁R";
                    TypePtr h = hd(offered, p);
                    if (h->kind != (pay ? TypeKind::PayPot : TypeKind::GetPot))
                        err(p, rule, std::string("cannot ") + (pay ? "pay" : "get") + " on '" + p.x + "' of type " + print_type(offered));
                    Poly rt = pot_poly(h->pot);
                    cs.add(rp, Rel::Eq, rt, org(p, rule, "amount"), "amount differs from the type's annotation");
                    if (pay) {
                        potential_ge(p, q, rt, rule);
                        return check(p.cont, ctx, h->left, q - rt);
                    }
                    return check(p.cont, ctx, h->left, q + rt);
                }
                const char* rule = pay ? "◁L" : "▷L";
                int i = need(p, ctx, p.x, rule);
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != (pay ? TypeKind::GetPot : TypeKind::PayPot))
                    err(p, rule, std::string("cannot ") + (pay ? "pay" : "get") + " on '" + p.x + "' of type " + print_type(ctx[i].second));
                Poly rt = pot_poly(h->pot);
                cs.add(rp, Rel::Eq, rt, org(p, rule, "amount"), "amount differs from the type's annotation");
                ctx[i].second = h->left;
                if (pay) {
                    potential_ge(p, q, rt, rule);
                    return check(p.cont, ctx, offered, q - rt);
                }
                return check(p.cont, ctx, offered, q + rt);
            }
            case ProcKind::Work: {
                Poly r = pot_poly(p.pot);
                potential_ge(p, q, r, "work");
                return check(p.cont, ctx, offered, q - r);
            }
        }
    }
};

}  // namespace

void check_decl_constraints(const Signature& sig, const ProcDef& d, ConstraintSet& cs, Coercions& co) {
    Checker c{sig, d, cs, co};
    Context ctx;
    for (const auto& u : d.used) ctx.emplace_back(u.name, u.type);
    c.check(d.body, ctx, d.offered.type, pot_poly(d.potential));
}

// ---------------------------------------------------------------- varify

namespace {

struct Varifier {
    ConstraintSet& cs;
    std::string owner;

    TypePtr type(const TypePtr& t) {
        switch (t->kind) {
            case TypeKind::One:
            case TypeKind::Name: return t;
            case TypeKind::Tensor:
            case TypeKind::Lolli: {
                TypePtr l = type(t->left), r = type(t->right);
                if (l == t->left && r == t->right) return t;
                return make_binary(t->kind, l, r, t->span);
            }
            case TypeKind::PayPot:
            case TypeKind::GetPot: {
                TypePtr c = type(t->left);
                Pot p = t->pot;
                if (p.kind == ScalarKind::Star) {
                    int v = cs.new_var(VarKind::Pot, "");
                    cs.vars[v].name = "r" + std::to_string(v);
                    cs.annotation_vars.insert(v);
                    p = Pot::variable(v);
                }
                if (c == t->left && p == t->pot) return t;
                return make_pot(t->kind, p, c, t->span);
            }
            default: break;
        }
        bool changed = false;
        bool any_var = false;
        std::vector<Branch> bs;
        for (const auto& b : t->branches) {
            Branch nb = b;
            nb.cont = type(b.cont);
            if (nb.cont != b.cont) changed = true;
            if (t->is_prob_choice() && b.prob.kind == ScalarKind::Star) {
                int v = cs.new_var(VarKind::Prob, "");
                cs.vars[v].name = "p" + std::to_string(v) + "_" + b.label;
                nb.prob = Prob::variable(v);
                changed = true;
            }
            if (nb.prob.kind == ScalarKind::Var) any_var = true;
            bs.push_back(std::move(nb));
        }
        if (!changed) return t;
        TypePtr r = make_choice(t->kind, bs, t->span);
        if (any_var) {
            Poly sum;
            for (const auto& b : bs) sum += prob_poly(b.prob);
            cs.add(sum, Rel::Eq, Poly(1), Origin{t->span, "valid", owner, "probabilities of a choice sum to 1"},
                   "probabilities do not sum to 1");
        }
        return r;
    }

    ProcPtr proc(const ProcPtr& p) {
        if (!p) return p;
        auto n = std::make_shared<ProcExpr>(*p);
        if ((p->kind == ProcKind::Pay || p->kind == ProcKind::Get) && p->pot.kind == ScalarKind::Star) {
            int v = cs.new_var(VarKind::Pot, "");
            cs.vars[v].name = "r" + std::to_string(v);
            cs.annotation_vars.insert(v);
            n->pot = Pot::variable(v);
        }
        for (auto& a : n->alts) a.body = proc(a.body);
        n->cont = proc(p->cont);
        return n;
    }
};

ProcPtr rewrite(const ProcPtr& p, const Coercions& co) {
    if (!p) return p;
    auto n = std::make_shared<ProcExpr>(*p);
    if (co.count(p.get())) {
        if (p->kind == ProcKind::SendLabel) n->kind = ProcKind::PSendLabel;
        if (p->kind == ProcKind::Case) n->kind = ProcKind::PCase;
    }
    for (auto& a : n->alts) a.body = rewrite(a.body, co);
    n->cont = rewrite(p->cont, co);
    return n;
}

}  // namespace

Signature varify(const Signature& sig, ConstraintSet& cs) {
    Signature out;
    for (const auto& t : sig.types) {
        Varifier v{cs, ""};
        out.types.push_back({t.name, v.type(t.type), t.span});
    }
    for (const auto& d : sig.procs) {
        Varifier v{cs, d.name};
        ProcDef nd = d;
        for (auto& u : nd.used) u.type = v.type(u.type);
        nd.offered.type = v.type(nd.offered.type);
        if (d.potential.kind == ScalarKind::Star) {
            int q = cs.new_var(VarKind::Pot, "");
            cs.vars[q].name = "q_" + d.name;
            cs.decl_potential[d.name] = q;
            nd.potential = Pot::variable(q);
        }
        nd.body = v.proc(d.body);
        out.procs.push_back(std::move(nd));
    }
    return out;
}

Signature elaborate(const Signature& sig, const Coercions& co) {
    Signature out = sig;
    for (auto& d : out.procs) d.body = rewrite(d.body, co);
    return out;
}

}  // namespace prast
