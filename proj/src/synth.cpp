#include "prast/synth.hpp"
#include "prast/parser.hpp"

#include <algorithm>

namespace prast {

Dist static_dist(const TypePtr& h) {
    Dist d;
    for (const auto& b : h->branches) {
        if (!b.prob.is_const()) throw std::logic_error("distribution of a non-constant choice");
        d.push_back(b.prob.value);
    }
    return d;
}

std::string dist_str(const TypePtr& h, const Dist& d) {
    std::string s = "{";
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) s += ", ";
        s += h->branches[i].label + "^" + d[i].compact();
    }
    return s + "}";
}

namespace {

int find_chan(const Context& ctx, const std::string& x) {
    for (std::size_t i = 0; i < ctx.size(); ++i)
        if (ctx[i].first == x) return static_cast<int>(i);
    return -1;
}

Dist unit(std::size_t n, std::size_t k) {
    Dist d(n, Rational(0));
    d[k] = Rational(1);
    return d;
}

struct Run {
    const Signature& sig;
    bool record;
    std::map<const ProcExpr*, NodeJudgment>& judgments;
    Coercions& co;
    std::string z;

    [[noreturn]] void err(const ProcExpr& p, const std::string& rule, const std::string& msg) const {
        throw DiagnosticError(Diagnostic{p.span, msg, rule});
    }

    TypePtr hd(const TypePtr& t, const ProcExpr& p) const {
        try {
            return head(t, sig);
        } catch (const TypeError& e) {
            err(p, "unfold", e.what());
        }
    }

    int need(const ProcExpr& p, const Context& ctx, const std::string& x, const char* rule) const {
        int i = find_chan(ctx, x);
        if (i < 0) err(p, rule, "unknown channel '" + x + "'");
        return i;
    }

    void fresh(const ProcExpr& p, const Context& ctx, const std::string& y, const char* rule) const {
        if (y == z || find_chan(ctx, y) >= 0) err(p, rule, "channel '" + y + "' is already in use");
    }

    int label_index(const ProcExpr& p, const TypePtr& h, const std::string& l, const char* rule) const {
        int k = h->branch_index(l);
        if (k < 0) err(p, rule, "label '" + l + "' is not part of " + print_type(h));
        return k;
    }

    void same(const ProcExpr& p, const TypePtr& expected, const TypePtr& found, const char* rule) const {
        if (!types_equal(expected, found, sig))
            err(p, rule, "type mismatch: expected " + print_type(expected) + ", found " + print_type(found));
    }

    // Top-level probabilities may differ; they are settled where the branches meet.
    void same_shape(const ProcExpr& p, const TypePtr& expected, const TypePtr& found, const char* rule) const {
        TypePtr a = hd(expected, p), b = hd(found, p);
        if (!a->is_prob_choice() || a->kind != b->kind || a->branches.size() != b->branches.size())
            return same(p, expected, found, rule);
        for (const auto& x : a->branches) {
            int k = b->branch_index(x.label);
            if (k < 0) err(p, rule, "type mismatch: expected " + print_type(expected) + ", found " + print_type(found));
            same(p, x.cont, b->branches[k].cont, rule);
        }
    }

    // A channel moved to continuation type t: what the child produced for t must be t's own distribution.
    void settle_offered(const ProcExpr& p, SynthOut& child, const TypePtr& t, const char* rule) const {
        TypePtr h = hd(t, p);
        if (h->kind == TypeKind::PIChoice) {
            Dist want = static_dist(h);
            if (!child.offered || *child.offered != want)
                err(p, rule,
                    "'" + z + "' continues as " + print_type(t) + " but the process sends labels with distribution " +
                        (child.offered ? dist_str(h, *child.offered) : std::string("?")));
        }
        child.offered.reset();
    }

    void settle_used(const ProcExpr& p, SynthOut& child, const std::string& x, const TypePtr& t, const char* rule) const {
        TypePtr h = hd(t, p);
        auto it = child.used.find(x);
        if (h->kind == TypeKind::PEChoice) {
            Dist want = static_dist(h);
            if (it == child.used.end() || it->second != want)
                err(p, rule,
                    "'" + x + "' continues as " + print_type(t) + " but the process sends labels with distribution " +
                        (it != child.used.end() ? dist_str(h, it->second) : std::string("?")));
        }
        if (it != child.used.end()) child.used.erase(it);
    }

    // Passing channel y whose type is t to someone expecting t.
    void pass(const ProcExpr& p, SynthOut& out, const SynthInputs& in, const std::string& y, const TypePtr& t,
              const char* rule) const {
        TypePtr h = hd(t, p);
        if (h->kind == TypeKind::PEChoice) out.used[y] = static_dist(h);
        if (h->kind == TypeKind::PIChoice) {
            auto it = in.used.find(y);
            if (it != in.used.end() && it->second != static_dist(h))
                err(p, rule, "'" + y + "' is passed on with distribution " + dist_str(h, it->second) + " but its type is " +
                                 print_type(t));
        }
    }

    static SynthInputs without_used(const SynthInputs& in, const std::string& x) {
        SynthInputs r = in;
        r.used.erase(x);
        return r;
    }

    static SynthInputs without_offered(const SynthInputs& in) {
        SynthInputs r = in;
        r.offered.reset();
        return r;
    }

    static SynthOut mix(const std::vector<Rational>& w, const std::vector<SynthOut>& outs) {
        SynthOut r;
        r.q = Rational(0);
        for (std::size_t i = 0; i < outs.size(); ++i) {
            r.q += w[i] * outs[i].q;
            if (outs[i].offered) {
                if (!r.offered) r.offered = Dist(outs[i].offered->size(), Rational(0));
                for (std::size_t k = 0; k < r.offered->size(); ++k) (*r.offered)[k] += w[i] * (*outs[i].offered)[k];
            }
            for (const auto& [x, d] : outs[i].used) {
                auto& acc = r.used[x];
                if (acc.empty()) acc.assign(d.size(), Rational(0));
                for (std::size_t k = 0; k < d.size(); ++k) acc[k] += w[i] * d[k];
            }
        }
        return r;
    }

    SynthOut join(const ProcExpr& p, const char* rule, const std::vector<SynthOut>& outs) const {
        SynthOut r = outs.front();
        for (std::size_t i = 1; i < outs.size(); ++i) {
            if (outs[i].offered != r.offered)
                err(p, rule, "branches of '" + p.x + "' produce different label distributions on '" + z + "'");
            if (outs[i].used != r.used)
                err(p, rule, "branches of '" + p.x + "' produce different label distributions on a used channel");
            r.q = max(r.q, outs[i].q);
        }
        return r;
    }

    const ProcPtr& alt_body(const ProcExpr& p, const TypePtr& h, const std::string& label, const char* rule) const {
        for (const auto& b : h->branches)
            if (std::none_of(p.alts.begin(), p.alts.end(), [&](const Alt& a) { return a.label == b.label; }))
                err(p, rule, "missing branch for label '" + b.label + "'");
        for (const auto& a : p.alts)
            if (h->branch_index(a.label) < 0) err(p, rule, "branch '" + a.label + "' is not a label of " + print_type(h));
        for (const auto& a : p.alts)
            if (a.label == label) return a.body;
        err(p, rule, "missing branch for label '" + label + "'");
    }

    Rational constant_pot(const ProcExpr& p, const Pot& r, const char* rule) const {
        if (!r.is_const()) err(p, rule, "potential annotation is not a constant");
        return r.value;
    }

    SynthOut go(const ProcPtr& pp, Context ctx, const TypePtr& offered, const SynthInputs& in) {
        const ProcExpr& p = *pp;
        if (record) judgments[&p] = NodeJudgment{ctx, z, offered};
        switch (p.kind) {
            case ProcKind::SendLabel:
            case ProcKind::PSendLabel: {
                bool prob_syntax = p.kind == ProcKind::PSendLabel;
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind == TypeKind::IChoice || h->kind == TypeKind::PIChoice) {
                        bool prob = h->kind == TypeKind::PIChoice;
                        const char* rule = prob ? "⊕P R" : "⊕R";
                        if (prob_syntax && !prob) err(p, "⊕P R", "probabilistic send on '" + p.x + "' of deterministic type " + print_type(offered));
                        if (prob && !prob_syntax) co.insert(&p);
                        int k = label_index(p, h, p.label, rule);
                        SynthOut out = go(p.cont, ctx, h->branches[k].cont, in);
                        settle_offered(p, out, h->branches[k].cont, rule);
                        if (prob) out.offered = unit(h->branches.size(), k);
                        return out;
                    }
                    err(p, "⊕R", "cannot send a label on '" + p.x + "' of type " + print_type(offered));
                }
                int i = need(p, ctx, p.x, "&L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind == TypeKind::EChoice || h->kind == TypeKind::PEChoice) {
                    bool prob = h->kind == TypeKind::PEChoice;
                    const char* rule = prob ? "&P L" : "&L";
                    if (prob_syntax && !prob) err(p, "&P L", "probabilistic send on '" + p.x + "' of deterministic type " + print_type(ctx[i].second));
                    if (prob && !prob_syntax) co.insert(&p);
                    int k = label_index(p, h, p.label, rule);
                    ctx[i].second = h->branches[k].cont;
                    SynthOut out = go(p.cont, ctx, offered, in);
                    settle_used(p, out, p.x, h->branches[k].cont, rule);
                    if (prob) out.used[p.x] = unit(h->branches.size(), k);
                    return out;
                }
                err(p, "&L", "cannot send a label on '" + p.x + "' of type " + print_type(ctx[i].second));
            }
            case ProcKind::Case:
            case ProcKind::PCase: {
                bool prob_syntax = p.kind == ProcKind::PCase;
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind != TypeKind::EChoice && h->kind != TypeKind::PEChoice)
                        err(p, "&R", "cannot branch on '" + p.x + "' of type " + print_type(offered));
                    bool prob = h->kind == TypeKind::PEChoice;
                    const char* rule = prob ? "&P R" : "&R";
                    if (prob_syntax && !prob) err(p, "&P R", "pcase on '" + p.x + "' of deterministic type " + print_type(offered));
                    if (prob && !prob_syntax) co.insert(&p);
                    SynthInputs cin = without_offered(in);
                    std::vector<SynthOut> outs;
                    for (const auto& b : h->branches) {
                        SynthOut o = go(alt_body(p, h, b.label, rule), ctx, b.cont, cin);
                        settle_offered(p, o, b.cont, rule);
                        outs.push_back(std::move(o));
                    }
                    if (!prob) return join(p, rule, outs);
                    Dist w = in.offered ? *in.offered : static_dist(h);
                    return mix(w, outs);
                }
                int i = need(p, ctx, p.x, "⊕L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != TypeKind::IChoice && h->kind != TypeKind::PIChoice)
                    err(p, "⊕L", "cannot branch on '" + p.x + "' of type " + print_type(ctx[i].second));
                bool prob = h->kind == TypeKind::PIChoice;
                const char* rule = prob ? "⊕P L" : "⊕L";
                if (prob_syntax && !prob) err(p, "⊕P L", "pcase on '" + p.x + "' of deterministic type " + print_type(ctx[i].second));
                if (prob && !prob_syntax) co.insert(&p);
                SynthInputs cin = without_used(in, p.x);
                std::vector<SynthOut> outs;
                for (const auto& b : h->branches) {
                    Context c2 = ctx;
                    c2[i].second = b.cont;
                    SynthOut o = go(alt_body(p, h, b.label, rule), c2, offered, cin);
                    settle_used(p, o, p.x, b.cont, rule);
                    outs.push_back(std::move(o));
                }
                if (!prob) return join(p, rule, outs);
                auto it = in.used.find(p.x);
                Dist w = it != in.used.end() ? it->second : static_dist(h);
                return mix(w, outs);
            }
            case ProcKind::Flip: {
                if (!p.prob.is_const()) err(p, "flip", "flip probability must be a constant");
                std::vector<SynthOut> outs;
                for (const auto& a : p.alts) outs.push_back(go(a.body, ctx, offered, in));
                return mix({p.prob.value, Rational(1) - p.prob.value}, outs);
            }
            case ProcKind::SendChan: {
                if (p.y == z) err(p, "⊗R", "cannot send the offered channel '" + z + "'");
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind != TypeKind::Tensor) err(p, "⊗R", "cannot send a channel on '" + p.x + "' of type " + print_type(offered));
                    int j = need(p, ctx, p.y, "⊗R");
                    same(p, h->left, ctx[j].second, "⊗R");
                    TypePtr yt = ctx[j].second;
                    ctx.erase(ctx.begin() + j);
                    SynthOut out = go(p.cont, ctx, h->right, without_used(in, p.y));
                    settle_offered(p, out, h->right, "⊗R");
                    pass(p, out, in, p.y, yt, "⊗R");
                    return out;
                }
                int i = need(p, ctx, p.x, "⊸L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != TypeKind::Lolli) err(p, "⊸L", "cannot send a channel on '" + p.x + "' of type " + print_type(ctx[i].second));
                if (p.y == p.x) err(p, "⊸L", "cannot send '" + p.x + "' along itself");
                int j = need(p, ctx, p.y, "⊸L");
                same(p, h->left, ctx[j].second, "⊸L");
                TypePtr yt = ctx[j].second;
                ctx[i].second = h->right;
                ctx.erase(ctx.begin() + j);
                SynthOut out = go(p.cont, ctx, offered, without_used(without_used(in, p.y), p.x));
                settle_used(p, out, p.x, h->right, "⊸L");
                pass(p, out, in, p.y, yt, "⊸L");
                return out;
            }
            case ProcKind::RecvChan: {
                if (p.x == z) {
                    TypePtr h = hd(offered, p);
                    if (h->kind != TypeKind::Lolli) err(p, "⊸R", "cannot receive a channel on '" + p.x + "' of type " + print_type(offered));
                    fresh(p, ctx, p.y, "⊸R");
                    ctx.emplace_back(p.y, h->left);
                    SynthOut out = go(p.cont, ctx, h->right, without_offered(in));
                    settle_offered(p, out, h->right, "⊸R");
                    settle_used(p, out, p.y, h->left, "⊸R");
                    return out;
                }
                int i = need(p, ctx, p.x, "⊗L");
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != TypeKind::Tensor) err(p, "⊗L", "cannot receive a channel on '" + p.x + "' of type " + print_type(ctx[i].second));
                fresh(p, ctx, p.y, "⊗L");
                ctx[i].second = h->right;
                ctx.emplace_back(p.y, h->left);
                SynthOut out = go(p.cont, ctx, offered, without_used(in, p.x));
                settle_used(p, out, p.x, h->right, "⊗L");
                settle_used(p, out, p.y, h->left, "⊗L");
                return out;
            }
            case ProcKind::Close: {
                if (p.x != z) err(p, "1R", "can only close the offered channel '" + z + "'");
                if (hd(offered, p)->kind != TypeKind::One) err(p, "1R", "cannot close '" + p.x + "' of type " + print_type(offered));
                if (!ctx.empty()) err(p, "1R", "channels are still in use at close");
                SynthOut out;
                out.q = Rational(0);
                return out;
            }
            case ProcKind::Wait: {
                int i = need(p, ctx, p.x, "1L");
                if (hd(ctx[i].second, p)->kind != TypeKind::One) err(p, "1L", "cannot wait on '" + p.x + "' of type " + print_type(ctx[i].second));
                ctx.erase(ctx.begin() + i);
                return go(p.cont, ctx, offered, without_used(in, p.x));
            }
            case ProcKind::Fwd: {
                if (p.x != z) err(p, "id", "the left side of a forward must be the offered channel '" + z + "'");
                int j = need(p, ctx, p.y, "id");
                if (ctx.size() != 1) err(p, "id", "channels are still in use at the forward");
                same_shape(p, offered, ctx[j].second, "id");
                SynthOut out;
                out.q = Rational(0);
                TypePtr h = hd(offered, p);
                if (h->kind == TypeKind::PIChoice) {
                    auto it = in.used.find(p.y);
                    out.offered = it != in.used.end() ? it->second : static_dist(hd(ctx[j].second, p));
                }
                if (h->kind == TypeKind::PEChoice) out.used[p.y] = in.offered ? *in.offered : static_dist(h);
                return out;
            }
            case ProcKind::Spawn: {
                const ProcDef* f = sig.find_proc(p.callee);
                if (!f) err(p, "spawn", "unknown process '" + p.callee + "'");
                if (f->used.size() != p.args.size())
                    err(p, "spawn", "'" + p.callee + "' expects " + std::to_string(f->used.size()) + " channels, given " +
                                        std::to_string(p.args.size()));
                std::vector<std::pair<std::string, TypePtr>> passed;
                SynthInputs cin = in;
                for (std::size_t k = 0; k < p.args.size(); ++k) {
                    if (p.args[k] == z) err(p, "spawn", "cannot pass the offered channel '" + z + "'");
                    int j = need(p, ctx, p.args[k], "spawn");
                    same(p, f->used[k].type, ctx[j].second, "spawn");
                    passed.emplace_back(p.args[k], ctx[j].second);
                    ctx.erase(ctx.begin() + j);
                    cin.used.erase(p.args[k]);
                }
                fresh(p, ctx, p.x, "spawn");
                Rational pf = constant_pot(p, f->potential, "spawn");
                ctx.emplace_back(p.x, f->offered.type);
                SynthOut out = go(p.cont, ctx, offered, cin);
                settle_used(p, out, p.x, f->offered.type, "spawn");
                for (const auto& [y, t] : passed) pass(p, out, in, y, t, "spawn");
                out.q += pf;
                return out;
            }
            case ProcKind::Pay:
            case ProcKind::Get: {
                bool pay = p.kind == ProcKind::Pay;
                if (p.x == z) {
                    const char* rule = pay ? "▷R" : "◁R";
                    TypePtr h = hd(offered, p);
                    if (h->kind != (pay ? TypeKind::PayPot : TypeKind::GetPot))
                        err(p, rule, std::string("cannot ") + (pay ? "pay" : "get") + " on '" + p.x + "' of type " + print_type(offered));
                    Rational r = constant_pot(p, h->pot, rule);
                    if (constant_pot(p, p.pot, rule) != r) err(p, rule, "amount differs from the type's annotation " + r.str());
                    SynthOut out = go(p.cont, ctx, h->left, in);
                    settle_offered(p, out, h->left, rule);
                    out.q = pay ? out.q + r : max(Rational(0), out.q - r);
                    return out;
                }
                const char* rule = pay ? "◁L" : "▷L";
                int i = need(p, ctx, p.x, rule);
                TypePtr h = hd(ctx[i].second, p);
                if (h->kind != (pay ? TypeKind::GetPot : TypeKind::PayPot))
                    err(p, rule, std::string("cannot ") + (pay ? "pay" : "get") + " on '" + p.x + "' of type " + print_type(ctx[i].second));
                Rational r = constant_pot(p, h->pot, rule);
                if (constant_pot(p, p.pot, rule) != r) err(p, rule, "amount differs from the type's annotation " + r.str());
                ctx[i].second = h->left;
                SynthOut out = go(p.cont, ctx, offered, without_used(in, p.x));
                settle_used(p, out, p.x, h->left, rule);
                out.q = pay ? out.q + r : max(Rational(0), out.q - r);
                return out;
            }
            case ProcKind::Work: {
                Rational r = constant_pot(p, p.pot, "work");
                SynthOut out = go(p.cont, ctx, offered, in);
                out.q += r;
                return out;
            }
        }
        throw std::logic_error("unhandled process form");
    }
};

}  // namespace

SynthOut Synthesizer::run(const ProcPtr& p, const Context& ctx, const std::string& offered_name, const TypePtr& offered,
                          const SynthInputs& in) {
    Run r{sig_, record_, judgments_, coercions_, offered_name};
    return r.go(p, ctx, offered, in);
}

AuditResult audit_signature(const Signature& sig, bool record) {
    AuditResult res;
    Synthesizer s(sig, record);
    for (const auto& d : sig.procs) {
        try {
            if (!d.potential.is_const()) throw DiagnosticError({d.decl_span, "potential of '" + d.name + "' is not a constant", "audit"});
            Context ctx;
            for (const auto& u : d.used) ctx.emplace_back(u.name, u.type);
            SynthOut out = s.run(d.body, ctx, d.offered.name, d.offered.type, {});
            TypePtr h = head(d.offered.type, sig);
            if (h->kind == TypeKind::PIChoice && out.offered != static_dist(h))
                throw DiagnosticError({d.proc_span,
                                       "'" + d.name + "' sends on '" + d.offered.name + "' with distribution " +
                                           dist_str(h, *out.offered) + " but declares " + print_type(d.offered.type),
                                       "⊕P R"});
            for (const auto& u : d.used) {
                TypePtr hu = head(u.type, sig);
                if (hu->kind != TypeKind::PEChoice) continue;
                auto it = out.used.find(u.name);
                if (it == out.used.end() || it->second != static_dist(hu))
                    throw DiagnosticError({d.proc_span,
                                           "'" + d.name + "' sends on '" + u.name + "' with distribution " +
                                               (it != out.used.end() ? dist_str(hu, it->second) : std::string("?")) +
                                               " but declares " + print_type(u.type),
                                           "&P L"});
            }
            if (out.q > d.potential.value)
                throw DiagnosticError({d.decl_span,
                                       "'" + d.name + "' needs potential " + out.q.str() + " but declares " +
                                           d.potential.value.str(),
                                       "potential"});
            res.decls.push_back({d.name, out.q});
        } catch (const DiagnosticError& e) {
            res.diags.push_back(e.diag);
        } catch (const TypeError& e) {
            res.diags.push_back({e.span, e.what(), "unfold"});
        }
    }
    res.coercions = s.coercions();
    res.judgments = s.judgments();
    return res;
}

}  // namespace prast
