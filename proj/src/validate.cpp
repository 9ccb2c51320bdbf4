#include "prast/ast.hpp"

#include <functional>
#include <set>

namespace prast {

namespace {

struct Validator {
    const Signature& sig;
    std::vector<Diagnostic> out;

    void error(Span s, std::string msg, std::string rule) { out.push_back({s, std::move(msg), std::move(rule)}); }

    void type(const TypePtr& t) {
        if (!t) return;
        switch (t->kind) {
            case TypeKind::One: return;
            case TypeKind::Name:
                if (!sig.find_type(t->name)) error(t->span, "undefined type '" + t->name + "'", "validate");
                return;
            case TypeKind::Tensor:
            case TypeKind::Lolli:
                type(t->left);
                type(t->right);
                return;
            case TypeKind::PayPot:
            case TypeKind::GetPot:
                if (t->pot.is_const() && t->pot.value.sign() < 0)
                    error(t->span, "negative potential " + t->pot.value.str(), "validate");
                type(t->left);
                return;
            default: break;
        }
        if (t->branches.empty()) error(t->span, "choice with no branches", "validate");
        std::set<std::string> seen;
        Rational sum(0);
        bool all_const = true;
        for (const auto& b : t->branches) {
            if (!seen.insert(b.label).second) error(t->span, "duplicate label '" + b.label + "'", "validate");
            if (t->is_prob_choice()) {
                if (b.prob.is_const()) {
                    if (b.prob.value.sign() < 0 || b.prob.value > Rational(1))
                        error(t->span, "probability " + b.prob.value.str() + " of '" + b.label + "' outside [0,1]",
                              "validate");
                    sum += b.prob.value;
                } else {
                    all_const = false;
                }
            }
            type(b.cont);
        }
        if (t->is_prob_choice()) {
            if (all_const && sum != Rational(1))
                error(t->span, "probabilities sum to " + sum.str() + ", expected 1", "validate");
            else if (!all_const && sum > Rational(1))
                error(t->span, "constant probabilities already sum to " + sum.str() + ", above 1", "validate");
        }
    }

    void proc(const ProcPtr& p) {
        if (!p) return;
        if (p->kind == ProcKind::Flip) {
            if (!p->prob.is_const())
                error(p->span, "flip probability must be a constant", "validate");
            else if (p->prob.value.sign() < 0 || p->prob.value > Rational(1))
                error(p->span, "probability literal out of range", "validate");
        }
        if (p->kind == ProcKind::Work && !p->pot.is_const())
            error(p->span, "work amount must be a constant", "validate");
        if ((p->kind == ProcKind::Work || p->kind == ProcKind::Pay || p->kind == ProcKind::Get) && p->pot.is_const() &&
            p->pot.value.sign() < 0)
            error(p->span, "negative potential " + p->pot.value.str(), "validate");
        if (p->kind == ProcKind::Case || p->kind == ProcKind::PCase) {
            std::set<std::string> seen;
            for (const auto& a : p->alts)
                if (!seen.insert(a.label).second) error(p->span, "duplicate branch '" + a.label + "'", "validate");
        }
        for (const auto& a : p->alts) proc(a.body);
        proc(p->cont);
    }
};

}  // namespace

std::vector<Diagnostic> validate_signature(const Signature& sig) {
    Validator v{sig, {}};
    std::set<std::string> names;
    for (const auto& d : sig.types) {
        if (!names.insert(d.name).second) v.error(d.span, "type '" + d.name + "' defined twice", "validate");
        if (d.type->kind == TypeKind::Name)
            v.error(d.span, "type '" + d.name + "' is not contractive (defined as a bare name)", "validate");
        v.type(d.type);
    }
    std::set<std::string> procs;
    for (const auto& p : sig.procs) {
        if (!procs.insert(p.name).second) v.error(p.decl_span, "process '" + p.name + "' declared twice", "validate");
        std::set<std::string> chans;
        for (const auto& c : p.used) {
            if (!chans.insert(c.name).second)
                v.error(p.decl_span, "channel '" + c.name + "' appears twice in '" + p.name + "'", "validate");
            v.type(c.type);
        }
        if (!chans.insert(p.offered.name).second)
            v.error(p.decl_span, "channel '" + p.offered.name + "' appears twice in '" + p.name + "'", "validate");
        v.type(p.offered.type);
        if (p.potential.is_const() && p.potential.value.sign() < 0)
            v.error(p.decl_span, "negative potential on '" + p.name + "'", "validate");
        v.proc(p.body);
    }
    return v.out;
}

}  // namespace prast
