#include "prast/ast.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace prast {

std::string render(const Diagnostic& d, const std::string& file) {
    std::string s = file + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": " + d.message;
    if (!d.rule.empty()) s += " [" + d.rule + "]";
    return s;
}

bool operator==(const Prob& a, const Prob& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ScalarKind::Const) return a.value == b.value;
    if (a.kind == ScalarKind::Var) return a.var == b.var;
    return true;
}

bool operator==(const Pot& a, const Pot& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ScalarKind::Const) return a.value == b.value;
    if (a.kind == ScalarKind::Var) return a.var == b.var;
    return true;
}

bool SessionType::is_choice() const {
    return kind == TypeKind::IChoice || kind == TypeKind::EChoice || is_prob_choice();
}

int SessionType::branch_index(const std::string& label) const {
    for (std::size_t i = 0; i < branches.size(); ++i)
        if (branches[i].label == label) return static_cast<int>(i);
    return -1;
}

TypePtr make_one(Span s) {
    auto t = std::make_shared<SessionType>();
    t->kind = TypeKind::One;
    t->span = s;
    return t;
}

TypePtr make_name(std::string n, Span s) {
    auto t = std::make_shared<SessionType>();
    t->kind = TypeKind::Name;
    t->name = std::move(n);
    t->span = s;
    return t;
}

TypePtr make_choice(TypeKind k, std::vector<Branch> bs, Span s) {
    auto t = std::make_shared<SessionType>();
    t->kind = k;
    t->branches = std::move(bs);
    t->span = s;
    return t;
}

TypePtr make_binary(TypeKind k, TypePtr l, TypePtr r, Span s) {
    auto t = std::make_shared<SessionType>();
    t->kind = k;
    t->left = std::move(l);
    t->right = std::move(r);
    t->span = s;
    return t;
}

TypePtr make_pot(TypeKind k, Pot p, TypePtr cont, Span s) {
    auto t = std::make_shared<SessionType>();
    t->kind = k;
    t->pot = std::move(p);
    t->left = std::move(cont);
    t->span = s;
    return t;
}

TypePtr with_probs(const TypePtr& choice, const std::vector<Prob>& probs) {
    auto t = std::make_shared<SessionType>(*choice);
    for (std::size_t i = 0; i < t->branches.size(); ++i) t->branches[i].prob = probs.at(i);
    return t;
}

TypePtr with_dist(const TypePtr& choice, const std::vector<Rational>& dist) {
    auto t = std::make_shared<SessionType>(*choice);
    for (std::size_t i = 0; i < t->branches.size(); ++i) t->branches[i].prob = Prob::constant(dist.at(i));
    return t;
}

const char* proc_kind_name(ProcKind k) {
    switch (k) {
        case ProcKind::SendLabel: return "send label";
        case ProcKind::Case: return "case";
        case ProcKind::PSendLabel: return "probabilistic send";
        case ProcKind::PCase: return "pcase";
        case ProcKind::Flip: return "flip";
        case ProcKind::SendChan: return "send";
        case ProcKind::RecvChan: return "recv";
        case ProcKind::Close: return "close";
        case ProcKind::Wait: return "wait";
        case ProcKind::Fwd: return "forward";
        case ProcKind::Spawn: return "spawn";
        case ProcKind::Pay: return "pay";
        case ProcKind::Get: return "get";
        case ProcKind::Work: return "work";
    }
    return "?";
}

const TypeDef* Signature::find_type(const std::string& n) const {
    for (const auto& t : types)
        if (t.name == n) return &t;
    return nullptr;
}

const ProcDef* Signature::find_proc(const std::string& n) const {
    for (const auto& p : procs)
        if (p.name == n) return &p;
    return nullptr;
}

TypePtr unfold(const TypePtr& a, const Signature& sig) {
    if (a->kind != TypeKind::Name) return a;
    const TypeDef* def = sig.find_type(a->name);
    if (!def) throw TypeError("undefined type '" + a->name + "'", a->span);
    if (def->type->kind == TypeKind::Name)
        throw TypeError("type '" + a->name + "' is not contractive (defined as a bare name)", def->span);
    return def->type;
}

bool same_type(const TypePtr& a, const TypePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TypeKind::One: return true;
        case TypeKind::Name: return a->name == b->name;
        case TypeKind::Tensor:
        case TypeKind::Lolli: return same_type(a->left, b->left) && same_type(a->right, b->right);
        case TypeKind::PayPot:
        case TypeKind::GetPot: return a->pot == b->pot && same_type(a->left, b->left);
        default: break;
    }
    if (a->branches.size() != b->branches.size()) return false;
    for (std::size_t i = 0; i < a->branches.size(); ++i) {
        const auto &x = a->branches[i], &y = b->branches[i];
        if (x.label != y.label || !same_type(x.cont, y.cont)) return false;
        if (a->is_prob_choice() && !(x.prob == y.prob)) return false;
    }
    return true;
}

bool same_proc(const ProcPtr& a, const ProcPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->x != b->x || a->y != b->y || a->label != b->label || a->callee != b->callee ||
        a->args != b->args || a->tail != b->tail || a->cost_tag != b->cost_tag)
        return false;
    if (a->kind == ProcKind::Flip && !(a->prob == b->prob)) return false;
    if ((a->kind == ProcKind::Pay || a->kind == ProcKind::Get || a->kind == ProcKind::Work) && !(a->pot == b->pot))
        return false;
    if (a->alts.size() != b->alts.size()) return false;
    for (std::size_t i = 0; i < a->alts.size(); ++i)
        if (a->alts[i].label != b->alts[i].label || !same_proc(a->alts[i].body, b->alts[i].body)) return false;
    return same_proc(a->cont, b->cont);
}

bool same_signature(const Signature& a, const Signature& b) {
    if (a.types.size() != b.types.size() || a.procs.size() != b.procs.size()) return false;
    for (std::size_t i = 0; i < a.types.size(); ++i)
        if (a.types[i].name != b.types[i].name || !same_type(a.types[i].type, b.types[i].type)) return false;
    for (std::size_t i = 0; i < a.procs.size(); ++i) {
        const auto &p = a.procs[i], &q = b.procs[i];
        if (p.name != q.name || !(p.potential == q.potential) || p.used.size() != q.used.size()) return false;
        for (std::size_t k = 0; k < p.used.size(); ++k)
            if (p.used[k].name != q.used[k].name || !same_type(p.used[k].type, q.used[k].type)) return false;
        if (p.offered.name != q.offered.name || !same_type(p.offered.type, q.offered.type)) return false;
        if (!same_proc(p.body, q.body)) return false;
    }
    return true;
}

static void collect_free(const ProcPtr& p, std::set<std::string>& bound, std::vector<std::string>& out) {
    if (!p) return;
    auto use = [&](const std::string& v) {
        if (v.empty() || bound.count(v)) return;
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    auto with_binder = [&](const std::string& b, const ProcPtr& body) {
        bool had = bound.count(b) > 0;
        bound.insert(b);
        collect_free(body, bound, out);
        if (!had) bound.erase(b);
    };
    switch (p->kind) {
        case ProcKind::RecvChan:
            use(p->x);
            with_binder(p->y, p->cont);
            return;
        case ProcKind::Spawn:
            for (const auto& a : p->args) use(a);
            with_binder(p->x, p->cont);
            return;
        case ProcKind::Flip:
        case ProcKind::Work:
            break;
        case ProcKind::SendChan:
        case ProcKind::Fwd:
            use(p->x);
            use(p->y);
            break;
        default:
            use(p->x);
    }
    for (const auto& a : p->alts) collect_free(a.body, bound, out);
    collect_free(p->cont, bound, out);
}

std::vector<std::string> free_channels(const ProcPtr& p) {
    std::set<std::string> bound;
    std::vector<std::string> out;
    collect_free(p, bound, out);
    return out;
}

}  // namespace prast
