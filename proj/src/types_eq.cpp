#include "prast/check.hpp"
#include "prast/parser.hpp"

#include <set>

namespace prast {

int ConstraintSet::new_var(VarKind k, std::string name) {
    vars.push_back({k, std::move(name)});
    return static_cast<int>(vars.size()) - 1;
}

void ConstraintSet::add(Poly lhs, Rel rel, Poly rhs, Origin origin, const std::string& what) {
    Poly diff = lhs - rhs;
    if (diff.degree() == 0) {
        int s = diff.constant().sign();
        bool ok = rel == Rel::Eq ? s == 0 : (rel == Rel::Le ? s <= 0 : s >= 0);
        if (!ok) throw DiagnosticError(Diagnostic{origin.span, what, origin.rule});
        return;
    }
    cons.push_back({std::move(lhs), rel, std::move(rhs), std::move(origin)});
}

Poly prob_poly(const Prob& p) {
    if (p.kind == ScalarKind::Const) return Poly(p.value);
    if (p.kind == ScalarKind::Var) return Poly::var(p.var);
    throw std::logic_error("unresolved '*' probability");
}

Poly pot_poly(const Pot& p) {
    if (p.kind == ScalarKind::Const) return Poly(p.value);
    if (p.kind == ScalarKind::Var) return Poly::var(p.var);
    throw std::logic_error("unresolved '*' potential");
}

TypePtr head(const TypePtr& t, const Signature& sig) {
    TypePtr h = t;
    int guard = 0;
    while (h->kind == TypeKind::Name) {
        h = unfold(h, sig);
        if (++guard > 10000) throw TypeError("type '" + t->name + "' is not contractive", t->span);
    }
    return h;
}

namespace {

struct Equater {
    const Signature& sig;
    ConstraintSet* out;
    const Origin& origin;
    std::set<std::pair<const SessionType*, const SessionType*>> seen;

    bool fail(const std::string& msg) {
        if (out) throw DiagnosticError(Diagnostic{origin.span, msg, origin.rule});
        return false;
    }

    bool mismatch(const TypePtr& a, const TypePtr& b) {
        return fail("type mismatch: expected " + print_type(a) + ", found " + print_type(b));
    }

    template <class S>
    bool scalar(const S& x, const S& y, const TypePtr& a, const TypePtr& b, const char* what) {
        if (x == y) return true;
        if (x.kind == ScalarKind::Const && y.kind == ScalarKind::Const) {
            if (x.value == y.value) return true;
            return fail(std::string(what) + " mismatch: " + x.value.str() + " vs " + y.value.str() + " in " +
                        print_type(a) + " and " + print_type(b));
        }
        if (!out) return false;
        Poly px = x.kind == ScalarKind::Const ? Poly(x.value) : Poly::var(x.var);
        Poly py = y.kind == ScalarKind::Const ? Poly(y.value) : Poly::var(y.var);
        out->add(px, Rel::Eq, py, origin, "annotation mismatch");
        return true;
    }

    bool eq(const TypePtr& a, const TypePtr& b) {
        if (a == b) return true;
        if (a->kind == TypeKind::Name && b->kind == TypeKind::Name && a->name == b->name) return true;
        if (!seen.insert({a.get(), b.get()}).second) return true;
        TypePtr ha = head(a, sig), hb = head(b, sig);
        if (ha == hb) return true;
        if (ha->kind != hb->kind) return mismatch(a, b);
        switch (ha->kind) {
            case TypeKind::One: return true;
            case TypeKind::Tensor:
            case TypeKind::Lolli: return eq(ha->left, hb->left) && eq(ha->right, hb->right);
            case TypeKind::PayPot:
            case TypeKind::GetPot: return scalar(ha->pot, hb->pot, a, b, "potential") && eq(ha->left, hb->left);
            case TypeKind::Name: return mismatch(a, b);
            default: break;
        }
        if (ha->branches.size() != hb->branches.size()) return mismatch(a, b);
        for (const auto& x : ha->branches) {
            int j = hb->branch_index(x.label);
            if (j < 0) return mismatch(a, b);
            const auto& y = hb->branches[j];
            if (ha->is_prob_choice() && !scalar(x.prob, y.prob, a, b, "probability")) return false;
            if (!eq(x.cont, y.cont)) return false;
        }
        return true;
    }
};

}  // namespace

bool equate_types(const TypePtr& a, const TypePtr& b, const Signature& sig, ConstraintSet* out, const Origin& origin) {
    Equater e{sig, out, origin, {}};
    return e.eq(a, b);
}

bool types_equal(const TypePtr& a, const TypePtr& b, const Signature& sig) {
    Origin o;
    return equate_types(a, b, sig, nullptr, o);
}

}  // namespace prast
