#include "prast/parser.hpp"

#include <sstream>

namespace prast {

namespace {

std::string scalar(ScalarKind k, const Rational& v, int var, char prefix) {
    switch (k) {
        case ScalarKind::Const: return v.compact();
        case ScalarKind::Star: return "*";
        case ScalarKind::Var: return std::string("?") + prefix + std::to_string(var);
    }
    return "?";
}

std::string prob_str(const Prob& p) { return scalar(p.kind, p.value, p.var, 'p'); }
std::string pot_str(const Pot& p) { return scalar(p.kind, p.value, p.var, 'q'); }

enum Prec { PLolli = 0, PTensor = 1, PPrefix = 2 };

std::string type_at(const TypePtr& t, int ctx) {
    std::string s;
    int mine = PPrefix;
    switch (t->kind) {
        case TypeKind::One: return "1";
        case TypeKind::Name: return t->name;
        case TypeKind::IChoice:
        case TypeKind::EChoice:
        case TypeKind::PIChoice:
        case TypeKind::PEChoice: {
            bool internal = t->kind == TypeKind::IChoice || t->kind == TypeKind::PIChoice;
            s = internal ? "+{ " : "&{ ";
            for (std::size_t i = 0; i < t->branches.size(); ++i) {
                const auto& b = t->branches[i];
                if (i) s += ", ";
                s += b.label;
                if (t->is_prob_choice()) s += "^" + prob_str(b.prob);
                s += " : " + type_at(b.cont, PLolli);
            }
            return s + " }";
        }
        case TypeKind::PayPot:
        case TypeKind::GetPot:
            s = std::string(t->kind == TypeKind::PayPot ? "|>" : "<|") + "{" + pot_str(t->pot) + "} " +
                type_at(t->left, PPrefix);
            mine = PPrefix;
            break;
        case TypeKind::Tensor:
            s = type_at(t->left, PPrefix) + " * " + type_at(t->right, PTensor);
            mine = PTensor;
            break;
        case TypeKind::Lolli:
            s = type_at(t->left, PTensor) + " -o " + type_at(t->right, PLolli);
            mine = PLolli;
            break;
    }
    if (mine < ctx) return "(" + s + ")";
    return s;
}

void proc_to(std::ostringstream& o, const ProcPtr& p, int indent) {
    std::string pad(indent, ' ');
    auto alts = [&](const std::vector<Alt>& as) {
        o << "(\n";
        for (std::size_t i = 0; i < as.size(); ++i) {
            o << pad << (i ? "| " : "  ") << as[i].label << " =>\n" << pad << "    ";
            proc_to(o, as[i].body, indent + 4);
            o << "\n";
        }
        o << pad << ")";
    };
    auto next = [&] {
        o << " ;\n" << pad;
        proc_to(o, p->cont, indent);
    };
    switch (p->kind) {
        case ProcKind::SendLabel: o << p->x << "." << p->label; return next();
        case ProcKind::PSendLabel: o << p->x << ".." << p->label; return next();
        case ProcKind::Case: o << "case " << p->x << " "; return alts(p->alts);
        case ProcKind::PCase: o << "pcase " << p->x << " "; return alts(p->alts);
        case ProcKind::Flip: o << "flip " << prob_str(p->prob) << " "; return alts(p->alts);
        case ProcKind::SendChan: o << "send " << p->x << " " << p->y; return next();
        case ProcKind::RecvChan: o << p->y << " <- recv " << p->x; return next();
        case ProcKind::Close: o << "close " << p->x; return;
        case ProcKind::Wait: o << "wait " << p->x; return next();
        case ProcKind::Fwd: o << p->x << " <-> " << p->y; return;
        case ProcKind::Spawn: {
            bool tail = p->tail && p->cont && p->cont->kind == ProcKind::Fwd && p->cont->y == p->x;
            o << (tail ? p->cont->x : p->x) << " <- " << p->callee;
            for (const auto& a : p->args) o << " " << a;
            if (tail) return;
            return next();
        }
        case ProcKind::Pay: o << "pay " << p->x << " {" << pot_str(p->pot) << "}"; return next();
        case ProcKind::Get: o << "get " << p->x << " {" << pot_str(p->pot) << "}"; return next();
        case ProcKind::Work: o << "work {" << pot_str(p->pot) << "}"; return next();
    }
}

}  // namespace

std::string print_type(const TypePtr& t) { return type_at(t, PLolli); }

std::string print_proc(const ProcPtr& p, int indent) {
    std::ostringstream o;
    proc_to(o, p, indent);
    return o.str();
}

std::string print_decl(const ProcDef& d) {
    std::string s = "decl " + d.name + " : ";
    if (d.used.empty()) s += ".";
    for (std::size_t i = 0; i < d.used.size(); ++i)
        s += (i ? " (" : "(") + d.used[i].name + " : " + print_type(d.used[i].type) + ")";
    if (d.potential.is_const() && d.potential.value.is_zero())
        s += " |- ";
    else
        s += " |{" + pot_str(d.potential) + "}- ";
    return s + "(" + d.offered.name + " : " + print_type(d.offered.type) + ")";
}

std::string pretty_print(const Signature& sig) {
    std::ostringstream o;
    for (const auto& t : sig.types) o << "type " << t.name << " = " << print_type(t.type) << "\n";
    if (!sig.types.empty() && !sig.procs.empty()) o << "\n";
    for (std::size_t i = 0; i < sig.procs.size(); ++i) {
        const auto& d = sig.procs[i];
        if (i) o << "\n";
        o << print_decl(d) << "\n";
        o << "proc " << d.offered.name << " <- " << d.name;
        for (const auto& c : d.used) o << " " << c.name;
        o << " =\n  " << print_proc(d.body, 2) << "\n";
    }
    return o.str();
}

}  // namespace prast
