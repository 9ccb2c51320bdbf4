#pragma once

#include "prast/ast.hpp"
#include "prast/lin.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace prast {

// Ordered antecedents x1 : A1, ..., xn : An.
using Context = std::vector<std::pair<std::string, TypePtr>>;

// Accumulates polynomial constraints over a shared variable table.
struct ConstraintSet {
    std::vector<VarInfo> vars;
    std::vector<PolyConstraint> cons;
    std::map<std::string, int> decl_potential;  // declaration -> potential variable
    std::set<int> annotation_vars;              // pay/get and ▷/◁ annotations (secondary objective)

    int new_var(VarKind k, std::string name);
    // Closed constraints are decided immediately; a false one throws DiagnosticError(what).
    void add(Poly lhs, Rel rel, Poly rhs, Origin origin, const std::string& what);
};

Poly prob_poly(const Prob& p);
Poly pot_poly(const Pot& p);

// Head of a type after unfolding names.
TypePtr head(const TypePtr& t, const Signature& sig);

// Coinductive type equality. With out != nullptr, differing variable annotations become
// equality constraints; otherwise they make the types unequal. Structural mismatches and
// closed disagreements throw DiagnosticError when `out` is given and return false otherwise.
bool equate_types(const TypePtr& a, const TypePtr& b, const Signature& sig, ConstraintSet* out, const Origin& origin);
bool types_equal(const TypePtr& a, const TypePtr& b, const Signature& sig);

// Nodes written with deterministic syntax but typed by a probabilistic rule.
using Coercions = std::set<const ProcExpr*>;

struct BranchTyping {
    Context ctx;
    TypePtr offered;
};

// Weighted split of a context and an offered type over n branches with the given weights.
// Used &P channels and an offered ⊕P type get fresh label probabilities per branch with
// p_l = Σ_i w_i·q_{l,i} and Σ_l q_{l,i} = 1; continuations are shared; every other
// head is copied to each branch unchanged.
std::vector<BranchTyping> split_context_weighted(const Context& delta, const TypePtr& offered,
                                                 const std::vector<Poly>& weights, const Signature& sig,
                                                 ConstraintSet& cs, const Origin& origin);

// Constraint-generating check of one declaration. Annotations may be variables.
// Throws DiagnosticError on a rule mismatch, a linearity violation or a closed contradiction.
void check_decl_constraints(const Signature& sig, const ProcDef& d, ConstraintSet& cs, Coercions& co);

// Replace every '*' with a fresh variable; validity constraints (Σ p = 1) go into cs.
Signature varify(const Signature& sig, ConstraintSet& cs);

// Rewrite coerced deterministic sends/cases to their probabilistic forms.
Signature elaborate(const Signature& sig, const Coercions& co);

}  // namespace prast
