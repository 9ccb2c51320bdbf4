#pragma once

#include "prast/rational.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prast {

struct Span {
    int line = 0;
    int col = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Diagnostic {
    Span span;
    std::string message;
    std::string rule;  // typing rule or phase that produced it ("parse", "⊕P R", ...)
};

std::string render(const Diagnostic& d, const std::string& file);

// Thrown by checkers on the first structural error in a declaration.
struct DiagnosticError : std::runtime_error {
    Diagnostic diag;
    explicit DiagnosticError(Diagnostic d) : std::runtime_error(d.message), diag(std::move(d)) {}
};

enum class ScalarKind { Const, Var, Star };

// Probability annotation: p in [0,1], a solver variable, or '*'.
struct Prob {
    ScalarKind kind = ScalarKind::Const;
    Rational value;
    int var = -1;

    static Prob constant(Rational r) { return {ScalarKind::Const, std::move(r), -1}; }
    static Prob variable(int id) { return {ScalarKind::Var, Rational(0), id}; }
    static Prob star() { return {ScalarKind::Star, Rational(0), -1}; }
    bool is_const() const { return kind == ScalarKind::Const; }
    friend bool operator==(const Prob& a, const Prob& b);
};

// Potential annotation: q >= 0, a solver variable, or '*'.
struct Pot {
    ScalarKind kind = ScalarKind::Const;
    Rational value;
    int var = -1;

    static Pot constant(Rational r) { return {ScalarKind::Const, std::move(r), -1}; }
    static Pot variable(int id) { return {ScalarKind::Var, Rational(0), id}; }
    static Pot star() { return {ScalarKind::Star, Rational(0), -1}; }
    bool is_const() const { return kind == ScalarKind::Const; }
    friend bool operator==(const Pot& a, const Pot& b);
};

struct SessionType;
using TypePtr = std::shared_ptr<const SessionType>;

enum class TypeKind { IChoice, EChoice, PIChoice, PEChoice, Tensor, Lolli, One, Name, PayPot, GetPot };

struct Branch {
    std::string label;
    Prob prob;  // meaningful for PIChoice / PEChoice only
    TypePtr cont;
};

struct SessionType {
    TypeKind kind = TypeKind::One;
    std::vector<Branch> branches;  // choices
    TypePtr left, right;           // Tensor / Lolli; PayPot / GetPot use left as continuation
    std::string name;              // Name
    Pot pot;                       // PayPot / GetPot
    Span span;

    bool is_choice() const;
    bool is_prob_choice() const { return kind == TypeKind::PIChoice || kind == TypeKind::PEChoice; }
    int branch_index(const std::string& label) const;
};

TypePtr make_one(Span s = {});
TypePtr make_name(std::string n, Span s = {});
TypePtr make_choice(TypeKind k, std::vector<Branch> bs, Span s = {});
TypePtr make_binary(TypeKind k, TypePtr l, TypePtr r, Span s = {});
TypePtr make_pot(TypeKind k, Pot p, TypePtr cont, Span s = {});
// Copy of a probabilistic choice with new outer probabilities; continuations are shared.
TypePtr with_probs(const TypePtr& choice, const std::vector<Prob>& probs);
TypePtr with_dist(const TypePtr& choice, const std::vector<Rational>& dist);

struct ProcExpr;
using ProcPtr = std::shared_ptr<const ProcExpr>;

enum class ProcKind {
    SendLabel, Case, PSendLabel, PCase, Flip, SendChan, RecvChan,
    Close, Wait, Fwd, Spawn, Pay, Get, Work
};

struct Alt {
    std::string label;
    ProcPtr body;
};

struct ProcExpr {
    ProcKind kind = ProcKind::Close;
    std::string x;                    // subject channel; Spawn: binder
    std::string y;                    // SendChan: sent channel; RecvChan: binder; Fwd: target
    std::string label;                // SendLabel / PSendLabel
    std::string callee;               // Spawn
    std::vector<std::string> args;    // Spawn
    bool tail = false;                // Spawn written as a tail call (cont is the forward)
    Prob prob;                        // Flip
    Pot pot;                          // Pay / Get / Work
    std::string cost_tag;             // Work inserted by a cost model ("flips", "send"); empty for source work
    std::vector<Alt> alts;            // Case / PCase; Flip uses {H, T}
    ProcPtr cont;
    Span span;
};

const char* proc_kind_name(ProcKind k);

struct ChanDecl {
    std::string name;
    TypePtr type;
};

struct TypeDef {
    std::string name;
    TypePtr type;
    Span span;
};

struct ProcDef {
    std::string name;
    std::vector<ChanDecl> used;
    Pot potential;
    ChanDecl offered;
    ProcPtr body;
    Span decl_span;
    Span proc_span;
};

struct Signature {
    std::vector<TypeDef> types;
    std::vector<ProcDef> procs;

    const TypeDef* find_type(const std::string& n) const;
    const ProcDef* find_proc(const std::string& n) const;
};

// Error raised by unfold.
struct TypeError : std::runtime_error {
    Span span;
    TypeError(const std::string& m, Span s) : std::runtime_error(m), span(s) {}
};

// One-step unfolding of a type name. Result is never a Name for a contractive signature.
TypePtr unfold(const TypePtr& a, const Signature& sig);

// Syntactic equality (no unfolding); spans ignored.
bool same_type(const TypePtr& a, const TypePtr& b);
bool same_proc(const ProcPtr& a, const ProcPtr& b);
bool same_signature(const Signature& a, const Signature& b);

// Structural validity: contractivity, name resolution, Σp = 1 for fully-Const choices, duplicate labels.
std::vector<Diagnostic> validate_signature(const Signature& sig);

// Free channel variables of a process term.
std::vector<std::string> free_channels(const ProcPtr& p);

}  // namespace prast
