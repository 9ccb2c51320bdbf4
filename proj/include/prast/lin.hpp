#pragma once

#include "prast/ast.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace prast {

enum class VarKind { Prob, Pot };

// constant + Σ coeff·var. Zero coefficients are never stored.
struct LinExpr {
    Rational constant;
    std::map<int, Rational> terms;

    LinExpr() = default;
    LinExpr(Rational c) : constant(std::move(c)) {}
    LinExpr(long c) : constant(c) {}
    static LinExpr var(int id, Rational coeff = Rational(1));

    bool is_const() const { return terms.empty(); }
    Rational coeff(int id) const;
    void add_term(int id, const Rational& c);

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(const Rational& k);
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, const Rational& k) { return a *= k; }
    friend LinExpr operator*(const Rational& k, LinExpr a) { return a *= k; }
    friend bool operator==(const LinExpr& a, const LinExpr& b) {
        return a.constant == b.constant && a.terms == b.terms;
    }

    Rational eval(const std::vector<Rational>& assignment) const;
    // Replace var by an expression.
    LinExpr substitute(int id, const LinExpr& by) const;
};

enum class Rel { Eq, Le, Ge };
const char* rel_str(Rel r);

// Where a constraint came from.
struct Origin {
    Span span;
    std::string rule;
    std::string decl;
    std::string note;
};

struct LinConstraint {
    LinExpr lhs;
    Rel rel = Rel::Eq;
    LinExpr rhs;
    Origin origin;

    bool holds(const std::vector<Rational>& assignment) const;
};

struct VarInfo {
    VarKind kind = VarKind::Pot;
    std::string name;
};

struct LPProblem {
    std::vector<VarInfo> vars;
    std::vector<LinConstraint> constraints;
    LinExpr objective;  // minimized

    int new_var(VarKind k, std::string name);
    void add(LinExpr lhs, Rel rel, LinExpr rhs, Origin origin = {});
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    std::vector<Rational> values;  // one per variable when Optimal
    Rational objective;
    int pivots = 0;
};

struct SolveOptions {
    bool presolve = true;  // eliminate equalities by substitution before the simplex
};

LPResult solve(const LPProblem& p, SolveOptions opts = {});

// Human-readable LP text (CPLEX-like, exact fractions).
std::string dump_lp(const LPProblem& p);
std::string lin_str(const LinExpr& e, const std::vector<VarInfo>& vars);
std::string constraint_str(const LinConstraint& c, const std::vector<VarInfo>& vars);

// Polynomial of degree <= 2 over solver variables; keys are (a, b) with a <= b,
// -1 standing for "no variable".
struct Poly {
    std::map<std::pair<int, int>, Rational> terms;

    Poly() = default;
    Poly(Rational c);
    Poly(long c) : Poly(Rational(c)) {}
    Poly(const LinExpr& e);
    static Poly var(int id) { return Poly(LinExpr::var(id)); }

    int degree() const;
    bool is_linear() const { return degree() <= 1; }
    LinExpr to_lin() const;  // requires is_linear()
    Rational constant() const;
    std::vector<std::pair<int, int>> bilinear_terms() const;

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);  // throws std::domain_error above degree 2

    Poly substitute(int id, const Rational& v) const;
    Rational eval(const std::vector<Rational>& assignment) const;
};

struct PolyConstraint {
    Poly lhs;
    Rel rel = Rel::Eq;
    Poly rhs;
    Origin origin;
};

std::string poly_str(const Poly& p, const std::vector<VarInfo>& vars);

}  // namespace prast
