#pragma once

// Brute-force LP oracle and random system generator shared by test_lin and acceptance.

#include "prast/lin.hpp"

#include <optional>
#include <random>
#include <vector>

namespace prast::testing {

// Row a·x rel b over n variables (dense).
struct DenseRow {
    std::vector<Rational> a;
    Rel rel = Rel::Le;
    Rational b;
};

// Constraint rows plus x >= 0, and x <= 1 for probabilities.
inline std::vector<DenseRow> dense_rows(const LPProblem& p) {
    const std::size_t n = p.vars.size();
    std::vector<DenseRow> rows;
    for (const auto& c : p.constraints) {
        LinExpr d = c.lhs - c.rhs;
        DenseRow r;
        r.a.assign(n, Rational(0));
        for (const auto& [v, k] : d.terms) r.a[v] = k;
        r.rel = c.rel;
        r.b = -d.constant;
        rows.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < n; ++i) {
        DenseRow r;
        r.a.assign(n, Rational(0));
        r.a[i] = Rational(1);
        r.rel = Rel::Ge;
        r.b = Rational(0);
        rows.push_back(r);
        if (p.vars[i].kind == VarKind::Prob) {  // probabilities are also bounded by 1
            r.rel = Rel::Le;
            r.b = Rational(1);
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

// Unique solution of the square-or-taller system, if its rank is n and it is consistent.
inline std::optional<std::vector<Rational>> solve_equalities(std::vector<DenseRow> rows, std::size_t n) {
    std::size_t r = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t c = 0; c < n && r < rows.size(); ++c) {
        std::size_t piv = r;
        while (piv < rows.size() && rows[piv].a[c].is_zero()) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[r], rows[piv]);
        Rational inv = Rational(1) / rows[r].a[c];
        for (auto& v : rows[r].a) v *= inv;
        rows[r].b *= inv;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (k == r || rows[k].a[c].is_zero()) continue;
            Rational f = rows[k].a[c];
            for (std::size_t j = 0; j < n; ++j) rows[k].a[j] -= f * rows[r].a[j];
            rows[k].b -= f * rows[r].b;
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t k = r; k < rows.size(); ++k)
        if (!rows[k].b.is_zero()) return std::nullopt;
    if (r < n) return std::nullopt;
    std::vector<Rational> x(n, Rational(0));
    for (std::size_t k = 0; k < r; ++k) x[pivot_col[k]] = rows[k].b;
    return x;
}

inline bool satisfies(const DenseRow& r, const std::vector<Rational>& x) {
    Rational s(0);
    for (std::size_t j = 0; j < x.size(); ++j) s += r.a[j] * x[j];
    switch (r.rel) {
        case Rel::Eq: return s == r.b;
        case Rel::Le: return s <= r.b;
        case Rel::Ge: return s >= r.b;
    }
    return false;
}

// Minimum of the objective over all vertices; nullopt when there is no vertex (infeasible).
// Assumes the feasible region is bounded.
inline std::optional<Rational> vertex_min(const LPProblem& p) {
    const std::size_t n = p.vars.size();
    auto rows = dense_rows(p);
    std::vector<DenseRow> eqs;
    std::vector<DenseRow> ineqs;
    for (const auto& r : rows) (r.rel == Rel::Eq ? eqs : ineqs).push_back(r);
    std::optional<Rational> best;
    std::vector<std::size_t> pick;
    auto visit = [&]() {
        std::vector<DenseRow> sys = eqs;
        for (auto k : pick) {
            DenseRow t = ineqs[k];
            t.rel = Rel::Eq;
            sys.push_back(t);
        }
        auto x = solve_equalities(sys, n);
        if (!x) return;
        for (const auto& r : rows)
            if (!satisfies(r, *x)) return;
        Rational v = p.objective.eval(*x);
        if (!best || v < *best) best = v;
    };
    // every subset of at most n inequalities made tight
    auto rec = [&](auto&& self, std::size_t from) -> void {
        visit();
        if (pick.size() == n) return;
        for (std::size_t k = from; k < ineqs.size(); ++k) {
            pick.push_back(k);
            self(self, k + 1);
            pick.pop_back();
        }
    };
    rec(rec, 0);
    return best;
}

// Feasible by construction (a fixed point satisfies every row), bounded by a box row.
inline LPProblem random_feasible_lp(std::mt19937& g) {
    auto in = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); };
    LPProblem p;
    const int n = in(1, 6);
    const int m = in(1, 10);
    std::vector<Rational> x0;
    for (int i = 0; i < n; ++i) {
        bool prob = i % 2;
        p.new_var(prob ? VarKind::Prob : VarKind::Pot, "x" + std::to_string(i));
        x0.push_back(prob ? Rational(in(0, 4), 4) : Rational(in(0, 8), 2));
    }
    LinExpr box;
    for (int i = 0; i < n; ++i) box += LinExpr::var(i);
    p.add(box, Rel::Le, LinExpr(box.eval(x0) + Rational(in(0, 6))));
    for (int k = 1; k < m; ++k) {
        LinExpr e;
        for (int i = 0; i < n; ++i) {
            if (in(0, 2) == 0) continue;
            int c = in(-5, 5);
            if (c) e += LinExpr::var(i, Rational(c));
        }
        Rational at = e.eval(x0);
        int r = in(0, 4);
        if (r == 0)
            p.add(e, Rel::Eq, LinExpr(at));
        else if (r <= 2)
            p.add(e, Rel::Le, LinExpr(at + Rational(in(0, 3))));
        else
            p.add(e, Rel::Ge, LinExpr(at - Rational(in(0, 3))));
    }
    for (int i = 0; i < n; ++i) {
        int c = in(-5, 5);
        if (c) p.objective += LinExpr::var(i, Rational(c));
    }
    return p;
}

}  // namespace prast::testing
