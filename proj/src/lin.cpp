#include "prast/lin.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace prast {

// ---------------------------------------------------------------- LinExpr

LinExpr LinExpr::var(int id, Rational coeff) {
    LinExpr e;
    e.add_term(id, coeff);
    return e;
}

Rational LinExpr::coeff(int id) const {
    auto it = terms.find(id);
    return it == terms.end() ? Rational(0) : it->second;
}

void LinExpr::add_term(int id, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms.emplace(id, c);
    if (!fresh) {
        it->second += c;
        if (it->second.is_zero()) terms.erase(it);
    }
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    constant += o.constant;
    for (const auto& [v, c] : o.terms) add_term(v, c);
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    constant -= o.constant;
    for (const auto& [v, c] : o.terms) add_term(v, -c);
    return *this;
}

LinExpr& LinExpr::operator*=(const Rational& k) {
    if (k.is_zero()) {
        terms.clear();
        constant = Rational(0);
        return *this;
    }
    constant *= k;
    for (auto& [v, c] : terms) c *= k;
    return *this;
}

Rational LinExpr::eval(const std::vector<Rational>& a) const {
    Rational r = constant;
    for (const auto& [v, c] : terms) r += c * a.at(v);
    return r;
}

LinExpr LinExpr::substitute(int id, const LinExpr& by) const {
    auto it = terms.find(id);
    if (it == terms.end()) return *this;
    LinExpr r = *this;
    Rational c = it->second;
    r.terms.erase(id);
    r += by * c;
    return r;
}

const char* rel_str(Rel r) {
    switch (r) {
        case Rel::Eq: return "=";
        case Rel::Le: return "<=";
        case Rel::Ge: return ">=";
    }
    return "?";
}

static bool rel_holds(const Rational& lhs, Rel rel, const Rational& rhs) {
    switch (rel) {
        case Rel::Eq: return lhs == rhs;
        case Rel::Le: return lhs <= rhs;
        case Rel::Ge: return lhs >= rhs;
    }
    return false;
}

bool LinConstraint::holds(const std::vector<Rational>& a) const { return rel_holds(lhs.eval(a), rel, rhs.eval(a)); }

int LPProblem::new_var(VarKind k, std::string name) {
    vars.push_back({k, std::move(name)});
    return static_cast<int>(vars.size()) - 1;
}

void LPProblem::add(LinExpr lhs, Rel rel, LinExpr rhs, Origin origin) {
    constraints.push_back({std::move(lhs), rel, std::move(rhs), std::move(origin)});
}

// ---------------------------------------------------------------- simplex

namespace {

struct Row {
    std::vector<mpq_class> a;  // over the dense variable set
    Rel rel;
    mpq_class b;
};

struct Simplex {
    int n = 0;                           // structural columns
    std::vector<std::vector<mpq_class>> t;  // m rows, ncols + 1 (rhs last)
    std::vector<mpq_class> d;            // reduced costs, ncols + 1 (last = -objective)
    std::vector<int> basis;
    std::vector<bool> artificial;
    int ncols = 0;
    int pivots = 0;

    void pivot(int r, int c) {
        ++pivots;
        auto& pr = t[r];
        mpq_class inv = 1 / pr[c];
        for (auto& v : pr)
            if (sgn(v) != 0) v *= inv;
        std::vector<int> nz;
        for (int j = 0; j <= ncols; ++j)
            if (sgn(pr[j]) != 0) nz.push_back(j);
        auto elim = [&](std::vector<mpq_class>& row) {
            if (sgn(row[c]) == 0) return;
            mpq_class f = row[c];
            for (int j : nz) row[j] -= f * pr[j];
        };
        for (int i = 0; i < static_cast<int>(t.size()); ++i)
            if (i != r) elim(t[i]);
        elim(d);
        basis[r] = c;
    }

    // Returns false if unbounded.
    bool optimize(const std::vector<bool>& allowed) {
        while (true) {
            int enter = -1;
            for (int j = 0; j < ncols; ++j)
                if (allowed[j] && sgn(d[j]) < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            mpq_class best;
            for (int i = 0; i < static_cast<int>(t.size()); ++i) {
                if (sgn(t[i][enter]) <= 0) continue;
                mpq_class ratio = t[i][ncols] / t[i][enter];
                if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

LPResult run_simplex(int n, const std::vector<Row>& input, const std::vector<mpq_class>& cost, int& pivots) {
    // Normalize: equalities become a pair, every row gets b >= 0.
    struct NRow {
        std::vector<mpq_class> a;
        int kind;  // +1: slack (<=), -1: surplus + artificial (>=)
        mpq_class b;
    };
    std::vector<NRow> rows;
    auto push = [&](std::vector<mpq_class> a, Rel rel, mpq_class b) {
        if (sgn(b) < 0) {
            for (auto& v : a) v = -v;
            b = -b;
            rel = rel == Rel::Le ? Rel::Ge : Rel::Le;
        }
        rows.push_back({std::move(a), rel == Rel::Le ? 1 : -1, std::move(b)});
    };
    for (const auto& r : input) {
        if (r.rel == Rel::Eq) {
            push(r.a, Rel::Le, r.b);
            push(r.a, Rel::Ge, r.b);
        } else {
            push(r.a, r.rel, r.b);
        }
    }
    int m = static_cast<int>(rows.size());
    int nart = 0;
    for (const auto& r : rows)
        if (r.kind < 0) ++nart;
    Simplex s;
    s.n = n;
    s.ncols = n + m + nart;
    s.t.assign(m, std::vector<mpq_class>(s.ncols + 1));
    s.basis.assign(m, -1);
    s.artificial.assign(s.ncols, false);
    int art = n + m;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) s.t[i][j] = rows[i].a[j];
        s.t[i][s.ncols] = rows[i].b;
        if (rows[i].kind > 0) {
            s.t[i][n + i] = 1;
            s.basis[i] = n + i;
        } else {
            s.t[i][n + i] = -1;
            s.t[i][art] = 1;
            s.artificial[art] = true;
            s.basis[i] = art++;
        }
    }
    // phase 1
    s.d.assign(s.ncols + 1, 0);
    for (int j = 0; j < s.ncols; ++j)
        if (s.artificial[j]) s.d[j] = 1;
    for (int i = 0; i < m; ++i)
        if (s.artificial[s.basis[i]])
            for (int j = 0; j <= s.ncols; ++j) s.d[j] -= s.t[i][j];
    std::vector<bool> all(s.ncols, true);
    s.optimize(all);
    LPResult res;
    if (sgn(s.d[s.ncols]) != 0) {
        pivots += s.pivots;
        res.status = LPStatus::Infeasible;
        return res;
    }
    // drive artificials out of the basis
    for (int i = 0; i < static_cast<int>(s.t.size()); ++i) {
        if (!s.artificial[s.basis[i]]) continue;
        int col = -1;
        for (int j = 0; j < s.ncols; ++j)
            if (!s.artificial[j] && sgn(s.t[i][j]) != 0) {
                col = j;
                break;
            }
        if (col >= 0) {
            s.pivot(i, col);
        } else {
            s.t.erase(s.t.begin() + i);
            s.basis.erase(s.basis.begin() + i);
            --i;
        }
    }
    // phase 2
    std::vector<bool> allowed(s.ncols);
    for (int j = 0; j < s.ncols; ++j) allowed[j] = !s.artificial[j];
    s.d.assign(s.ncols + 1, 0);
    for (int j = 0; j < n; ++j) s.d[j] = cost[j];
    for (int i = 0; i < static_cast<int>(s.t.size()); ++i) {
        int b = s.basis[i];
        if (b < n && sgn(cost[b]) != 0) {
            mpq_class c = cost[b];
            for (int j = 0; j <= s.ncols; ++j) s.d[j] -= c * s.t[i][j];
        }
    }
    bool bounded = s.optimize(allowed);
    pivots += s.pivots;
    if (!bounded) {
        res.status = LPStatus::Unbounded;
        return res;
    }
    res.status = LPStatus::Optimal;
    res.values.assign(n, Rational(0));
    for (int i = 0; i < static_cast<int>(s.t.size()); ++i)
        if (s.basis[i] < n) res.values[s.basis[i]] = Rational(s.t[i][s.ncols]);
    return res;
}

// e rel 0
struct Work {
    LinExpr e;
    Rel rel;
};

bool closed_ok(const Work& w) {
    int sg = w.e.constant.sign();
    switch (w.rel) {
        case Rel::Eq: return sg == 0;
        case Rel::Le: return sg <= 0;
        case Rel::Ge: return sg >= 0;
    }
    return false;
}

// Implied by nonnegativity alone.
bool trivially_true(const Work& w) {
    if (w.rel == Rel::Eq) return false;
    int want = w.rel == Rel::Ge ? 1 : -1;
    if (w.e.constant.sign() * want < 0) return false;
    for (const auto& [v, c] : w.e.terms)
        if (c.sign() * want < 0) return false;
    return true;
}

}  // namespace

LPResult solve(const LPProblem& p, SolveOptions opts) {
    const int nv = static_cast<int>(p.vars.size());
    std::vector<Work> rows;
    for (const auto& c : p.constraints) rows.push_back({c.lhs - c.rhs, c.rel});
    LinExpr obj = p.objective;
    std::vector<std::pair<int, LinExpr>> defs;
    std::vector<bool> eliminated(nv, false);
    LPResult res;
    int pivots = 0;

    if (opts.presolve) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].rel != Rel::Eq || rows[i].e.is_const()) continue;
                // eliminate the highest-numbered variable of the equality
                const LinExpr e = rows[i].e;
                auto [x, a] = *e.terms.rbegin();
                LinExpr def = e;
                def.terms.erase(x);
                def *= -(Rational(1) / a);
                defs.emplace_back(x, def);
                eliminated[x] = true;
                rows.erase(rows.begin() + static_cast<long>(i));
                for (auto& w : rows) w.e = w.e.substitute(x, def);
                obj = obj.substitute(x, def);
                rows.push_back({def, Rel::Ge});
                if (p.vars[x].kind == VarKind::Prob) rows.push_back({def - LinExpr(1), Rel::Le});
                progress = true;
                break;
            }
            std::vector<Work> kept;
            for (auto& w : rows) {
                if (w.e.is_const()) {
                    if (!closed_ok(w)) {
                        res.status = LPStatus::Infeasible;
                        return res;
                    }
                    continue;
                }
                if (trivially_true(w)) continue;
                kept.push_back(std::move(w));
            }
            rows = std::move(kept);
        }
    } else {
        for (const auto& w : rows)
            if (w.e.is_const() && !closed_ok(w)) {
                res.status = LPStatus::Infeasible;
                return res;
            }
    }

    // dense numbering of the remaining variables
    std::vector<int> dense(nv, -1), back;
    auto touch = [&](const LinExpr& e) {
        for (const auto& [v, c] : e.terms)
            if (dense[v] < 0) {
                dense[v] = static_cast<int>(back.size());
                back.push_back(v);
            }
    };
    for (const auto& w : rows) touch(w.e);
    touch(obj);
    const int n = static_cast<int>(back.size());
    std::vector<Row> srows;
    for (const auto& w : rows) {
        if (w.e.is_const()) continue;
        Row r{std::vector<mpq_class>(n), w.rel, mpq_class(-w.e.constant.raw())};
        for (const auto& [v, c] : w.e.terms) r.a[dense[v]] = c.raw();
        srows.push_back(std::move(r));
    }
    for (int j = 0; j < n; ++j)
        if (p.vars[back[j]].kind == VarKind::Prob) {
            Row r{std::vector<mpq_class>(n), Rel::Le, mpq_class(1)};
            r.a[j] = 1;
            srows.push_back(std::move(r));
        }
    std::vector<mpq_class> cost(n);
    for (const auto& [v, c] : obj.terms) cost[dense[v]] = c.raw();

    LPResult inner = run_simplex(n, srows, cost, pivots);
    res.pivots = pivots;
    if (inner.status != LPStatus::Optimal) {
        res.status = inner.status;
        return res;
    }
    res.values.assign(nv, Rational(0));
    for (int j = 0; j < n; ++j) res.values[back[j]] = inner.values[j];
    for (auto it = defs.rbegin(); it != defs.rend(); ++it) res.values[it->first] = it->second.eval(res.values);
    for (const auto& c : p.constraints)
        if (!c.holds(res.values)) throw std::logic_error("simplex returned an assignment violating a constraint");
    for (int v = 0; v < nv; ++v)
        if (res.values[v].sign() < 0 || (p.vars[v].kind == VarKind::Prob && res.values[v] > Rational(1)))
            throw std::logic_error("simplex returned an out-of-bounds assignment");
    res.status = LPStatus::Optimal;
    res.objective = p.objective.eval(res.values);
    return res;
}

// ---------------------------------------------------------------- printing

static std::string var_name(int v, const std::vector<VarInfo>& vars) {
    if (v >= 0 && v < static_cast<int>(vars.size()) && !vars[v].name.empty()) return vars[v].name;
    return "v" + std::to_string(v);
}

std::string lin_str(const LinExpr& e, const std::vector<VarInfo>& vars) {
    std::string s;
    for (const auto& [v, c] : e.terms) {
        Rational a = c;
        if (s.empty()) {
            if (a.sign() < 0) {
                s += "-";
                a = -a;
            }
        } else {
            s += a.sign() < 0 ? " - " : " + ";
            if (a.sign() < 0) a = -a;
        }
        if (a != Rational(1)) s += a.str() + " ";
        s += var_name(v, vars);
    }
    if (s.empty()) return e.constant.str();
    if (!e.constant.is_zero())
        s += (e.constant.sign() < 0 ? " - " : " + ") + (e.constant.sign() < 0 ? -e.constant : e.constant).str();
    return s;
}

std::string constraint_str(const LinConstraint& c, const std::vector<VarInfo>& vars) {
    return lin_str(c.lhs, vars) + " " + rel_str(c.rel) + " " + lin_str(c.rhs, vars);
}

std::string dump_lp(const LPProblem& p) {
    std::ostringstream o;
    o << "\\ prast linear program: " << p.vars.size() << " variables, " << p.constraints.size()
      << " constraints\nMinimize\n obj: " << lin_str(p.objective, p.vars) << "\nSubject To\n";
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& c = p.constraints[i];
        LinExpr l = c.lhs - c.rhs;
        Rational k = -l.constant;
        l.constant = Rational(0);
        o << " c" << i << ": " << lin_str(l, p.vars) << " " << rel_str(c.rel) << " " << k.str();
        if (!c.origin.rule.empty() || c.origin.span.line)
            o << "  \\ " << c.origin.decl << " " << c.origin.rule << " @" << c.origin.span.line << ":"
              << c.origin.span.col;
        o << "\n";
    }
    o << "Bounds\n";
    for (std::size_t v = 0; v < p.vars.size(); ++v) {
        if (p.vars[v].kind == VarKind::Prob)
            o << " 0 <= " << var_name(static_cast<int>(v), p.vars) << " <= 1\n";
        else
            o << " " << var_name(static_cast<int>(v), p.vars) << " >= 0\n";
    }
    o << "End\n";
    return o.str();
}

// ---------------------------------------------------------------- Poly

Poly::Poly(Rational c) {
    if (!c.is_zero()) terms[{-1, -1}] = std::move(c);
}

Poly::Poly(const LinExpr& e) {
    if (!e.constant.is_zero()) terms[{-1, -1}] = e.constant;
    for (const auto& [v, c] : e.terms) terms[{-1, v}] = c;
}

int Poly::degree() const {
    int d = 0;
    for (const auto& [k, c] : terms) d = std::max(d, (k.first >= 0) + (k.second >= 0));
    return d;
}

LinExpr Poly::to_lin() const {
    LinExpr e;
    for (const auto& [k, c] : terms) {
        if (k.first >= 0) throw std::domain_error("polynomial is not linear");
        if (k.second < 0)
            e.constant += c;
        else
            e.add_term(k.second, c);
    }
    return e;
}

Rational Poly::constant() const {
    auto it = terms.find({-1, -1});
    return it == terms.end() ? Rational(0) : it->second;
}

std::vector<std::pair<int, int>> Poly::bilinear_terms() const {
    std::vector<std::pair<int, int>> out;
    for (const auto& [k, c] : terms)
        if (k.first >= 0) out.push_back(k);
    return out;
}

static void poly_add(std::map<std::pair<int, int>, Rational>& t, std::pair<int, int> k, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = t.emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (it->second.is_zero()) t.erase(it);
    }
}

Poly& Poly::operator+=(const Poly& o) {
    for (const auto& [k, c] : o.terms) poly_add(terms, k, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    for (const auto& [k, c] : o.terms) poly_add(terms, k, -c);
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ka, ca] : a.terms)
        for (const auto& [kb, cb] : b.terms) {
            std::vector<int> vs;
            for (int v : {ka.first, ka.second, kb.first, kb.second})
                if (v >= 0) vs.push_back(v);
            if (vs.size() > 2) throw std::domain_error("polynomial degree above 2");
            std::sort(vs.begin(), vs.end());
            std::pair<int, int> k{-1, -1};
            if (vs.size() == 1) k = {-1, vs[0]};
            if (vs.size() == 2) k = {vs[0], vs[1]};
            poly_add(r.terms, k, ca * cb);
        }
    return r;
}

Poly Poly::substitute(int id, const Rational& v) const {
    Poly r;
    for (const auto& [k, c] : terms) {
        auto key = k;
        Rational coeff = c;
        if (key.second == id) {
            coeff *= v;
            key.second = key.first;
            key.first = -1;
        }
        if (key.first == id) {
            coeff *= v;
            key.first = -1;
        }
        if (key.second == id) {  // squared term
            coeff *= v;
            key.second = -1;
        }
        poly_add(r.terms, key, coeff);
    }
    return r;
}

Rational Poly::eval(const std::vector<Rational>& a) const {
    Rational r(0);
    for (const auto& [k, c] : terms) {
        Rational t = c;
        if (k.first >= 0) t *= a.at(k.first);
        if (k.second >= 0) t *= a.at(k.second);
        r += t;
    }
    return r;
}

std::string poly_str(const Poly& p, const std::vector<VarInfo>& vars) {
    std::string s;
    Rational k(0);
    for (const auto& [key, c] : p.terms) {
        if (key.second < 0) {
            k = c;
            continue;
        }
        Rational a = c;
        if (s.empty()) {
            if (a.sign() < 0) {
                s += "-";
                a = -a;
            }
        } else {
            s += a.sign() < 0 ? " - " : " + ";
            if (a.sign() < 0) a = -a;
        }
        if (a != Rational(1)) s += a.str() + " ";
        if (key.first >= 0) s += var_name(key.first, vars) + "·";
        s += var_name(key.second, vars);
    }
    if (s.empty()) return k.str();
    if (!k.is_zero()) s += (k.sign() < 0 ? " - " : " + ") + (k.sign() < 0 ? -k : k).str();
    return s;
}

}  // namespace prast
