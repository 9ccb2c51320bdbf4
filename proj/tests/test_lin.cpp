#include "lp_oracle.hpp"

#include <doctest.h>

using namespace prast;

namespace {

LinExpr v(int id, Rational k = Rational(1)) { return LinExpr::var(id, k); }

}  // namespace

TEST_CASE("linear expressions") {
    LinExpr e = v(0, Rational(2)) + v(1) + LinExpr(3);
    CHECK(e.coeff(0) == Rational(2));
    CHECK(e.coeff(5) == Rational(0));
    LinExpr z = e - v(1);
    CHECK(z.terms.count(1) == 0);  // zero coefficients vanish
    CHECK(e.eval({Rational(1), Rational(1, 2)}) == Rational(11, 2));
    LinExpr s = e.substitute(0, v(1) + LinExpr(1));
    CHECK(s == v(1, Rational(3)) + LinExpr(5));
}

TEST_CASE("three-sided die probability system") {
    // T1 = 1/2 T2 + 1/2 T3, T2 = 1/2 one + 1/2 T1, T3 = 1/2 two + 1/2 three
    LPProblem p;
    int t1[3], t2[3], t3[3];
    for (int k = 0; k < 3; ++k) {
        t1[k] = p.new_var(VarKind::Prob, "a" + std::to_string(k));
        t2[k] = p.new_var(VarKind::Prob, "b" + std::to_string(k));
        t3[k] = p.new_var(VarKind::Prob, "c" + std::to_string(k));
    }
    for (int k = 0; k < 3; ++k) {
        p.add(v(t1[k]), Rel::Eq, v(t2[k], Rational(1, 2)) + v(t3[k], Rational(1, 2)));
        p.add(v(t2[k]), Rel::Eq, LinExpr(k == 0 ? Rational(1, 2) : Rational(0)) + v(t1[k], Rational(1, 2)));
    }
    p.add(v(t3[0]), Rel::Eq, LinExpr(0));
    p.add(v(t3[1]), Rel::Eq, LinExpr(Rational(1, 2)));
    p.add(v(t3[2]), Rel::Eq, LinExpr(Rational(1, 2)));
    for (bool pre : {true, false}) {
        LPResult r = solve(p, {pre});
        REQUIRE(r.status == LPStatus::Optimal);
        CHECK(r.values[t1[0]] == Rational(1, 3));
        CHECK(r.values[t1[2]] == Rational(1, 3));
        CHECK(r.values[t2[0]] == Rational(2, 3));
        CHECK(r.values[t2[1]] == Rational(1, 6));
        for (const auto& c : p.constraints) CHECK(c.holds(r.values));
    }
}

TEST_CASE("three-sided die potential system under the flip cost") {
    // q1 >= 1 + (q2 + q3)/2, q2 >= 1 + q1/2, q3 >= 1
    LPProblem p;
    int q1 = p.new_var(VarKind::Pot, "q1"), q2 = p.new_var(VarKind::Pot, "q2"), q3 = p.new_var(VarKind::Pot, "q3");
    p.add(v(q1), Rel::Ge, LinExpr(1) + v(q2, Rational(1, 2)) + v(q3, Rational(1, 2)));
    p.add(v(q2), Rel::Ge, LinExpr(1) + v(q1, Rational(1, 2)));
    p.add(v(q3), Rel::Ge, LinExpr(1));
    p.objective = v(q1) + v(q2) + v(q3);
    LPResult r = solve(p);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.values[q1] == Rational(8, 3));
    CHECK(r.values[q2] == Rational(7, 3));
    CHECK(r.values[q3] == Rational(1));
    CHECK(r.objective == Rational(6));
}

TEST_CASE("infeasible and unbounded") {
    LPProblem p;
    int x = p.new_var(VarKind::Prob, "x");
    p.add(v(x), Rel::Ge, LinExpr(Rational(1, 2)));
    p.add(v(x), Rel::Le, LinExpr(Rational(1, 3)));
    CHECK(solve(p).status == LPStatus::Infeasible);

    LPProblem b;
    int y = b.new_var(VarKind::Prob, "y");
    b.add(v(y), Rel::Eq, LinExpr(Rational(3, 2)));  // probabilities stay below 1
    CHECK(solve(b).status == LPStatus::Infeasible);

    LPProblem u;
    int z = u.new_var(VarKind::Pot, "z");
    u.add(v(z), Rel::Ge, LinExpr(1));
    u.objective = v(z, Rational(-1));
    CHECK(solve(u).status == LPStatus::Unbounded);
}

TEST_CASE("degenerate and redundant rows") {
    LPProblem p;
    int x = p.new_var(VarKind::Pot, "x"), y = p.new_var(VarKind::Pot, "y");
    p.add(v(x) + v(y), Rel::Eq, LinExpr(2));
    p.add(v(x, Rational(2)) + v(y, Rational(2)), Rel::Eq, LinExpr(4));
    p.add(LinExpr(0), Rel::Le, LinExpr(1));
    p.add(v(x), Rel::Le, LinExpr(2));
    p.objective = v(x) - v(y);
    LPResult r = solve(p);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.objective == Rational(-2));
}

TEST_CASE("dump format") {
    LPProblem p;
    int x = p.new_var(VarKind::Prob, "p_true");
    p.add(v(x), Rel::Eq, LinExpr(Rational(3, 5)), Origin{{}, "flip", "TF", ""});
    std::string s = dump_lp(p);
    CHECK(s.find("Minimize") != std::string::npos);
    CHECK(s.find("p_true = 3/5") != std::string::npos);
    CHECK(s.find("0 <= p_true <= 1") != std::string::npos);
}

TEST_CASE("polynomials") {
    Poly a = Poly::var(0) * Poly::var(1) + Poly(Rational(2));
    CHECK(a.degree() == 2);
    CHECK_FALSE(a.is_linear());
    CHECK(a.bilinear_terms().size() == 1);
    Poly b = a.substitute(0, Rational(1, 2));
    CHECK(b.is_linear());
    CHECK(b.to_lin() == v(1, Rational(1, 2)) + LinExpr(2));
    CHECK_THROWS_AS(a * Poly::var(2), std::domain_error);
    CHECK(a.eval({Rational(2), Rational(3)}) == Rational(8));
}

TEST_CASE("property: simplex agrees with vertex enumeration") {
    std::mt19937 g(99);
    for (int k = 0; k < 150; ++k) {
        LPProblem p = testing::random_feasible_lp(g);
        auto brute = testing::vertex_min(p);
        REQUIRE(brute.has_value());
        for (bool pre : {true, false}) {
            LPResult r = solve(p, {pre});
            INFO(dump_lp(p));
            REQUIRE(r.status == LPStatus::Optimal);
            CHECK(r.objective == *brute);
            CHECK(p.objective.eval(r.values) == r.objective);
            for (const auto& c : p.constraints) CHECK(c.holds(r.values));
            for (std::size_t i = 0; i < r.values.size(); ++i) {
                CHECK(r.values[i].sign() >= 0);
                if (p.vars[i].kind == VarKind::Prob) CHECK(r.values[i] <= Rational(1));
            }
        }
    }
}

TEST_CASE("property: adding a violated row makes a system infeasible") {
    std::mt19937 g(5);
    for (int k = 0; k < 50; ++k) {
        LPProblem p = testing::random_feasible_lp(g);
        LinExpr sum;
        for (std::size_t i = 0; i < p.vars.size(); ++i) sum += v(static_cast<int>(i));
        p.add(sum, Rel::Le, LinExpr(-1));
        CHECK(solve(p).status == LPStatus::Infeasible);
        CHECK_FALSE(testing::vertex_min(p).has_value());
    }
}
