#include "support.hpp"

#include "prast/check.hpp"
#include "prast/potential.hpp"
#include "prast/reconstruct.hpp"
#include "prast/synth.hpp"

#include <doctest.h>

using namespace prast;

namespace {

const char* accepted[] = {"bool", "tf", "tf_costs", "die3", "die6", "exp_trials", "fair_coin",
                          "pagerank", "repair", "rnd_walk", "lossy_chan", "nats"};

bool message_has(const ReconstructResult& r, const std::string& what) {
    for (const auto& d : r.diags)
        if (d.message.find(what) != std::string::npos) return true;
    return false;
}

// Solved signature: every annotation a constant.
Signature solved(const std::string& name) {
    InferResult ir = infer_potential(testing::corpus(name), CostModel::Explicit);
    REQUIRE(ir.ok());
    return *ir.rec.sig;
}

// Moves `delta` from one outer label of a probabilistic type definition to another.
std::optional<Signature> shift(const Signature& s, std::size_t type, std::size_t from, std::size_t to, const Rational& delta) {
    const TypePtr& t = s.types[type].type;
    if (!t->is_prob_choice() || from == to || from >= t->branches.size() || to >= t->branches.size()) return std::nullopt;
    Dist d = static_dist(t);
    d[from] -= delta;
    d[to] += delta;
    if (d[from].sign() < 0 || d[to] > Rational(1)) return std::nullopt;
    Signature m = s;
    m.types[type].type = with_dist(t, d);
    return m;
}

}  // namespace

TEST_CASE("corpus programs check") {
    for (const char* name : accepted) {
        INFO(name);
        ReconstructResult r = reconstruct(testing::corpus(name));
        CHECK(r.ok());
        CHECK_FALSE(r.audit_failed);
    }
}

TEST_CASE("bad: a flip cannot send a label whose type probability is 1") {
    ReconstructResult r = reconstruct(testing::corpus("bad"));
    REQUIRE_FALSE(r.ok());
    CHECK(r.diags.front().rule == "⊕P R");
    CHECK(message_has(r, "must be 1"));
}

TEST_CASE("bad': no probability assignment exists") {
    ReconstructResult r = reconstruct(testing::corpus("bad_prime"));
    REQUIRE_FALSE(r.ok());
    CHECK(message_has(r, "no probability/potential assignment"));
    // the conflicting constraints are listed as notes
    CHECK(r.diags.size() > 1);
}

TEST_CASE("negneg composes two negations") {
    Signature s = testing::corpus("bool");
    ReconstructResult r = reconstruct(s);
    REQUIRE(r.ok());
    // calling neg twice is ill-typed: its output is npbool, its input pbool
    Signature twice = parse_or_throw(testing::corpus_text("bool") + R"(
decl negneg2 : (b : pbool) |- (d : pbool)
proc d <- negneg2 b = c <- neg b ; d <- neg c
)");
    CHECK_FALSE(reconstruct(twice).ok());
}

TEST_CASE("weighted sums are shallow") {
    // nested labels would have to mix across the flip
    ReconstructResult nested = reconstruct(parse_or_throw(R"(
type t = +{ a^1 : +{ x^0.5 : 1, y^0.5 : 1 } }
decl p : . |- (c : t)
proc c <- p = flip 0.5 ( H => c.a ; c.x ; close c | T => c.a ; c.y ; close c )
)"));
    CHECK_FALSE(nested.ok());
    ReconstructResult outer = reconstruct(parse_or_throw(R"(
type t = +{ a^0.5 : +{ x^1 : 1, y^0 : 1 }, b^0.5 : +{ x^0 : 1, y^1 : 1 } }
decl p : . |- (c : t)
proc c <- p = flip 0.5 ( H => c.a ; c.x ; close c | T => c.b ; c.y ; close c )
)"));
    CHECK(outer.ok());
}

TEST_CASE("linearity") {
    CHECK_FALSE(reconstruct(parse_or_throw("decl p : (b : 1) |- (c : 1)\nproc c <- p b = close c\n")).ok());
    CHECK_FALSE(reconstruct(parse_or_throw(R"(
type bool = +{ t : 1, f : 1 }
decl p : (b : bool) |- (c : bool)
proc c <- p b = case b ( t => c.t ; close c | f => c.f ; wait b ; close c )
)")).ok());
}

TEST_CASE("synthesizer computes output distributions directly") {
    Signature s = solved("bool");
    const ProcDef* tf = s.find_proc("TF");
    Synthesizer syn(s);
    SynthOut out = syn.run(tf->body, {}, tf->offered.name, tf->offered.type, {});
    REQUIRE(out.offered);
    CHECK(*out.offered == Dist{Rational(3, 5), Rational(2, 5)});
    CHECK(out.q == Rational(0));

    const ProcDef* unb = s.find_proc("unbias");
    Context ctx{{unb->used[0].name, unb->used[0].type}};
    SynthInputs in;
    in.used["b"] = Dist{Rational(1, 10), Rational(9, 10)};
    SynthOut u = syn.run(unb->body, ctx, unb->offered.name, unb->offered.type, in);
    REQUIRE(u.offered);
    CHECK(*u.offered == Dist{Rational(1, 2), Rational(1, 2)});  // unbiased for every input
}

TEST_CASE("both routes accept every solved corpus program") {
    for (const char* name : accepted) {
        INFO(name);
        Signature s = solved(name);
        AuditResult a = audit_signature(s);
        CHECK(a.ok());
        ConstraintSet cs;
        Coercions co;
        for (const auto& d : s.procs) CHECK_NOTHROW(check_decl_constraints(s, d, cs, co));
        CHECK(reconstruct(s).ok());
    }
}

TEST_CASE("property: probability mutations are rejected by both routes alike") {
    std::mt19937 g(17);
    const Rational deltas[] = {Rational(1, 100), Rational(1, 10), Rational(1, 3), Rational(1, 2)};
    int rejected = 0, tried = 0;
    for (const char* name : accepted) {
        Signature s = solved(name);
        for (int k = 0; k < 12; ++k) {
            if (s.types.empty()) break;
            std::size_t ti = std::uniform_int_distribution<std::size_t>(0, s.types.size() - 1)(g);
            std::size_t n = s.types[ti].type->branches.size();
            if (n < 2) continue;
            std::size_t a = std::uniform_int_distribution<std::size_t>(0, n - 1)(g);
            std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 1)(g);
            auto m = shift(s, ti, a, b, deltas[k % 4]);
            if (!m) continue;
            INFO(name << " type " << s.types[ti].name);
            ++tried;
            bool lp = reconstruct(*m).ok();
            bool direct = audit_signature(*m).ok();
            CHECK(lp == direct);
            if (!lp) ++rejected;
        }
    }
    CHECK(tried > 20);
    CHECK(rejected > 0);
}

TEST_CASE("swapping unequal probabilities of a produced type is rejected") {
    struct Case {
        const char* file;
        const char* type;
    };
    for (Case c : {Case{"bool", "pbool"}, Case{"pagerank", "limit"}, Case{"repair", "state"}, Case{"tf", "sbool"},
                   Case{"die3", "T2"}}) {
        INFO(c.file << " " << c.type);
        Signature s = solved(c.file);
        std::size_t ti = 0;
        while (s.types[ti].name != c.type) ++ti;
        Dist d = static_dist(s.types[ti].type);
        std::size_t i = 0, j = 1;
        while (d[i] == d[j]) ++j;
        std::swap(d[i], d[j]);
        Signature m = s;
        m.types[ti].type = with_dist(s.types[ti].type, d);
        CHECK_FALSE(reconstruct(m).ok());
        CHECK_FALSE(audit_signature(m).ok());
    }
}

TEST_CASE("property: lowering a tight potential is rejected by both routes") {
    for (const char* name : {"tf_costs", "lossy_chan", "nats"}) {
        Signature s = solved(name);
        AuditResult a = audit_signature(s);
        REQUIRE(a.ok());
        for (std::size_t k = 0; k < s.procs.size(); ++k) {
            Rational least = a.decls[k].min_potential;
            if (least.is_zero()) continue;
            INFO(name << " " << s.procs[k].name);
            Signature m = s;
            m.procs[k].potential = Pot::constant(least - Rational(1, 100));
            CHECK_FALSE(audit_signature(m).ok());
            CHECK_FALSE(reconstruct(m).ok());
            m.procs[k].potential = Pot::constant(least);
            CHECK(audit_signature(m).ok());
            CHECK(reconstruct(m).ok());
        }
    }
}
