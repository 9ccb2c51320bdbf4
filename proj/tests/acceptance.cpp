// One line per acceptance criterion; exit status 1 when any criterion fails.

#include "lp_oracle.hpp"

#include "prast/check.hpp"
#include "prast/parser.hpp"
#include "prast/potential.hpp"
#include "prast/reconstruct.hpp"
#include "prast/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <tuple>

using namespace prast;

namespace {

const std::string root = PRAST_SOURCE_DIR;

std::string slurp(const std::string& name) {
    std::ifstream in(root + "/corpus/" + name + ".prast");
    if (!in) throw std::runtime_error("missing corpus file " + name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Signature load(const std::string& name) { return parse_or_throw(slurp(name)); }

Dist type_dist(const Signature& sig, const std::string& type) {
    const TypeDef* t = sig.find_type(type);
    if (!t) throw std::runtime_error("no type " + type);
    return static_dist(head(t->type, sig));
}

std::string dist_text(const Dist& d) {
    std::string s = "(";
    for (std::size_t k = 0; k < d.size(); ++k) s += (k ? ", " : "") + d[k].str();
    return s + ")";
}

Dist dist(std::initializer_list<Rational> xs) { return Dist(xs); }

struct Tally {
    int failed = 0;
    void line(int n, const std::string& what, bool ok, const std::string& detail) {
        std::cout << "criterion " << n << (n < 10 ? "  " : " ") << (ok ? "PASS" : "FAIL") << "  " << what << ": " << detail
                  << std::endl;
        if (!ok) ++failed;
    }
};

// Runs a closure and turns exceptions into a failure detail.
template <class F>
void guarded(Tally& t, int n, const std::string& what, F&& f) {
    try {
        std::string detail;
        bool ok = f(detail);
        t.line(n, what, ok, detail);
    } catch (const DiagnosticError& e) {
        t.line(n, what, false, "error: " + e.diag.message);
    } catch (const std::exception& e) {
        t.line(n, what, false, std::string("error: ") + e.what());
    }
}

bool rejected_with_probability_diag(const std::string& name, std::string& detail) {
    ReconstructResult r = reconstruct(load(name));
    if (r.ok()) {
        detail += name + " accepted; ";
        return false;
    }
    bool named = false;
    for (const auto& d : r.diags) {
        if (d.message.find("probabilit") != std::string::npos || d.rule.find("P") != std::string::npos) named = true;
    }
    detail += name + " rejected [" + r.diags.front().rule + "] " + r.diags.front().message.substr(0, 80) + "; ";
    return named;
}

struct SimJob {
    std::string file, entry;
    std::uint64_t seed = 0;
};

struct SimStats {
    std::size_t runs = 0, steps = 0, violations = 0, stuck = 0, q_changes = 0;
    std::string first_problem;
};

SimStats simulate_job(const Signature& solved, const std::map<std::string, Rational>& pot, const SimJob& j) {
    SimStats s;
    Machine m(solved);
    Config c0 = m.initial(j.entry);
    RunOptions ro;
    ro.seed = j.seed;
    ro.budget = 500;
    RunResult r = run(m, c0, pot.at(j.entry), ro);
    s.runs = 1;
    s.steps = r.steps;
    s.violations = r.violations.size();
    for (const auto& v : r.violations)
        if (v.find("stuck") != std::string::npos || v.find("no step") != std::string::npos) ++s.stuck;
    if (r.status == RunStatus::Stuck) ++s.stuck;
    for (const auto& q : r.least)
        if (q != r.least.front()) ++s.q_changes;
    if (!r.violations.empty()) s.first_problem = j.file + "/" + j.entry + " seed " + std::to_string(j.seed) + ": " + r.violations.front();
    return s;
}

const std::vector<std::string> corpus_files = {"bool",      "tf",       "tf_costs", "die3",    "die6",
                                               "exp_trials", "fair_coin", "pagerank", "repair",  "rnd_walk",
                                               "lossy_chan", "nats"};

}  // namespace

int main() {
    Tally t;
    auto started = std::chrono::steady_clock::now();

    guarded(t, 1, "TF probability inference", [](std::string& d) {
        ReconstructResult r = reconstruct(load("tf"));
        if (!r.ok()) return d = "rejected", false;
        Dist got = type_dist(*r.sig, "sbool");
        d = "sbool = " + dist_text(got);
        return got == dist({Rational(3, 5), Rational(2, 5)});
    });

    guarded(t, 2, "3-die probability inference", [](std::string& d) {
        ReconstructResult r = reconstruct(load("die3"));
        if (!r.ok()) return d = "rejected", false;
        Dist t1 = type_dist(*r.sig, "T1"), t2 = type_dist(*r.sig, "T2"), t3 = type_dist(*r.sig, "T3");
        d = "T1 = " + dist_text(t1) + ", T2 = " + dist_text(t2) + ", T3 = " + dist_text(t3);
        return t1 == dist({Rational(1, 3), Rational(1, 3), Rational(1, 3)}) &&
               t2 == dist({Rational(2, 3), Rational(1, 6), Rational(1, 6)}) &&
               t3 == dist({Rational(0), Rational(1, 2), Rational(1, 2)});
    });

    guarded(t, 3, "3-die potential inference (flips)", [](std::string& d) {
        InferResult r = infer_potential(load("die3"), CostModel::Flips);
        if (!r.ok()) return d = "rejected", false;
        auto& p = r.rec.potentials;
        d = "q1 = " + p.at("P1").str() + ", q2 = " + p.at("P2").str() + ", q3 = " + p.at("P3").str();
        return p.at("P1") == Rational(8, 3) && p.at("P2") == Rational(7, 3) && p.at("P3") == Rational(1);
    });

    guarded(t, 4, "TF / neg potentials with explicit costs", [](std::string& d) {
        InferResult r = infer_potential(load("tf_costs"), CostModel::Explicit);
        if (!r.ok()) return d = "rejected", false;
        auto& p = r.rec.potentials;
        d = "TF = " + p.at("TF").str() + ", neg = " + p.at("neg").str() + ", neg_bool = " + p.at("neg_bool").str();
        return p.at("TF") == Rational(7, 5) && p.at("neg") == Rational(8, 5) && p.at("neg_bool") == Rational(2);
    });

    guarded(t, 5, "declared types accepted", [](std::string& d) {
        bool ok = true;
        for (const auto& [file, names] : std::vector<std::pair<std::string, std::vector<std::string>>>{
                 {"bool", {"TT", "FF", "TF", "neg", "negneg", "unbias"}}, {"pagerank", {"transition"}}}) {
            ReconstructResult r = reconstruct(load(file));
            for (const auto& n : names) {
                bool here = r.ok() && r.sig->find_proc(n);
                d += n + (here ? " ok " : " REJECTED ");
                ok = ok && here;
            }
        }
        return ok;
    });

    guarded(t, 6, "bad and bad' rejected", [](std::string& d) {
        bool a = rejected_with_probability_diag("bad", d);
        bool b = rejected_with_probability_diag("bad_prime", d);
        return a && b;
    });

    guarded(t, 7, "pagerank transition against limit", [](std::string& d) {
        const std::string limit = "type limit = +{ A^%A : 1, M^%M : 1, N^%N : 1 }\n";
        const std::string transition = R"(
decl transition : (in : limit) |- (out : limit)
proc out <- transition in =
  case in ( A => flip %F1 ( H => out.N ; wait in ; close out
                          | T => out.M ; wait in ; close out )
          | M => out.A ; wait in ; close out
          | N => flip %F2 ( H => out.A ; wait in ; close out
                          | T => out.N ; wait in ; close out ) )
)";
        auto program = [&](std::map<std::string, Rational> v) {
            std::string s = limit + transition;
            for (const auto& [k, x] : v) {
                std::string key = "%" + k;
                for (auto at = s.find(key); at != std::string::npos; at = s.find(key)) s.replace(at, key.size(), x.str());
            }
            return s;
        };
        const std::map<std::string, Rational> base = {{"A", Rational(2, 5)}, {"M", Rational(1, 5)}, {"N", Rational(2, 5)},
                                                       {"F1", Rational(1, 2)}, {"F2", Rational(1, 2)}};
        bool base_ok = reconstruct(parse_or_throw(program(base))).ok();
        // Move 1/100 between two limit labels (keeping the sum 1), or shift a flip by 1/100.
        std::vector<std::map<std::string, Rational>> perturbed;
        const Rational eps(1, 100);
        for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{{"A", "M"}, {"A", "N"}, {"M", "N"}})
            for (int sgn : {1, -1}) {
                auto v = base;
                v[a] += Rational(sgn) * eps;
                v[b] -= Rational(sgn) * eps;
                perturbed.push_back(v);
            }
        for (const std::string f : {"F1", "F2"})
            for (int sgn : {1, -1}) {
                auto v = base;
                v[f] += Rational(sgn) * eps;
                perturbed.push_back(v);
            }
        int rejected = 0;
        for (const auto& v : perturbed) {
            ParseResult pr = parse_program(program(v));
            if (!pr.ok() || !reconstruct(*pr.sig).ok()) ++rejected;
        }
        d = std::string("limit (2/5, 1/5, 2/5) ") + (base_ok ? "accepted" : "REJECTED") + ", " + std::to_string(rejected) + "/" +
            std::to_string(perturbed.size()) + " perturbations rejected";
        return base_ok && rejected == static_cast<int>(perturbed.size());
    });

    // Criteria 8 and 9 share the runs.
    {
        SimStats total;
        std::string err;
        std::size_t programs = 0;
        try {
            std::vector<std::future<SimStats>> jobs;
            std::vector<std::pair<Signature, std::map<std::string, Rational>>> solved;
            solved.reserve(corpus_files.size());
            std::vector<SimJob> todo;
            for (const auto& f : corpus_files) {
                InferResult ir = infer_potential(load(f), CostModel::Explicit);
                if (!ir.ok()) throw std::runtime_error(f + " does not check");
                solved.emplace_back(*ir.rec.sig, ir.rec.potentials);
                for (const auto& p : solved.back().first.procs) {
                    if (!p.used.empty()) continue;
                    ++programs;
                    for (std::uint64_t seed = 1; seed <= 10; ++seed) todo.push_back({f, p.name, seed});
                }
            }
            for (const auto& j : todo) {
                std::size_t k = 0;
                while (corpus_files[k] != j.file) ++k;
                const auto* s = &solved[k];
                jobs.push_back(std::async(std::launch::async, [s, j] { return simulate_job(s->first, s->second, j); }));
            }
            for (auto& f : jobs) {
                SimStats s = f.get();
                total.runs += s.runs;
                total.steps += s.steps;
                total.violations += s.violations;
                total.stuck += s.stuck;
                total.q_changes += s.q_changes;
                if (total.first_problem.empty()) total.first_problem = s.first_problem;
            }
        } catch (const std::exception& e) {
            err = e.what();
        }
        std::string base = std::to_string(programs) + " closed processes x 10 seeds, " + std::to_string(total.runs) + " runs, " +
                           std::to_string(total.steps) + " steps";
        if (!err.empty()) {
            t.line(8, "preservation", false, "error: " + err);
            t.line(9, "progress", false, "error: " + err);
        } else {
            bool pres = total.violations == total.stuck && total.q_changes == 0;
            t.line(8, "preservation", pres,
                   base + ", " + std::to_string(total.violations - total.stuck) + " violations, " +
                       std::to_string(total.q_changes) + " steps with a different least q" +
                       (total.first_problem.empty() ? "" : "; first: " + total.first_problem));
            t.line(9, "progress", total.stuck == 0, base + ", " + std::to_string(total.stuck) + " stuck-not-poised states");
        }
    }

    guarded(t, 10, "expected-work bound (flips)", [](std::string& d) {
        bool ok = true;
        const Rational tail(1, 1000), close(1, 100);
        for (const auto& [file, entry] : std::vector<std::pair<std::string, std::string>>{
                 {"die3", "P1"}, {"exp_trials", "trials"}, {"fair_coin", "fair"}}) {
            InferResult ir = infer_potential(load(file), CostModel::Flips);
            if (!ir.ok()) {
                d += file + " rejected; ";
                ok = false;
                continue;
            }
            Rational q = ir.rec.potentials.at(entry);
            Machine m(*ir.rec.sig);
            RunOptions ro;
            ro.scheduler = Scheduler::Heaviest;
            ro.track_unsettled = true;
            ro.check_steps = false;
            ro.budget = 20000;
            // Stop at the first step whose unsettled mass is below the tail bound.
            RunResult r = run(m, m.initial(entry), q, ro);
            std::size_t at = 0;
            while (at < r.unsettled_at.size() && r.unsettled_at[at] >= tail) ++at;
            bool bound = true;
            for (std::size_t k = 0; k < r.work.size() && k <= at; ++k)
                if (r.work[k] > q) bound = false;
            bool reached = at < r.unsettled_at.size();
            Rational w = reached ? r.work[at] : r.work.back();
            bool near = reached && q - w <= close;
            d += file + ": q = " + q.str() + ", step " + std::to_string(at) + " E[work] = " + std::to_string(w.to_double()) +
                 (bound ? "" : " BOUND BROKEN") + (r.monotone ? "" : " NOT MONOTONE") + (near ? "" : " NOT WITHIN 1/100") + "; ";
            ok = ok && bound && r.monotone && near;
        }
        return ok;
    });

    guarded(t, 11, "first-label distributions", [](std::string& d) {
        auto exhaust = [](const std::string& file, const std::string& entry, const Rational& tail, Rational& unsettled) {
            InferResult ir = infer_potential(load(file), CostModel::Explicit);
            if (!ir.ok()) throw std::runtime_error(file + " rejected");
            Machine m(*ir.rec.sig);
            RunOptions ro;
            ro.scheduler = Scheduler::Heaviest;
            ro.check_steps = false;
            ro.track_unsettled = true;
            ro.budget = 20000;
            Config c = m.initial(entry);
            std::string chan = c.front()->chan;
            RunResult r = run(m, c, ir.rec.potentials.at(entry), ro);
            unsettled = r.unsettled;
            if (r.unsettled >= tail && r.status != RunStatus::Poised) throw std::runtime_error(file + " did not converge");
            return first_label(r.final, chan);
        };
        bool ok = true;
        Rational u;
        LabelDist tf = exhaust("tf", "TF", Rational(0), u);
        bool tf_ok = tf.labels["true"] == Rational(3, 5) && tf.labels["false"] == Rational(2, 5) && tf.pending.is_zero();
        d += "TF true " + tf.labels["true"].str() + " false " + tf.labels["false"].str() + "; ";
        LabelDist ub = exhaust("bool", "main", Rational(0), u);
        bool ub_ok = ub.labels["true"] == Rational(1, 2) && ub.labels["false"] == Rational(1, 2) && ub.pending.is_zero();
        d += "unbias.TF true " + ub.labels["true"].str() + " false " + ub.labels["false"].str() + "; ";

        // Oracle: absorption probabilities of the seven-state coin walk, solved by the LP solver.
        // succ[s] = {heads, tails}; values >= 7 are faces 1..6 (7 + face - 1).
        const int succ[7][2] = {{1, 2}, {3, 4}, {5, 6}, {1, 7}, {8, 9}, {10, 11}, {12, 2}};
        std::vector<Rational> oracle;
        for (int face = 0; face < 6; ++face) {
            LPProblem p;
            for (int s = 0; s < 7; ++s) p.new_var(VarKind::Prob, "x" + std::to_string(s));
            for (int s = 0; s < 7; ++s) {
                LinExpr rhs;
                for (int b = 0; b < 2; ++b) {
                    int n = succ[s][b];
                    if (n < 7)
                        rhs += LinExpr::var(n, Rational(1, 2));
                    else if (n - 7 == face)
                        rhs += LinExpr(Rational(1, 2));
                }
                p.add(LinExpr::var(s), Rel::Eq, rhs);
            }
            LPResult lr = solve(p);
            if (lr.status != LPStatus::Optimal) throw std::runtime_error("oracle system infeasible");
            oracle.push_back(lr.values[0]);
        }
        LabelDist six = exhaust("die6", "die", Rational(1, 1000), u);
        bool six_ok = true;
        Rational worst(0);
        for (int face = 0; face < 6; ++face) {
            Rational got = six.labels["d" + std::to_string(face + 1)];
            Rational diff = got > oracle[face] ? got - oracle[face] : oracle[face] - got;
            worst = max(worst, diff);
            if (oracle[face] != Rational(1, 6) || diff > Rational(1, 1000)) six_ok = false;
        }
        d += "die6 oracle " + oracle[0].str() + " per face, max deviation " + std::to_string(worst.to_double()) +
             " (unsettled " + std::to_string(u.to_double()) + ")";
        ok = tf_ok && ub_ok && six_ok;
        return ok;
    });

    guarded(t, 12, "LP optimum equals vertex enumeration", [](std::string& d) {
        std::mt19937 g(20240611);
        int agree = 0, total = 200;
        std::string first_bad;
        for (int k = 0; k < total; ++k) {
            LPProblem p = testing::random_feasible_lp(g);
            LPResult r = solve(p);
            auto brute = testing::vertex_min(p);
            bool same = brute && r.status == LPStatus::Optimal && r.objective == *brute;
            if (same) ++agree;
            else if (first_bad.empty()) first_bad = "; first mismatch at system " + std::to_string(k);
        }
        d = std::to_string(agree) + "/" + std::to_string(total) + " systems agree" + first_bad;
        return agree == total;
    });

    guarded(t, 13, "parser round-trip", [](std::string& d) {
        const std::vector<std::string> table = {"die3",     "die6",   "exp_trials", "fair_coin",  "pagerank",
                                                "repair",   "rnd_walk", "lossy_chan", "nats"};
        std::vector<std::string> all = corpus_files;
        all.push_back("bad");
        all.push_back("bad_prime");
        int good = 0, table_good = 0;
        for (const auto& f : all) {
            Signature a = load(f);
            std::string text = pretty_print(a);
            Signature b = parse_or_throw(text);
            if (same_signature(a, b) && pretty_print(b) == text) {
                ++good;
                if (std::find(table.begin(), table.end(), f) != table.end()) ++table_good;
            } else {
                d += f + " differs; ";
            }
        }
        d += std::to_string(good) + "/" + std::to_string(all.size()) + " programs round-trip, " + std::to_string(table_good) +
             "/9 of the benchmark set";
        return good == static_cast<int>(all.size()) && table_good == 9;
    });

    // Order-of-magnitude comparison with reference benchmark counts; informational only.
    {
        const std::vector<std::tuple<std::string, int, int>> reference = {
            {"die3", 24, 72},      {"die6", 54, 160},    {"exp_trials", 8, 24}, {"fair_coin", 20, 54}, {"pagerank", 34, 105},
            {"repair", 39, 118},   {"rnd_walk", 32, 96}, {"lossy_chan", 19, 59}, {"nats", 48, 137}};
        int within = 0;
        std::string line;
        for (const auto& [f, v, c] : reference) {
            InferResult ir = infer_potential(load(f), CostModel::Explicit);
            auto in3 = [](std::size_t ours, int theirs) { return 3 * ours >= std::size_t(theirs) && ours <= 3 * std::size_t(theirs); };
            bool ok = in3(ir.rec.stats.vars, v) && in3(ir.rec.stats.cons, c);
            within += ok;
            line += " " + f + " " + std::to_string(ir.rec.stats.vars) + "/" + std::to_string(ir.rec.stats.cons) + " vs " +
                    std::to_string(v) + "/" + std::to_string(c) + (ok ? "" : "*");
        }
        std::cout << "info         vars/constraints within 3x of the reference counts for " << within << "/9 programs:" << line
                  << " (* outside)" << std::endl;
    }

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << (t.failed ? std::to_string(t.failed) + " criteria failed" : std::string("all criteria passed")) << " in "
              << secs << " s" << std::endl;
    return t.failed ? 1 : 0;
}
