#include "prast/runtime.hpp"

#include "prast/parser.hpp"

#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace prast {

namespace {

std::shared_ptr<Obj> copy_proc(const Obj& o) { return std::make_shared<Obj>(o); }

int ctx_index(const Context& ctx, const std::string& x) {
    for (std::size_t i = 0; i < ctx.size(); ++i)
        if (ctx[i].first == x) return static_cast<int>(i);
    return -1;
}

const ProcPtr& alt(const ProcExpr& p, const std::string& label) {
    for (const auto& a : p.alts)
        if (a.label == label) return a.body;
    throw std::logic_error("no branch for label '" + label + "'");
}

TypePtr branch_cont(const TypePtr& h, const std::string& label) {
    int k = h->branch_index(label);
    if (k < 0) throw std::logic_error("label '" + label + "' not in type");
    return h->branches[static_cast<std::size_t>(k)].cont;
}

Config splice(const Config& c, std::size_t i, const Config& frag) {
    Config r(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(i));
    r.insert(r.end(), frag.begin(), frag.end());
    r.insert(r.end(), c.begin() + static_cast<std::ptrdiff_t>(i) + 1, c.end());
    return r;
}

Config concat(const Config& a, const Config& b) {
    Config r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

void collect_work(const Config& c, std::vector<std::string>& out) {
    for (const auto& o : c) {
        if (o->is_dist) {
            for (const auto& u : o->branches) collect_work(u.cfg, out);
        } else {
            out.push_back(o->chan + ":" + o->work.str());
        }
    }
}

}  // namespace

Machine::Machine(const Signature& sig) {
    AuditResult a = audit_signature(sig);
    if (!a.ok()) throw std::invalid_argument("signature does not check: " + a.diags.front().message);
    sig_ = std::make_shared<const Signature>(elaborate(sig, a.coercions));
}

Config Machine::initial(const std::string& entry) const {
    const ProcDef* f = sig_->find_proc(entry);
    if (!f) throw std::invalid_argument("no process named '" + entry + "'");
    if (!f->used.empty()) throw std::invalid_argument("entry '" + entry + "' must have an empty context");
    auto o = std::make_shared<Obj>();
    o->chan = f->offered.name;
    o->work = Rational(0);
    o->expr = f->body;
    o->env[f->offered.name] = f->offered.name;
    o->self = f->offered.name;
    o->offered = f->offered.type;
    o->proc_name = f->name;
    return {o};
}

Step Machine::single_at(const ObjPtr& op) const {
    const Obj& o = *op;
    if (o.is_dist) {
        for (std::size_t b = 0; b < o.branches.size(); ++b) {
            if (!live(o.branches[b].cfg)) continue;
            auto st = step_single(o.branches[b].cfg);
            auto br = o.branches;
            br[b].cfg = st->cfg;
            return {{make_dist(o.chan, std::move(br))}, st->rule, st->chan};
        }
        throw std::logic_error("distribution object is not live");
    }
    const ProcExpr& p = *o.expr;
    switch (p.kind) {
        case ProcKind::Work: {
            auto n = copy_proc(o);
            n->work += p.pot.value;
            n->expr = p.cont;
            return {{n}, "E:Work", o.chan};
        }
        case ProcKind::Flip: {
            std::vector<Universe> br;
            Rational ph = p.prob.value;
            Rational pt = Rational(1) - ph;
            for (int k = 0; k < 2; ++k) {
                Rational w = k == 0 ? ph : pt;
                if (w.is_zero()) continue;
                auto n = copy_proc(o);
                n->expr = p.alts[static_cast<std::size_t>(k)].body;
                br.push_back({{n}, w});
            }
            return {{make_dist(o.chan, std::move(br))}, "E:Flip", o.chan};
        }
        case ProcKind::Spawn: {
            const ProcDef* f = sig_->find_proc(p.callee);
            if (!f) throw std::logic_error("unknown process '" + p.callee + "'");
            std::string b = p.callee + "#" + std::to_string(++fresh_);
            auto child = std::make_shared<Obj>();
            child->chan = b;
            child->work = Rational(0);
            child->expr = f->body;
            child->self = f->offered.name;
            child->offered = f->offered.type;
            child->proc_name = f->name;
            child->env[f->offered.name] = b;
            auto parent = copy_proc(o);
            for (std::size_t k = 0; k < p.args.size(); ++k) {
                int j = ctx_index(parent->ctx, p.args[k]);
                if (j < 0) throw std::logic_error("spawn argument '" + p.args[k] + "' not in context");
                child->env[f->used[k].name] = o.global(p.args[k]);
                child->ctx.emplace_back(f->used[k].name, parent->ctx[static_cast<std::size_t>(j)].second);
                parent->ctx.erase(parent->ctx.begin() + j);
            }
            parent->ctx.emplace_back(p.x, f->offered.type);
            parent->env[p.x] = b;
            parent->expr = p.cont;
            return {{parent, child}, "E:Def", b};
        }
        default:
            throw std::logic_error("process is not live");
    }
}

std::optional<Step> Machine::step_single(const Config& c) const {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!live(*c[i])) continue;
        Step st = single_at(c[i]);
        return Step{splice(c, i, st.cfg), st.rule, st.chan};
    }
    return std::nullopt;
}

Step Machine::base(const ObjPtr& ap, const ObjPtr& bp, const std::string& d) const {
    const Obj& a = *ap;
    const Obj& b = *bp;
    const ProcExpr& pa = *a.expr;
    const ProcExpr& pb = *b.expr;
    const Signature& sig = *sig_;
    auto na = copy_proc(a);
    auto nb = copy_proc(b);
    int ia = ctx_index(a.ctx, pa.x);
    if (ia < 0) throw std::logic_error("client does not hold '" + d + "'");
    auto& ta = na->ctx[static_cast<std::size_t>(ia)].second;
    auto both = [&](const char* rule) { return Step{{na, nb}, rule, d}; };

    if (pb.kind == ProcKind::Fwd) {
        na->env[pa.x] = b.global(pb.y);
        na->work += b.work;
        return {{na}, "C:Id", d};
    }
    auto is_send = [](ProcKind k) { return k == ProcKind::SendLabel || k == ProcKind::PSendLabel; };
    auto is_case = [](ProcKind k) { return k == ProcKind::Case || k == ProcKind::PCase; };
    if (pb.kind == ProcKind::Close && pa.kind == ProcKind::Wait) {
        na->ctx.erase(na->ctx.begin() + ia);
        na->expr = pa.cont;
        na->work += b.work;
        return {{na}, "C:1", d};
    }
    if (is_send(pb.kind) && is_case(pa.kind)) {
        na->expr = alt(pa, pb.label);
        ta = branch_cont(head(ta, sig), pb.label);
        nb->expr = pb.cont;
        nb->offered = branch_cont(head(b.offered, sig), pb.label);
        return both(pb.kind == ProcKind::PSendLabel ? "C:⊕P" : "C:⊕");
    }
    if (is_send(pa.kind) && is_case(pb.kind)) {
        na->expr = pa.cont;
        ta = branch_cont(head(ta, sig), pa.label);
        nb->expr = alt(pb, pa.label);
        nb->offered = branch_cont(head(b.offered, sig), pa.label);
        return both(pa.kind == ProcKind::PSendLabel ? "C:&P" : "C:&");
    }
    if (pb.kind == ProcKind::SendChan && pa.kind == ProcKind::RecvChan) {
        int ie = ctx_index(b.ctx, pb.y);
        if (ie < 0) throw std::logic_error("sent channel '" + pb.y + "' not held");
        TypePtr et = b.ctx[static_cast<std::size_t>(ie)].second;
        nb->ctx.erase(nb->ctx.begin() + ie);
        nb->expr = pb.cont;
        nb->offered = head(b.offered, sig)->right;
        ta = head(ta, sig)->right;
        na->ctx.emplace_back(pa.y, et);
        na->env[pa.y] = b.global(pb.y);
        na->expr = pa.cont;
        return both("C:⊗");
    }
    if (pa.kind == ProcKind::SendChan && pb.kind == ProcKind::RecvChan) {
        int ie = ctx_index(a.ctx, pa.y);
        if (ie < 0) throw std::logic_error("sent channel '" + pa.y + "' not held");
        TypePtr et = a.ctx[static_cast<std::size_t>(ie)].second;
        ta = head(ta, sig)->right;
        na->ctx.erase(na->ctx.begin() + ie);
        na->expr = pa.cont;
        nb->ctx.emplace_back(pb.y, et);
        nb->env[pb.y] = a.global(pa.y);
        nb->offered = head(b.offered, sig)->right;
        nb->expr = pb.cont;
        return both("C:⊸");
    }
    if ((pb.kind == ProcKind::Pay && pa.kind == ProcKind::Get) || (pa.kind == ProcKind::Pay && pb.kind == ProcKind::Get)) {
        ta = head(ta, sig)->left;
        na->expr = pa.cont;
        nb->offered = head(b.offered, sig)->left;
        nb->expr = pb.cont;
        return both(pb.kind == ProcKind::Pay ? "C:▷" : "C:◁");
    }
    throw std::logic_error(std::string("no communication rule for ") + proc_kind_name(pa.kind) + " / " +
                           proc_kind_name(pb.kind) + " on '" + d + "'");
}

Step Machine::comm_in(const Config& c, const std::string& d, Sort k) const {
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Obj& o = *c[i];
        if (o.is_dist) {
            for (std::size_t b = 0; b < o.branches.size(); ++b) {
                if (!comm(o.branches[b].cfg).count({d, k})) continue;
                Step st = comm_in(o.branches[b].cfg, d, k);
                auto br = o.branches;
                br[b].cfg = st.cfg;
                return {splice(c, i, {make_dist(o.chan, std::move(br))}), "C:Dist/" + st.rule, d};
            }
        }
        if (!cblocked(o).count({d, k})) continue;
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            bool found = false;
            for (const auto& [e, k2] : cpoised(*c[j]))
                if (e == d && subsort(k, k2)) found = true;
            if (found) return binary(c, i, j, d, k);
            if (fv_left(*c[j]).count(d)) break;
        }
    }
    throw std::logic_error("no communication on '" + d + "'");
}

std::optional<Step> Machine::step_comm(const Config& c, const std::string& d, Sort k) const {
    if (!comm(c).count({d, k})) return std::nullopt;
    return comm_in(c, d, k);
}

Step Machine::binary(const Config& c, std::size_t i, std::size_t j, const std::string& d, Sort k) const {
    const ObjPtr& a = c[i];
    const ObjPtr& b = c[j];
    Config rest = c;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
    if (!a->is_dist && !b->is_dist) {
        Step st = base(a, b, d);
        Config r = c;
        r[i] = st.cfg[0];
        if (st.cfg.size() > 1) {
            r[j] = st.cfg[1];
        } else {
            r.erase(r.begin() + static_cast<std::ptrdiff_t>(j));
        }
        return {r, st.rule, d};
    }
    std::vector<Universe> br;
    std::string rule;
    if (!a->is_dist) {
        rule = "C:SDist:R";
        for (const auto& u : b->branches) br.push_back({concat({a}, u.cfg), u.p});
    } else if (!b->is_dist) {
        rule = "C:SDist:L";
        for (const auto& u : a->branches) br.push_back({concat(u.cfg, {b}), u.p});
    } else if (k == Sort::Det) {
        rule = "C:BDist:D";
        for (const auto& u : a->branches)
            for (const auto& v : b->branches) br.push_back({concat(u.cfg, v.cfg), u.p * v.p});
    } else if (k == Sort::WithP) {
        rule = "C:BDist:R";
        for (const auto& v : b->branches) br.push_back({concat({a}, v.cfg), v.p});
    } else {
        rule = "C:BDist:L";
        for (const auto& u : a->branches) br.push_back({concat(u.cfg, {b}), u.p});
    }
    // C:Dist on the first universe where the communication is enabled.
    for (std::size_t u = 0; u < br.size(); ++u) {
        if (!comm(br[u].cfg).count({d, k})) continue;
        Step st = comm_in(br[u].cfg, d, k);
        br[u].cfg = st.cfg;
        rest[i] = make_dist(a->chan, std::move(br));
        return {rest, rule + "/" + st.rule, d};
    }
    throw std::logic_error("no universe can communicate on '" + d + "'");
}

std::vector<Machine::Candidate> Machine::singles(const Config& c) const {
    std::vector<Candidate> out;
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::function<void(const Config&, const Rational&)> go = [&](const Config& cfg, const Rational& mass) {
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const Obj& o = *cfg[i];
            if (!live(o)) continue;
            if (o.is_dist) {
                for (std::size_t b = 0; b < o.branches.size(); ++b) {
                    path.emplace_back(i, b);
                    go(o.branches[b].cfg, mass * o.branches[b].p);
                    path.pop_back();
                }
            } else if (live(o)) {
                Candidate cand;
                cand.path = path;
                cand.i = i;
                cand.chan = o.chan;
                cand.mass = mass;
                out.push_back(std::move(cand));
            }
        }
    };
    go(c, Rational(1));
    return out;
}

std::optional<Machine::Candidate> Machine::pick_single(const Config& c, Scheduler s, const Rational& floor) const {
    Candidate cand;
    std::function<bool(const Config&, const Rational&)> leftmost = [&](const Config& cfg, const Rational& mass) {
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const Obj& o = *cfg[i];
            if (mass * heaviest_live(o) < floor) continue;
            if (!o.is_dist) {
                cand.i = i;
                cand.chan = o.chan;
                cand.mass = mass;
                return true;
            }
            for (std::size_t b = 0; b < o.branches.size(); ++b) {
                cand.path.emplace_back(i, b);
                if (leftmost(o.branches[b].cfg, mass * o.branches[b].p)) return true;
                cand.path.pop_back();
            }
        }
        return false;
    };
    if (s == Scheduler::Leftmost) {
        if (!leftmost(c, Rational(1))) return std::nullopt;
        return cand;
    }
    auto best_in = [](const Config& cfg, std::size_t& at) {
        Rational best(0);
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            Rational h = heaviest_live(*cfg[i]);
            if (h > best) {
                best = h;
                at = i;
            }
        }
        return best;
    };
    const Config* cur = &c;
    Rational mass(1);
    while (true) {
        std::size_t i = 0;
        Rational h = best_in(*cur, i);
        if (h.is_zero() || mass * h < floor) return std::nullopt;
        const Obj& o = *(*cur)[i];
        if (!o.is_dist) {
            cand.i = i;
            cand.chan = o.chan;
            cand.mass = mass;
            return cand;
        }
        std::size_t pick = 0;
        Rational top(0);
        for (std::size_t b = 0; b < o.branches.size(); ++b) {
            std::size_t ignored = 0;
            Rational v = o.branches[b].p * best_in(o.branches[b].cfg, ignored);
            if (v > top) {
                top = v;
                pick = b;
            }
        }
        cand.path.emplace_back(i, pick);
        mass *= o.branches[pick].p;
        cur = &o.branches[pick].cfg;
    }
}

std::vector<Machine::Candidate> Machine::comms(const Config& c) const {
    std::vector<Candidate> out;
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::function<void(const Config&, const Rational&)> go = [&](const Config& cfg, const Rational& mass) {
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const Obj& o = *cfg[i];
            if (o.is_dist && !comm(o).empty())
                for (std::size_t b = 0; b < o.branches.size(); ++b) {
                    path.emplace_back(i, b);
                    go(o.branches[b].cfg, mass * o.branches[b].p);
                    path.pop_back();
                }
            for (const auto& [d, k] : cblocked(o)) {
                for (std::size_t j = i + 1; j < cfg.size(); ++j) {
                    bool found = false;
                    for (const auto& [e, k2] : cpoised(*cfg[j]))
                        if (e == d && subsort(k, k2)) found = true;
                    if (found) {
                        Candidate cand;
                        cand.path = path;
                        cand.i = i;
                        cand.j = j;
                        cand.single = false;
                        cand.chan = d;
                        cand.sort = k;
                        cand.mass = mass;
                        out.push_back(std::move(cand));
                        break;
                    }
                    if (fv_left(*cfg[j]).count(d)) break;
                }
            }
        }
    };
    go(c, Rational(1));
    return out;
}

Step Machine::apply(const Config& c, const Candidate& cand) const {
    std::function<Step(const Config&, std::size_t)> go = [&](const Config& cfg, std::size_t depth) -> Step {
        if (depth == cand.path.size()) {
            if (cand.single) {
                Step st = single_at(cfg[cand.i]);
                return {splice(cfg, cand.i, st.cfg), st.rule, st.chan};
            }
            return binary(cfg, cand.i, cand.j, cand.chan, cand.sort);
        }
        auto [i, b] = cand.path[depth];
        const Obj& o = *cfg[i];
        auto br = o.branches;
        Step st = go(br[b].cfg, depth + 1);
        br[b].cfg = st.cfg;
        return {splice(cfg, i, {make_dist(o.chan, std::move(br))}), (cand.single ? "E:Dist/" : "C:Dist/") + st.rule,
                st.chan};
    };
    return go(c, 0);
}

Rational expected_work(const Config& c) {
    Rational r(0);
    for (const auto& o : c) r += expected_work(*o);
    return r;
}

namespace {

FlatDist flatten_obj(const Obj& o, const Rational& floor);

FlatDist flatten_cfg(const Config& c, const Rational& floor) {
    FlatDist acc;
    acc.items.push_back({{}, Rational(1)});
    for (const auto& o : c) {
        FlatDist f = flatten_obj(*o, floor);
        FlatDist next;
        for (const auto& [d1, p1] : acc.items)
            for (const auto& [d2, p2] : f.items) {
                Rational p = p1 * p2;
                if (p < floor) continue;
                auto d = d1;
                d.insert(d.end(), d2.begin(), d2.end());
                next.items.push_back({std::move(d), p});
            }
        acc.items = std::move(next.items);
    }
    return acc;
}

FlatDist flatten_obj(const Obj& o, const Rational& floor) {
    FlatDist r;
    if (!o.is_dist) {
        r.items.push_back({{FlatProc{o.chan, o.work, &o}}, Rational(1)});
        return r;
    }
    for (const auto& u : o.branches) {
        if (u.p < floor) continue;
        FlatDist f = flatten_cfg(u.cfg, floor / u.p);
        for (auto& [d, p] : f.items) r.items.push_back({std::move(d), p * u.p});
    }
    return r;
}

Rational settled(const Config& c) {
    Rational r(1);
    for (const auto& o : c) r *= settled_mass(*o);
    return r;
}

}  // namespace

FlatDist flatten(const Config& c, const Rational& floor) {
    FlatDist r = flatten_cfg(c, floor);
    Rational kept(0);
    for (const auto& it : r.items) kept += it.second;
    r.dropped = Rational(1) - kept;
    return r;
}

Rational unsettled_mass(const Config& c) { return Rational(1) - settled(c); }

LabelDist first_label(const Config& c, const std::string& chan, const Rational& floor) {
    FlatDist f = flatten(c, floor);
    LabelDist r;
    r.dropped = f.dropped;
    for (const auto& [procs, p] : f.items) {
        std::map<std::string, const Obj*> by;
        for (const auto& fp : procs) by[fp.chan] = fp.obj;
        std::string cur = chan;
        std::optional<std::string> label;
        for (std::size_t hops = 0; hops <= procs.size(); ++hops) {
            auto it = by.find(cur);
            if (it == by.end()) break;
            const Obj& o = *it->second;
            const ProcExpr& e = *o.expr;
            if (e.x != o.self) break;
            if (e.kind == ProcKind::Fwd) {
                cur = o.global(e.y);
                continue;
            }
            if (e.kind == ProcKind::SendLabel || e.kind == ProcKind::PSendLabel) label = e.label;
            break;
        }
        if (label) {
            r.labels[*label] += p;
        } else {
            r.pending += p;
        }
    }
    return r;
}

const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Poised: return "poised";
        case RunStatus::Budget: return "budget";
        case RunStatus::Truncated: return "truncated";
        case RunStatus::Stuck: return "stuck";
        case RunStatus::Preservation: return "preservation";
    }
    return "?";
}

namespace {

std::string describe(const ProcExpr& p) {
    std::ostringstream os;
    switch (p.kind) {
        case ProcKind::SendLabel: os << p.x << "." << p.label; break;
        case ProcKind::PSendLabel: os << p.x << ".." << p.label; break;
        case ProcKind::Case: os << "case " << p.x; break;
        case ProcKind::PCase: os << "pcase " << p.x; break;
        case ProcKind::Flip: os << "flip " << p.prob.value.str(); break;
        case ProcKind::SendChan: os << "send " << p.x << " " << p.y; break;
        case ProcKind::RecvChan: os << p.y << " <- recv " << p.x; break;
        case ProcKind::Close: os << "close " << p.x; break;
        case ProcKind::Wait: os << "wait " << p.x; break;
        case ProcKind::Fwd: os << p.x << " <-> " << p.y; break;
        case ProcKind::Spawn: os << p.x << " <- " << p.callee; break;
        case ProcKind::Pay: os << "pay " << p.x; break;
        case ProcKind::Get: os << "get " << p.x; break;
        case ProcKind::Work: os << "work " << p.pot.value.str(); break;
    }
    return os.str();
}

void render(const Config& c, std::ostream& os) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) os << " || ";
        const Obj& o = *c[i];
        if (!o.is_dist) {
            os << "proc(" << o.chan << ")(" << o.work.str() << ", " << describe(*o.expr) << ")";
            continue;
        }
        os << "proc(" << o.chan << "){";
        for (std::size_t b = 0; b < o.branches.size(); ++b) {
            if (b) os << ", ";
            render(o.branches[b].cfg, os);
            os << " : " << o.branches[b].p.str();
        }
        os << "}";
    }
}

}  // namespace

std::string render_config(const Config& c) {
    std::ostringstream os;
    render(c, os);
    return os.str();
}

RunResult run(const Machine& m, const Config& c0, const Rational& q0, const RunOptions& opts) {
    RunResult r;
    r.q0 = q0;
    Config cfg = c0;
    ConfigChecker chk(m.sig());
    ConfigTyping t0;
    std::optional<std::mt19937_64> rng;
    if (opts.seed) rng.emplace(*opts.seed);

    auto check = [&](std::size_t step) -> bool {
        if (!opts.check_steps) return true;
        std::string at = "step " + std::to_string(step) + ": ";
        try {
            ConfigTyping t = chk.check(cfg);
            r.least.push_back(t.q);
            if (step == 0) t0 = t;
            if (t.q > q0) r.violations.push_back(at + "configuration needs potential " + t.q.str() + " > " + q0.str());
            if (t.gamma.size() != t0.gamma.size() || t.out != t0.out)
                r.violations.push_back(at + "external interface changed");
            for (const auto& [x, ty] : t0.gamma) {
                auto it = t.gamma.find(x);
                if (it == t.gamma.end() || !types_equal(ty, it->second, m.sig()))
                    r.violations.push_back(at + "type of '" + x + "' changed");
            }
        } catch (const DiagnosticError& e) {
            r.violations.push_back(at + "ill-typed configuration: " + e.diag.message);
        }
        Status s = status(cfg);
        if (!s.poised && !s.live && s.comm.empty()) r.violations.push_back(at + "stuck but not poised");
        return r.violations.empty();
    };

    r.work.push_back(expected_work(cfg));
    if (opts.track_unsettled) r.unsettled_at.push_back(unsettled_mass(cfg));
    if (!check(0)) {
        r.status = RunStatus::Preservation;
        r.final = cfg;
        r.unsettled = unsettled_mass(cfg);
        return r;
    }
    r.status = RunStatus::Budget;
    for (std::size_t n = 1; n <= opts.budget; ++n) {
        std::vector<Machine::Candidate> cands;
        if (rng) {
            cands = m.singles(cfg);
            std::erase_if(cands, [&](const Machine::Candidate& c) { return c.mass < opts.mass_floor; });
        } else if (auto c = m.pick_single(cfg, opts.scheduler, opts.mass_floor)) {
            cands.push_back(std::move(*c));
        }
        if (cands.empty()) {
            cands = m.comms(cfg);
            std::erase_if(cands, [&](const Machine::Candidate& c) { return c.mass < opts.mass_floor; });
        }
        if (cands.empty()) {
            if (poised(cfg)) {
                r.status = RunStatus::Poised;
            } else if (live(cfg) || !comm(cfg).empty()) {
                r.status = RunStatus::Truncated;
            } else {
                r.status = RunStatus::Stuck;
                r.violations.push_back("step " + std::to_string(n) + ": no step and not poised");
            }
            break;
        }
        std::size_t pick = 0;
        if (rng) {
            pick = std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(*rng);
        } else if (opts.scheduler == Scheduler::Heaviest) {
            // communications; single steps arrive already chosen
            for (std::size_t k = 1; k < cands.size(); ++k)
                if (cands[k].mass > cands[pick].mass) pick = k;
        }
        Step st = m.apply(cfg, cands[pick]);
        cfg = std::move(st.cfg);
        r.steps = n;
        Rational ew = expected_work(cfg);
        if (ew < r.work.back()) r.monotone = false;
        r.work.push_back(ew);
        if (opts.track_unsettled) r.unsettled_at.push_back(unsettled_mass(cfg));
        if (opts.trace) {
            std::vector<std::string> ws;
            collect_work(cfg, ws);
            *opts.trace << n << "\t" << st.rule << "\t" << st.chan << "\t[";
            for (std::size_t k = 0; k < ws.size(); ++k) *opts.trace << (k ? " " : "") << ws[k];
            *opts.trace << "]\n";
        }
        if (!check(n)) {
            r.status = RunStatus::Preservation;
            break;
        }
    }
    if (r.status == RunStatus::Budget && poised(cfg)) r.status = RunStatus::Poised;
    r.final = cfg;
    r.unsettled = unsettled_mass(cfg);
    return r;
}

}  // namespace prast
