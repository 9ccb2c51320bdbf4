#include "prast/runtime.hpp"

namespace prast {

const char* sort_name(Sort s) {
    switch (s) {
        case Sort::Det: return "det";
        case Sort::OPlusP: return "⊕P";
        case Sort::WithP: return "&P";
        case Sort::Top: return "⊤";
    }
    return "?";
}

bool subsort(Sort a, Sort b) { return a == b || b == Sort::Top; }

std::string Obj::global(const std::string& local) const {
    auto it = env.find(local);
    return it == env.end() ? local : it->second;
}

ObjPtr make_dist(std::string chan, std::vector<Universe> branches) {
    auto o = std::make_shared<Obj>();
    o->is_dist = true;
    o->chan = std::move(chan);
    o->branches = std::move(branches);
    return o;
}

namespace {

struct Action {
    bool valid = false;
    bool on_self = false;
    std::string chan;  // global
    Sort sort = Sort::Det;
};

Action action(const Obj& o) {
    Action a;
    const ProcExpr& p = *o.expr;
    switch (p.kind) {
        case ProcKind::Flip:
        case ProcKind::Work:
        case ProcKind::Spawn:
            return a;
        default:
            break;
    }
    a.valid = true;
    a.on_self = p.x == o.self;
    a.chan = o.global(p.x);
    switch (p.kind) {
        case ProcKind::PSendLabel: a.sort = a.on_self ? Sort::OPlusP : Sort::WithP; break;
        case ProcKind::PCase: a.sort = a.on_self ? Sort::WithP : Sort::OPlusP; break;
        case ProcKind::Fwd: a.sort = Sort::Top; break;
        default: a.sort = Sort::Det; break;
    }
    return a;
}

}  // namespace

struct ObjStatus {
    std::set<std::string> left, right;
    bool poised = false, live = false;
    Rational work, settled;  // expected work, mass of fully poised universes
    Rational best;           // heaviest live process
    std::set<ChanSort> cpoised, cblocked, comm;
};

std::shared_ptr<const ObjStatus> StatusCache::get() const {
    std::lock_guard<std::mutex> g(m_);
    return v_;
}

void StatusCache::set(std::shared_ptr<const ObjStatus> s) const {
    std::lock_guard<std::mutex> g(m_);
    if (!v_) v_ = std::move(s);
}

namespace {

// Summary of a composition O1 || (O2 || ...), as a right fold.
struct Fold {
    std::set<std::string> left, right;
    bool poised = true, live = false;
    std::set<ChanSort> cpoised, cblocked, comm;
};

const ObjStatus& summary(const Obj& o);

Fold fold(const Config& c) {
    Fold acc;
    for (std::size_t k = c.size(); k-- > 0;) {
        const ObjStatus& o = summary(*c[k]);
        Fold n;
        for (const auto& x : o.left) if (!acc.right.count(x)) n.left.insert(x);
        for (const auto& x : acc.left) if (!acc.right.count(x)) n.left.insert(x);
        for (const auto& x : o.right) if (!o.left.count(x)) n.right.insert(x);
        for (const auto& x : acc.right) if (!o.left.count(x)) n.right.insert(x);
        n.poised = o.poised && acc.poised;
        n.live = o.live || acc.live;
        // PR:Compose:H for the head, PR:Compose:T when the head does not use d.
        n.cpoised = o.cpoised;
        for (const auto& cs : acc.cpoised)
            if (!o.left.count(cs.first)) n.cpoised.insert(cs);
        // BL:Compose:H when the tail does not provide d, BL:Compose:T always.
        n.cblocked = acc.cblocked;
        for (const auto& cs : o.cblocked)
            if (!acc.right.count(cs.first)) n.cblocked.insert(cs);
        // CM:Compose:C between the head and the tail, otherwise inherited.
        n.comm = acc.comm;
        n.comm.insert(o.comm.begin(), o.comm.end());
        for (const auto& [d, kappa] : o.cblocked)
            for (const auto& [e, kappa2] : acc.cpoised)
                if (d == e && subsort(kappa, kappa2)) n.comm.insert({d, kappa});
        acc = std::move(n);
    }
    return acc;
}

const ObjStatus& summary(const Obj& o) {
    if (auto s = o.status_cache.get()) return *s;
    auto r = std::make_shared<ObjStatus>();
    if (!o.is_dist) {
        for (const auto& [x, t] : o.ctx) r->left.insert(o.global(x));
        r->left.erase(o.chan);
        r->right.insert(o.chan);
        Action a = action(o);
        r->poised = a.valid && a.on_self;
        r->live = !a.valid;
        if (a.valid) (a.on_self ? r->cpoised : r->cblocked).insert({a.chan, a.sort});
        r->work = o.work;
        r->settled = Rational(r->poised ? 1 : 0);
        r->best = Rational(r->live ? 1 : 0);
    } else {
        r->poised = true;
        for (const auto& u : o.branches) {
            Rational w(0), st(1), best(0);
            for (const auto& x : u.cfg) {
                const ObjStatus& xs = summary(*x);
                w += xs.work;
                st *= xs.settled;
                if (xs.best > best) best = xs.best;
            }
            if (u.p * best > r->best) r->best = u.p * best;
            r->work += u.p * w;
            r->settled += u.p * st;
            Fold f = fold(u.cfg);
            r->left.insert(f.left.begin(), f.left.end());
            r->right.insert(f.right.begin(), f.right.end());
            r->poised = r->poised && f.poised;
            r->live = r->live || f.live;
            r->cpoised.insert(f.cpoised.begin(), f.cpoised.end());
            r->cblocked.insert(f.cblocked.begin(), f.cblocked.end());
            r->comm.insert(f.comm.begin(), f.comm.end());
        }
    }
    o.status_cache.set(r);
    return *o.status_cache.get();
}

}  // namespace

std::set<std::string> fv_left(const Obj& o) { return summary(o).left; }
std::set<std::string> fv_right(const Obj& o) { return summary(o).right; }
std::set<std::string> fv_left(const Config& c) { return fold(c).left; }
std::set<std::string> fv_right(const Config& c) { return fold(c).right; }
bool poised(const Obj& o) { return summary(o).poised; }
Rational expected_work(const Obj& o) { return summary(o).work; }
Rational settled_mass(const Obj& o) { return summary(o).settled; }
Rational heaviest_live(const Obj& o) { return summary(o).best; }
bool poised(const Config& c) { return fold(c).poised; }
bool live(const Obj& o) { return summary(o).live; }
bool live(const Config& c) { return fold(c).live; }
std::set<ChanSort> cpoised(const Obj& o) { return summary(o).cpoised; }
std::set<ChanSort> cpoised(const Config& c) { return fold(c).cpoised; }
std::set<ChanSort> cblocked(const Obj& o) { return summary(o).cblocked; }
std::set<ChanSort> cblocked(const Config& c) { return fold(c).cblocked; }
std::set<ChanSort> comm(const Config& c) { return fold(c).comm; }
std::set<ChanSort> comm(const Obj& o) { return summary(o).comm; }

Status status(const Config& c) {
    Fold f = fold(c);
    Status s;
    s.poised = f.poised;
    s.live = f.live;
    s.comm = std::move(f.comm);
    s.cpoised = std::move(f.cpoised);
    s.cblocked = std::move(f.cblocked);
    return s;
}

}  // namespace prast
