#include "prast/parser.hpp"
#include "prast/runtime.hpp"

#include <functional>
#include <sstream>

namespace prast {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw DiagnosticError(Diagnostic{Span{}, where + ": " + msg, "config"});
}

TypeKind head_kind(const TypePtr& t, const Signature& sig) { return head(t, sig)->kind; }

std::string where_of(const Obj& o, const std::string& outer) {
    std::string w = outer.empty() ? "" : outer + " / ";
    return w + "proc(" + o.chan + ")" + (o.is_dist ? "{...}" : " [" + o.proc_name + "]");
}

}  // namespace

const ConfigChecker::Iface& ConfigChecker::iface(const Obj& o) {
    auto it = iface_.find(&o);
    if (it != iface_.end()) return it->second;
    Iface r;
    if (!o.is_dist) {
        for (const auto& [x, t] : o.ctx) r.left[o.global(x)] = t;
        r.right[o.chan] = o.offered;
    } else {
        if (o.branches.empty()) fail(where_of(o, ""), "distribution without universes");
        r = iface(o.branches[0].cfg);
        Rational total(0);
        for (std::size_t b = 0; b < o.branches.size(); ++b) {
            if (o.branches[b].p.sign() <= 0) fail(where_of(o, ""), "universe with probability " + o.branches[b].p.str());
            total += o.branches[b].p;
            if (b == 0) continue;
            Iface s = iface(o.branches[b].cfg);
            auto agree = [&](const std::map<std::string, TypePtr>& x, const std::map<std::string, TypePtr>& y) {
                if (x.size() != y.size()) return false;
                for (const auto& [c, t] : x) {
                    auto jt = y.find(c);
                    if (jt == y.end() || !types_equal(t, jt->second, sig_)) return false;
                }
                return true;
            };
            if (!agree(r.left, s.left) || !agree(r.right, s.right))
                fail(where_of(o, ""), "universes have different interfaces");
        }
        if (total != Rational(1)) fail(where_of(o, ""), "universe probabilities sum to " + total.str());
    }
    return iface_.emplace(&o, std::move(r)).first->second;
}

ConfigChecker::Iface ConfigChecker::iface(const Config& c) {
    Iface acc;
    for (std::size_t k = c.size(); k-- > 0;) {
        const Iface& o = iface(*c[k]);
        Iface n;
        for (const auto& [d, t] : o.left) {
            auto it = acc.right.find(d);
            if (it == acc.right.end()) {
                n.left[d] = t;
            } else if (!types_equal(t, it->second, sig_)) {
                fail(where_of(*c[k], ""), "uses '" + d + "' at " + print_type(t) + " but it is provided at " +
                                              print_type(it->second));
            }
        }
        for (const auto& [d, t] : acc.left)
            if (!acc.right.count(d)) n.left[d] = t;
        for (const auto& [d, t] : o.right) {
            if (acc.left.count(d)) fail(where_of(*c[k], ""), "provides '" + d + "' to the right of its client");
            if (acc.right.count(d)) fail(where_of(*c[k], ""), "'" + d + "' is provided twice");
            n.right[d] = t;
        }
        for (const auto& [d, t] : acc.right)
            if (!o.left.count(d)) n.right[d] = t;
        acc = std::move(n);
    }
    return acc;
}

ConfigChecker::Typed ConfigChecker::type_obj(const Obj& o, const std::map<std::string, Dist>& in,
                                             const std::string& outer) {
    std::string where = where_of(o, outer);
    Typed r;
    if (o.is_dist) {
        r.q = Rational(0);
        for (std::size_t b = 0; b < o.branches.size(); ++b) {
            const auto& u = o.branches[b];
            Typed t = type_config(u.cfg, in, where + "#" + std::to_string(b));
            r.q += u.p * t.q;
            for (const auto& [c, d] : t.out) {
                auto& acc = r.out[c];
                if (acc.empty()) acc.assign(d.size(), Rational(0));
                for (std::size_t k = 0; k < d.size(); ++k) acc[k] += u.p * d[k];
            }
        }
        return r;
    }
    SynthInputs si;
    std::ostringstream key;
    key << o.expr.get() << '|' << o.self << '|' << o.offered.get();
    for (const auto& [x, t] : o.ctx) {
        key << '|' << x << ':' << t.get();
        auto it = in.find(o.global(x));
        if (it != in.end() && head_kind(t, sig_) == TypeKind::PIChoice) {
            si.used[x] = it->second;
            key << '=';
            for (const auto& v : it->second) key << v.str() << ',';
        }
    }
    auto it = in.find(o.chan);
    if (it != in.end() && head_kind(o.offered, sig_) == TypeKind::PEChoice) {
        si.offered = it->second;
        key << "|>";
        for (const auto& v : it->second) key << v.str() << ',';
    }
    auto mt = memo_.find(key.str());
    if (mt == memo_.end()) {
        try {
            mt = memo_.emplace(key.str(), synth_.run(o.expr, o.ctx, o.self, o.offered, si)).first;
        } catch (const DiagnosticError& e) {
            fail(where, e.diag.message + " (" + e.diag.rule + ")");
        } catch (const TypeError& e) {
            fail(where, e.what());
        }
    }
    const SynthOut& s = mt->second;
    r.q = s.q + o.work;
    if (s.offered) r.out[o.chan] = *s.offered;
    for (const auto& [x, d] : s.used) r.out[o.global(x)] = d;
    return r;
}

ConfigChecker::Typed ConfigChecker::type_config(const Config& c, const std::map<std::string, Dist>& in,
                                                const std::string& where) {
    const std::size_t n = c.size();
    std::map<std::string, std::size_t> provider, client;
    for (std::size_t k = 0; k < n; ++k) {
        const Iface& f = iface(*c[k]);
        for (const auto& [d, t] : f.right) {
            provider[d] = k;
        }
        for (const auto& [d, t] : f.left) {
            client[d] = k;
        }
    }
    std::vector<int> state(n, 0);
    std::vector<Typed> typed(n);
    std::function<const Typed&(std::size_t)> eval = [&](std::size_t k) -> const Typed& {
        if (state[k] == 2) return typed[k];
        if (state[k] == 1) fail(where_of(*c[k], where), "cyclic dependency between label distributions");
        state[k] = 1;
        const Iface& f = iface(*c[k]);
        std::map<std::string, Dist> local;
        auto take = [&](const std::string& d, const std::map<std::string, std::size_t>& peer) {
            auto pt = peer.find(d);
            if (pt != peer.end() && pt->second != k) {
                const Typed& t = eval(pt->second);
                auto ot = t.out.find(d);
                if (ot != t.out.end()) local[d] = ot->second;
                return;
            }
            auto it = in.find(d);
            if (it != in.end()) local[d] = it->second;
        };
        for (const auto& [d, t] : f.right)
            if (head_kind(t, sig_) == TypeKind::PEChoice) take(d, client);
        for (const auto& [d, t] : f.left)
            if (head_kind(t, sig_) == TypeKind::PIChoice) take(d, provider);
        typed[k] = type_obj(*c[k], local, where);
        state[k] = 2;
        return typed[k];
    };
    Typed r;
    r.q = Rational(0);
    for (std::size_t k = 0; k < n; ++k) r.q += eval(k).q;
    // Distributions on channels that leave the configuration.
    Iface ext = iface(c);
    for (const auto& [d, t] : ext.right) {
        const Typed& t2 = typed[provider.at(d)];
        auto it = t2.out.find(d);
        if (it != t2.out.end()) r.out[d] = it->second;
    }
    for (const auto& [d, t] : ext.left) {
        const Typed& t2 = typed[client.at(d)];
        auto it = t2.out.find(d);
        if (it != t2.out.end()) r.out[d] = it->second;
    }
    return r;
}

ConfigTyping ConfigChecker::check(const Config& c) {
    iface_.clear();
    Iface f = iface(c);
    if (!f.left.empty()) fail("configuration", "uses external channel '" + f.left.begin()->first + "'");
    Typed t = type_config(c, {}, "");
    ConfigTyping r;
    r.q = t.q;
    r.gamma = f.right;
    for (const auto& [d, ty] : f.right) {
        TypePtr h = head(ty, sig_);
        if (h->kind != TypeKind::PIChoice) continue;
        auto it = t.out.find(d);
        Dist want = static_dist(h);
        if (it == t.out.end() || it->second != want)
            fail("configuration", "'" + d + "' sends labels with distribution " +
                                      (it == t.out.end() ? std::string("?") : dist_str(h, it->second)) + " but its type is " +
                                      print_type(ty));
        r.out[d] = it->second;
    }
    return r;
}

}  // namespace prast
