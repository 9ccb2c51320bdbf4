#include "prast/potential.hpp"

namespace prast {

std::optional<CostModel> parse_cost_model(const std::string& s) {
    if (s == "none") return CostModel::None;
    if (s == "flips") return CostModel::Flips;
    if (s == "send") return CostModel::Send;
    if (s == "explicit") return CostModel::Explicit;
    return std::nullopt;
}

const char* cost_model_name(CostModel m) {
    switch (m) {
        case CostModel::None: return "none";
        case CostModel::Flips: return "flips";
        case CostModel::Send: return "send";
        case CostModel::Explicit: return "explicit";
    }
    return "?";
}

namespace {

bool charged(CostModel m, ProcKind k) {
    if (m == CostModel::Flips) return k == ProcKind::Flip;
    if (m == CostModel::Send)
        return k == ProcKind::SendLabel || k == ProcKind::PSendLabel || k == ProcKind::SendChan || k == ProcKind::Close;
    return false;
}

struct Instrumenter {
    CostModel model;
    std::string tag;

    ProcPtr go(const ProcPtr& p, bool guarded) {
        if (!p) return p;
        auto n = std::make_shared<ProcExpr>(*p);
        bool is_ours = p->kind == ProcKind::Work && p->cost_tag == tag;
        for (auto& a : n->alts) a.body = go(a.body, false);
        n->cont = go(p->cont, is_ours);
        if (!charged(model, p->kind) || guarded) return n;
        auto w = std::make_shared<ProcExpr>();
        w->kind = ProcKind::Work;
        w->pot = Pot::constant(Rational(1));
        w->cost_tag = tag;
        w->span = p->span;
        w->cont = n;
        return w;
    }
};

ProcPtr strip(const ProcPtr& p) {
    if (!p) return p;
    if (p->kind == ProcKind::Work) return strip(p->cont);
    auto n = std::make_shared<ProcExpr>(*p);
    for (auto& a : n->alts) a.body = strip(a.body);
    n->cont = strip(p->cont);
    return n;
}

}  // namespace

Signature instrument(const Signature& sig, CostModel model) {
    if (model == CostModel::None || model == CostModel::Explicit) return sig;
    Instrumenter ins{model, cost_model_name(model)};
    Signature out = sig;
    for (auto& d : out.procs) d.body = ins.go(d.body, false);
    return out;
}

Signature strip_work(const Signature& sig) {
    Signature out = sig;
    for (auto& d : out.procs) d.body = strip(d.body);
    return out;
}

InferResult infer_potential(const Signature& sig, CostModel model, const ReconstructOptions& opts) {
    InferResult r;
    r.rec = reconstruct(instrument(sig, model), opts);
    if (!r.rec.ok()) {
        // Without any work the same program solves: the potentials are the problem.
        if (!r.rec.audit_failed && reconstruct(strip_work(sig)).ok())
            r.rec.diags.insert(r.rec.diags.begin(),
                               Diagnostic{Span{}, "no finite expected-cost bound derivable with linear potential", "infer"});
        return r;
    }
    for (const auto& d : sig.procs) {
        DeclPotential dp;
        dp.name = d.name;
        dp.potential = r.rec.potentials.at(d.name);
        dp.least = r.rec.min_potentials.at(d.name);
        dp.inferred = d.potential.kind == ScalarKind::Star;
        r.report.decls.push_back(dp);
    }
    r.report.annotations = r.rec.annotations;
    r.report.objective = r.rec.objective;
    return r;
}

}  // namespace prast
