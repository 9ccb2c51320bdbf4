#pragma once

#include "prast/check.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prast {

// Label distribution of a probabilistic choice, indexed like the type's branches.
using Dist = std::vector<Rational>;

// Static distribution of a probabilistic choice head. Requires constant annotations.
Dist static_dist(const TypePtr& head);
std::string dist_str(const TypePtr& head, const Dist& d);

// What a process produces, for the current heads of its channels.
struct SynthOut {
    std::optional<Dist> offered;       // offered head is ⊕P: distribution of the next label sent
    std::map<std::string, Dist> used;  // used channels with &P head: distribution of the next label sent
    Rational q;                        // least potential that suffices
};

// Distributions the environment supplies; absent entries default to the declared ones.
struct SynthInputs {
    std::map<std::string, Dist> used;  // used channels with ⊕P head
    std::optional<Dist> offered;       // offered &P head
};

struct NodeJudgment {
    Context ctx;
    std::string offered_name;
    TypePtr offered;
};

// Direct checker for programs whose annotations are all constants: computes the output
// distributions and the least potential instead of generating constraints.
class Synthesizer {
public:
    explicit Synthesizer(const Signature& sig, bool record = false) : sig_(sig), record_(record) {}

    // Throws DiagnosticError on any typing failure.
    SynthOut run(const ProcPtr& p, const Context& ctx, const std::string& offered_name, const TypePtr& offered,
                 const SynthInputs& in);

    const std::map<const ProcExpr*, NodeJudgment>& judgments() const { return judgments_; }
    const Coercions& coercions() const { return coercions_; }

private:
    const Signature& sig_;
    bool record_;
    std::map<const ProcExpr*, NodeJudgment> judgments_;
    Coercions coercions_;
};

struct DeclAudit {
    std::string name;
    Rational min_potential;
};

struct AuditResult {
    std::vector<Diagnostic> diags;
    std::vector<DeclAudit> decls;
    Coercions coercions;
    std::map<const ProcExpr*, NodeJudgment> judgments;
    bool ok() const { return diags.empty(); }
};

// Checks every declaration of a fully annotated signature: output distributions must equal
// the declared ones and the least potential must not exceed the declared potential.
AuditResult audit_signature(const Signature& sig, bool record = false);

}  // namespace prast
