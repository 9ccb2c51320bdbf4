#pragma once

#include "prast/check.hpp"
#include "prast/synth.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prast {

enum class SolveStatus { Feasible, Infeasible, NonLinear, Unbounded };

struct SystemSolution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<Rational> values;  // indexed by variable id
    Rational objective;
    std::size_t nonlinear_at = 0;  // constraint index when NonLinear
    bool sequential = false;       // probabilities solved before potentials
    std::string lp_text;
};

// Solve a constraint subset: propagate singleton equalities, then one LP if everything is
// linear, otherwise probabilities first and potentials second.
SystemSolution solve_system(const ConstraintSet& cs, const std::vector<std::size_t>& subset, bool dump = false);

struct ReconstructStats {
    std::size_t vars = 0;
    std::size_t cons = 0;
    double check_ms = 0;
    double solve_ms = 0;
};

struct ReconstructResult {
    std::optional<Signature> sig;  // annotations filled in; deterministic syntax kept
    std::vector<Diagnostic> diags;
    std::map<std::string, Rational> potentials;  // every declaration's potential after solving
    std::map<std::string, Rational> min_potentials;  // least potential found by the audit
    std::vector<std::pair<Span, Rational>> annotations;  // solved pay/get and ▷/◁ amounts
    Rational objective;
    ReconstructStats stats;
    std::string lp_text;
    bool audit_failed = false;  // solved program rejected by the direct checker (internal error)
    bool ok() const { return sig.has_value(); }
};

struct ReconstructOptions {
    bool dump_lp = false;
};

ReconstructResult reconstruct(const Signature& sig, const ReconstructOptions& opts = {});

// Replace variable annotations by their values.
Signature substitute(const Signature& sig, const std::vector<Rational>& values);

}  // namespace prast
