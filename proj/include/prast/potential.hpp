#pragma once

#include "prast/reconstruct.hpp"

#include <optional>
#include <string>
#include <vector>

namespace prast {

enum class CostModel { None, Flips, Send, Explicit };

std::optional<CostModel> parse_cost_model(const std::string& s);
const char* cost_model_name(CostModel m);

// Flips: work {1} before every flip. Send: work {1} before every label send, channel send
// and close. None / Explicit: unchanged. Idempotent.
Signature instrument(const Signature& sig, CostModel model);

// Drop every work statement.
Signature strip_work(const Signature& sig);

struct DeclPotential {
    std::string name;
    Rational potential;  // declared or solved
    Rational least;      // least potential the body needs
    bool inferred = false;
};

struct PotentialReport {
    std::vector<DeclPotential> decls;
    std::vector<std::pair<Span, Rational>> annotations;
    Rational objective;
};

struct InferResult {
    ReconstructResult rec;
    PotentialReport report;
    bool ok() const { return rec.ok(); }
};

InferResult infer_potential(const Signature& sig, CostModel model, const ReconstructOptions& opts = {});

}  // namespace prast
