#pragma once

#include "prast/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace prast {

struct Obj;
using ObjPtr = std::shared_ptr<const Obj>;
using Config = std::vector<ObjPtr>;

struct Universe {
    Config cfg;
    Rational p;
};

struct ObjStatus;

// Per-object status summary, filled on first use. Copying an object starts with an empty cache.
class StatusCache {
public:
    StatusCache() = default;
    StatusCache(const StatusCache&) {}
    StatusCache& operator=(const StatusCache&) { return *this; }
    std::shared_ptr<const ObjStatus> get() const;
    void set(std::shared_ptr<const ObjStatus> s) const;

private:
    mutable std::mutex m_;
    mutable std::shared_ptr<const ObjStatus> v_;
};

// proc(c)(w, P) or proc(c){C_i : p_i}. Objects are immutable; steps build new ones.
struct Obj {
    bool is_dist = false;
    std::string chan;  // provided channel (global name)

    // proc
    Rational work;
    ProcPtr expr;
    std::map<std::string, std::string> env;  // local channel name -> global name
    Context ctx;                             // local names, current types
    std::string self;                        // local name of the provided channel
    TypePtr offered;
    std::string proc_name;                   // declaration the code came from

    // dist
    std::vector<Universe> branches;

    std::string global(const std::string& local) const;

    StatusCache status_cache;
};

ObjPtr make_dist(std::string chan, std::vector<Universe> branches);

enum class Sort { Det, OPlusP, WithP, Top };
const char* sort_name(Sort s);
bool subsort(Sort a, Sort b);  // a <: b

using ChanSort = std::pair<std::string, Sort>;

// Status relations, computed structurally over the configuration.
std::set<std::string> fv_left(const Config& c);
std::set<std::string> fv_right(const Config& c);
std::set<std::string> fv_left(const Obj& o);
std::set<std::string> fv_right(const Obj& o);
bool poised(const Config& c);
bool poised(const Obj& o);
bool live(const Config& c);
bool live(const Obj& o);
std::set<ChanSort> cpoised(const Config& c);
std::set<ChanSort> cpoised(const Obj& o);
std::set<ChanSort> cblocked(const Config& c);
std::set<ChanSort> cblocked(const Obj& o);
std::set<ChanSort> comm(const Config& c);
std::set<ChanSort> comm(const Obj& o);  // communications inside a distribution
Rational expected_work(const Obj& o);
Rational settled_mass(const Obj& o);  // probability that every universe inside is poised
Rational heaviest_live(const Obj& o);  // largest relative mass of a live process inside, 0 if none

struct Status {
    bool poised = false;
    bool live = false;
    std::set<ChanSort> comm, cpoised, cblocked;
};
Status status(const Config& c);

// Leftmost takes the first enabled step; Heaviest the one in the universe of largest mass
// (leftmost among equals). A seed overrides both with a uniform choice.
enum class Scheduler { Leftmost, Heaviest };

struct Step {
    Config cfg;
    std::string rule;  // e.g. "E:Flip", "C:SDist:R/C:⊕P"
    std::string chan;  // subject channel
};

// Stepping over a signature whose annotations are all constants.
class Machine {
public:
    // Checks the signature and rewrites coerced sends and cases to their probabilistic forms.
    // Throws std::invalid_argument when the signature does not check.
    explicit Machine(const Signature& sig);

    const Signature& sig() const { return *sig_; }

    // proc(c)(0, P_f) for a declaration with an empty context. Throws std::invalid_argument otherwise.
    Config initial(const std::string& entry) const;

    // Leftmost single-process step (E:Def, E:Work, E:Flip under E:Dist).
    std::optional<Step> step_single(const Config& c) const;
    // First communication on (d, κ) in rule order.
    std::optional<Step> step_comm(const Config& c, const std::string& d, Sort k) const;

    // Enabled steps with the cumulative probability of the universe they happen in.
    struct Candidate {
        std::vector<std::pair<std::size_t, std::size_t>> path;  // (object, branch) pairs down to the container
        std::size_t i = 0;  // object index in the container
        std::size_t j = 0;  // provider index (communication)
        bool single = true;
        std::string chan;
        Sort sort = Sort::Det;
        Rational mass;
    };
    std::vector<Candidate> singles(const Config& c) const;
    // The single step a deterministic scheduler takes, ignoring universes below the floor.
    std::optional<Candidate> pick_single(const Config& c, Scheduler s, const Rational& floor) const;
    std::vector<Candidate> comms(const Config& c) const;
    Step apply(const Config& c, const Candidate& cand) const;

private:
    std::shared_ptr<const Signature> sig_;
    mutable std::size_t fresh_ = 0;

    Step single_at(const ObjPtr& o) const;
    Step comm_in(const Config& c, const std::string& d, Sort k) const;
    Step binary(const Config& c, std::size_t i, std::size_t j, const std::string& d, Sort k) const;
    Step base(const ObjPtr& a, const ObjPtr& b, const std::string& d) const;
};

// Configuration typing: bottom-up, label distributions on channels computed by the direct
// checker, potentials as the least that suffices.
struct ConfigTyping {
    Rational q;  // least q with . |=q C :: Γ (includes work)
    std::map<std::string, TypePtr> gamma;
    std::map<std::string, Dist> out;  // distributions on provided ⊕P channels
};

class ConfigChecker {
public:
    explicit ConfigChecker(const Signature& sig) : sig_(sig), synth_(sig) {}
    // Throws DiagnosticError naming the failing object.
    ConfigTyping check(const Config& c);

private:
    struct Iface {
        std::map<std::string, TypePtr> left, right;
    };
    struct Typed {
        Rational q;
        std::map<std::string, Dist> out;
    };
    const Signature& sig_;
    Synthesizer synth_;
    std::map<std::string, SynthOut> memo_;
    std::map<const Obj*, Iface> iface_;

    const Iface& iface(const Obj& o);
    Iface iface(const Config& c);
    Typed type_config(const Config& c, const std::map<std::string, Dist>& in, const std::string& where);
    Typed type_obj(const Obj& o, const std::map<std::string, Dist>& in, const std::string& where);
};

// Expected total work, by linearity over distribution objects.
Rational expected_work(const Config& c);

struct FlatProc {
    std::string chan;
    Rational work;
    const Obj* obj;
};
struct FlatDist {
    std::vector<std::pair<std::vector<FlatProc>, Rational>> items;
    Rational dropped;  // mass of flat configurations below the floor
};
// Products of independently flattened components, in order. Items below floor are dropped.
FlatDist flatten(const Config& c, const Rational& floor = Rational(0));

struct LabelDist {
    std::map<std::string, Rational> labels;
    Rational pending;  // mass where no label is ready on the channel yet
    Rational dropped;
};
// Distribution of the first label offered on channel c (following forwards).
LabelDist first_label(const Config& c, const std::string& chan, const Rational& floor = Rational(0));

enum class RunStatus { Poised, Budget, Truncated, Stuck, Preservation };
const char* run_status_name(RunStatus s);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    Scheduler scheduler = Scheduler::Leftmost;
    bool track_unsettled = false;
    std::size_t budget = 1000;
    Rational mass_floor = Rational(mpq_class(mpz_class(1), mpz_class(1) << 64));
    bool check_steps = true;
    std::ostream* trace = nullptr;
};

struct RunResult {
    RunStatus status = RunStatus::Poised;
    Config final;
    std::size_t steps = 0;
    Rational q0;                        // potential of the initial configuration
    std::vector<Rational> work;         // expected work after each step, index 0 = initial
    std::vector<Rational> least;        // least typing potential after each step (when checked)
    std::vector<Rational> unsettled_at; // unsettled mass after each step (when tracked)
    Rational unsettled;                 // mass of universes not poised at the end
    std::vector<std::string> violations;
    bool monotone = true;
};

// Runs from c0 whose typing potential is q0. Every step is re-typed unless check_steps is off.
RunResult run(const Machine& m, const Config& c0, const Rational& q0, const RunOptions& opts);

// Mass of flat configurations that are not poised.
Rational unsettled_mass(const Config& c);

std::string render_config(const Config& c);

}  // namespace prast
