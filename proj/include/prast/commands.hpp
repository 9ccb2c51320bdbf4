#pragma once

#include "prast/potential.hpp"
#include "prast/runtime.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace prast {

enum ExitCode { ExitOk = 0, ExitTypeError = 1, ExitUsage = 2, ExitInternal = 3 };

struct RunConfig {
    std::string command;
    std::vector<std::string> paths;
    CostModel model = CostModel::Explicit;
    std::optional<std::uint64_t> seed;
    Scheduler scheduler = Scheduler::Leftmost;
    std::size_t budget = 1000;
    Rational mass_floor = RunOptions{}.mass_floor;
    std::string trace_path;
    std::string dump_lp_path;
    bool check_steps = true;
    bool strip_work = false;
    bool json = false;
    std::string entry;
};

int cmd_check(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_infer(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& rc, std::ostream& out, std::ostream& err);

// argv front end; PRAST_SEED supplies the default seed.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

// "3/5 (0.6)" style rendering shared by text reports.
std::string show(const Rational& r);

}  // namespace prast
