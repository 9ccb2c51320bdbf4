#include "support.hpp"

#include "prast/commands.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace prast;
using json = nlohmann::json;

namespace {

struct Cli {
    int code = 0;
    std::string out, err;
    std::string golden() const { return "exit " + std::to_string(code) + "\n--- stdout\n" + out + "--- stderr\n" + err; }
};

// Runs the CLI from the repository root so paths match the goldens.
Cli cli(std::vector<std::string> args) {
    std::filesystem::current_path(testing::source_dir());
    args.insert(args.begin(), "prast");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    Cli r;
    r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

void against_golden(const std::string& name, const std::vector<std::string>& args) {
    INFO(name);
    std::string want = testing::read_file(testing::source_dir() + "/corpus/expected/" + name);
    CHECK(cli(args).golden() == want);
}

const char* all_files[] = {"bad",       "bad_prime", "bool",     "die3",     "die6",       "exp_trials", "fair_coin",
                           "lossy_chan", "nats",      "pagerank", "repair",   "rnd_walk",   "tf",         "tf_costs"};

}  // namespace

TEST_CASE("check and infer goldens") {
    for (const char* n : all_files) {
        std::string f = std::string("corpus/") + n + ".prast";
        against_golden(std::string(n) + ".check", {"check", f});
        against_golden(std::string(n) + ".infer", {"infer", f});
    }
    for (const char* n : {"die3", "die6", "exp_trials", "fair_coin", "rnd_walk"})
        against_golden(std::string(n) + ".infer-flips", {"infer", "--cost-model", "flips", std::string("corpus/") + n + ".prast"});
}

TEST_CASE("simulate goldens") {
    for (const char* n : {"bool", "tf", "tf_costs", "die3", "die6", "exp_trials", "fair_coin", "pagerank", "repair", "rnd_walk",
                          "lossy_chan", "nats"})
        against_golden(std::string(n) + ".simulate",
                       {"simulate", "--seed", "1", "--budget", "500", std::string("corpus/") + n + ".prast"});
    against_golden("die3.simulate-flips", {"simulate", "--cost-model", "flips", "--scheduler", "heaviest", "--budget", "60",
                                           "corpus/die3.prast", "P1"});
}

TEST_CASE("exit codes") {
    CHECK(cli({"check", "corpus/bool.prast"}).code == ExitOk);
    CHECK(cli({"check", "corpus/bad.prast"}).code == ExitTypeError);
    CHECK(cli({"check", "corpus/bool.prast", "corpus/bad.prast"}).code == ExitTypeError);
    CHECK(cli({"check", "corpus/missing.prast"}).code == ExitUsage);
    CHECK(cli({"check", "--cost-model", "bogus", "corpus/bool.prast"}).code == ExitUsage);
    CHECK(cli({"frobnicate"}).code == ExitUsage);
    CHECK(cli({}).code == ExitUsage);
    CHECK(cli({"--help"}).code == ExitOk);
    CHECK(cli({"simulate", "corpus/bool.prast", "neg"}).code == ExitUsage);
    CHECK(cli({"simulate", "corpus/bad.prast"}).code == ExitTypeError);
    CHECK(cli({"infer", "--cost-model", "flips", "corpus/bool.prast"}).code == ExitTypeError);
}

TEST_CASE("empty program") {
    auto path = std::filesystem::temp_directory_path() / "prast_empty.prast";
    { std::ofstream(path) << "% nothing\n"; }
    Cli r = cli({"check", path.string()});
    CHECK(r.code == ExitOk);
    CHECK(r.out.find("ok, no declarations") != std::string::npos);
    CHECK(cli({"simulate", path.string()}).code == ExitUsage);
}

TEST_CASE("json and text agree") {
    Cli text = cli({"check", "corpus/die3.prast"});
    Cli js = cli({"check", "--format", "json", "corpus/die3.prast"});
    REQUIRE(js.code == ExitOk);
    json j = json::parse(js.out);
    REQUIRE(j.is_array());
    CHECK(j[0]["ok"] == true);
    std::string counts = std::to_string(j[0]["vars"].get<int>()) + " variables, " +
                         std::to_string(j[0]["constraints"].get<int>()) + " constraints";
    CHECK(text.out.find(counts) != std::string::npos);

    Cli st = cli({"simulate", "--seed", "4", "corpus/tf_costs.prast"});
    Cli sj = cli({"simulate", "--seed", "4", "--format", "json", "corpus/tf_costs.prast"});
    json s = json::parse(sj.out);
    CHECK(s["bound_holds"] == true);
    CHECK(s["violations"].empty());
    CHECK(st.out.find("E[work] = " + s["expected_work"].get<std::string>()) != std::string::npos);
    CHECK(s["potential"] == "7/5");

    Cli ij = cli({"infer", "--format", "json", "corpus/tf_costs.prast"});
    json i = json::parse(ij.out);
    CHECK(ij.code == ExitOk);
    CHECK(i.dump().find("7/5") != std::string::npos);

    Cli bad = cli({"check", "--format", "json", "corpus/bad.prast"});
    json b = json::parse(bad.out);
    CHECK(b[0]["ok"] == false);
    CHECK(b[0]["diagnostics"][0]["rule"] == "⊕P R");
}

TEST_CASE("PRAST_SEED supplies the default seed") {
    Cli a = cli({"simulate", "--seed", "9", "--budget", "30", "corpus/die3.prast"});
    ::setenv("PRAST_SEED", "9", 1);
    Cli b = cli({"simulate", "--budget", "30", "corpus/die3.prast"});
    ::unsetenv("PRAST_SEED");
    CHECK(a.out == b.out);
    CHECK(a.code == b.code);
}

TEST_CASE("report runs every closed process") {
    Cli r = cli({"report", "--seed", "2", "--budget", "100", "corpus/bool.prast"});
    CHECK(r.code == ExitOk);
    for (const char* n : {"TT", "FF", "TF", "main"}) CHECK(r.out.find(std::string("simulate ") + n + ":") != std::string::npos);
    CHECK(r.out.find("violations 0") != std::string::npos);
}

TEST_CASE("dump-lp writes the constraint system") {
    auto path = std::filesystem::temp_directory_path() / "prast_tf.lp";
    Cli r = cli({"infer", "--dump-lp", path.string(), "corpus/tf.prast"});
    CHECK(r.code == ExitOk);
    std::string lp = testing::read_file(path.string());
    CHECK(lp.find("Minimize") != std::string::npos);
    CHECK(lp.find("Subject To") != std::string::npos);
}
