#pragma once

#include "prast/parser.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace prast::testing {

inline std::string source_dir() { return PRAST_SOURCE_DIR; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string corpus_text(const std::string& name) { return read_file(source_dir() + "/corpus/" + name + ".prast"); }

inline Signature corpus(const std::string& name) { return parse_or_throw(corpus_text(name)); }

inline const char* const corpus_names[] = {"bool",       "tf",        "tf_costs", "die3",   "die6",     "exp_trials", "fair_coin",
                                           "pagerank",   "repair",    "rnd_walk", "lossy_chan", "nats", "bad", "bad_prime"};

}  // namespace prast::testing
