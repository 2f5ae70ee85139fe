#pragma once

#include "induct/pddl.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace induct::test {

inline std::filesystem::path data_dir() { return INDUCT_DATA_DIR; }
inline std::filesystem::path test_dir() { return INDUCT_TEST_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline pddl::Domain blocksworld() { return pddl::parse_domain(read_file(data_dir() / "domains/blocksworld.pddl")); }
inline pddl::Domain gridquest() { return pddl::parse_domain(read_file(data_dir() / "domains/gridquest.pddl")); }

inline pddl::Atom atom(std::string pred, std::vector<std::string> args = {}) {
    return pddl::Atom{std::move(pred), std::move(args)};
}

}  // namespace induct::test
