#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace induct::pddl::detail {

struct SExpr {
    bool is_atom = false;
    std::string atom;  // lowercased
    std::vector<SExpr> items;
    std::size_t line = 1;
    std::size_t column = 1;

    bool is_list() const { return !is_atom; }
    bool head_is(std::string_view keyword) const {
        return is_list() && !items.empty() && items.front().is_atom && items.front().atom == keyword;
    }
};

/// Reads exactly one top-level expression; trailing non-comment text is an error.
SExpr read_sexpr(std::string_view text);

/// Reads every top-level expression in the text.
std::vector<SExpr> read_all(std::string_view text);

[[noreturn]] void fail(const SExpr& at, const std::string& message);

}  // namespace induct::pddl::detail
