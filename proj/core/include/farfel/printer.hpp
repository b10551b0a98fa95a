#pragma once

#include <string>

#include "farfel/ast.hpp"

namespace farfel {

// Canonical source form: reparsing the result yields an ast_equal program.
// Used by the dump-ast command and the round-trip property tests.
std::string print_program(const Program& prog);

// One expression, minimally parenthesized.
std::string print_expr(const Expr& e);

} // namespace farfel
