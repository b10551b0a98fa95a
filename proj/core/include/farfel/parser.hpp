#pragma once

#include <vector>

#include "farfel/ast.hpp"
#include "farfel/token.hpp"

namespace farfel {

// Builds the AST for a whole token stream (one source file). Throws
// ParseError at the first syntax error; the exception's Diagnostic points
// at the offending token.
Program parse_program(std::vector<Token> tokens);

} // namespace farfel
