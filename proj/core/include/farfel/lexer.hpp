#pragma once

#include <string_view>
#include <vector>

#include "farfel/token.hpp"

namespace farfel {

// Splits free-form source text into tokens. Case-insensitive: keywords,
// identifiers and dotted operators come out uppercased. `!` starts a comment
// running to end of line; a trailing `&` continues the statement on the next
// line. Every line break that ends a statement yields one Eol token, and the
// stream always ends with a single Eof token.
//
// Throws ParseError ("invalid character ...") for bytes outside the language
// alphabet, with the exact line and column.
std::vector<Token> tokenize(std::string_view src);

} // namespace farfel
