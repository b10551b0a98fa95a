#pragma once

#include <string>
#include <vector>

namespace farfel {

enum class TokKind {
    Keyword,
    Ident,
    Number,
    Op,    // = + - * / ** .LT. .LE. .GT. .GE. .EQ. .NE.
    Punct, // ( ) ,
    Eol,
    Eof,
};

struct Token {
    TokKind kind = TokKind::Eof;
    std::string lexeme; // uppercased for keywords/idents/operators
    int line = 0;
    int col = 0;

    bool is(TokKind k) const { return kind == k; }
    bool is(TokKind k, std::string_view lx) const { return kind == k && lexeme == lx; }
    bool is_kw(std::string_view kw) const { return is(TokKind::Keyword, kw); }
    bool is_op(std::string_view op) const { return is(TokKind::Op, op); }
    bool is_punct(std::string_view p) const { return is(TokKind::Punct, p); }
};

bool is_keyword(std::string_view upper);

} // namespace farfel
