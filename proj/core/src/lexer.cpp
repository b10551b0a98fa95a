#include "farfel/lexer.hpp"

#include <array>
#include <cctype>
#include <string>

#include "farfel/diag.hpp"

namespace farfel {

namespace {

const std::array<std::string_view, 16> kKeywords = {
    "PROGRAM", "FUNCTION", "SUBROUTINE", "DIMENSION", "END",  "IF",
    "THEN",    "ELSE",     "DO",         "PRINT",     "CALL", "RETURN",
    "ADF",     "ADR",      "TANGENT",    "COTANGENT",
};

const std::array<std::string_view, 6> kDottedOps = {"LT", "LE", "GT", "GE", "EQ", "NE"};

[[noreturn]] void fail(int line, int col, std::string msg) {
    throw ParseError(Diagnostic{Phase::Parse, {line, col}, std::move(msg)});
}

char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

} // namespace

bool is_keyword(std::string_view upper_name) {
    for (auto kw : kKeywords)
        if (kw == upper_name) return true;
    return false;
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> toks;
    size_t i = 0;
    const size_t n = src.size();
    int line = 1, col = 1;
    bool any_on_line = false; // a significant token was emitted on the current logical line
    bool continued = false;   // the previous physical line ended with '&'

    auto push = [&](TokKind k, std::string lexeme, int ln, int cl) {
        toks.push_back(Token{k, std::move(lexeme), ln, cl});
    };

    // Returns true when src[at..] begins a dotted relational operator like ".LT.".
    auto dotted_op_at = [&](size_t at, std::string* name) {
        if (at >= n || src[at] != '.') return false;
        size_t j = at + 1;
        std::string word;
        while (j < n && std::isalpha(static_cast<unsigned char>(src[j])) && word.size() <= 3) {
            word.push_back(upper(src[j]));
            ++j;
        }
        if (j >= n || src[j] != '.') return false;
        for (auto op : kDottedOps) {
            if (word == op) {
                if (name) *name = word;
                return true;
            }
        }
        return false;
    };

    while (i < n) {
        char c = src[i];

        if (c == '\r') {
            ++i;
            continue;
        }
        if (c == '\n') {
            if (any_on_line && !continued) {
                push(TokKind::Eol, "\n", line, col);
                any_on_line = false;
            }
            continued = false;
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t') {
            ++i;
            ++col;
            continue;
        }
        if (c == '!') { // comment runs to end of line
            while (i < n && src[i] != '\n') {
                ++i;
                ++col;
            }
            continue;
        }
        if (c == '&') {
            // Continuation marker: nothing but blanks or a comment may follow it.
            int amp_line = line, amp_col = col;
            ++i;
            ++col;
            while (i < n && (src[i] == ' ' || src[i] == '\t' || src[i] == '\r')) {
                ++i;
                ++col;
            }
            if (i < n && src[i] == '!') {
                while (i < n && src[i] != '\n') {
                    ++i;
                    ++col;
                }
            }
            if (i < n && src[i] != '\n')
                fail(amp_line, amp_col, "continuation '&' must be the last thing on its line");
            if (i >= n) fail(amp_line, amp_col, "continuation '&' at end of input");
            continued = true;
            continue;
        }

        if (is_ident_start(c)) {
            int tl = line, tc = col;
            std::string word;
            while (i < n && is_ident_char(src[i])) {
                word.push_back(upper(src[i]));
                ++i;
                ++col;
            }
            TokKind kind = is_keyword(word) ? TokKind::Keyword : TokKind::Ident;
            push(kind, std::move(word), tl, tc);
            any_on_line = true;
            continue;
        }

        if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(src[i + 1]) && !dotted_op_at(i, nullptr))) {
            int tl = line, tc = col;
            std::string num;
            while (i < n && is_digit(src[i])) {
                num.push_back(src[i]);
                ++i;
                ++col;
            }
            // A '.' continues the number unless it begins a dotted operator,
            // so that "1.LT.2" lexes as 1 .LT. 2 and not 1. LT .2.
            if (i < n && src[i] == '.' && !dotted_op_at(i, nullptr)) {
                num.push_back('.');
                ++i;
                ++col;
                while (i < n && is_digit(src[i])) {
                    num.push_back(src[i]);
                    ++i;
                    ++col;
                }
            }
            if (i < n && (upper(src[i]) == 'E' || upper(src[i]) == 'D')) {
                size_t j = i + 1;
                if (j < n && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < n && is_digit(src[j])) {
                    num.push_back(upper(src[i]));
                    ++i;
                    ++col;
                    if (src[i] == '+' || src[i] == '-') {
                        num.push_back(src[i]);
                        ++i;
                        ++col;
                    }
                    while (i < n && is_digit(src[i])) {
                        num.push_back(src[i]);
                        ++i;
                        ++col;
                    }
                }
            }
            push(TokKind::Number, std::move(num), tl, tc);
            any_on_line = true;
            continue;
        }

        if (c == '.') {
            std::string name;
            if (dotted_op_at(i, &name)) {
                push(TokKind::Op, "." + name + ".", line, col);
                size_t len = name.size() + 2;
                i += len;
                col += static_cast<int>(len);
                any_on_line = true;
                continue;
            }
            fail(line, col, "malformed dotted operator");
        }

        switch (c) {
        case '*':
            if (i + 1 < n && src[i + 1] == '*') {
                push(TokKind::Op, "**", line, col);
                i += 2;
                col += 2;
            } else {
                push(TokKind::Op, "*", line, col);
                ++i;
                ++col;
            }
            any_on_line = true;
            continue;
        case '+':
        case '-':
        case '/':
        case '=':
            push(TokKind::Op, std::string(1, c), line, col);
            ++i;
            ++col;
            any_on_line = true;
            continue;
        case '(':
        case ')':
        case ',':
            push(TokKind::Punct, std::string(1, c), line, col);
            ++i;
            ++col;
            any_on_line = true;
            continue;
        default:
            fail(line, col, std::string("invalid character '") + c + "'");
        }
    }

    if (any_on_line) push(TokKind::Eol, "\n", line, col);
    push(TokKind::Eof, "", line, col);
    return toks;
}

std::string_view phase_name(Phase p) {
    switch (p) {
    case Phase::Parse: return "parse";
    case Phase::Sema: return "sema";
    case Phase::Runtime: return "runtime";
    }
    return "?";
}

std::string Diagnostic::render(std::string_view file) const {
    std::string out;
    out += file;
    out += ':';
    out += std::to_string(loc.line);
    out += ':';
    out += std::to_string(loc.col);
    out += ": ";
    out += phase_name(phase);
    out += ": ";
    out += message;
    return out;
}

} // namespace farfel
