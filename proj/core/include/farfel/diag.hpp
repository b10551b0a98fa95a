#pragma once

#include <exception>
#include <string>
#include <string_view>

namespace farfel {

// 1-based position of a character in the source text.
struct SrcLoc {
    int line = 0;
    int col = 0;
};

enum class Phase { Parse, Sema, Runtime };

std::string_view phase_name(Phase p);

struct Diagnostic {
    Phase phase = Phase::Parse;
    SrcLoc loc;
    std::string message;

    // Renders "file:line:col: phase: message".
    std::string render(std::string_view file) const;
};

// Thrown by the lexer and parser; the first error aborts the parse.
class ParseError : public std::exception {
public:
    explicit ParseError(Diagnostic d) : diag_(std::move(d)) { diag_.phase = Phase::Parse; }
    const Diagnostic& diag() const { return diag_; }
    const char* what() const noexcept override { return diag_.message.c_str(); }

private:
    Diagnostic diag_;
};

// Thrown by name resolution; AD-block validation instead collects a list.
class SemaError : public std::exception {
public:
    explicit SemaError(Diagnostic d) : diag_(std::move(d)) { diag_.phase = Phase::Sema; }
    const Diagnostic& diag() const { return diag_; }
    const char* what() const noexcept override { return diag_.message.c_str(); }

private:
    Diagnostic diag_;
};

// Thrown during interpretation once a source position is known.
class RuntimeError : public std::exception {
public:
    explicit RuntimeError(Diagnostic d) : diag_(std::move(d)) { diag_.phase = Phase::Runtime; }
    const Diagnostic& diag() const { return diag_; }
    const char* what() const noexcept override { return diag_.message.c_str(); }

private:
    Diagnostic diag_;
};

// Raised by the AD engine, which has no notion of source positions.
// The interpreter catches these and rethrows them as RuntimeError with
// the position of the expression being evaluated.
class EngineError : public std::exception {
public:
    explicit EngineError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

} // namespace farfel
