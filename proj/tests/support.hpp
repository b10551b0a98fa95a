#pragma once

// Shared helpers for the in-process test binaries: push a source string
// through the whole front end, run it, and fish printed values back out
// by the text they were printed under.

#include <map>
#include <string>
#include <vector>

#include "farfel/diag.hpp"
#include "farfel/interp.hpp"
#include "farfel/lexer.hpp"
#include "farfel/parser.hpp"
#include "farfel/sema.hpp"

namespace fartest {

// Full front end on a source string. AD-block violations are rethrown as
// the SemaError the resolver itself would produce, so tests can treat
// "any sema diagnostic" uniformly.
inline farfel::BoundProgram analyze(const std::string& src) {
    farfel::BoundProgram bound =
        farfel::resolve_scopes(farfel::parse_program(farfel::tokenize(src)));
    std::vector<farfel::Diagnostic> diags = farfel::validate_ad_blocks(bound);
    if (!diags.empty()) throw farfel::SemaError(diags.front());
    return bound;
}

// Captured PRINT output of one run, queryable by printed expression text
// (the interpreter strips spaces, so "F(X)" matches PRINT F(X)).
struct RunResult {
    std::vector<farfel::PrintItem> items;

    bool has(const std::string& name) const {
        for (const auto& it : items)
            if (it.name == name) return true;
        return false;
    }

    // Last value printed under that name, as a plain double.
    double get(const std::string& name) const {
        const farfel::Value* found = nullptr;
        for (const auto& it : items)
            if (it.name == name) found = &it.value;
        if (!found) throw std::runtime_error("no PRINT of " + name + " was captured");
        return farfel::primal_of(*found);
    }

    // Every value printed under that name, in print order.
    std::vector<double> all(const std::string& name) const {
        std::vector<double> out;
        for (const auto& it : items)
            if (it.name == name) out.push_back(farfel::primal_of(it.value));
        return out;
    }
};

inline RunResult run_src(const std::string& src,
                         std::map<std::string, farfel::Value> overrides = {}) {
    farfel::BoundProgram bound = analyze(src);
    farfel::Engine eng;
    farfel::RunOptions opt;
    opt.overrides = std::move(overrides);
    RunResult res;
    opt.on_print = [&](const std::vector<farfel::PrintItem>& items) {
        for (const auto& it : items) res.items.push_back(it);
    };
    farfel::run_program(bound, eng, opt);
    return res;
}

} // namespace fartest
