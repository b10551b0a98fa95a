#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "farfel/engine.hpp"
#include "farfel/sema.hpp"

namespace farfel {

// One activation record. Frames form a static chain through `parent`
// (the defining frame, not the caller), so nested subprograms read and
// write the variables of the subprogram they were defined in.
struct Frame {
    const Subprogram* sub = nullptr; // null for the root pseudo-frame
    std::shared_ptr<Frame> parent;
    std::vector<Value> slots;
};

// One value of a PRINT statement: the printed expression (spaces
// removed) and the value it produced.
struct PrintItem {
    std::string name;
    Value value;
};

struct RunOptions {
    // Pre-set and pinned PROGRAM-unit scalars; later assignments to them
    // are ignored. The caller has checked the names against
    // bound.info(bound.main).scalar_slots.
    std::map<std::string, Value> overrides;
    long long recursion_limit = 10000;
    double time_limit_seconds = 0; // 0 disables the deadline
    std::function<void(const std::vector<PrintItem>&)> on_print; // one call per PRINT
    std::function<void(const Tape&)> on_tape; // called as each ADR block finishes
};

// Executes the PROGRAM unit of a resolved program. Throws RuntimeError.
void run_program(const BoundProgram& bound, Engine& engine, const RunOptions& opts);

} // namespace farfel
