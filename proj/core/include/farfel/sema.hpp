#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "farfel/ast.hpp"
#include "farfel/value.hpp"

namespace farfel {

enum class BindKind { Local, Param, Captured, Subprogram, Intrinsic };

// Resolution of one name use. Variables live in frame slots; Captured
// bindings address a slot `depth` frames up the static chain. Subprogram
// bindings also name a slot: the defining frame stores the closure there
// when it hoists its nested definitions.
struct Binding {
    BindKind kind = BindKind::Local;
    int depth = 0;
    int slot = -1;
    bool is_array = false;
    Intrinsic intrinsic = Intrinsic::Sqrt; // meaningful only for Intrinsic bindings
    const Subprogram* sub = nullptr;       // meaningful only for Subprogram bindings
    SrcLoc decl;
};

// Per-subprogram frame layout, precomputed so the interpreter indexes
// slots instead of hashing names.
struct SubInfo {
    const Subprogram* sub = nullptr;
    int nslots = 0;
    int result_slot = -1;                     // FUNCTION result variable
    std::vector<std::string> slot_names;      // for diagnostics and dumps
    std::vector<bool> slot_is_array;
    std::map<std::string, int> scalar_slots;  // non-array names, for CLI overrides
    struct ArrayAlloc {
        int slot;
        const Expr* extent; // evaluated on frame entry
    };
    std::vector<ArrayAlloc> arrays;           // dimensioned non-parameters
    struct DefSlot {
        int slot;
        const Subprogram* sub;
    };
    std::vector<DefSlot> defs;                // hoisted nested definitions
};

struct BoundProgram {
    Program program;
    std::vector<Binding> node_bindings;                  // indexed by NodeId
    std::unordered_map<const Subprogram*, SubInfo> subs; // one per unit, nested included
    SubInfo root;          // pseudo-frame that holds the top-level units
    const Subprogram* main = nullptr; // the PROGRAM unit, when present

    const Binding& binding(NodeId id) const { return node_bindings[id]; }
    const SubInfo& info(const Subprogram* s) const { return subs.at(s); }
};

// Binds every name use to a Binding. Throws SemaError on the first
// unresolved name or ill-formed assignment target.
BoundProgram resolve_scopes(Program program);

// Checks AD-block well-formedness: spec keywords match the block mode,
// TANGENT/COTANGENT stay out of expressions and statement bodies, closing
// specs read variables that occur in the block, and implied-do variables
// do not shadow names used in their own bounds. Returns every violation.
std::vector<Diagnostic> validate_ad_blocks(const BoundProgram& bound);

} // namespace farfel
