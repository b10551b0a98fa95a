#pragma once

#include <memory>
#include <vector>

#include "farfel/tape.hpp"

namespace farfel {

// Differentiation engine: hands out tags, keeps the stack of active
// reverse tapes, and implements all arithmetic with recursive dispatch
// on the operands' highest tag. Every operation can throw EngineError
// (domain violations, integer overflow, non-numeric operands); the
// interpreter re-throws those with a source position attached.
class Engine {
public:
    Tag fresh_tag() { return ++last_tag_; }

    std::shared_ptr<Tape> push_tape(Tag t);
    void pop_tape();
    Tape* find_tape(Tag t); // null when no active tape carries t

    // Construction and extraction. make_dual collapses exact plain-zero
    // tangents back to the primal, so seeding with 0 costs nothing.
    Value make_dual(Tag t, Value primal, Value tangent);
    Value tangent_of(const Value& v, Tag t);
    Value strip_tag(const Value& v, Tag t);
    Value make_leaf(Tag t, Value primal);
    void add_adjoint(Tag t, std::uint32_t node, const Value& amount);
    Value adjoint_of(Tag t, std::uint32_t node);
    void reverse_sweep(Tag t);

    // Arithmetic. Integer operands stay integers under + - * / ** with
    // Fortran truncating division; anything else promotes to real.
    Value add(const Value& a, const Value& b);
    Value sub(const Value& a, const Value& b);
    Value mul(const Value& a, const Value& b);
    Value div(const Value& a, const Value& b);
    Value pow(const Value& a, const Value& b);
    Value neg(const Value& a);
    Value unary(Intrinsic f, const Value& a);
    Value min2(const Value& a, const Value& b); // ties keep the first argument
    Value max2(const Value& a, const Value& b);

private:
    Value derivative_of(Intrinsic f, const Value& pa, const Value& fv);
    Value polygamma_val(int n, const Value& a);
    Value record_binary(Tape& tape, Tag t, const char* op, const Value& a, const Value& b,
                        Value primal, Value da, Value db);

    Tag last_tag_ = 0;
    std::vector<std::shared_ptr<Tape>> tapes_;
};

} // namespace farfel
