#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace farfel {

struct Subprogram; // AST definition; values hold pointers only
struct Frame;      // interpreter environment; defined with the interpreter

enum class Intrinsic { Sqrt, Exp, Log, Sin, Cos, Tan, Atan, Abs, Min, Max, Gamma, Lgamma };

// Negative when the name is not an intrinsic.
int intrinsic_id(const std::string& upper_name);
const char* intrinsic_name(Intrinsic f);

// AD nesting tag. Each AD block activation draws a fresh, larger tag;
// 0 marks plain values. A value's layers carry strictly decreasing tags
// from the outside in, so the top layer has the value's highest tag.
using Tag = std::uint32_t;

struct DualObj;
struct TracerObj;
struct ArrayObj;

// A subprogram bundled with its defining frame, or an intrinsic wrapped
// as a callable (sub == null). Passing a bare name as a call argument
// produces one of these.
struct Closure {
    const Subprogram* sub = nullptr;
    Intrinsic intrinsic = Intrinsic::Sqrt;
    std::shared_ptr<Frame> frame;
};

// Runtime value: unset, integer, real, forward dual, reverse tracer,
// array reference, or closure.
struct Value {
    std::variant<std::monostate, long long, double, std::shared_ptr<DualObj>,
                 std::shared_ptr<TracerObj>, std::shared_ptr<ArrayObj>, Closure>
        v;

    Value() = default;
    static Value integer(long long x) {
        Value r;
        r.v = x;
        return r;
    }
    static Value real(double x) {
        Value r;
        r.v = x;
        return r;
    }

    bool unset() const { return std::holds_alternative<std::monostate>(v); }
    bool is_int() const { return std::holds_alternative<long long>(v); }
    bool is_real() const { return std::holds_alternative<double>(v); }
    bool is_dual() const { return std::holds_alternative<std::shared_ptr<DualObj>>(v); }
    bool is_tracer() const { return std::holds_alternative<std::shared_ptr<TracerObj>>(v); }
    bool is_array() const { return std::holds_alternative<std::shared_ptr<ArrayObj>>(v); }
    bool is_closure() const { return std::holds_alternative<Closure>(v); }
    bool is_numeric() const { return is_int() || is_real() || is_dual() || is_tracer(); }

    long long as_int() const { return std::get<long long>(v); }
    double as_real() const { return std::get<double>(v); }
    const std::shared_ptr<DualObj>& dual() const { return std::get<std::shared_ptr<DualObj>>(v); }
    const std::shared_ptr<TracerObj>& tracer() const {
        return std::get<std::shared_ptr<TracerObj>>(v);
    }
    const std::shared_ptr<ArrayObj>& array() const { return std::get<std::shared_ptr<ArrayObj>>(v); }
    const Closure& closure() const { return std::get<Closure>(v); }
};

// Forward-mode layer: primal and tangent under one tag.
struct DualObj {
    Tag tag;
    Value primal;
    Value tangent;
};

// Reverse-mode layer: node `node` of the active tape with this tag.
struct TracerObj {
    Tag tag;
    std::uint32_t node;
    Value primal;
};

struct ArrayObj {
    std::vector<Value> cells; // element I lives at cells[I-1]
};

// Tag of the value's top AD layer; 0 for anything plain.
Tag top_tag(const Value& v);

// Recursive primal as a double (integers widen). Throws EngineError for
// unset values, arrays, and closures.
double primal_of(const Value& v);

// Exactly integer 0 or real 0.0, with no AD layer.
bool plain_zero(const Value& v);

// Program-facing rendering: integers print as digits, other numerics as
// the recursive primal with up to 17 significant digits.
std::string render_value(const Value& val);

} // namespace farfel
