#include "farfel/value.hpp"

#include <array>
#include <cstdio>

#include "farfel/ast.hpp"
#include "farfel/diag.hpp"

namespace farfel {

namespace {

constexpr std::array<const char*, 12> kIntrinsicNames = {
    "SQRT", "EXP", "LOG", "SIN", "COS", "TAN", "ATAN", "ABS", "MIN", "MAX", "GAMMA", "LGAMMA",
};

} // namespace

int intrinsic_id(const std::string& upper_name) {
    for (std::size_t i = 0; i < kIntrinsicNames.size(); ++i)
        if (upper_name == kIntrinsicNames[i]) return static_cast<int>(i);
    return -1;
}

const char* intrinsic_name(Intrinsic f) {
    return kIntrinsicNames[static_cast<std::size_t>(f)];
}

Tag top_tag(const Value& v) {
    if (v.is_dual()) return v.dual()->tag;
    if (v.is_tracer()) return v.tracer()->tag;
    return 0;
}

double primal_of(const Value& v) {
    if (v.is_int()) return static_cast<double>(v.as_int());
    if (v.is_real()) return v.as_real();
    if (v.is_dual()) return primal_of(v.dual()->primal);
    if (v.is_tracer()) return primal_of(v.tracer()->primal);
    if (v.is_array()) throw EngineError("an array cannot be used as a number");
    if (v.is_closure()) throw EngineError("a subprogram cannot be used as a number");
    throw EngineError("value used before it was set");
}

bool plain_zero(const Value& v) {
    if (v.is_int()) return v.as_int() == 0;
    if (v.is_real()) return v.as_real() == 0.0;
    return false;
}

std::string render_value(const Value& val) {
    if (val.unset()) return "<unset>";
    if (val.is_int()) return std::to_string(val.as_int());
    if (val.is_array()) return "<array(" + std::to_string(val.array()->cells.size()) + ")>";
    if (val.is_closure()) {
        const Closure& c = val.closure();
        if (c.sub == nullptr) return "<intrinsic " + std::string(intrinsic_name(c.intrinsic)) + ">";
        return "<subprogram " + c.sub->name + ">";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", primal_of(val));
    return buf;
}

} // namespace farfel
