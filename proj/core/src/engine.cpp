#include "farfel/engine.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "farfel/diag.hpp"
#include "farfel/special.hpp"

namespace farfel {

namespace {

[[noreturn]] void err(std::string m) { throw EngineError(std::move(m)); }

Value primal_at(const Value& v, Tag t) {
    if (top_tag(v) != t) return v;
    return v.is_dual() ? v.dual()->primal : v.tracer()->primal;
}

Value tangent_at(const Value& v, Tag t) {
    if (top_tag(v) == t && v.is_dual()) return v.dual()->tangent;
    return Value::real(0.0);
}

Value wrap_tracer(Tag t, std::uint32_t node, Value primal) {
    Value r;
    r.v = std::make_shared<TracerObj>(TracerObj{t, node, std::move(primal)});
    return r;
}

long long ipow(long long base, long long e) {
    if (e < 0) {
        // Fortran semantics: I ** (-J) is the integer quotient 1 / I**J.
        if (base == 0) err("0 raised to a negative power");
        if (base == 1) return 1;
        if (base == -1) return (e % 2 == 0) ? 1 : -1;
        return 0;
    }
    long long r = 1;
    while (e > 0) {
        if (e & 1) {
            if (__builtin_mul_overflow(r, base, &r)) err("integer overflow in **");
        }
        e >>= 1;
        if (e > 0 && __builtin_mul_overflow(base, base, &base)) err("integer overflow in **");
    }
    return r;
}

bool gamma_pole(double x) { return x <= 0.0 && x == std::floor(x); }

} // namespace

std::shared_ptr<Tape> Engine::push_tape(Tag t) {
    auto tp = std::make_shared<Tape>(t);
    tapes_.push_back(tp);
    return tp;
}

void Engine::pop_tape() { tapes_.pop_back(); }

Tape* Engine::find_tape(Tag t) {
    for (auto it = tapes_.rbegin(); it != tapes_.rend(); ++it)
        if ((*it)->tag() == t) return it->get();
    return nullptr;
}

Value Engine::make_dual(Tag t, Value primal, Value tangent) {
    if (plain_zero(tangent)) return primal;
    Value r;
    r.v = std::make_shared<DualObj>(DualObj{t, std::move(primal), std::move(tangent)});
    return r;
}

Value Engine::tangent_of(const Value& v, Tag t) {
    if (top_tag(v) == t && v.is_dual()) return v.dual()->tangent;
    return Value::real(0.0);
}

Value Engine::strip_tag(const Value& v, Tag t) {
    Value r = v;
    while (top_tag(r) == t) r = r.is_dual() ? r.dual()->primal : r.tracer()->primal;
    return r;
}

Value Engine::make_leaf(Tag t, Value primal) {
    Tape* tp = find_tape(t);
    if (!tp) err("no active tape carries this tag");
    std::uint32_t id = tp->leaf(primal);
    return wrap_tracer(t, id, std::move(primal));
}

void Engine::add_adjoint(Tag t, std::uint32_t node, const Value& amount) {
    Tape* tp = find_tape(t);
    if (!tp) err("no active tape carries this tag");
    TapeNode& n = tp->node(node);
    n.adjoint = n.adjoint.unset() ? amount : add(n.adjoint, amount);
}

Value Engine::adjoint_of(Tag t, std::uint32_t node) {
    Tape* tp = find_tape(t);
    if (!tp) err("no active tape carries this tag");
    const Value& a = tp->node(node).adjoint;
    return a.unset() ? Value::real(0.0) : a;
}

void Engine::reverse_sweep(Tag t) {
    Tape* tp = find_tape(t);
    if (!tp) err("no active tape carries this tag");
    // Partials and adjoints never carry tag t itself, so this arithmetic
    // cannot append to the tape being swept; it may record on enclosing
    // tapes, which is exactly what makes nested reverse mode work.
    for (std::uint32_t i = static_cast<std::uint32_t>(tp->size()); i-- > 0;) {
        TapeNode& n = tp->node(i);
        if (n.adjoint.unset() || plain_zero(n.adjoint)) continue;
        for (int k = 0; k < n.n_in; ++k) {
            Value contrib = mul(n.adjoint, n.partial[k]);
            TapeNode& m = tp->node(n.in[k]);
            m.adjoint = m.adjoint.unset() ? std::move(contrib) : add(m.adjoint, contrib);
        }
    }
}

Value Engine::record_binary(Tape& tape, Tag t, const char* op, const Value& a, const Value& b,
                            Value primal, Value da, Value db) {
    bool at = top_tag(a) == t;
    bool bt = top_tag(b) == t;
    std::uint32_t id;
    if (at && bt)
        id = tape.record2(op, a.tracer()->node, std::move(da), b.tracer()->node, std::move(db),
                          primal);
    else if (at)
        id = tape.record1(op, a.tracer()->node, std::move(da), primal);
    else
        id = tape.record1(op, b.tracer()->node, std::move(db), primal);
    return wrap_tracer(t, id, std::move(primal));
}

Value Engine::add(const Value& a, const Value& b) {
    Tag t = std::max(top_tag(a), top_tag(b));
    if (t == 0) {
        if (a.is_int() && b.is_int()) {
            long long r;
            if (__builtin_add_overflow(a.as_int(), b.as_int(), &r)) err("integer overflow in +");
            return Value::integer(r);
        }
        return Value::real(primal_of(a) + primal_of(b));
    }
    if (plain_zero(a)) return b;
    if (plain_zero(b)) return a;
    Value pa = primal_at(a, t), pb = primal_at(b, t);
    bool fwd = top_tag(a) == t ? a.is_dual() : b.is_dual();
    if (fwd) return make_dual(t, add(pa, pb), add(tangent_at(a, t), tangent_at(b, t)));
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    return record_binary(*tp, t, "+", a, b, add(pa, pb), Value::real(1.0), Value::real(1.0));
}

Value Engine::sub(const Value& a, const Value& b) {
    Tag t = std::max(top_tag(a), top_tag(b));
    if (t == 0) {
        if (a.is_int() && b.is_int()) {
            long long r;
            if (__builtin_sub_overflow(a.as_int(), b.as_int(), &r)) err("integer overflow in -");
            return Value::integer(r);
        }
        return Value::real(primal_of(a) - primal_of(b));
    }
    if (plain_zero(b)) return a;
    if (plain_zero(a)) return neg(b);
    Value pa = primal_at(a, t), pb = primal_at(b, t);
    bool fwd = top_tag(a) == t ? a.is_dual() : b.is_dual();
    if (fwd) return make_dual(t, sub(pa, pb), sub(tangent_at(a, t), tangent_at(b, t)));
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    return record_binary(*tp, t, "-", a, b, sub(pa, pb), Value::real(1.0), Value::real(-1.0));
}

Value Engine::mul(const Value& a, const Value& b) {
    Tag t = std::max(top_tag(a), top_tag(b));
    if (t == 0) {
        if (a.is_int() && b.is_int()) {
            long long r;
            if (__builtin_mul_overflow(a.as_int(), b.as_int(), &r)) err("integer overflow in *");
            return Value::integer(r);
        }
        return Value::real(primal_of(a) * primal_of(b));
    }
    // An exact plain zero annihilates the other side's trace.
    if (plain_zero(a)) return a;
    if (plain_zero(b)) return b;
    Value pa = primal_at(a, t), pb = primal_at(b, t);
    bool fwd = top_tag(a) == t ? a.is_dual() : b.is_dual();
    if (fwd)
        return make_dual(t, mul(pa, pb),
                         add(mul(tangent_at(a, t), pb), mul(pa, tangent_at(b, t))));
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    return record_binary(*tp, t, "*", a, b, mul(pa, pb), pb, pa);
}

Value Engine::div(const Value& a, const Value& b) {
    Tag t = std::max(top_tag(a), top_tag(b));
    if (t == 0) {
        if (a.is_int() && b.is_int()) {
            long long x = a.as_int(), y = b.as_int();
            if (y == 0) err("division by zero");
            if (x == LLONG_MIN && y == -1) err("integer overflow in /");
            return Value::integer(x / y); // Fortran division truncates toward zero
        }
        double y = primal_of(b);
        if (y == 0.0) err("division by zero");
        return Value::real(primal_of(a) / y);
    }
    Value pa = primal_at(a, t), pb = primal_at(b, t);
    Value f = div(pa, pb);
    bool fwd = top_tag(a) == t ? a.is_dual() : b.is_dual();
    if (fwd) {
        Value ta = tangent_at(a, t), tb = tangent_at(b, t);
        return make_dual(t, f, div(sub(ta, mul(f, tb)), pb));
    }
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    Value da, db;
    if (top_tag(a) == t) da = div(Value::real(1.0), pb);
    if (top_tag(b) == t) db = neg(div(f, pb));
    return record_binary(*tp, t, "/", a, b, std::move(f), std::move(da), std::move(db));
}

Value Engine::pow(const Value& a, const Value& b) {
    Tag t = std::max(top_tag(a), top_tag(b));
    if (t == 0) {
        if (a.is_int() && b.is_int()) return Value::integer(ipow(a.as_int(), b.as_int()));
        double x = primal_of(a), y = primal_of(b);
        if (x == 0.0 && y < 0.0) err("0 raised to a negative power");
        if (x < 0.0 && y != std::floor(y)) err("negative base raised to a non-integer power");
        return Value::real(std::pow(x, y));
    }
    Value pa = primal_at(a, t), pb = primal_at(b, t);
    Value f = pow(pa, pb);
    bool fwd = top_tag(a) == t ? a.is_dual() : b.is_dual();
    if (fwd) {
        Value ta = tangent_at(a, t), tb = tangent_at(b, t);
        Value tan = Value::real(0.0);
        if (!plain_zero(ta)) tan = mul(mul(pb, pow(pa, sub(pb, Value::integer(1)))), ta);
        // The log factor exists only when the exponent itself varies, so
        // constant exponents keep negative bases differentiable.
        if (!plain_zero(tb)) tan = add(tan, mul(mul(f, unary(Intrinsic::Log, pa)), tb));
        return make_dual(t, f, tan);
    }
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    Value da, db;
    if (top_tag(a) == t) da = mul(pb, pow(pa, sub(pb, Value::integer(1))));
    if (top_tag(b) == t) db = mul(f, unary(Intrinsic::Log, pa));
    return record_binary(*tp, t, "**", a, b, std::move(f), std::move(da), std::move(db));
}

Value Engine::neg(const Value& a) {
    Tag t = top_tag(a);
    if (t == 0) {
        if (a.is_int()) {
            long long r;
            if (__builtin_sub_overflow(0LL, a.as_int(), &r)) err("integer overflow in unary -");
            return Value::integer(r);
        }
        return Value::real(-primal_of(a));
    }
    if (a.is_dual())
        return make_dual(t, neg(a.dual()->primal), neg(a.dual()->tangent));
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    Value p = neg(a.tracer()->primal);
    std::uint32_t id = tp->record1("NEG", a.tracer()->node, Value::real(-1.0), p);
    return wrap_tracer(t, id, std::move(p));
}

Value Engine::derivative_of(Intrinsic f, const Value& pa, const Value& fv) {
    switch (f) {
    case Intrinsic::Sqrt: return div(Value::real(0.5), fv);
    case Intrinsic::Exp: return fv;
    case Intrinsic::Log: return div(Value::real(1.0), pa);
    case Intrinsic::Sin: return unary(Intrinsic::Cos, pa);
    case Intrinsic::Cos: return neg(unary(Intrinsic::Sin, pa));
    case Intrinsic::Tan: {
        Value c = unary(Intrinsic::Cos, pa);
        return div(Value::real(1.0), mul(c, c));
    }
    case Intrinsic::Atan: return div(Value::real(1.0), add(Value::real(1.0), mul(pa, pa)));
    case Intrinsic::Abs: {
        double x = primal_of(pa);
        return Value::real(x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
    }
    case Intrinsic::Gamma: return mul(fv, polygamma_val(0, pa));
    case Intrinsic::Lgamma: return polygamma_val(0, pa);
    default: err("no derivative rule for this intrinsic");
    }
}

Value Engine::polygamma_val(int n, const Value& a) {
    Tag t = top_tag(a);
    if (t == 0) return Value::real(polygamma(n, primal_of(a)));
    Value pa = primal_at(a, t);
    if (a.is_dual())
        return make_dual(t, polygamma_val(n, pa),
                         mul(polygamma_val(n + 1, pa), a.dual()->tangent));
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    Value p = polygamma_val(n, pa);
    std::uint32_t id = tp->record1("PSI", a.tracer()->node, polygamma_val(n + 1, pa), p);
    return wrap_tracer(t, id, std::move(p));
}

Value Engine::unary(Intrinsic f, const Value& a) {
    if (f == Intrinsic::Min || f == Intrinsic::Max) err("MIN and MAX take two arguments");
    Tag t = top_tag(a);
    if (t == 0) {
        if (a.is_int() && f == Intrinsic::Abs) {
            long long x = a.as_int();
            if (x == LLONG_MIN) err("integer overflow in ABS");
            return Value::integer(x < 0 ? -x : x);
        }
        double x = primal_of(a);
        switch (f) {
        case Intrinsic::Sqrt:
            if (x < 0.0) err("SQRT of a negative number");
            return Value::real(std::sqrt(x));
        case Intrinsic::Exp: return Value::real(std::exp(x));
        case Intrinsic::Log:
            if (x <= 0.0) err("LOG of a non-positive number");
            return Value::real(std::log(x));
        case Intrinsic::Sin: return Value::real(std::sin(x));
        case Intrinsic::Cos: return Value::real(std::cos(x));
        case Intrinsic::Tan: return Value::real(std::tan(x));
        case Intrinsic::Atan: return Value::real(std::atan(x));
        case Intrinsic::Abs: return Value::real(std::fabs(x));
        case Intrinsic::Gamma:
            if (gamma_pole(x)) err("GAMMA pole at a non-positive integer");
            return Value::real(std::tgamma(x));
        case Intrinsic::Lgamma:
            if (gamma_pole(x)) err("LGAMMA pole at a non-positive integer");
            return Value::real(std::lgamma(x));
        default: err("MIN and MAX take two arguments");
        }
    }
    Value pa = primal_at(a, t);
    Value fv = unary(f, pa);
    if (a.is_dual())
        return make_dual(t, fv, mul(derivative_of(f, pa, fv), a.dual()->tangent));
    Tape* tp = find_tape(t);
    if (!tp) err("a value from a finished ADR block was used in arithmetic");
    Value d = derivative_of(f, pa, fv);
    std::uint32_t id = tp->record1(intrinsic_name(f), a.tracer()->node, std::move(d), fv);
    return wrap_tracer(t, id, std::move(fv));
}

Value Engine::min2(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) return Value::integer(std::min(a.as_int(), b.as_int()));
    return primal_of(b) < primal_of(a) ? b : a; // ties keep the first argument
}

Value Engine::max2(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) return Value::integer(std::max(a.as_int(), b.as_int()));
    return primal_of(b) > primal_of(a) ? b : a; // ties keep the first argument
}

std::string Tape::dump() const {
    std::string out =
        "tape tag=" + std::to_string(tag_) + " nodes=" + std::to_string(nodes_.size()) + "\n";
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const TapeNode& n = nodes_[i];
        out += "  " + std::to_string(i) + ": " + n.op;
        for (int k = 0; k < n.n_in; ++k) {
            out += k == 0 ? " (" : ", ";
            out += std::to_string(n.in[k]) + " d=" + render_value(n.partial[k]);
        }
        if (n.n_in > 0) out += ")";
        out += " primal=" + render_value(n.primal);
        out += " adjoint=" + (n.adjoint.unset() ? std::string("0") : render_value(n.adjoint));
        out += "\n";
    }
    return out;
}

} // namespace farfel
