#include "farfel/ast.hpp"

namespace farfel {

namespace {

bool eq(const Expr* a, const Expr* b);
bool eq(const std::vector<Stmt>& a, const std::vector<Stmt>& b);
bool eq(const Subprogram& a, const Subprogram& b);

bool eq(const LValue& a, const LValue& b) {
    return a.name == b.name && eq(a.index.get(), b.index.get());
}

bool eq(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, IntLit>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, RealLit>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, ArrayRef>) {
                return x.name == y.name && eq(x.index.get(), y.index.get());
            } else if constexpr (std::is_same_v<T, Neg>) {
                return eq(x.operand.get(), y.operand.get());
            } else if constexpr (std::is_same_v<T, Binary>) {
                return x.op == y.op && eq(x.lhs.get(), y.lhs.get()) && eq(x.rhs.get(), y.rhs.get());
            } else if constexpr (std::is_same_v<T, CallExpr>) {
                if (x.callee != y.callee || x.args.size() != y.args.size()) return false;
                for (size_t i = 0; i < x.args.size(); ++i)
                    if (!eq(x.args[i].get(), y.args[i].get())) return false;
                return true;
            } else if constexpr (std::is_same_v<T, AdReadExpr>) {
                return x.mode == y.mode && x.name == y.name && eq(x.index.get(), y.index.get());
            }
        },
        a.node);
}

bool eq(const Expr* a, const Expr* b) {
    if (!a || !b) return a == b;
    return eq(*a, *b);
}

bool eq(const AdSpec& a, const AdSpec& b) {
    if (a.bindings.size() != b.bindings.size() || a.has_loop != b.has_loop) return false;
    for (size_t i = 0; i < a.bindings.size(); ++i) {
        const auto& x = a.bindings[i];
        const auto& y = b.bindings[i];
        if (x.kw_mode != y.kw_mode) return false;
        if (!eq(x.ad_ref, y.ad_ref) || !eq(x.out, y.out) || !eq(x.seed.get(), y.seed.get()))
            return false;
    }
    if (a.has_loop) {
        if (a.loop_var != b.loop_var) return false;
        if (!eq(a.lo.get(), b.lo.get()) || !eq(a.hi.get(), b.hi.get())) return false;
    }
    return true;
}

bool eq(const std::vector<AdSpec>& a, const std::vector<AdSpec>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool eq(const Stmt& a, const Stmt& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, AssignStmt>) {
                return eq(x.target, y.target) && eq(x.value.get(), y.value.get());
            } else if constexpr (std::is_same_v<T, CallStmt>) {
                if (x.callee != y.callee || x.args.size() != y.args.size()) return false;
                for (size_t i = 0; i < x.args.size(); ++i)
                    if (!eq(x.args[i].get(), y.args[i].get())) return false;
                return true;
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                return x.op == y.op && eq(x.lhs.get(), y.lhs.get()) && eq(x.rhs.get(), y.rhs.get()) &&
                       eq(x.then_body, y.then_body) && eq(x.else_body, y.else_body);
            } else if constexpr (std::is_same_v<T, DoStmt>) {
                return x.var == y.var && eq(x.lo.get(), y.lo.get()) && eq(x.hi.get(), y.hi.get()) &&
                       eq(x.step.get(), y.step.get()) && eq(x.body, y.body);
            } else if constexpr (std::is_same_v<T, PrintStmt>) {
                if (x.values.size() != y.values.size()) return false;
                for (size_t i = 0; i < x.values.size(); ++i)
                    if (!eq(x.values[i].get(), y.values[i].get())) return false;
                return true;
            } else if constexpr (std::is_same_v<T, ReturnStmt>) {
                return true;
            } else if constexpr (std::is_same_v<T, SubDefStmt>) {
                return eq(*x.sub, *y.sub);
            } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                return x.block.mode == y.block.mode && eq(x.block.open, y.block.open) &&
                       eq(x.block.close, y.block.close) && eq(x.block.body, y.block.body);
            } else if constexpr (std::is_same_v<T, AdMisuseStmt>) {
                return x.mode == y.mode && eq(x.target, y.target) && eq(x.value.get(), y.value.get());
            }
        },
        a.node);
}

bool eq(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool eq(const Subprogram& a, const Subprogram& b) {
    if (a.kind != b.kind || a.name != b.name || a.params != b.params) return false;
    if (a.dims.size() != b.dims.size()) return false;
    for (size_t i = 0; i < a.dims.size(); ++i) {
        if (a.dims[i].name != b.dims[i].name) return false;
        if (!eq(a.dims[i].extent.get(), b.dims[i].extent.get())) return false;
    }
    return eq(a.body, b.body);
}

} // namespace

bool ast_equal(const Expr& a, const Expr& b) { return eq(a, b); }

bool ast_equal(const Program& a, const Program& b) {
    if (a.units.size() != b.units.size()) return false;
    for (size_t i = 0; i < a.units.size(); ++i)
        if (!eq(*a.units[i], *b.units[i])) return false;
    return true;
}

std::string_view binop_name(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Pow: return "**";
    }
    return "?";
}

std::string_view relop_name(RelOp op) {
    switch (op) {
    case RelOp::Lt: return ".LT.";
    case RelOp::Le: return ".LE.";
    case RelOp::Gt: return ".GT.";
    case RelOp::Ge: return ".GE.";
    case RelOp::Eq: return ".EQ.";
    case RelOp::Ne: return ".NE.";
    }
    return "?";
}

} // namespace farfel
