#include "farfel/printer.hpp"

#include <charconv>

namespace farfel {

namespace {

std::string fmt_real(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    // Keep the literal a real on reparse.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string_view ad_kw(AdMode m) { return m == AdMode::Forward ? "TANGENT" : "COTANGENT"; }

// Precedence levels for minimal parenthesization: 1 additive, 2
// multiplicative, 3 unary minus, 4 exponent, 5 atom. Exponent binds
// tighter than unary minus and associates to the right.
int level(const Expr& e) {
    return std::visit(
        [](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Binary>) {
                switch (x.op) {
                case BinOp::Add:
                case BinOp::Sub: return 1;
                case BinOp::Mul:
                case BinOp::Div: return 2;
                case BinOp::Pow: return 4;
                }
                return 1;
            } else if constexpr (std::is_same_v<T, Neg>) {
                return 3;
            } else {
                return 5;
            }
        },
        e.node);
}

void expr(std::string& out, const Expr& e, int need);

void lvalue(std::string& out, const LValue& lv) {
    out += lv.name;
    if (lv.index) {
        out += '(';
        expr(out, *lv.index, 1);
        out += ')';
    }
}

void expr(std::string& out, const Expr& e, int need) {
    bool paren = level(e) < need;
    if (paren) out += '(';
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit>) {
                out += std::to_string(x.value);
            } else if constexpr (std::is_same_v<T, RealLit>) {
                out += fmt_real(x.value);
            } else if constexpr (std::is_same_v<T, VarRef>) {
                out += x.name;
            } else if constexpr (std::is_same_v<T, ArrayRef>) {
                out += x.name;
                out += '(';
                expr(out, *x.index, 1);
                out += ')';
            } else if constexpr (std::is_same_v<T, Neg>) {
                out += '-';
                expr(out, *x.operand, 4);
            } else if constexpr (std::is_same_v<T, Binary>) {
                switch (x.op) {
                case BinOp::Add:
                case BinOp::Sub:
                    expr(out, *x.lhs, 1);
                    out += x.op == BinOp::Add ? " + " : " - ";
                    expr(out, *x.rhs, 2);
                    break;
                case BinOp::Mul:
                case BinOp::Div:
                    expr(out, *x.lhs, 2);
                    out += x.op == BinOp::Mul ? '*' : '/';
                    expr(out, *x.rhs, 3);
                    break;
                case BinOp::Pow:
                    expr(out, *x.lhs, 5);
                    out += "**";
                    expr(out, *x.rhs, 3);
                    break;
                }
            } else if constexpr (std::is_same_v<T, CallExpr>) {
                out += x.callee;
                out += '(';
                for (size_t i = 0; i < x.args.size(); ++i) {
                    if (i) out += ", ";
                    expr(out, *x.args[i], 1);
                }
                out += ')';
            } else if constexpr (std::is_same_v<T, AdReadExpr>) {
                out += ad_kw(x.mode);
                out += '(';
                out += x.name;
                if (x.index) {
                    out += '(';
                    expr(out, *x.index, 1);
                    out += ')';
                }
                out += ')';
            }
        },
        e.node);
    if (paren) out += ')';
}

std::string expr_str(const Expr& e) {
    std::string s;
    expr(s, e, 1);
    return s;
}

void spec_list(std::string& out, const std::vector<AdSpec>& specs) {
    bool first = true;
    for (const auto& spec : specs) {
        for (const auto& b : spec.bindings) {
            if (!first) out += ", ";
            first = false;
            if (b.seed) { // opening form: TANGENT(X) = seed
                out += ad_kw(b.kw_mode);
                out += '(';
                lvalue(out, b.ad_ref);
                out += ") = ";
                expr(out, *b.seed, 1);
            } else { // closing form: OUT = TANGENT(X)
                lvalue(out, b.out);
                out += " = ";
                out += ad_kw(b.kw_mode);
                out += '(';
                lvalue(out, b.ad_ref);
                out += ')';
            }
        }
        if (spec.has_loop) {
            if (!first) out += ", ";
            first = false;
            out += spec.loop_var;
            out += " = ";
            expr(out, *spec.lo, 1);
            out += ", ";
            expr(out, *spec.hi, 1);
        }
    }
}

void unit(std::string& out, const Subprogram& s, int ind);

void line(std::string& out, int ind, std::string_view text) {
    out.append(static_cast<size_t>(ind) * 2, ' ');
    out += text;
    out += '\n';
}

void body(std::string& out, const std::vector<Stmt>& stmts, int ind) {
    for (const auto& st : stmts) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, AssignStmt>) {
                    std::string s;
                    lvalue(s, x.target);
                    s += " = ";
                    expr(s, *x.value, 1);
                    line(out, ind, s);
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    std::string s = "CALL ";
                    s += x.callee;
                    if (!x.args.empty()) {
                        s += '(';
                        for (size_t i = 0; i < x.args.size(); ++i) {
                            if (i) s += ", ";
                            expr(s, *x.args[i], 1);
                        }
                        s += ')';
                    }
                    line(out, ind, s);
                } else if constexpr (std::is_same_v<T, IfStmt>) {
                    std::string s = "IF (";
                    expr(s, *x.lhs, 1);
                    s += ' ';
                    s += relop_name(x.op);
                    s += ' ';
                    expr(s, *x.rhs, 1);
                    s += ") THEN";
                    line(out, ind, s);
                    body(out, x.then_body, ind + 1);
                    if (!x.else_body.empty()) {
                        line(out, ind, "ELSE");
                        body(out, x.else_body, ind + 1);
                    }
                    line(out, ind, "END IF");
                } else if constexpr (std::is_same_v<T, DoStmt>) {
                    std::string s = "DO ";
                    s += x.var;
                    s += " = ";
                    expr(s, *x.lo, 1);
                    s += ", ";
                    expr(s, *x.hi, 1);
                    if (x.step) {
                        s += ", ";
                        expr(s, *x.step, 1);
                    }
                    line(out, ind, s);
                    body(out, x.body, ind + 1);
                    line(out, ind, "END DO");
                } else if constexpr (std::is_same_v<T, PrintStmt>) {
                    std::string s = "PRINT ";
                    for (size_t i = 0; i < x.values.size(); ++i) {
                        if (i) s += ", ";
                        expr(s, *x.values[i], 1);
                    }
                    line(out, ind, s);
                } else if constexpr (std::is_same_v<T, ReturnStmt>) {
                    line(out, ind, "RETURN");
                } else if constexpr (std::is_same_v<T, SubDefStmt>) {
                    unit(out, *x.sub, ind);
                } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                    std::string_view kw = x.block.mode == AdMode::Forward ? "ADF" : "ADR";
                    std::string s{kw};
                    s += '(';
                    spec_list(s, x.block.open);
                    s += ')';
                    line(out, ind, s);
                    body(out, x.block.body, ind + 1);
                    s = "END ";
                    s += kw;
                    s += '(';
                    spec_list(s, x.block.close);
                    s += ')';
                    line(out, ind, s);
                } else if constexpr (std::is_same_v<T, AdMisuseStmt>) {
                    std::string s{ad_kw(x.mode)};
                    s += '(';
                    lvalue(s, x.target);
                    s += ") = ";
                    expr(s, *x.value, 1);
                    line(out, ind, s);
                }
            },
            st.node);
    }
}

void unit(std::string& out, const Subprogram& s, int ind) {
    std::string head;
    switch (s.kind) {
    case SubKind::Program:
        head = "PROGRAM " + s.name;
        break;
    case SubKind::Function:
    case SubKind::Subroutine:
        head = (s.kind == SubKind::Function ? "FUNCTION " : "SUBROUTINE ") + s.name;
        if (s.kind == SubKind::Function || !s.params.empty()) {
            head += '(';
            for (size_t i = 0; i < s.params.size(); ++i) {
                if (i) head += ", ";
                head += s.params[i];
            }
            head += ')';
        }
        break;
    }
    line(out, ind, head);
    for (const auto& d : s.dims) {
        std::string dl = "DIMENSION " + d.name + "(";
        expr(dl, *d.extent, 1);
        dl += ')';
        line(out, ind + 1, dl);
    }
    body(out, s.body, ind + 1);
    line(out, ind, "END");
}

} // namespace

std::string print_program(const Program& prog) {
    std::string out;
    bool first = true;
    for (const auto& u : prog.units) {
        if (!first) out += '\n';
        first = false;
        unit(out, *u, 0);
    }
    return out;
}

std::string print_expr(const Expr& e) { return expr_str(e); }

} // namespace farfel
