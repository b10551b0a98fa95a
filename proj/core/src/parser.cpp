#include "farfel/parser.hpp"

#include <cerrno>
#include <cstdlib>
#include <set>
#include <string>
#include <utility>

namespace farfel {

namespace {

std::string describe(const Token& t) {
    switch (t.kind) {
    case TokKind::Eol: return "end of line";
    case TokKind::Eof: return "end of input";
    default: return "'" + t.lexeme + "'";
    }
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
        if (toks_.empty()) toks_.push_back(Token{}); // default token is Eof
    }

    Program run() {
        Program prog;
        skip_eols();
        while (!cur().is(TokKind::Eof)) {
            prog.units.push_back(parse_unit(true));
            skip_eols();
        }
        if (prog.units.empty())
            throw ParseError(Diagnostic{Phase::Parse, {1, 1}, "source file contains no program units"});
        prog.node_count = next_id_;
        return prog;
    }

private:
    // One entry per lexically enclosing subprogram. NAME(I) parses as an
    // array element only when the nearest scope declaring NAME dimensions
    // it; otherwise it is a call.
    struct LexScope {
        std::set<std::string> arrays;     // DIMENSION'd in this unit
        std::set<std::string> non_arrays; // params, the unit's own name, nested subprogram names
    };

    std::vector<Token> toks_;
    size_t pos_ = 0;
    NodeId next_id_ = 0;
    std::vector<LexScope> scopes_;

    const Token& cur() const { return toks_[pos_]; }
    void advance() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }
    NodeId fresh() { return next_id_++; }

    [[noreturn]] void error(const Token& t, std::string msg) const {
        throw ParseError(Diagnostic{Phase::Parse, {t.line, t.col}, std::move(msg)});
    }

    void skip_eols() {
        while (cur().is(TokKind::Eol)) advance();
    }

    std::string expect_ident(std::string_view what) {
        const Token& t = cur();
        if (!t.is(TokKind::Ident)) error(t, "expected " + std::string(what) + ", found " + describe(t));
        std::string name = t.lexeme;
        advance();
        return name;
    }
    void expect_op(std::string_view op) {
        if (!cur().is_op(op)) error(cur(), "expected '" + std::string(op) + "', found " + describe(cur()));
        advance();
    }
    void expect_punct(std::string_view p) {
        if (!cur().is_punct(p)) error(cur(), "expected '" + std::string(p) + "', found " + describe(cur()));
        advance();
    }
    void expect_eol() {
        if (!cur().is(TokKind::Eol)) error(cur(), "expected end of line, found " + describe(cur()));
        advance();
    }

    bool is_array(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (it->arrays.count(name)) return true;
            if (it->non_arrays.count(name)) return false; // shadowed by a scalar/subprogram
        }
        return false;
    }

    template <typename Node>
    ExprPtr make_expr(SrcLoc loc, Node&& node) {
        auto e = std::make_unique<Expr>();
        e->loc = loc;
        e->id = fresh();
        e->node = std::forward<Node>(node);
        return e;
    }

    // ---- units ----

    std::unique_ptr<Subprogram> parse_unit(bool top_level) {
        auto sub = std::make_unique<Subprogram>();
        const Token& t0 = cur();
        sub->loc = {t0.line, t0.col};
        sub->id = fresh();
        if (t0.is_kw("PROGRAM")) {
            if (!top_level) error(t0, "PROGRAM units cannot be nested");
            sub->kind = SubKind::Program;
        } else if (t0.is_kw("FUNCTION")) {
            sub->kind = SubKind::Function;
        } else if (t0.is_kw("SUBROUTINE")) {
            sub->kind = SubKind::Subroutine;
        } else {
            error(t0, "expected PROGRAM, FUNCTION, or SUBROUTINE, found " + describe(t0));
        }
        advance();
        sub->name = expect_ident("a unit name");
        if (sub->kind == SubKind::Function) {
            expect_punct("(");
            parse_params(*sub);
        } else if (sub->kind == SubKind::Subroutine && cur().is_punct("(")) {
            advance();
            parse_params(*sub);
        }
        expect_eol();

        scopes_.push_back({});
        scopes_.back().non_arrays.insert(sub->name);
        for (const auto& p : sub->params) scopes_.back().non_arrays.insert(p);

        // Declarations precede executable statements so that NAME(I) forms
        // parse unambiguously for the rest of the unit.
        skip_eols();
        while (cur().is_kw("DIMENSION")) {
            parse_dimension(*sub);
            skip_eols();
        }

        sub->body = parse_body(true);

        const Token& e = cur();
        if (!e.is_kw("END")) error(e, "expected END to close " + sub->name + ", found " + describe(e));
        advance();
        if (!cur().is(TokKind::Eol))
            error(cur(), "expected end of line after END, found " + describe(cur()));
        advance();
        scopes_.pop_back();
        return sub;
    }

    void parse_params(Subprogram& sub) { // '(' already consumed; consumes ')'
        if (cur().is_punct(")")) {
            advance();
            return;
        }
        while (true) {
            sub.params.push_back(expect_ident("a parameter name"));
            if (cur().is_punct(",")) {
                advance();
                continue;
            }
            break;
        }
        expect_punct(")");
    }

    void parse_dimension(Subprogram& sub) {
        advance(); // DIMENSION
        while (true) {
            DimDecl d;
            const Token& nt = cur();
            d.loc = {nt.line, nt.col};
            d.id = fresh();
            d.name = expect_ident("an array name");
            expect_punct("(");
            d.extent = parse_expr();
            expect_punct(")");
            scopes_.back().arrays.insert(d.name);
            sub.dims.push_back(std::move(d));
            if (cur().is_punct(",")) {
                advance();
                continue;
            }
            break;
        }
        expect_eol();
    }

    // ---- statements ----

    std::vector<Stmt> parse_body(bool allow_defs) {
        std::vector<Stmt> body;
        skip_eols();
        while (!cur().is_kw("END") && !cur().is_kw("ELSE") && !cur().is(TokKind::Eof)) {
            body.push_back(parse_stmt(allow_defs));
            skip_eols();
        }
        return body;
    }

    Stmt parse_stmt(bool allow_defs) {
        const Token& t = cur();
        Stmt s;
        s.loc = {t.line, t.col};
        s.id = fresh();
        if (t.is(TokKind::Ident)) {
            AssignStmt a;
            a.target = parse_lvalue();
            expect_op("=");
            a.value = parse_expr();
            expect_eol();
            s.node = std::move(a);
            return s;
        }
        if (t.is(TokKind::Keyword)) {
            const std::string kw = t.lexeme;
            if (kw == "IF") {
                s.node = parse_if();
                return s;
            }
            if (kw == "DO") {
                s.node = parse_do();
                return s;
            }
            if (kw == "PRINT") {
                advance();
                PrintStmt p;
                p.values.push_back(parse_expr());
                while (cur().is_punct(",")) {
                    advance();
                    p.values.push_back(parse_expr());
                }
                expect_eol();
                s.node = std::move(p);
                return s;
            }
            if (kw == "CALL") {
                advance();
                CallStmt c;
                c.callee = expect_ident("a subroutine name");
                if (cur().is_punct("(")) {
                    advance();
                    c.args = parse_args();
                }
                expect_eol();
                s.node = std::move(c);
                return s;
            }
            if (kw == "RETURN") {
                advance();
                expect_eol();
                s.node = ReturnStmt{};
                return s;
            }
            if (kw == "ADF" || kw == "ADR") {
                s.node = parse_ad_block();
                return s;
            }
            if (kw == "TANGENT" || kw == "COTANGENT") {
                s.node = parse_ad_misuse();
                return s;
            }
            if (kw == "DIMENSION") error(t, "DIMENSION declarations must precede executable statements");
            if (kw == "FUNCTION" || kw == "SUBROUTINE") {
                if (!allow_defs)
                    error(t, "subprogram definitions must appear directly in a FUNCTION, "
                             "SUBROUTINE, or PROGRAM body");
                auto sub = parse_unit(false);
                scopes_.back().non_arrays.insert(sub->name);
                s.node = SubDefStmt{std::move(sub)};
                return s;
            }
            if (kw == "PROGRAM") error(t, "PROGRAM units cannot be nested");
        }
        error(t, "expected a statement, found " + describe(t));
    }

    LValue parse_lvalue() {
        const Token& t = cur();
        LValue lv;
        lv.loc = {t.line, t.col};
        lv.id = fresh();
        lv.name = expect_ident("a variable name");
        if (cur().is_punct("(")) {
            if (!is_array(lv.name)) error(cur(), lv.name + " is not a declared array");
            advance();
            lv.index = parse_expr();
            expect_punct(")");
        }
        return lv;
    }

    void close_block(std::string_view kw, int open_line) {
        const Token& t = cur();
        if (!t.is_kw("END"))
            error(t, "expected END " + std::string(kw) + " to close the block opened at line " +
                         std::to_string(open_line) + ", found " + describe(t));
        advance();
        const Token& u = cur();
        if (!u.is_kw(kw))
            error(u, "expected " + std::string(kw) + " after END to close the block opened at line " +
                         std::to_string(open_line) + ", found " + describe(u));
        advance();
    }

    IfStmt parse_if() {
        const Token& t0 = cur();
        int open_line = t0.line;
        advance(); // IF
        expect_punct("(");
        IfStmt f;
        f.lhs = parse_expr();
        f.op = parse_relop();
        f.rhs = parse_expr();
        expect_punct(")");
        if (!cur().is_kw("THEN")) error(cur(), "expected THEN, found " + describe(cur()));
        advance();
        expect_eol();
        f.then_body = parse_body(false);
        if (cur().is_kw("ELSE")) {
            advance();
            expect_eol();
            f.else_body = parse_body(false);
        }
        close_block("IF", open_line);
        expect_eol();
        return f;
    }

    RelOp parse_relop() {
        const Token& t = cur();
        if (t.kind == TokKind::Op) {
            RelOp op;
            bool ok = true;
            if (t.lexeme == ".LT.")
                op = RelOp::Lt;
            else if (t.lexeme == ".LE.")
                op = RelOp::Le;
            else if (t.lexeme == ".GT.")
                op = RelOp::Gt;
            else if (t.lexeme == ".GE.")
                op = RelOp::Ge;
            else if (t.lexeme == ".EQ.")
                op = RelOp::Eq;
            else if (t.lexeme == ".NE.")
                op = RelOp::Ne;
            else
                ok = false;
            if (ok) {
                advance();
                return op;
            }
        }
        error(t, "expected a relational operator (.LT. .LE. .GT. .GE. .EQ. .NE.), found " + describe(t));
    }

    DoStmt parse_do() {
        const Token& t0 = cur();
        int open_line = t0.line;
        advance(); // DO
        DoStmt d;
        d.var = expect_ident("a loop variable");
        d.var_id = fresh();
        expect_op("=");
        d.lo = parse_expr();
        expect_punct(",");
        d.hi = parse_expr();
        if (cur().is_punct(",")) {
            advance();
            d.step = parse_expr();
        }
        expect_eol();
        d.body = parse_body(false);
        close_block("DO", open_line);
        expect_eol();
        return d;
    }

    // ---- AD blocks ----

    AdBlockStmt parse_ad_block() {
        const Token& t0 = cur();
        AdBlock blk;
        blk.mode = t0.is_kw("ADF") ? AdMode::Forward : AdMode::Reverse;
        blk.loc = {t0.line, t0.col};
        const std::string kw = t0.lexeme;
        advance();
        expect_punct("(");
        blk.open = parse_ad_specs(true);
        expect_eol();
        blk.body = parse_body(false);

        const Token& e = cur();
        if (!e.is_kw("END"))
            error(e, "expected END " + kw + " to close the " + kw + " block opened at line " +
                         std::to_string(t0.line) + ", found " + describe(e));
        advance();
        if (cur().is_kw("ADF") || cur().is_kw("ADR")) {
            if (!cur().is_kw(kw))
                error(cur(), kw + " block opened at line " + std::to_string(t0.line) +
                                 " closed by END " + cur().lexeme);
            advance();
        } else {
            error(cur(), "expected " + kw + " after END to close the block opened at line " +
                             std::to_string(t0.line) + ", found " + describe(cur()));
        }
        if (!cur().is_punct("(")) error(cur(), "missing closing spec list after END " + kw);
        advance();
        blk.close = parse_ad_specs(false);
        expect_eol();
        return AdBlockStmt{std::move(blk)};
    }

    // Parses one parenthesized spec list; the '(' is already consumed. The
    // list is bindings separated by commas with an optional trailing
    // implied-do control that applies to every binding.
    std::vector<AdSpec> parse_ad_specs(bool opening) {
        AdSpec spec;
        spec.loc = {cur().line, cur().col};
        while (true) {
            if (cur().is_kw("TANGENT") || cur().is_kw("COTANGENT")) {
                if (!opening)
                    error(cur(), "expected an assignment target in the closing spec list, found '" +
                                     cur().lexeme + "'");
                spec.bindings.push_back(parse_opening_binding());
            } else if (cur().is(TokKind::Ident)) {
                if (opening) {
                    parse_loop_control(spec);
                    break;
                }
                // Either a closing binding "LHS = TANGENT(V)" or the loop
                // control "I = lo, hi"; decided by what follows the '='.
                LValue lhs = parse_lvalue();
                expect_op("=");
                if (cur().is_kw("TANGENT") || cur().is_kw("COTANGENT")) {
                    AdBinding b;
                    b.kw_mode = cur().is_kw("TANGENT") ? AdMode::Forward : AdMode::Reverse;
                    advance();
                    expect_punct("(");
                    b.ad_ref = parse_lvalue();
                    expect_punct(")");
                    b.out = std::move(lhs);
                    spec.bindings.push_back(std::move(b));
                } else {
                    if (lhs.index)
                        error(cur(), "expected TANGENT or COTANGENT after '=', found " + describe(cur()));
                    spec.has_loop = true;
                    spec.loop_var = lhs.name;
                    spec.loop_var_id = lhs.id;
                    spec.lo = parse_expr();
                    expect_punct(",");
                    spec.hi = parse_expr();
                    break;
                }
            } else if (opening) {
                error(cur(), "expected TANGENT(...), COTANGENT(...), or an implied-do control, found " +
                                 describe(cur()));
            } else {
                error(cur(), "expected an assignment target or implied-do control, found " +
                                 describe(cur()));
            }
            if (cur().is_punct(",")) {
                advance();
                continue;
            }
            expect_punct(")");
            if (spec.bindings.empty())
                throw ParseError(Diagnostic{Phase::Parse, spec.loc,
                                            "AD spec list needs at least one TANGENT or COTANGENT binding"});
            std::vector<AdSpec> out;
            out.push_back(std::move(spec));
            return out;
        }
        // Fell out after a loop control: it must be the last item.
        expect_punct(")");
        if (spec.bindings.empty())
            throw ParseError(Diagnostic{Phase::Parse, spec.loc,
                                        "AD spec list needs at least one TANGENT or COTANGENT binding"});
        std::vector<AdSpec> out;
        out.push_back(std::move(spec));
        return out;
    }

    AdBinding parse_opening_binding() {
        AdBinding b;
        b.kw_mode = cur().is_kw("TANGENT") ? AdMode::Forward : AdMode::Reverse;
        advance();
        expect_punct("(");
        b.ad_ref = parse_lvalue();
        expect_punct(")");
        expect_op("=");
        b.seed = parse_expr();
        return b;
    }

    void parse_loop_control(AdSpec& spec) {
        spec.has_loop = true;
        spec.loop_var_id = fresh();
        spec.loop_var = expect_ident("an implied-do variable");
        expect_op("=");
        spec.lo = parse_expr();
        expect_punct(",");
        spec.hi = parse_expr();
    }

    AdMisuseStmt parse_ad_misuse() {
        // Parse the whole statement so the misuse surfaces once, from sema,
        // instead of as a cascade of syntax errors.
        AdMisuseStmt m;
        m.mode = cur().is_kw("TANGENT") ? AdMode::Forward : AdMode::Reverse;
        advance();
        expect_punct("(");
        m.target = parse_lvalue();
        expect_punct(")");
        expect_op("=");
        m.value = parse_expr();
        expect_eol();
        return m;
    }

    // ---- expressions ----

    std::vector<ExprPtr> parse_args() { // '(' already consumed; consumes ')'
        std::vector<ExprPtr> args;
        if (cur().is_punct(")")) {
            advance();
            return args;
        }
        while (true) {
            args.push_back(parse_expr());
            if (cur().is_punct(",")) {
                advance();
                continue;
            }
            break;
        }
        expect_punct(")");
        return args;
    }

    ExprPtr parse_expr() { return parse_add(); }

    ExprPtr parse_add() {
        auto lhs = parse_mul();
        while (cur().is_op("+") || cur().is_op("-")) {
            BinOp op = cur().is_op("+") ? BinOp::Add : BinOp::Sub;
            SrcLoc l{cur().line, cur().col};
            advance();
            auto rhs = parse_mul();
            lhs = make_expr(l, Binary{op, std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    ExprPtr parse_mul() {
        auto lhs = parse_unary();
        while (cur().is_op("*") || cur().is_op("/")) {
            BinOp op = cur().is_op("*") ? BinOp::Mul : BinOp::Div;
            SrcLoc l{cur().line, cur().col};
            advance();
            auto rhs = parse_unary();
            lhs = make_expr(l, Binary{op, std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    // Exponentiation binds tighter than unary minus and is right
    // associative: -X**2 is -(X**2), 2**-3 is 2**(-3), A**B**C is A**(B**C).
    ExprPtr parse_unary() {
        if (cur().is_op("-")) {
            SrcLoc l{cur().line, cur().col};
            advance();
            return make_expr(l, Neg{parse_unary()});
        }
        if (cur().is_op("+")) {
            advance();
            return parse_unary();
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        auto base = parse_primary();
        if (cur().is_op("**")) {
            SrcLoc l{cur().line, cur().col};
            advance();
            auto exp = parse_unary();
            base = make_expr(l, Binary{BinOp::Pow, std::move(base), std::move(exp)});
        }
        return base;
    }

    ExprPtr parse_primary() {
        const Token& t = cur();
        SrcLoc l{t.line, t.col};
        if (t.is(TokKind::Number)) return parse_number();
        if (t.is_punct("(")) {
            advance();
            auto e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (t.is_kw("TANGENT") || t.is_kw("COTANGENT")) {
            AdMode m = t.is_kw("TANGENT") ? AdMode::Forward : AdMode::Reverse;
            advance();
            expect_punct("(");
            LValue inner = parse_lvalue();
            expect_punct(")");
            return make_expr(l, AdReadExpr{m, std::move(inner.name), std::move(inner.index)});
        }
        if (t.is(TokKind::Ident)) {
            std::string name = t.lexeme;
            advance();
            if (cur().is_punct("(")) {
                if (is_array(name)) {
                    advance();
                    auto idx = parse_expr();
                    expect_punct(")");
                    return make_expr(l, ArrayRef{std::move(name), std::move(idx)});
                }
                advance();
                return make_expr(l, CallExpr{std::move(name), parse_args()});
            }
            return make_expr(l, VarRef{std::move(name)});
        }
        error(t, "expected an expression, found " + describe(t));
    }

    ExprPtr parse_number() {
        const Token& t = cur();
        SrcLoc l{t.line, t.col};
        const std::string& lx = t.lexeme;
        ExprPtr e;
        if (lx.find_first_of(".ED") != std::string::npos) {
            std::string digits = lx;
            for (auto& c : digits)
                if (c == 'D') c = 'E';
            e = make_expr(l, RealLit{std::strtod(digits.c_str(), nullptr)});
        } else {
            errno = 0;
            long long v = std::strtoll(lx.c_str(), nullptr, 10);
            if (errno == ERANGE) error(t, "integer literal out of range");
            e = make_expr(l, IntLit{v});
        }
        advance();
        return e;
    }
};

} // namespace

Program parse_program(std::vector<Token> tokens) {
    Parser p(std::move(tokens));
    return p.run();
}

} // namespace farfel
