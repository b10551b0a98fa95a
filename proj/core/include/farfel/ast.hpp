#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "farfel/diag.hpp"

namespace farfel {

using NodeId = std::uint32_t;

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class AdMode { Forward, Reverse };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct IntLit {
    long long value;
};
struct RealLit {
    double value;
};
struct VarRef {
    std::string name;
};
// One-dimensional, 1-based array element access. The parser only produces
// this for names covered by a lexically visible DIMENSION declaration;
// any other NAME(...) form becomes a CallExpr.
struct ArrayRef {
    std::string name;
    ExprPtr index;
};
struct Neg {
    ExprPtr operand;
};
struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};
struct CallExpr {
    std::string callee;
    std::vector<ExprPtr> args;
};
// TANGENT(v) / COTANGENT(v) written in an ordinary expression. Legal
// occurrences inside AD spec lists are consumed structurally by the parser,
// so any node of this type is a misuse for sema to report.
struct AdReadExpr {
    AdMode mode;
    std::string name;
    ExprPtr index; // null for scalars
};

struct Expr {
    SrcLoc loc;
    NodeId id = 0;
    std::variant<IntLit, RealLit, VarRef, ArrayRef, Neg, Binary, CallExpr, AdReadExpr> node;
};

// Assignment target or the variable reference inside TANGENT/COTANGENT.
struct LValue {
    SrcLoc loc;
    NodeId id = 0;
    std::string name;
    ExprPtr index; // null for scalars
};

struct Stmt;
struct Subprogram;

// One spec in an AD block header or trailer. Opening specs seed derivatives
// ("TANGENT(X) = expr"), closing specs harvest them ("lhs = TANGENT(Y)").
// An optional trailing implied-do ("..., I = lo, hi") expands every binding.
struct AdBinding {
    AdMode kw_mode = AdMode::Forward; // TANGENT or COTANGENT as written; sema checks it
    LValue ad_ref;                    // the variable inside TANGENT/COTANGENT
    LValue out;                       // closing specs: assignment target
    ExprPtr seed;                     // opening specs: seed expression
};
struct AdSpec {
    SrcLoc loc;
    std::vector<AdBinding> bindings;
    bool has_loop = false;
    std::string loop_var;
    NodeId loop_var_id = 0; // binding site for the implied-do variable
    ExprPtr lo;
    ExprPtr hi;
};
struct AdBlock {
    AdMode mode = AdMode::Forward;
    SrcLoc loc;
    std::vector<AdSpec> open;
    std::vector<AdSpec> close;
    std::vector<Stmt> body;
};

struct AssignStmt {
    LValue target;
    ExprPtr value;
};
struct CallStmt {
    std::string callee;
    std::vector<ExprPtr> args;
};
struct IfStmt {
    RelOp op;
    ExprPtr lhs;
    ExprPtr rhs;
    std::vector<Stmt> then_body;
    std::vector<Stmt> else_body;
};
struct DoStmt {
    std::string var;
    NodeId var_id = 0; // binding site for the loop variable
    ExprPtr lo;
    ExprPtr hi;
    ExprPtr step; // null means 1
    std::vector<Stmt> body;
};
struct PrintStmt {
    std::vector<ExprPtr> values;
};
struct ReturnStmt {};
struct SubDefStmt {
    std::unique_ptr<Subprogram> sub;
};
struct AdBlockStmt {
    AdBlock block;
};
// "TANGENT(X) = ..." written as an ordinary statement; sema reports it.
struct AdMisuseStmt {
    AdMode mode;
    LValue target;
    ExprPtr value;
};

struct Stmt {
    SrcLoc loc;
    NodeId id = 0;
    std::variant<AssignStmt, CallStmt, IfStmt, DoStmt, PrintStmt, ReturnStmt, SubDefStmt,
                 AdBlockStmt, AdMisuseStmt>
        node;
};

enum class SubKind { Program, Function, Subroutine };

struct DimDecl {
    SrcLoc loc;
    NodeId id = 0;
    std::string name;
    ExprPtr extent;
};

struct Subprogram {
    SubKind kind = SubKind::Function;
    SrcLoc loc;
    NodeId id = 0;
    std::string name;
    std::vector<std::string> params;
    std::vector<DimDecl> dims;
    std::vector<Stmt> body;
};

struct Program {
    std::vector<std::unique_ptr<Subprogram>> units;
    NodeId node_count = 0; // ids are dense in [0, node_count)
};

// Structural equality, ignoring source locations and node ids.
bool ast_equal(const Program& a, const Program& b);
bool ast_equal(const Expr& a, const Expr& b);

std::string_view binop_name(BinOp op);
std::string_view relop_name(RelOp op); // dotted form, e.g. ".LT."

} // namespace farfel
