#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "farfel/ast.hpp"
#include "farfel/diag.hpp"
#include "farfel/lexer.hpp"
#include "farfel/parser.hpp"
#include "farfel/printer.hpp"

using namespace farfel;

namespace {

Program parse_src(const std::string& src) { return parse_program(tokenize(src)); }

// True when the two expression texts parse to the same tree. Used to pin
// precedence and associativity without caring about printer output.
bool same_expr(const std::string& a, const std::string& b) {
    Program pa = parse_src("PROGRAM P\nX = " + a + "\nEND\n");
    Program pb = parse_src("PROGRAM P\nX = " + b + "\nEND\n");
    return ast_equal(pa, pb);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("precedence: + - below * / below unary minus below **") {
    CHECK(same_expr("1 + 2 * 3", "1 + (2 * 3)"));
    CHECK_FALSE(same_expr("1 + 2 * 3", "(1 + 2) * 3"));
    CHECK(same_expr("A * B ** C * D", "(A * (B ** C)) * D"));
    CHECK(same_expr("-2 ** 2", "-(2 ** 2)"));
    CHECK(same_expr("2 ** -3", "2 ** (-3)"));
    CHECK_FALSE(same_expr("- -X", "X * 1")); // structurally Neg(Neg(X)) vs Binary
    CHECK_FALSE(same_expr("- -X", "X"));
    CHECK(same_expr("+X", "X")); // unary plus is dropped entirely
}

TEST_CASE("associativity: + - * / left, ** right") {
    CHECK(same_expr("A - B + C", "(A - B) + C"));
    CHECK_FALSE(same_expr("A - B + C", "A - (B + C)"));
    CHECK(same_expr("A / B / C", "(A / B) / C"));
    CHECK(same_expr("2 ** 3 ** 2", "2 ** (3 ** 2)"));
    CHECK_FALSE(same_expr("2 ** 3 ** 2", "(2 ** 3) ** 2"));
}

TEST_CASE("number literals carry their value") {
    Program p = parse_src("PROGRAM P\nX = 2D0 + 1.5E-3\nEND\n");
    const Subprogram& main = *p.units.at(0);
    const auto* assign = std::get_if<AssignStmt>(&main.body.at(0).node);
    REQUIRE(assign);
    const auto* sum = std::get_if<Binary>(&assign->value->node);
    REQUIRE(sum);
    const auto* lhs = std::get_if<RealLit>(&sum->lhs->node);
    const auto* rhs = std::get_if<RealLit>(&sum->rhs->node);
    REQUIRE(lhs);
    REQUIRE(rhs);
    CHECK(lhs->value == 2.0);
    CHECK(rhs->value == 1.5e-3);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nX = 99999999999999999999\nEND\n"),
                         "integer literal out of range", ParseError);
}

TEST_CASE("NAME(expr) is an array element only under a visible DIMENSION") {
    Program p = parse_src("PROGRAM P\n"
                          "DIMENSION V(3)\n"
                          "X = V(2) + F(2)\n"
                          "END\n");
    const Subprogram& main = *p.units.at(0);
    REQUIRE(main.dims.size() == 1); // DIMENSION lives outside the body
    const auto* assign = std::get_if<AssignStmt>(&main.body.at(0).node);
    REQUIRE(assign);
    const auto* sum = std::get_if<Binary>(&assign->value->node);
    REQUIRE(sum);
    CHECK(std::get_if<ArrayRef>(&sum->lhs->node));
    CHECK(std::get_if<CallExpr>(&sum->rhs->node));
}

TEST_CASE("units, nested definitions, and statement forms parse") {
    Program p = parse_src("FUNCTION SQ(T)\n"
                          "SQ = T * T\n"
                          "END\n"
                          "PROGRAM MAIN\n"
                          "DIMENSION W(4)\n"
                          "FUNCTION TWICE(U)\n"
                          "TWICE = 2.0 * U\n"
                          "END\n"
                          "SUBROUTINE FILL(A, N)\n"
                          "DIMENSION A(1)\n"
                          "DO I = 1, N\n"
                          "A(I) = I\n"
                          "END DO\n"
                          "RETURN\n"
                          "END\n"
                          "CALL FILL(W, 4)\n"
                          "IF (W(1) .LT. W(2)) THEN\n"
                          "PRINT TWICE(W(2)), SQ(W(3))\n"
                          "ELSE\n"
                          "PRINT 0\n"
                          "END IF\n"
                          "DO K = 4, 1, -1\n"
                          "PRINT W(K)\n"
                          "END DO\n"
                          "END\n");
    REQUIRE(p.units.size() == 2);
    CHECK(p.units.at(0)->kind == SubKind::Function);
    CHECK(p.units.at(1)->kind == SubKind::Program);
    CHECK(p.units.at(1)->name == "MAIN");
}

TEST_CASE("AD blocks: opening seeds, bodies, closing harvests, implied-do") {
    const char* src = "PROGRAM P\n"
                      "DIMENSION V(3), G(3)\n"
                      "N = 3\n"
                      "DO I = 1, N\n"
                      "V(I) = I\n"
                      "END DO\n"
                      "ADF(TANGENT(V(I)) = 1.0, I = 1, N)\n"
                      "Y = V(1) * V(2) + V(3)\n"
                      "END ADF(DY = TANGENT(Y))\n"
                      "ADR(COTANGENT(S) = 1.0)\n"
                      "S = V(1) * V(2) * V(3)\n"
                      "END ADR(G(I) = COTANGENT(V(I)), I = 1, N)\n"
                      "PRINT DY, G(1)\n"
                      "END\n";
    Program p = parse_src(src);
    const Subprogram& main = *p.units.at(0);
    int ad_blocks = 0;
    for (const auto& st : main.body)
        if (const auto* blk = std::get_if<AdBlockStmt>(&st.node)) {
            ++ad_blocks;
            if (blk->block.mode == AdMode::Forward) {
                REQUIRE(blk->block.open.size() == 1);
                CHECK(blk->block.open.at(0).has_loop);
                CHECK(blk->block.open.at(0).loop_var == "I");
                REQUIRE(blk->block.close.size() == 1);
                CHECK_FALSE(blk->block.close.at(0).has_loop);
            } else {
                REQUIRE(blk->block.open.size() == 1);
                CHECK_FALSE(blk->block.open.at(0).has_loop);
                REQUIRE(blk->block.close.size() == 1);
                CHECK(blk->block.close.at(0).has_loop);
            }
        }
    CHECK(ad_blocks == 2);
    // Reparsing the printed form reproduces the same tree.
    CHECK(ast_equal(p, parse_src(print_program(p))));
}

TEST_CASE("parse errors carry exact positions") {
    try {
        parse_src("PROGRAM P\nX = 1\nDIMENSION V(3)\nEND\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.diag().message == "DIMENSION declarations must precede executable statements");
        CHECK(e.diag().loc.line == 3);
        CHECK(e.diag().loc.col == 1);
    }
    try {
        parse_src("PROGRAM P\nX = (1 + 2\nEND\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.diag().message == "expected ')', found end of line");
        CHECK(e.diag().loc.line == 2);
        CHECK(e.diag().loc.col == 11); // the newline sits one past the last digit
    }
}

TEST_CASE("structural parse errors") {
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM A\nPROGRAM B\nEND\nEND\n"),
                         "PROGRAM units cannot be nested", ParseError);
    CHECK_THROWS_WITH_AS(parse_src("X = 1\n"),
                         doctest::Contains("expected PROGRAM, FUNCTION, or SUBROUTINE"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nX = 1\n"),
                         doctest::Contains("expected END to close P"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nIF (X .LT. 1)\nEND IF\nEND\n"),
                         doctest::Contains("expected THEN"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nIF (X + 1) THEN\nEND IF\nEND\n"),
                         doctest::Contains("expected a relational operator"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nDO I = 1\nEND DO\nEND\n"),
                         doctest::Contains("expected ','"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nDO I = 1, 3\nX = I\nEND\n"),
                         doctest::Contains("close the block opened at line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nADF(TANGENT(X) = 1.0)\nY = X\nEND ADR(D = "
                                   "COTANGENT(Y))\nEND\n"),
                         doctest::Contains("closed by END ADR"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nADF(TANGENT(X) = 1.0)\nY = X\nEND ADF\nEND\n"),
                         doctest::Contains("missing closing spec list after END ADF"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nX = * 2\nEND\n"),
                         doctest::Contains("expected an expression"), ParseError);
    CHECK_THROWS_WITH_AS(parse_src("PROGRAM P\nDO I = 1, 3\nFUNCTION F(T)\nF = T\nEND\nEND "
                                   "DO\nEND\n"),
                         doctest::Contains("subprogram definitions must appear directly"),
                         ParseError);
}

TEST_CASE("printer round-trip is lossless and stable on the library corpus") {
    namespace fs = std::filesystem;
    fs::path dir = FARFEL_STDLIB_DIR;
    int n_files = 0;
    for (const auto& ent : fs::directory_iterator(dir)) {
        if (ent.path().extension() != ".far") continue;
        ++n_files;
        INFO("file: ", ent.path().filename().string());
        Program orig = parse_src(read_file(ent.path()));
        std::string once = print_program(orig);
        Program reparsed = parse_src(once);
        CHECK(ast_equal(orig, reparsed));
        // Printing the reparsed tree reproduces the text byte for byte.
        CHECK(print_program(reparsed) == once);
    }
    CHECK(n_files >= 12);
}
