#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "support.hpp"

using namespace farfel;

namespace {

// Like fartest::run_src but with custom run options, for the tests that
// poke at limits and deadlines.
fartest::RunResult run_with(const std::string& src, RunOptions opt) {
    BoundProgram bound = fartest::analyze(src);
    Engine eng;
    fartest::RunResult res;
    opt.on_print = [&](const std::vector<PrintItem>& items) {
        for (const auto& it : items) res.items.push_back(it);
    };
    run_program(bound, eng, opt);
    return res;
}

Diagnostic runtime_error_of(const std::string& src,
                            std::map<std::string, Value> overrides = {}) {
    try {
        fartest::run_src(src, std::move(overrides));
    } catch (const RuntimeError& e) {
        return e.diag();
    }
    FAIL("expected a RuntimeError");
    return {};
}

} // namespace

TEST_CASE("arithmetic follows Fortran typing through the interpreter") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "A = 7 / 2\n"
                              "B = 7.0 / 2\n"
                              "C = 2 ** 10\n"
                              "D = -2 ** 2\n"
                              "PRINT A, B, C, D\n"
                              "END\n");
    CHECK(r.get("A") == 3.0);
    CHECK(r.get("B") == 3.5);
    CHECK(r.get("C") == 1024.0);
    CHECK(r.get("D") == -4.0);
    // Integer results stay integers all the way to PRINT.
    CHECK(r.items.at(0).value.is_int());
    CHECK(r.items.at(1).value.is_real());
}

TEST_CASE("recursion: FACT(6) = 720") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "FUNCTION FACT(N)\n"
                              "IF (N .LE. 1) THEN\n"
                              "FACT = 1\n"
                              "ELSE\n"
                              "FACT = N * FACT(N - 1)\n"
                              "END IF\n"
                              "END\n"
                              "PRINT FACT(6)\n"
                              "END\n");
    CHECK(r.get("FACT(6)") == 720.0);
}

TEST_CASE("the recursion limit stops runaway call chains") {
    RunOptions opt;
    opt.recursion_limit = 50;
    try {
        run_with("PROGRAM P\n"
                 "FUNCTION LOOP(N)\n"
                 "LOOP = LOOP(N + 1)\n"
                 "END\n"
                 "PRINT LOOP(1)\n"
                 "END\n",
                 opt);
        FAIL("expected a RuntimeError");
    } catch (const RuntimeError& e) {
        CHECK(std::string(e.what()) == "recursion limit exceeded (50 frames)");
    }
}

TEST_CASE("arrays pass by reference; subprograms mutate the caller's cells") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "DIMENSION V(3)\n"
                              "SUBROUTINE FILL(A, N)\n"
                              "DIMENSION A(1)\n"
                              "DO I = 1, N\n"
                              "A(I) = 10 * I\n"
                              "END DO\n"
                              "END\n"
                              "CALL FILL(V, 3)\n"
                              "PRINT V(1), V(2), V(3)\n"
                              "END\n");
    CHECK(r.get("V(1)") == 10.0);
    CHECK(r.get("V(2)") == 20.0);
    CHECK(r.get("V(3)") == 30.0);
}

TEST_CASE("nested subprograms write the defining frame, not the calling frame") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "X = 110\n"
                              "SUBROUTINE BUMP\n"
                              "X = 200\n"
                              "END\n"
                              "SUBROUTINE TWICE\n"
                              "CALL BUMP\n"
                              "END\n"
                              "CALL TWICE\n"
                              "PRINT X\n"
                              "END\n");
    CHECK(r.get("X") == 200.0);
}

TEST_CASE("closures remember their defining frame across calls") {
    // COUNTER's X lives in P; two calls see the same cell.
    auto r = fartest::run_src("PROGRAM P\n"
                              "X = 0\n"
                              "FUNCTION COUNTER(D)\n"
                              "X = X + 1\n"
                              "COUNTER = X\n"
                              "END\n"
                              "A = COUNTER(0)\n"
                              "B = COUNTER(0)\n"
                              "PRINT A, B\n"
                              "END\n");
    CHECK(r.get("A") == 1.0);
    CHECK(r.get("B") == 2.0);
}

TEST_CASE("DO loops: trip counts, negative steps, zero trips") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "N = 0\n"
                              "DO I = 1, 5\n"
                              "N = N + 1\n"
                              "END DO\n"
                              "M = 0\n"
                              "DO J = 4, 1, -1\n"
                              "M = 10 * M + J\n"
                              "END DO\n"
                              "Z = 0\n"
                              "DO K = 1, 0\n"
                              "Z = Z + 1\n"
                              "END DO\n"
                              "DO L = 1, 7, 3\n"
                              "LAST = L\n"
                              "END DO\n"
                              "PRINT N, M, Z, LAST\n"
                              "END\n");
    CHECK(r.get("N") == 5.0);
    CHECK(r.get("M") == 4321.0);
    CHECK(r.get("Z") == 0.0);
    CHECK(r.get("LAST") == 7.0);

    CHECK(runtime_error_of("PROGRAM P\nDO I = 1, 3, 0\nEND DO\nEND\n").message == "DO step of 0");
    CHECK(runtime_error_of("PROGRAM P\nDO I = 1.5, 3\nEND DO\nEND\n").message ==
          "DO bound must be an integer");
}

TEST_CASE("overrides pin PROGRAM scalars against later assignment") {
    std::map<std::string, Value> pins{{"N", Value::integer(5)}, {"H", Value::real(0.25)}};
    auto r = fartest::run_src("PROGRAM P\n"
                              "N = 3\n"
                              "H = 1.0\n"
                              "Y = N + H\n"
                              "PRINT N, H, Y\n"
                              "END\n",
                              pins);
    CHECK(r.get("N") == 5.0);
    CHECK(r.get("H") == 0.25);
    CHECK(r.get("Y") == 5.25);
}

TEST_CASE("reading a cell that was never written is a runtime error") {
    Diagnostic d = runtime_error_of("PROGRAM P\nPRINT X + 1\nEND\n");
    CHECK(d.message == "X used before it was set");
    CHECK(d.loc.line == 2);
    CHECK(d.loc.col == 7);
    // The same cell is fine when pre-set from outside.
    auto r = fartest::run_src("PROGRAM P\nPRINT X + 1\nEND\n", {{"X", Value::real(41.0)}});
    CHECK(r.get("X+1") == 42.0);
}

TEST_CASE("array runtime failures carry positions") {
    CHECK(runtime_error_of("PROGRAM P\nDIMENSION V(3)\nV(1) = 1\nPRINT V(4)\nEND\n").message ==
          "V(4) is outside 1..3");
    CHECK(runtime_error_of("PROGRAM P\nDIMENSION V(3)\nV(0) = 1\nEND\n").message ==
          "V(0) is outside 1..3");
    CHECK(runtime_error_of("PROGRAM P\nDIMENSION V(3)\nX = V(1.5)\nEND\n").message ==
          "array index must be an integer");
    // Extents are evaluated on frame entry, so a zero has to arrive
    // through an argument.
    CHECK(runtime_error_of("PROGRAM P\nFUNCTION F(N)\nDIMENSION W(N)\nW(1) = 1.0\nF = W(1)\nEND\n"
                           "PRINT F(0)\nEND\n")
              .message == "array extent must be at least 1");
    CHECK(runtime_error_of("PROGRAM P\nFUNCTION F(A)\nDIMENSION A(1)\nF = A(1)\nEND\n"
                           "PRINT F(2.0)\nEND\n")
              .message == "argument 1 of F must be an array");
}

TEST_CASE("call-shape mistakes are runtime errors with clear messages") {
    CHECK(runtime_error_of("PROGRAM P\nFUNCTION F(A, B)\nF = A + B\nEND\nPRINT F(1)\nEND\n")
              .message == "F expects 2 argument(s), got 1");
    CHECK(runtime_error_of("PROGRAM P\nSUBROUTINE S(A)\nRETURN\nEND\nX = S(1)\nPRINT X\nEND\n")
              .message == "S is a SUBROUTINE and produces no value");
    CHECK(runtime_error_of("PROGRAM P\nFUNCTION F(A)\nF = A\nEND\nCALL F(1)\nEND\n").message ==
          "CALL to FUNCTION F; use it in an expression");
    CHECK(runtime_error_of("PROGRAM P\nCALL SQRT(4.0)\nEND\n").message ==
          "cannot CALL the intrinsic SQRT");
    CHECK(runtime_error_of("PROGRAM P\nFUNCTION F(A)\nEND\nPRINT F(1)\nEND\n").message ==
          "F ended without assigning a result");
    CHECK(runtime_error_of("PROGRAM P\nX = 1\nY = X(2)\nPRINT Y\nEND\n").message ==
          "X is not callable");
    CHECK(runtime_error_of("PROGRAM P\nPRINT SQRT(1.0, 2.0)\nEND\n").message ==
          "SQRT expects 1 argument, got 2");
    CHECK(runtime_error_of("PROGRAM P\nPRINT MIN(1.0)\nEND\n").message ==
          "MIN expects at least 2 arguments");
}

TEST_CASE("subprograms and intrinsics travel as values") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "FUNCTION APPLY(F, X)\n"
                              "APPLY = F(X)\n"
                              "END\n"
                              "FUNCTION CUBE(T)\n"
                              "CUBE = T * T * T\n"
                              "END\n"
                              "A = APPLY(CUBE, 2.0)\n"
                              "B = APPLY(SQRT, 9.0)\n"
                              "C = MIN(3, 1, 2)\n"
                              "PRINT A, B, C\n"
                              "END\n");
    CHECK(r.get("A") == 8.0);
    CHECK(r.get("B") == 3.0);
    CHECK(r.get("C") == 1.0);
}

TEST_CASE("ADF block: seeds in, tangents out, no state leak afterwards") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "X = 2.0\n"
                              "ADF(TANGENT(X) = 1.0)\n"
                              "Y = X * X\n"
                              "END ADF(D = TANGENT(Y))\n"
                              "Z = X * 3.0\n"
                              "W = Y + 1.0\n"
                              "PRINT D, Y, Z, W\n"
                              "END\n");
    CHECK(r.get("D") == 4.0);
    CHECK(r.get("Y") == 4.0);
    CHECK(r.get("Z") == 6.0);
    CHECK(r.get("W") == 5.0);
    // After the block every cell is a plain value again.
    for (const auto& it : r.items) {
        CHECK_FALSE(it.value.is_dual());
        CHECK_FALSE(it.value.is_tracer());
    }
}

TEST_CASE("ADR block: one sweep, cotangents of every input") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "A = 3.0\n"
                              "B = 4.0\n"
                              "ADR(COTANGENT(Y) = 1.0)\n"
                              "Y = A * B + B\n"
                              "END ADR(GA = COTANGENT(A), GB = COTANGENT(B))\n"
                              "PRINT GA, GB\n"
                              "END\n");
    CHECK(r.get("GA") == 4.0);
    CHECK(r.get("GB") == 4.0); // A + 1
}

TEST_CASE("AD blocks nest: forward over forward second derivative") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "X = 2.0\n"
                              "ADF(TANGENT(X) = 1.0)\n"
                              "ADF(TANGENT(X) = 1.0)\n"
                              "Y = X ** 3\n"
                              "END ADF(DY = TANGENT(Y))\n"
                              "END ADF(DDY = TANGENT(DY))\n"
                              "PRINT DDY\n"
                              "END\n");
    CHECK(r.get("DDY") == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("a constant result differentiates to zero, not an error") {
    auto r = fartest::run_src("PROGRAM P\n"
                              "X = 2.0\n"
                              "ADR(COTANGENT(Y) = 1.0)\n"
                              "Z = X + 1.0\n"
                              "Y = 7.0\n"
                              "END ADR(G = COTANGENT(X))\n"
                              "PRINT G\n"
                              "END\n");
    CHECK(r.get("G") == 0.0);
}

TEST_CASE("RETURN may not escape an AD block") {
    CHECK(runtime_error_of("PROGRAM P\n"
                           "FUNCTION F(T)\n"
                           "ADF(TANGENT(T) = 1.0)\n"
                           "Y = T\n"
                           "RETURN\n"
                           "END ADF(F = TANGENT(Y))\n"
                           "END\n"
                           "PRINT F(1.0)\nEND\n")
              .message == "RETURN inside an ADF block");
}

TEST_CASE("seeding a variable that stayed unset is a runtime error") {
    // Y is assigned only on a branch that does not run, so the seed finds
    // nothing at the end of the block.
    Diagnostic d = runtime_error_of("PROGRAM P\n"
                                    "X = 1.0\n"
                                    "N = 0\n"
                                    "ADR(COTANGENT(Y) = 1.0)\n"
                                    "Z = X + 1.0\n"
                                    "IF (N .GT. 5) THEN\n"
                                    "Y = Z\n"
                                    "END IF\n"
                                    "END ADR(G = COTANGENT(X))\n"
                                    "PRINT G\nEND\n");
    CHECK(d.message == "Y used before it was set");
    CHECK(d.loc.line == 4);
}

TEST_CASE("the deadline interrupts long computations") {
    RunOptions opt;
    opt.time_limit_seconds = 0.05;
    try {
        run_with("PROGRAM P\n"
                 "X = 0.0\n"
                 "DO I = 1, 1000000000\n"
                 "X = X + 1.0\n"
                 "END DO\n"
                 "PRINT X\n"
                 "END\n",
                 opt);
        FAIL("expected a RuntimeError");
    } catch (const RuntimeError& e) {
        CHECK(std::string(e.what()) == "time limit exceeded");
    }
}

TEST_CASE("division by zero carries the position of the expression") {
    Diagnostic d = runtime_error_of("PROGRAM P\nX = 0.0\nY = 1.0 / X\nPRINT Y\nEND\n");
    CHECK(d.message == "division by zero");
    CHECK(d.loc.line == 3);
}
