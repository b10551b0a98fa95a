#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "support.hpp"

using namespace farfel;

namespace {

// First sema diagnostic of a source string, front-end style: resolver
// errors throw, AD-block violations are collected. Fails the test when
// the program is clean.
Diagnostic first_sema_error(const std::string& src) {
    try {
        fartest::analyze(src);
    } catch (const SemaError& e) {
        return e.diag();
    }
    FAIL("expected a sema diagnostic");
    return {};
}

} // namespace

TEST_CASE("frame layout: params, result, locals, arrays, nested defs") {
    BoundProgram b = fartest::analyze("FUNCTION F(A, B)\n"
                                      "DIMENSION W(3)\n"
                                      "C = A + B\n"
                                      "W(1) = C\n"
                                      "F = W(1)\n"
                                      "END\n"
                                      "PROGRAM P\n"
                                      "X = F(1.0, 2.0)\n"
                                      "PRINT X\n"
                                      "END\n");
    REQUIRE(b.main != nullptr);
    CHECK(b.main->name == "P");
    const Subprogram* f = b.program.units.at(0).get();
    const SubInfo& fi = b.info(f);
    CHECK(fi.nslots == 5); // A, B, result F, W, C
    CHECK(fi.result_slot >= 0);
    CHECK(fi.slot_names.at(fi.result_slot) == "F");
    CHECK(fi.scalar_slots.count("A") == 1);
    CHECK(fi.scalar_slots.count("C") == 1);
    CHECK(fi.scalar_slots.count("W") == 0); // arrays are not scalars
    REQUIRE(fi.arrays.size() == 1);
    CHECK(fi.slot_is_array.at(fi.arrays.at(0).slot));

    const SubInfo& mi = b.info(b.main);
    CHECK(mi.scalar_slots.count("X") == 1);
    CHECK(mi.result_slot == -1);
}

TEST_CASE("a nested subprogram captures outer variables through the static chain") {
    BoundProgram b = fartest::analyze("PROGRAM P\n"
                                      "X = 1.0\n"
                                      "FUNCTION GETX(D)\n"
                                      "FUNCTION INNER(E)\n"
                                      "INNER = X + E\n"
                                      "END\n"
                                      "GETX = INNER(D)\n"
                                      "END\n"
                                      "PRINT GETX(0.0)\n"
                                      "END\n");
    // Dig out the VarRef X inside INNER and inspect its binding.
    const Subprogram* getx = nullptr;
    for (const auto& st : b.main->body)
        if (const auto* def = std::get_if<SubDefStmt>(&st.node)) getx = def->sub.get();
    REQUIRE(getx);
    const Subprogram* inner = nullptr;
    for (const auto& st : getx->body)
        if (const auto* def = std::get_if<SubDefStmt>(&st.node)) inner = def->sub.get();
    REQUIRE(inner);
    const auto* assign = std::get_if<AssignStmt>(&inner->body.at(0).node);
    REQUIRE(assign);
    const auto* sum = std::get_if<Binary>(&assign->value->node);
    REQUIRE(sum);
    const Binding& bx = b.binding(sum->lhs->id);
    CHECK(bx.kind == BindKind::Captured);
    CHECK(bx.depth == 2); // INNER -> GETX -> P
    const Binding& be = b.binding(sum->rhs->id);
    CHECK(be.kind == BindKind::Param);
    CHECK(be.depth == 0);
}

TEST_CASE("reading a fresh name is legal only in the PROGRAM unit") {
    // The PROGRAM unit auto-declares it, which is what lets callers
    // pre-set input scalars from outside before the first assignment.
    BoundProgram b = fartest::analyze("PROGRAM P\nPRINT N + 1\nEND\n");
    CHECK(b.info(b.main).scalar_slots.count("N") == 1);

    Diagnostic d = first_sema_error("FUNCTION F(T)\nF = T + N\nEND\nPROGRAM P\nPRINT F(1)\nEND\n");
    CHECK(d.message ==
          "N is not defined: no parameter, outer variable, subprogram, or intrinsic has that name");
    CHECK(d.loc.line == 2);
    CHECK(d.loc.col == 9);
}

TEST_CASE("duplicate and conflicting declarations") {
    CHECK(first_sema_error("PROGRAM P\nFUNCTION F(T)\nF = T\nEND\nFUNCTION F(U)\nF = U\nEND\nEND\n")
              .message == "duplicate definition of F in the same scope");
    CHECK(first_sema_error("FUNCTION F(A, A)\nF = A\nEND\nPROGRAM P\nPRINT F(1, 2)\nEND\n")
              .message == "duplicate parameter A");
    CHECK(first_sema_error("FUNCTION F(F)\nEND\nPROGRAM P\nPRINT F(1)\nEND\n").message ==
          "F is both a parameter and the function name");
    CHECK(first_sema_error("PROGRAM A\nEND\nPROGRAM B\nEND\n").message ==
          "multiple PROGRAM units in one file");
    CHECK(first_sema_error("FUNCTION F(T)\nDIMENSION F(2)\nEND\nPROGRAM P\nPRINT F(1)\nEND\n")
              .message == "DIMENSION F conflicts with an earlier declaration");
    CHECK(first_sema_error("SUBROUTINE S(V)\nDIMENSION V(1), V(2)\nRETURN\nEND\n"
                           "PROGRAM P\nEND\n")
              .message == "V is dimensioned twice");
}

TEST_CASE("name misuse diagnostics") {
    CHECK(first_sema_error("PROGRAM P\nFUNCTION F(T)\nF = T\nEND\nF = 3\nEND\n").message ==
          "cannot assign to subprogram F");
    // A bare subprogram or array name is a legal expression (that is how
    // closures and whole arrays get passed), so the cell-demanding spots
    // are the AD seed targets and CALL.
    CHECK(first_sema_error("PROGRAM P\nFUNCTION F(T)\nF = T\nEND\nX = 2.0\n"
                           "ADF(TANGENT(F) = 1.0)\nY = X * X\nEND ADF(D = TANGENT(Y))\nEND\n")
              .message == "F names a subprogram, not a variable");
    CHECK(first_sema_error("PROGRAM P\nDIMENSION V(2)\nV = 1\nEND\n").message ==
          "array V cannot be assigned without an index");
    CHECK(first_sema_error("PROGRAM P\nDIMENSION V(2)\nV(1) = 2.0\n"
                           "ADF(TANGENT(V) = 1.0)\nY = V(1)\nEND ADF(D = TANGENT(Y))\nEND\n")
              .message == "array V needs an index here");
    CHECK(first_sema_error("PROGRAM P\nDIMENSION V(2)\nCALL V(1)\nEND\n").message ==
          "array V is not callable");
    CHECK_NOTHROW(
        fartest::analyze("PROGRAM P\nDIMENSION V(2)\nV(1) = 1\nV(2) = 4\nPRINT V\nEND\n"));
    CHECK(first_sema_error("PROGRAM P\nDIMENSION V(2)\nDO V = 1, 3\nEND DO\nEND\n").message ==
          "loop variable V is an array");
}

TEST_CASE("intrinsics resolve without declarations and can be shadowed") {
    CHECK_NOTHROW(fartest::analyze("PROGRAM P\nPRINT SQRT(4.0), MIN(1, 2), GAMMA(0.5)\nEND\n"));
    // A parameter named SIN hides the intrinsic inside its unit.
    CHECK_NOTHROW(fartest::analyze("FUNCTION F(SIN)\nF = SIN + 1.0\nEND\n"
                                   "PROGRAM P\nPRINT F(2.0)\nEND\n"));
}

TEST_CASE("TANGENT and COTANGENT stay inside AD spec lists") {
    Diagnostic d = first_sema_error("PROGRAM P\nX = 1.0\nY = TANGENT(X)\nEND\n");
    CHECK(d.message == "TANGENT(X) is only meaningful in the spec lists of an AD block");
    CHECK(d.loc.line == 3);

    d = first_sema_error("PROGRAM P\nX = 1.0\nCOTANGENT(X) = 2.0\nEND\n");
    CHECK(d.message ==
          "COTANGENT(X) = ... seeds a derivative and belongs in an AD block's opening spec list");

    // Inside an AD block body the same rules hold.
    d = first_sema_error("PROGRAM P\nX = 1.0\nADF(TANGENT(X) = 1.0)\nY = TANGENT(X) * 2.0\nEND "
                         "ADF(D = TANGENT(Y))\nEND\n");
    CHECK(d.message == "TANGENT(X) is only meaningful in the spec lists of an AD block");
}

TEST_CASE("spec keywords must match the block mode") {
    Diagnostic d = first_sema_error("PROGRAM P\nX = 1.0\nADF(COTANGENT(X) = 1.0)\nY = X\nEND "
                                    "ADF(D = TANGENT(Y))\nEND\n");
    CHECK(d.message == "COTANGENT spec in a forward (ADF) block");

    d = first_sema_error("PROGRAM P\nX = 1.0\nADR(TANGENT(X) = 1.0)\nY = X\nEND "
                         "ADR(D = COTANGENT(X))\nEND\n");
    CHECK(d.message == "TANGENT spec in a reverse (ADR) block");

    d = first_sema_error("PROGRAM P\nX = 1.0\nADF(TANGENT(X) = 1.0)\nY = X\nEND "
                         "ADF(D = COTANGENT(Y))\nEND\n");
    CHECK(d.message == "COTANGENT spec in a forward (ADF) block");
}

TEST_CASE("closing specs may only read names the block saw") {
    Diagnostic d = first_sema_error("PROGRAM P\nX = 1.0\nZ = 5.0\nADF(TANGENT(X) = 1.0)\nY = X * "
                                    "X\nEND ADF(D = TANGENT(Z))\nEND\n");
    CHECK(d.message == "TANGENT(Z) read in the closing specs, but Z does not occur in the ADF "
                       "block opened at line 4");

    // Occurring in the opening specs is enough: harvesting an input works.
    CHECK_NOTHROW(fartest::analyze("PROGRAM P\nX = 1.0\nADR(COTANGENT(Y) = 1.0)\nY = X * X\nEND "
                                   "ADR(G = COTANGENT(X))\nEND\n"));
}

TEST_CASE("implied-do variables must not shadow their own bounds") {
    Diagnostic d = first_sema_error("PROGRAM P\nDIMENSION V(3), G(3)\nI = 2\nV(1) = 1.0\n"
                                    "ADR(COTANGENT(Y) = 1.0)\nY = V(1)\nEND "
                                    "ADR(G(I) = COTANGENT(V(I)), I = 1, I + 1)\nEND\n");
    CHECK(d.message == "implied-do variable I shadows the I used in its own bounds");

    CHECK_NOTHROW(fartest::analyze("PROGRAM P\nDIMENSION V(3), G(3)\nN = 3\nV(1) = 1.0\nV(2) = "
                                   "1.0\nV(3) = 1.0\nADR(COTANGENT(Y) = 1.0)\nY = V(1) + V(2) + "
                                   "V(3)\nEND ADR(G(I) = COTANGENT(V(I)), I = 1, N)\nEND\n"));
}

TEST_CASE("validate_ad_blocks reports every violation, not just the first") {
    BoundProgram b = resolve_scopes(parse_program(tokenize(
        "PROGRAM P\nX = 1.0\nADF(COTANGENT(X) = 1.0)\nY = X\nEND ADF(D = COTANGENT(Y))\nEND\n")));
    std::vector<Diagnostic> diags = validate_ad_blocks(b);
    CHECK(diags.size() == 2);
}
