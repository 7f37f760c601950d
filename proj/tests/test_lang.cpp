#include "casim/lang.hpp"

#include <doctest.h>

using namespace casim;

namespace {

const char* kCounterSource =
    "num param Modulus = 10\n"
    "num field Counter <= Modulus - 1\n"
    "\n"
    "proc Proc(n)\n"
    "  if Counter- = n then\n"
    "    Counter <- (Counter + 1) mod Modulus\n"
    "  end\n"
    "end\n"
    "\n"
    "if Counter != Counter+ then\n"
    "  Proc(Counter+)\n"
    "else\n"
    "  Proc(0)\n"
    "end\n";

RuleProgram parse_ok(const std::string& text) {
    RuleProgram p = parse(text);
    auto errors = validate(p);
    CHECK(errors.empty());
    if (!errors.empty())
        for (const auto& e : errors) MESSAGE(e);
    return p;
}

std::vector<std::string> errors_of(const std::string& text) {
    RuleProgram p = parse(text);
    return validate(p);
}

bool has_error(const std::vector<std::string>& errors, const std::string& needle) {
    for (const auto& e : errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("counter program parses to the expected shape") {
    RuleProgram p = parse_ok(kCounterSource);
    REQUIRE(p.params.size() == 1);
    CHECK(p.params[0].name == "Modulus");
    CHECK(p.params[0].kind == ParamKind::Num);
    REQUIRE(p.param_values[0].has_value());
    CHECK(p.param_values[0]->num == 10);
    REQUIRE(p.fields.size() == 1);
    CHECK(p.fields[0].name == "Counter");
    CHECK(p.fields[0].kind == FieldKind::Number);
    REQUIRE(p.procs.size() == 1);
    CHECK(p.procs[0].name == "Proc");
    REQUIRE(p.procs[0].formals.size() == 1);
    CHECK(p.procs[0].formals[0] == "n");
    CHECK(p.body.size() == 1);
    CHECK(p.state_bits() == 4);  // values 0..9 need 4 bits
    CHECK(p.layout.at(0).width == 4);
}

TEST_CASE("canonical print is a reparse fixed point") {
    RuleProgram p = parse(kCounterSource);
    CHECK(p.canonical_text == kCounterSource);
    RuleProgram q = parse(p.canonical_text);
    CHECK(q.canonical_text == p.canonical_text);
}

TEST_CASE("messy whitespace and redundant parens normalize away") {
    std::string messy =
        "num param Modulus = 10\n"
        "\n\n"
        "num field Counter <= (Modulus - 1)\n"
        "proc Proc(n)\n"
        "  if ((Counter-) = n) then\n"
        "    Counter <- ((Counter + 1)) mod Modulus\n"
        "  end\n"
        "end\n"
        "if (Counter != Counter+) then\n"
        "  Proc(Counter+)\n"
        "else\n"
        "  Proc(0)\n"
        "end\n";
    CHECK(parse(messy).canonical_text == kCounterSource);
}

TEST_CASE("operator precedence and minimal parens") {
    RuleProgram p = parse_ok(
        "num field A <= 7\n"
        "num field B <= 7\n"
        "A <- A + B * 2\n"
        "B <- (A + B) * 2\n"
        "if not A = B then\n"
        "  A <- 0\n"
        "end\n"
        "if A = 1 and B = 2 or not A < B then\n"
        "  B <- 0\n"
        "end\n");
    CHECK(p.canonical_text.find("A <- A + B * 2\n") != std::string::npos);
    CHECK(p.canonical_text.find("B <- (A + B) * 2\n") != std::string::npos);
    CHECK(p.canonical_text.find("if not A = B then\n") != std::string::npos);
    CHECK(p.canonical_text.find("if A = 1 and B = 2 or not A < B then\n") !=
          std::string::npos);
}

TEST_CASE("comparison chains are rejected") {
    CHECK_THROWS_AS(parse("num field A <= 3\nA <- 1\nif 1 < 2 < 3 then\nA <- 0\nend\n"),
                    Error);
}

TEST_CASE("empty body is a syntax error") {
    CHECK_THROWS_AS(parse("num param X = 1\n"), Error);
    CHECK_THROWS_AS(parse(""), Error);
    try {
        parse("num param X = 1\n");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Syntax);
    }
}

TEST_CASE("neighbor targets cannot be assigned") {
    CHECK_THROWS_AS(parse("num field A <= 3\nA+ <- 1\n"), Error);
}

TEST_CASE("declaration shapes") {
    RuleProgram p = parse_ok(
        "bool field Flag\n"
        "enum field Kind in {Lft, Rgt, Ret}\n"
        "bits field Pay len 111\n"
        "Flag <- True\n"
        "Kind <- Rgt\n"
        "Pay <- 5\n");
    CHECK(p.fields[0].kind == FieldKind::Boolean);
    CHECK(p.fields[1].labels.size() == 3);
    CHECK(p.fields[2].length == 3);
    CHECK(p.state_bits() == 1 + 2 + 3);
    CHECK(p.canonical_text.find("enum field Kind in {Lft, Rgt, Ret}\n") !=
          std::string::npos);
    CHECK(p.canonical_text.find("bits field Pay len 111\n") != std::string::npos);
}

TEST_CASE("bit lengths are written in unary") {
    CHECK_THROWS_AS(parse("bits field Pay len 3\nPay <- 1\n"), Error);
    CHECK_THROWS_AS(parse("bits field Pay len 101\nPay <- 1\n"), Error);
}

TEST_CASE("string literals round trip with escapes") {
    std::string src =
        "string param S = \"a\\nb\\\"c\\\\d\"\nnum field A <= 1\n\nA <- 0\n";
    RuleProgram p = parse(src);
    CHECK(p.params[0].value.str == "a\nb\"c\\d");
    CHECK(p.canonical_text == src);
}

TEST_CASE("string indexing folds in parameters") {
    RuleProgram p = parse_ok(
        "string param S = \"101\"\n"
        "num param A = S[0]\n"
        "num param B = S[1]\n"
        "num param C = S[7]\n"
        "num field F <= 1\n"
        "F <- 0\n");
    CHECK(p.param_values[1]->num == 1);
    CHECK(p.param_values[2]->num == 0);
    CHECK(p.param_values[3]->num == 0);  // out of range reads 0
}

TEST_CASE("undefined names are reported") {
    auto errors = errors_of("num field A <= 3\nA <- Bogus\n");
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].find("undefined name 'Bogus'") != std::string::npos);
    errors = errors_of("num field A <= 3\nFoo(1)\n");
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].find("undefined procedure 'Foo'") != std::string::npos);
}

TEST_CASE("recursive procedures are rejected") {
    auto errors = errors_of(
        "num field A <= 3\n"
        "proc P(x)\n"
        "  P(x)\n"
        "end\n"
        "P(1)\n");
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("recursive") != std::string::npos);
    errors = errors_of(
        "num field A <= 3\n"
        "proc P(x)\n"
        "  Q(x)\n"
        "end\n"
        "proc Q(x)\n"
        "  P(x)\n"
        "end\n"
        "P(1)\n");
    CHECK(!errors.empty());
}

TEST_CASE("duplicate and shadowed names are rejected") {
    CHECK(!errors_of("num param X = 1\nnum field X <= 3\nX <- 0\n").empty());
    CHECK(!errors_of("enum field A in {X, Y}\nnum param X = 1\nA <- Y\n").empty());
    CHECK(!errors_of(
              "num param X = 1\nnum field A <= 3\nproc P(X)\n  A <- X\nend\nP(1)\n")
              .empty());
}

TEST_CASE("type errors are reported") {
    CHECK(!errors_of("bool field F\nF <- 1\n").empty());
    CHECK(!errors_of("num field A <= 3\nif A then\nA <- 0\nend\n").empty());
    CHECK(!errors_of("enum field A in {P, Q}\nenum field B in {R, S}\nA <- R\n").empty());
    CHECK(!errors_of(
              "enum field A in {P, Q}\nenum field B in {R, S}\nif P = R then\nA <- Q\nend\n")
              .empty());
    CHECK(!errors_of("num field A <= 3\nA <- True and 1\n").empty());
    // booleans may be stored into numeric fields
    CHECK(errors_of("num field A <= 3\nA <- True\n").empty());
}

TEST_CASE("assignments only touch own fields") {
    CHECK(!errors_of("num param M = 3\nnum field A <= 3\nM <- 1\n").empty());
    CHECK(!errors_of("num field A <= 3\nproc P(x)\n  x <- 1\nend\nP(1)\n").empty());
}

TEST_CASE("This is restricted to parameter initializers") {
    auto errors = errors_of("num field A <= 3\nA <- This[0]\n");
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("This") != std::string::npos);
    RuleProgram p = parse(
        "string param Me = This\n"
        "num field A <= 3\n"
        "A <- 0\n");
    CHECK(validate(p).empty());
    CHECK(p.param_lazy[0]);
    CHECK(!p.param_values[0].has_value());
}

TEST_CASE("field widths cannot depend on lazy parameters") {
    auto errors = errors_of(
        "num param W = This[0] + 2\n"
        "num field A <= W\n"
        "A <- 0\n");
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("lazily") != std::string::npos);
}

TEST_CASE("builtin calls in initializers defer evaluation") {
    RuleProgram p = parse(
        "string param Prog = Gs(1, \"x\")\n"
        "num field A <= 3\n"
        "A <- Prog[A]\n");
    CHECK(validate(p).empty());
    CHECK(p.param_lazy[0]);
    RuleProgram bad = parse("string param Prog = Gs(1)\nnum field A <= 3\nA <- 0\n");
    auto errors = validate(bad);
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("argument") != std::string::npos);
}

TEST_CASE("value returning procedures must not fall through") {
    auto errors = errors_of(
        "num field A <= 3\n"
        "proc P()\n"
        "  if A = 0 then\n"
        "    return 1\n"
        "  end\n"
        "end\n"
        "A <- P()\n");
    REQUIRE(!errors.empty());
    CHECK(errors[0].find("fall through") != std::string::npos);
    CHECK(errors_of(
              "num field A <= 3\n"
              "proc P()\n"
              "  if A = 0 then\n"
              "    return 1\n"
              "  else\n"
              "    return 2\n"
              "  end\n"
              "end\n"
              "A <- P()\n")
              .empty());
}

TEST_CASE("void procedures cannot be used as values") {
    auto errors = errors_of(
        "num field A <= 3\n"
        "proc P()\n"
        "  A <- 1\n"
        "end\n"
        "A <- P()\n");
    REQUIRE(!errors.empty());
    CHECK(has_error(errors, "returns no value"));
}

TEST_CASE("top level body cannot return a value") {
    CHECK(!errors_of("num field A <= 3\nreturn 1\n").empty());
    CHECK(errors_of("num field A <= 3\nA <- 1\nreturn\n").empty());
}

TEST_CASE("multi assignment fans out one value") {
    RuleProgram p = parse_ok(
        "num field A <= 7\n"
        "bits field B len 111\n"
        "A, B <- 5\n");
    CHECK(p.body[0].targets.size() == 2);
    CHECK(p.canonical_text.find("A, B <- 5\n") != std::string::npos);
}

TEST_CASE("encode is eight bits per character") {
    RuleProgram p = parse(kCounterSource);
    std::string bits = encode_bits(p);
    CHECK(bits.size() == p.canonical_text.size() * 8);
    RuleProgram q = decode_bits(bits);
    CHECK(q.canonical_text == p.canonical_text);
    // "n" = 0x6E
    CHECK(bits.substr(0, 8) == "01101110");
    CHECK_THROWS_AS(decode_bits("0101010"), Error);
}

TEST_CASE("inc_level bumps the Level literal") {
    RuleProgram p = parse(
        "num param Level = 3\n"
        "num field A <= 3\n"
        "A <- Level mod 4\n");
    RuleProgram q = inc_level(p);
    CHECK(q.canonical_text.find("num param Level = 4\n") != std::string::npos);
    CHECK(p.canonical_text.find("num param Level = 3\n") != std::string::npos);
    RuleProgram no_level = parse("num field A <= 3\nA <- 0\n");
    CHECK_THROWS_AS(inc_level(no_level), Error);
}

TEST_CASE("rename_clashes applies reserved prefixes") {
    RuleProgram p = parse(
        "num param Count = 2\n"
        "num field Live <= 3\n"
        "proc Die(k)\n"
        "  Live <- k\n"
        "end\n"
        "Die(Count)\n");
    rename_clashes(p, {"Live", "Count", "Die", "k"});
    CHECK(validate(p).empty());
    CHECK(p.canonical_text.find("num param u0_Count = 2\n") != std::string::npos);
    CHECK(p.canonical_text.find("num field u0_Live <= 3\n") != std::string::npos);
    CHECK(p.canonical_text.find("proc u0_Die(u0_k)\n") != std::string::npos);
    CHECK(p.canonical_text.find("u0_Die(u0_Count)\n") != std::string::npos);
    // a second program already using the u0_ name gets the next prefix
    RuleProgram q = parse(
        "num field Live <= 3\n"
        "num field u0_Live <= 3\n"
        "Live <- u0_Live\n");
    rename_clashes(q, {"Live"});
    CHECK(q.canonical_text.find("num field u1_Live <= 3\n") != std::string::npos);
    CHECK(q.canonical_text.find("num field u0_Live <= 3\n") != std::string::npos);
}

TEST_CASE("finalize raises on invalid generated programs") {
    RuleProgram p;
    p.fields.push_back([] {
        FieldDecl d;
        d.kind = FieldKind::Number;
        d.name = "A";
        d.max_expr = num_lit(3);
        return d;
    }());
    p.body.push_back(assign({"A"}, binop(ExprOp::Add, ref("A"), num_lit(1))));
    RuleProgram ok = finalize(p);
    CHECK(ok.validated);
    CHECK(ok.canonical_text == "num field A <= 3\n\nA <- A + 1\n");

    RuleProgram bad;
    bad.fields = p.fields;
    bad.body.push_back(assign({"Missing"}, num_lit(1)));
    CHECK_THROWS_AS(finalize(bad), Error);
}

TEST_CASE("helper predicates") {
    RuleProgram p = parse(
        "string param S = This\n"
        "num field A <= 3\n"
        "proc P()\n"
        "  return\n"
        "end\n"
        "A <- 1\n");
    CHECK(mentions_this(p.params[0].value));
    CHECK(contains_return(p.procs[0].body));
    CHECK(!contains_return(p.body));
}
