#include "casim/interp.hpp"
#include "casim/programs.hpp"

#include "doctest.h"

namespace {

using namespace casim;

CellState counter_state(const RuleProgram& p, std::int64_t v) {
    CellState s;
    set_field(s, *p.layout.find("Counter"), v);
    return s;
}

std::int64_t counter_out(const RuleProgram& p, std::int64_t a, std::int64_t b,
                         std::int64_t c) {
    CellState r = eval(p, counter_state(p, a), counter_state(p, b),
                       counter_state(p, c));
    return get_field(r, *p.layout.find("Counter"));
}

TEST_CASE("counter rule anchor outputs") {
    RuleProgram p = counter_program();
    CHECK(counter_out(p, 0, 0, 0) == 1);
    CHECK(counter_out(p, 3, 5, 3) == 6);
    CHECK(counter_out(p, 1, 2, 3) == 2);
}

TEST_CASE("counter rule full behavior") {
    RuleProgram p = counter_program();
    // increment iff (b != c and a = c) or (b = c and a = 0), else keep
    for (std::int64_t a = 0; a < 10; ++a)
        for (std::int64_t b = 0; b < 10; ++b)
            for (std::int64_t c = 0; c < 10; ++c) {
                bool inc = (b != c && a == c) || (b == c && a == 0);
                std::int64_t want = inc ? (b + 1) % 10 : b;
                CHECK(counter_out(p, a, b, c) == want);
            }
}

TEST_CASE("eval is pure") {
    RuleProgram p = counter_program();
    CellState a = counter_state(p, 3), b = counter_state(p, 5),
              c = counter_state(p, 3);
    CellState first = eval(p, a, b, c);
    for (int i = 0; i < 5; ++i) CHECK(eval(p, a, b, c) == first);
    CHECK(a == counter_state(p, 3));
    CHECK(b == counter_state(p, 5));
}

TEST_CASE("sequential semantics: own reads see writes, neighbors stay old") {
    RuleProgram p = program_from_source("bits field A len 1\n"
                                        "bits field B len 1\n"
                                        "A <- 1\n"
                                        "B <- A\n");
    CellState blank;
    CellState r = eval(p, blank, blank, blank);
    const FieldLayout& layout = p.layout;
    CHECK(get_field(r, *layout.find("A")) == 1);
    CHECK(get_field(r, *layout.find("B")) == 1);

    // a neighbor's field read is unaffected by the neighbor's own update rule
    RuleProgram q = program_from_source("bits field A len 1\n"
                                        "A <- A+\n");
    CellState one;
    one.set_bit(0, true);
    CHECK(eval(q, blank, blank, one).get_bit(0));
    CHECK_FALSE(eval(q, one, blank, blank).get_bit(0));
}

TEST_CASE("overflow writes are reduced and reported") {
    RuleProgram p = program_from_source("num field A <= 2\n"
                                        "A <- 7\n");
    CHECK(p.layout.find("A")->width == 2);
    EvalStats stats;
    CellState blank;
    CellState r = eval(p, blank, blank, blank, &stats);
    CHECK(get_field(r, *p.layout.find("A")) == 3);  // 7 mod 2^2
    CHECK(stats.overflow_writes == 1);

    EvalStats ok_stats;
    RuleProgram q = program_from_source("num field A <= 2\n"
                                        "A <- 2\n");
    eval(q, blank, blank, blank, &ok_stats);
    CHECK(ok_stats.overflow_writes == 0);
}

TEST_CASE("param_value: eager and lazy") {
    RuleProgram p = program_from_source("num param M = 6 * 7\n"
                                        "bool field F\n"
                                        "F <- False\n");
    CHECK(param_num(p, "M") == 42);

    RuleProgram q = program_from_source("string param Self = This\n"
                                        "bool field F\n"
                                        "F <- False\n");
    CHECK(q.param_lazy[0]);
    Value v = param_value(q, "Self");
    REQUIRE(v.kind == Value::Kind::Str);
    CHECK(v.str == q.canonical_text);
    // second read hits the cache
    CHECK(param_value(q, 0).str == q.canonical_text);
    CHECK_THROWS_AS((void)param_num(q, "Self"), Error);
    CHECK_THROWS_AS((void)param_value(q, "Absent"), Error);
}

TEST_CASE("rule_of agrees with eval everywhere") {
    RuleProgram p = counter_program();
    LocalRule r = rule_of(p);
    CHECK(r.state_bits() == 4);
    CHECK(r.radius() == 1);
    CHECK_FALSE(r.quiescent());  // blank maps to 1
    for (std::uint64_t a = 0; a < 16; ++a)
        for (std::uint64_t b = 0; b < 16; ++b)
            for (std::uint64_t c = 0; c < 16; ++c) {
                CellState sa, sb, sc;
                sa.w[0] = a;
                sb.w[0] = b;
                sc.w[0] = c;
                CHECK(r.apply3(sa, sb, sc) == eval(p, sa, sb, sc));
            }
    // memoized second pass gives identical answers
    CellState sa = counter_state(p, 3), sb = counter_state(p, 5),
              sc = counter_state(p, 3);
    CHECK(r.apply3(sa, sb, sc) == r.apply3(sa, sb, sc));
}

TEST_CASE("rule_of of the always-blank program is constant blank") {
    LocalRule r = rule_of(always_blank_program());
    CHECK(r.quiescent());
    CellState one;
    one.set_bit(0, true);
    CHECK(r.apply3(one, one, one).is_blank());
    CHECK(r.apply3(CellState{}, one, CellState{}).is_blank());
}

TEST_CASE("measure_costs: exhaustive equals sampled for the counter") {
    RuleProgram p = counter_program();
    CostProfile ex = measure_costs(p);
    CHECK(ex.exact);
    CHECK(ex.sampled_inputs == 16 * 16 * 16);
    CHECK(ex.time_steps > 0);
    CHECK(ex.space_bits >= 4);

    for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
        CostProfile s1 = measure_costs_sampled(p, 1, seed);
        CHECK(s1.time_steps == ex.time_steps);
        CHECK(s1.space_bits == ex.space_bits);
        CHECK_FALSE(s1.exact);
        CostProfile s64 = measure_costs_sampled(p, 64, seed);
        CHECK(s64.time_steps == ex.time_steps);
        CHECK(s64.space_bits == ex.space_bits);
    }
}

TEST_CASE("measure_costs: straight-line bodies are input independent") {
    RuleProgram p = xor_program();
    CostProfile ex = measure_costs(p);
    CHECK(ex.exact);
    CHECK(ex.sampled_inputs == 8);
    CostProfile s = measure_costs_sampled(p, 5, 1234);
    CHECK(s.time_steps == ex.time_steps);
    CHECK(s.space_bits == ex.space_bits);
}

TEST_CASE("measure_costs: identity program is cheap") {
    CostProfile c = measure_costs(identity_program());
    CHECK(c.time_steps >= 1);
    CHECK(c.time_steps <= 8);
    CHECK(c.space_bits >= 1);
}

TEST_CASE("measure_costs capacity limits") {
    std::string wide = "bits field B len ";
    wide.append(17, '1');
    wide += "\nB <- 0\n";
    RuleProgram p = program_from_source(wide);
    CHECK(p.state_bits() == 17);
    CHECK_THROWS_AS((void)measure_costs(p), Error);

    std::string nine = "bits field B len ";
    nine.append(9, '1');
    nine += "\nB <- 0\n";
    RuleProgram q = program_from_source(nine);
    CHECK_THROWS_AS((void)measure_costs(q), Error);  // 2^27 triples over budget
    CHECK(measure_costs_sampled(q, 16, 5).sampled_inputs == 16);
}

TEST_CASE("cost profiles are monotone in sample count") {
    RuleProgram p = counter_program();
    CostProfile small = measure_costs_sampled(p, 2, 11);
    CostProfile big = measure_costs_sampled(p, 40, 11);
    CHECK(big.time_steps >= small.time_steps);
    CHECK(big.space_bits >= small.space_bits);
}

} // namespace
