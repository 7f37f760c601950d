#include "casim/interp.hpp"
#include "casim/programs.hpp"

#include "doctest.h"

#include <cstdlib>
#include <memory>

namespace {

using namespace casim;

std::shared_ptr<const RuleProgram> shared(RuleProgram p) {
    return std::make_shared<const RuleProgram>(std::move(p));
}

// tracks hold the triple's bits in the first K cells, zeros elsewhere
AgentMachine agent_for(std::shared_ptr<const RuleProgram> target, AgentBackend b,
                       int q, std::uint64_t l, std::uint64_t s, std::uint64_t r) {
    int k = target->state_bits();
    std::vector<std::uint8_t> lm(static_cast<std::size_t>(q), 0);
    std::vector<std::uint8_t> sm = lm, rm = lm;
    for (int j = 0; j < k; ++j) {
        lm[static_cast<std::size_t>(j)] = (l >> j) & 1;
        sm[static_cast<std::size_t>(j)] = (s >> j) & 1;
        rm[static_cast<std::size_t>(j)] = (r >> j) & 1;
    }
    return make_agent(std::move(target), b, q, std::move(lm), std::move(sm),
                      std::move(rm));
}

TEST_CASE("oracle agent on the always-blank target dooms the colony") {
    auto target = shared(always_blank_program());
    AgentMachine m = run_agent(agent_for(target, AgentBackend::Oracle, 16, 1, 1, 1));
    CHECK(m.halted);
    CHECK(m.doom);
    for (std::uint8_t bit : m.out) CHECK(bit == 0);
}

TEST_CASE("oracle agent step count is two sweeps plus the latch") {
    auto target = shared(identity_program());
    AgentMachine m = run_agent(agent_for(target, AgentBackend::Oracle, 8, 0, 1, 0));
    CHECK(m.step_count == 3);  // gather 1, latch 1, write 1
    CHECK(m.out[0] == 1);
    CHECK_FALSE(m.doom);
}

TEST_CASE("literal and oracle agree on the identity target") {
    auto target = shared(identity_program());
    for (std::uint64_t bits = 0; bits < 8; ++bits) {
        std::uint64_t l = bits & 1, s = (bits >> 1) & 1, r = (bits >> 2) & 1;
        AgentMachine lit =
            run_agent(agent_for(target, AgentBackend::Literal, 32, l, s, r));
        AgentMachine orc =
            run_agent(agent_for(target, AgentBackend::Oracle, 32, l, s, r));
        CHECK(lit.out == orc.out);
        CHECK(lit.doom == orc.doom);
        CHECK(lit.out[0] == s);
    }
}

TEST_CASE("literal and oracle agree on the xor target, exhaustively") {
    auto target = shared(xor_program());
    for (std::uint64_t bits = 0; bits < 8; ++bits) {
        std::uint64_t l = bits & 1, s = (bits >> 1) & 1, r = (bits >> 2) & 1;
        AgentMachine lit =
            run_agent(agent_for(target, AgentBackend::Literal, 64, l, s, r));
        AgentMachine orc =
            run_agent(agent_for(target, AgentBackend::Oracle, 64, l, s, r));
        CHECK(lit.out == orc.out);
        CHECK(lit.doom == orc.doom);
        CHECK(lit.out[0] == ((l + s + r) & 1));
        CHECK(lit.doom == (((l + s + r) & 1) == 0));
    }
}

TEST_CASE("literal and oracle agree on the counter target, exhaustively") {
    auto target = shared(counter_program());
    int checked = 0;
    for (std::uint64_t a = 0; a < 16; ++a)
        for (std::uint64_t b = 0; b < 16; b += 3)
            for (std::uint64_t c = 0; c < 16; c += 5) {
                AgentMachine lit =
                    run_agent(agent_for(target, AgentBackend::Literal, 64, a, b, c));
                AgentMachine orc =
                    run_agent(agent_for(target, AgentBackend::Oracle, 64, a, b, c));
                CHECK(lit.out == orc.out);
                CHECK(lit.doom == orc.doom);
                ++checked;
            }
    CHECK(checked == 16 * 6 * 4);
}

TEST_CASE("agent output matches eval bit for bit") {
    RuleProgram prog = counter_program();
    auto target = shared(prog);
    CellState a, b, c;
    set_field(a, *prog.layout.find("Counter"), 3);
    set_field(b, *prog.layout.find("Counter"), 5);
    set_field(c, *prog.layout.find("Counter"), 3);
    CellState want = eval(prog, a, b, c);
    AgentMachine m = run_agent(
        agent_for(target, AgentBackend::Literal, 64, a.w[0], b.w[0], c.w[0]));
    for (int j = 0; j < 4; ++j) CHECK((m.out[static_cast<std::size_t>(j)] != 0) ==
                                      want.get_bit(j));
    CHECK_FALSE(m.doom);
}

TEST_CASE("literal agent moves its head one cell at a time") {
    auto target = shared(counter_program());
    AgentMachine m = agent_for(target, AgentBackend::Literal, 64, 3, 5, 3);
    int prev_head = m.head;
    auto prev_out = m.out;
    while (!m.halted) {
        m = agent_step(std::move(m));
        CHECK(std::abs(m.head - prev_head) <= 1);
        int changed = 0;
        for (std::size_t j = 0; j < m.out.size(); ++j)
            if (m.out[j] != prev_out[j]) {
                ++changed;
                // the cell written is the one under the head when the step ran
                CHECK(static_cast<int>(j) == prev_head);
            }
        CHECK(changed <= 1);
        prev_head = m.head;
        prev_out = m.out;
    }
}

TEST_CASE("stepping a halted agent raises") {
    auto target = shared(identity_program());
    AgentMachine m = run_agent(agent_for(target, AgentBackend::Oracle, 8, 0, 1, 0));
    CHECK(m.halted);
    CHECK_THROWS_AS((void)agent_step(std::move(m)), Error);
}

TEST_CASE("a cramped colony faults the literal backend") {
    auto target = shared(counter_program());
    AgentMachine m = run_agent(agent_for(target, AgentBackend::Literal, 4, 3, 5, 3));
    CHECK(m.halted);
    CHECK(m.fault);
    CHECK(m.doom);
    for (std::uint8_t bit : m.out) CHECK(bit == 0);
}

TEST_CASE("make_agent rejects bad input") {
    RuleProgram p = parse("bits field V len 1\nV <- V\n");
    auto unvalidated = std::make_shared<const RuleProgram>(p);
    CHECK_THROWS_AS(
        (void)make_agent(unvalidated, AgentBackend::Oracle, 8, {}, {}, {}), Error);

    std::string wide = "bits field B len ";
    wide.append(9, '1');
    wide += "\nB <- 0\n";
    auto big = shared(program_from_source(wide));
    std::vector<std::uint8_t> t(16, 0);
    CHECK_THROWS_AS((void)make_agent(big, AgentBackend::Oracle, 16, t, t, t), Error);

    auto id = shared(identity_program());
    std::vector<std::uint8_t> bad(7, 0);
    CHECK_THROWS_AS((void)make_agent(id, AgentBackend::Oracle, 8, bad, bad, bad),
                    Error);
}

TEST_CASE("procedures with arguments embed correctly") {
    // two procedures, one value-returning, chained through locals
    auto target = shared(program_from_source("num field A <= 7\n"
                                             "proc Pick(x, y)\n"
                                             "  if x > y then\n"
                                             "    return x\n"
                                             "  end\n"
                                             "  return y\n"
                                             "end\n"
                                             "proc Apply(v)\n"
                                             "  A <- Pick(v, A+)\n"
                                             "end\n"
                                             "Apply(A-)\n"));
    for (std::uint64_t a = 0; a < 8; ++a)
        for (std::uint64_t b = 0; b < 8; ++b)
            for (std::uint64_t c = 0; c < 8; c += 3) {
                AgentMachine lit =
                    run_agent(agent_for(target, AgentBackend::Literal, 128, a, b, c));
                AgentMachine orc =
                    run_agent(agent_for(target, AgentBackend::Oracle, 128, a, b, c));
                CHECK(lit.out == orc.out);
                CHECK(lit.doom == orc.doom);
            }
}

} // namespace
