#include "casim/graphs.hpp"
#include "casim/rule.hpp"

#include <doctest.h>

using namespace casim;

namespace {

LocalRule xor_rule() {
    return LocalRule(
        1, 1,
        [](const CellState* n) {
            CellState out;
            out.set_bit(0, n[0].get_bit(0) ^ n[1].get_bit(0) ^ n[2].get_bit(0));
            return out;
        },
        "xor");
}

// Hand transcription of the example program's branch logic on 4-bit values.
LocalRule example_rule() {
    return LocalRule(
        4, 1,
        [](const CellState* n) {
            auto value = [](const CellState& s) {
                std::int64_t v = 0;
                for (int k = 0; k < 4; ++k)
                    v = (v << 1) | (s.get_bit(k) ? 1 : 0);
                return v;
            };
            std::int64_t a = value(n[0]), b = value(n[1]), c = value(n[2]);
            std::int64_t out = b;
            if (b != c ? a == c : a == 0)
                out = (b + 1) % 10;
            CellState s;
            for (int k = 0; k < 4; ++k)
                s.set_bit(k, (out >> (3 - k)) & 1);
            return s;
        },
        "example");
}

RowConfig row_from(const std::string& bits, Boundary b = Boundary::BlankPadded) {
    RowConfig r;
    r.boundary = b;
    for (char c : bits) {
        CellState s;
        s.set_bit(0, c == '1');
        r.cells.push_back(s);
    }
    return r;
}

std::string row_bits(const RowConfig& r) {
    std::string out;
    for (const CellState& s : r.cells)
        out += s.get_bit(0) ? '1' : '0';
    return out;
}

} // namespace

TEST_CASE("xor stepping") {
    LocalRule rule = xor_rule();
    CHECK(rule.quiescent());
    CHECK(row_bits(step(rule, row_from("0001000"))) == "0011100");
    CHECK(row_bits(step(rule, row_from("0000000"))) == "0000000");
    // periodic boundary wraps reads: each cell sees the single 1 exactly once
    CHECK(row_bits(step(rule, row_from("100", Boundary::Periodic))) == "111");
}

TEST_CASE("example rule is not quiescent and counts up from zero") {
    LocalRule rule = example_rule();
    CHECK_FALSE(rule.quiescent());
    RowConfig zeros;
    zeros.cells.assign(5, CellState{});
    RowConfig next = step(rule, zeros);
    for (const CellState& s : next.cells) {
        CHECK(s.get_bit(3));  // value 1 = 0001
        CHECK_FALSE(s.get_bit(0));
    }
}

TEST_CASE("step is identical for any thread count") {
    LocalRule rule = xor_rule();
    RowConfig r = row_from("01011101000111010010101");
    RowConfig a = step(rule, r, 1);
    RowConfig b = step(rule, r, 4);
    RowConfig c = step(rule, r, 7);
    CHECK(a.cells == b.cells);
    CHECK(a.cells == c.cells);
}

TEST_CASE("step_word") {
    LocalRule rule = xor_rule();
    auto w = [](const std::string& bits) {
        std::vector<CellState> out;
        for (char c : bits) {
            CellState s;
            s.set_bit(0, c == '1');
            out.push_back(s);
        }
        return out;
    };
    auto bits = [](const std::vector<CellState>& cells) {
        std::string out;
        for (const CellState& s : cells)
            out += s.get_bit(0) ? '1' : '0';
        return out;
    };
    CHECK(bits(step_word(rule, w("11111"))) == "111");
    CHECK(bits(step_word(rule, w("010"))) == "1");
    CHECK_THROWS_AS(step_word(rule, w("01")), Error);
    LocalRule twice = compose_shift_power(rule, 0, 2);
    CHECK_THROWS_AS(step_word(twice, w("0101")), Error);  // radius 2 needs 5 cells
}

TEST_CASE("tilde step check") {
    LocalRule rule = xor_rule();
    RowConfig x = row_from("111");
    RowConfig image = step(rule, x);
    CHECK(row_bits(image) == "010");
    CHECK(check_tilde_step(rule, x, image).empty());
    CHECK(check_tilde_step(rule, x, row_from("000")).empty());
    auto violations = check_tilde_step(rule, x, row_from("110"));
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].i == 0);
}

TEST_CASE("hat step admits neighborhood blanking beyond tilde") {
    LocalRule rule = xor_rule();
    RowConfig x = row_from("011");
    // middle cell: deterministic image is 0; blanking the center gives 1
    RowConfig y = row_from("011");
    CHECK_FALSE(check_tilde_step(rule, x, y).empty());
    CHECK(check_hat_step(rule, x, y).empty());
    // no blanking subset of an all-zero neighborhood yields 1
    auto violations = check_hat_step(rule, row_from("000"), row_from("010"));
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].i == 1);
}

TEST_CASE("composed shift powers") {
    LocalRule rule = xor_rule();
    LocalRule same = compose_shift_power(rule, 0, 1);
    CHECK(same.radius() == 1);
    for (unsigned t = 0; t < 8; ++t) {
        CellState l, c, r;
        l.set_bit(0, t & 1);
        c.set_bit(0, t & 2);
        r.set_bit(0, t & 4);
        CHECK(same.apply3(l, c, r) == rule.apply3(l, c, r));
    }
    LocalRule shifted = compose_shift_power(rule, 1, 1);
    CHECK(shifted.radius() == 2);
    CHECK(row_bits(step(shifted, row_from("00100"))) == "11100");
    LocalRule twice = compose_shift_power(rule, 0, 2);
    RowConfig r0 = row_from("0001000");
    CHECK(row_bits(step(twice, r0)) == row_bits(step(rule, step(rule, r0))));
    CHECK(row_bits(step(twice, r0)) == "0101010");
    CHECK_THROWS_AS(compose_shift_power(rule, 0, 0), Error);
}

TEST_CASE("demanding scan") {
    LocalRule rule = xor_rule();
    CellState one;
    one.set_bit(0, true);
    std::vector<CellState> universe{CellState{}, one};
    for (int delta = -1; delta <= 1; ++delta) {
        CHECK_FALSE(demanding_exhaustive(rule, one, delta, universe));
        CHECK_FALSE(demanding_exhaustive(rule, CellState{}, delta, universe));
    }
    CHECK_THROWS_AS(
        demanding_exhaustive(rule, one, 0, std::vector<CellState>{one, CellState{}}, 7),
        Error);
}

TEST_CASE("sampled trajectories validate and replay") {
    LocalRule rule = xor_rule();
    RowConfig first = row_from("000101101001000");

    TrajectoryBlock det = run_deterministic(rule, first, 8);
    CHECK(check_trajectory(rule, det).empty());
    TrajectoryBlock edited = det;
    edited.rows[3][2].set_bit(0, !edited.rows[3][2].get_bit(0));
    auto violations = check_trajectory(rule, edited);
    bool found = false;
    for (const Violation& v : violations)
        if (v.t == 3 && v.i == 2)
            found = true;
    CHECK(found);

    TrajectoryBlock tilde = sample_tilde(rule, first, 10, 0.3, 42);
    CHECK(check_trajectory(rule, tilde).empty());
    TrajectoryBlock again = sample_tilde(rule, first, 10, 0.3, 42);
    CHECK(tilde.rows == again.rows);
    CHECK(tilde.choices == again.choices);
    TrajectoryBlock other = sample_tilde(rule, first, 10, 0.3, 43);
    CHECK(tilde.rows != other.rows);

    // every tilde step also passes the hat check
    for (int t = 0; t + 1 < tilde.row_count(); ++t)
        CHECK(check_hat_step(rule, tilde.row(t), tilde.row(t + 1)).empty());

    TrajectoryBlock hat = sample_hat(rule, first, 10, 0.4, 7);
    CHECK(check_trajectory(rule, hat).empty());
    TrajectoryBlock hat2 = sample_hat(rule, first, 10, 0.4, 7);
    CHECK(hat.rows == hat2.rows);
}

TEST_CASE("cell graphs on xor blocks") {
    LocalRule rule = xor_rule();
    TrajectoryBlock block = run_deterministic(rule, row_from("00100"), 2);
    CellGraph g = build_graphs(block, rule);
    CHECK(g.nonblank(0, 2));
    CHECK(g.nonblank(1, 1));
    // weak edges exist, strong edges do not (no xor state is demanding)
    bool any_weak = false, any_strong = false;
    for (int t = 0; t < g.rows(); ++t)
        for (int i = 0; i < g.width(); ++i) {
            if (g.weak_in(t, i))
                any_weak = true;
            if (g.strong_in(t, i))
                any_strong = true;
            CHECK((g.weak_in(t, i) | g.strong_in(t, i)) == g.weak_in(t, i));
        }
    CHECK(any_weak);
    CHECK_FALSE(any_strong);

    CHECK(connected(g, {0, 2}, {0, 2}, false));
    CHECK(connected(g, {0, 2}, {1, 1}, false));
    CHECK_FALSE(connected(g, {0, 2}, {1, 1}, true));
    CHECK_THROWS_AS(connected(g, {0, 0}, {1, 1}, false), Error);

    TrajectoryBlock islands = run_deterministic(rule, row_from("10000000001"), 1);
    CellGraph gi = build_graphs(islands, rule);
    CHECK(connected(gi, {0, 0}, {1, 1}, false));
    CHECK_FALSE(connected(gi, {0, 0}, {1, 9}, false));
}

TEST_CASE("all-blank block has an empty graph") {
    LocalRule rule = xor_rule();
    TrajectoryBlock block = run_deterministic(rule, row_from("0000"), 3);
    CellGraph g = build_graphs(block, rule);
    for (int t = 0; t < g.rows(); ++t)
        for (int i = 0; i < g.width(); ++i) {
            CHECK_FALSE(g.nonblank(t, i));
            CHECK(g.weak_in(t, i) == 0);
        }
}
