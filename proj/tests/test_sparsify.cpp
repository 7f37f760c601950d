#include "casim/interp.hpp"
#include "casim/programs.hpp"
#include "casim/sim.hpp"
#include "casim/transforms.hpp"

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

namespace {

using namespace casim;

int label_index(const RuleProgram& p, const std::string& field,
                const std::string& label) {
    for (const FieldDecl& d : p.fields) {
        if (d.name != field) continue;
        for (std::size_t j = 0; j < d.labels.size(); ++j)
            if (d.labels[j] == label) return static_cast<int>(j);
    }
    return -1;
}

std::int64_t field_of(const RuleProgram& p, const CellState& s,
                      const std::string& name) {
    const Field* f = p.layout.find(name);
    REQUIRE(f != nullptr);
    return get_field(s, *f);
}

// Live cell of the sparsified alphabet; payload defaults to blank.
CellState host_cell(const RuleProgram& p, int kind, std::int64_t count,
                    std::int64_t v = 0) {
    CellState s;
    set_field(s, *p.layout.find("Live"), 1);
    set_field(s, *p.layout.find("Kind"), kind);
    set_field(s, *p.layout.find("Count"), count);
    set_field(s, *p.layout.find("V"), v);
    return s;
}

RowConfig target_word(const std::vector<std::uint64_t>& values, int bits,
                      int margin) {
    RowConfig r;
    r.cells.assign(values.size() + 2 * static_cast<std::size_t>(margin),
                   CellState{});
    for (std::size_t k = 0; k < values.size(); ++k) {
        CellState s;
        s.w[0] = values[k] & ((std::uint64_t{1} << bits) - 1);
        r.cells[k + static_cast<std::size_t>(margin)] = s;
    }
    return r;
}

// Payload whose names collide with everything the wrapper introduces.
RuleProgram clash_program() {
    return program_from_source("num param N = 7\n"
                               "bool field Live\n"
                               "num field Count <= 3\n"
                               "proc CopyRight()\n"
                               "    Count <- Count-\n"
                               "end\n"
                               "Live <- Live\n"
                               "CopyRight()\n");
}

// Main-body return forces the wrapper to reify the payload step as a
// procedure so the early exit cannot skip the birth bookkeeping.
RuleProgram early_return_program() {
    return program_from_source("bits field V len 1\n"
                               "if V- = 1 then\n"
                               "    V <- 1\n"
                               "    return\n"
                               "end\n"
                               "V <- (V + V+) mod 2\n");
}

} // namespace

TEST_CASE("sparsify emission shape") {
    RuleProgram p = sparsify(1, xor_program());
    CHECK(p.validated);
    CHECK(param_num(p, "N") == 1);
    REQUIRE(p.fields.size() == 4);
    CHECK(p.fields[0].name == "Live");
    CHECK(p.fields[1].name == "Kind");
    CHECK(p.fields[2].name == "Count");
    CHECK(p.fields[3].name == "V");
    CHECK(p.fields[1].labels == std::vector<std::string>{"Lft", "Rgt", "Ret"});
    CHECK(p.state_bits() == 6);  // 1 + 2 + 2 + 1
    for (const char* name : {"Die", "Blank", "InputTriple", "CopyRight", "CopyLeft"}) {
        bool found = false;
        for (const ProcDecl& d : p.procs) found = found || d.name == name;
        CHECK_MESSAGE(found, name);
    }
    CHECK_THROWS_AS(sparsify(0, xor_program()), Error);

    RuleProgram p4 = sparsify(4, xor_program());
    CHECK(param_num(p4, "N") == 4);
    CHECK(p4.layout.find("Count")->width == 4);  // holds 0..8
}

TEST_CASE("signal lifecycle of one macro step") {
    // Single live payload cell; one full cycle at spacing 3: outgoing signals,
    // the reflected return, then three births.
    RuleProgram host = sparsify(1, xor_program());
    LocalRule rule = rule_of(host);
    SimulationDescriptor d = sparse_descriptor(1, xor_program());
    CHECK(d.q == 3);
    CHECK(d.u == 3);
    CHECK(d.base_col == 0);
    CHECK(d.base_row == 0);

    int lft = label_index(host, "Kind", "Lft");
    int rgt = label_index(host, "Kind", "Rgt");
    int ret = label_index(host, "Kind", "Ret");
    REQUIRE(lft == 0);
    REQUIRE(rgt == 1);
    REQUIRE(ret == 2);

    RowConfig first = encode(d, target_word({0, 1, 0}, 1, 0));
    REQUIRE(first.width() == 9);
    CHECK(first.cells[3] == host_cell(host, rgt, 0, 1));
    CHECK(first.cells[0].is_blank());

    TrajectoryBlock block = run_deterministic(rule, first, 6);
    // t=1: signals leave the base
    CHECK(block.at(1, 2) == host_cell(host, lft, 1, 1));
    CHECK(block.at(1, 4) == host_cell(host, rgt, 1, 1));
    CHECK(block.at(1, 3).is_blank());
    // t=2: the return forms over the base column
    CHECK(block.at(2, 1) == host_cell(host, lft, 2, 1));
    CHECK(block.at(2, 3) == host_cell(host, ret, 2, 1));
    CHECK(block.at(2, 5) == host_cell(host, rgt, 2, 1));
    // t=3: births at both neighbors plus the refreshed center
    for (int c : {0, 3, 6}) CHECK(block.at(3, c) == host_cell(host, rgt, 0, 1));
    CHECK(block.at(3, 1).is_blank());
    CHECK(block.at(3, 5).is_blank());

    // decode_one: base window yields the payload, signal windows are blank
    CellState got = decode_one(d, block, 0, 3);
    CHECK(got.w[0] == 1);
    CHECK(decode_one(d, block, 4, 1).is_blank());

    std::vector<Coord> anchors = find_macrocells(d, block);
    CHECK(anchors == std::vector<Coord>{{0, 3}, {3, 0}, {3, 3}, {3, 6}});
    CHECK(audit_overlap(d, anchors).empty());
    CHECK(audit_overlap_composed(d, anchors).empty());
}

TEST_CASE("decoded run equals the payload run") {
    struct Case {
        RuleProgram payload;
        int n;
    };
    std::vector<Case> cases;
    cases.push_back({xor_program(), 1});
    cases.push_back({xor_program(), 2});
    cases.push_back({xor_program(), 4});
    cases.push_back({clash_program(), 2});
    cases.push_back({early_return_program(), 1});

    for (const Case& c : cases) {
        CAPTURE(c.n);
        CAPTURE(c.payload.canonical_text);
        int m = 2 * c.n + 1;
        const int steps = 3;
        LocalRule target_rule = rule_of(c.payload);
        SimulationDescriptor d = sparse_descriptor(c.n, c.payload);
        LocalRule host_rule = rule_of(sparsify(c.n, c.payload));
        int bits = c.payload.state_bits();

        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(c.n));
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<std::uint64_t> values(8);
            for (auto& v : values) v = rng();
            // quiescent payloads plus a blank margin of `steps` cells keep the
            // finite window identical to the unbounded run
            RowConfig row = target_word(values, bits, steps);
            TrajectoryBlock want = run_deterministic(target_rule, row, steps);
            TrajectoryBlock host =
                run_deterministic(host_rule, encode(d, row), (steps + 1) * m - 1);
            auto grid = decode(d, host, 0, 0, row.width(), steps + 1);
            for (int t = 0; t <= steps; ++t)
                for (int i = 0; i < row.width(); ++i) {
                    CAPTURE(t);
                    CAPTURE(i);
                    REQUIRE(grid[static_cast<std::size_t>(t)]
                                [static_cast<std::size_t>(i)] == want.at(t, i));
                }
        }
    }
}

TEST_CASE("renaming pins payload parameters and avoids capture") {
    RuleProgram pay = clash_program();
    RuleProgram p = sparsify(1, pay);
    CHECK(p.validated);
    CHECK(param_num(p, "N") == 1);  // wrapper level, not the payload's 7
    REQUIRE(p.params.size() == 2);
    CHECK(p.params[1].name != "N");
    CHECK(param_num(p, p.params[1].name) == 7);
    // wrapper fields keep their names; payload homonyms are renamed
    CHECK(p.fields[0].name == "Live");
    CHECK(p.fields[2].name == "Count");
    REQUIRE(p.fields.size() == 5);
    CHECK(p.fields[3].name != "Live");
    CHECK(p.fields[4].name != "Count");
    int wrapper_named = 0;
    for (const ProcDecl& d : p.procs)
        if (d.name == "CopyRight") ++wrapper_named;
    CHECK(wrapper_named == 1);

    RuleProgram self = program_from_source("string param Self = This\n"
                                           "bits field V len 1\n"
                                           "V <- V\n");
    RuleProgram sp = sparsify(2, self);
    // This is pinned to the payload's own text before embedding
    Value v = param_value(sp, "Self");
    REQUIRE(v.kind == Value::Kind::Str);
    CHECK(v.str == self.canonical_text);

    RuleProgram wrapped = sparsify(1, early_return_program());
    bool step_proc = false;
    for (const ProcDecl& d : wrapped.procs) step_proc |= d.name == "PayloadStep";
    CHECK(step_proc);
}

TEST_CASE("sparsify_partial and compose_transform") {
    RuleProgram pay = xor_program();
    CHECK(sparsify_partial({1, 3}, 1, pay).canonical_text ==
          sparsify(1, pay).canonical_text);
    CHECK(sparsify_partial({1, 3}, 2, pay).canonical_text == pay.canonical_text);

    Transform s = sparsify;
    Transform wrap_counter = g1;
    Transform both = compose_transform(wrap_counter, s);
    CHECK(both(1, pay).canonical_text == g1(1, sparsify(1, pay)).canonical_text);
}

TEST_CASE("tilde trajectories stay weakly rigid") {
    RuleProgram pay = xor_program();
    LocalRule target_rule = rule_of(pay);
    SimulationDescriptor d = sparse_descriptor(1, pay);
    LocalRule host_rule = rule_of(sparsify(1, pay));

    // deterministic canonical block: both variants hold
    RowConfig row = target_word({1, 1, 0, 1, 1, 1, 0, 1}, 1, 2);
    TrajectoryBlock canonical =
        run_deterministic(host_rule, encode(d, row), 17);
    CHECK(audit_rigidity(d, target_rule, canonical, RigidityVariant::Rigid).empty());
    CHECK(audit_rigidity(d, target_rule, canonical, RigidityVariant::Weak).empty());

    // sampled blanking can only blank decoded cells, never change them
    std::mt19937_64 rng(77);
    std::size_t rigid_violations = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::vector<std::uint64_t> values(16);
        for (auto& v : values) v = rng();
        RowConfig start = encode(d, target_word(values, 1, 0));
        TrajectoryBlock block = sample_tilde(host_rule, start, 26, 0.3, seed);
        CHECK(audit_rigidity(d, target_rule, block, RigidityVariant::Weak).empty());
        rigid_violations +=
            audit_rigidity(d, target_rule, block, RigidityVariant::Rigid).size();
    }
    // births fed by partially blanked signal sets are hat images but not
    // deterministic images, so the plain variant must trip somewhere
    CHECK(rigid_violations > 0);
}

TEST_CASE("demanding oracle matches the exhaustive scan on every state") {
    RuleProgram pay = xor_program();
    DemandingOracle oracle = sparse_demanding_oracle(1, pay);
    LocalRule host_rule = rule_of(sparsify(1, pay));
    std::vector<CellState> universe;
    for (std::uint64_t v = 0; v < 64; ++v) {
        CellState s;
        s.w[0] = v;
        universe.push_back(s);
    }
    for (const CellState& s : universe)
        for (int delta = -1; delta <= 1; ++delta) {
            CAPTURE(s.w[0]);
            CAPTURE(delta);
            auto claim = oracle(s, delta);
            REQUIRE(claim.has_value());
            CHECK(*claim == demanding_exhaustive(host_rule, s, delta, universe));
        }
    CHECK_THROWS_AS(oracle(CellState{}, 2), Error);

    // payload alphabets beyond 8 bits: signals still classified, bases are not
    RuleProgram wide = program_from_source("bits field V len 111111111\n"
                                           "V <- V\n");
    REQUIRE(wide.state_bits() == 9);
    RuleProgram host = sparsify(1, wide);
    DemandingOracle partial = sparse_demanding_oracle(1, wide);
    CellState base;
    set_field(base, *host.layout.find("Live"), 1);
    set_field(base, *host.layout.find("Kind"), 1);
    set_field(base, *host.layout.find("V"), 5);
    CHECK_FALSE(partial(base, 0).has_value());
    CellState signal = base;
    set_field(signal, *host.layout.find("Count"), 1);
    auto classified = partial(signal, -1);
    REQUIRE(classified.has_value());
    CHECK(*classified);
}

TEST_CASE("connecting audit over a demanding payload") {
    // product rule: a 1 survives only when all three inputs are 1, so every
    // live target cell demands all three parents
    RuleProgram pay = program_from_source("bits field V len 1\n"
                                          "V <- V- * V * V+\n");
    LocalRule target_rule = rule_of(pay);
    SimulationDescriptor d = sparse_descriptor(1, pay);
    LocalRule host_rule = rule_of(sparsify(1, pay));
    DemandingOracle oracle = sparse_demanding_oracle(1, pay);

    RowConfig row = target_word({1, 1, 1, 1, 1, 1}, 1, 0);
    TrajectoryBlock block = run_deterministic(host_rule, encode(d, row), 11);
    CHECK(audit_connecting(d, host_rule, target_rule, block, oracle).empty());
    // exhaustive fallback (no oracle) agrees
    CHECK(audit_connecting(d, host_rule, target_rule, block).empty());

    // a planted base pair with no signal chain between them is flagged
    TrajectoryBlock edited = block;
    CellState fake;
    set_field(fake, *d.host_layout.find("Live"), 1);
    set_field(fake, *d.host_layout.find("Kind"), 1);
    set_field(fake, *d.host_layout.find("V"), 1);
    edited.rows[6][0] = fake;
    edited.rows[9][0] = fake;
    auto violations = audit_connecting(d, host_rule, target_rule, edited, oracle);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].t == 9);
    CHECK(violations[0].i == 0);
    CHECK(violations[0].kind == "connecting");

    RuleProgram wide = program_from_source("bits field V len 111111111\n"
                                           "V <- V\n");
    SimulationDescriptor dw = sparse_descriptor(1, wide);
    CHECK_THROWS_AS(
        audit_connecting(dw, host_rule, target_rule, block, nullptr), Error);
}

TEST_CASE("synthetic anchor overlaps are detected") {
    SimulationDescriptor d;
    d.q = 5;
    d.u = 25;
    auto collide = audit_overlap(d, {{0, 0}, {1, 1}});
    REQUIRE(collide.size() == 1);
    CHECK(collide[0].t == 1);
    CHECK(collide[0].i == 1);
    CHECK(audit_overlap(d, {{0, 0}, {24, 0}}).empty());   // far in time
    CHECK(audit_overlap(d, {{0, 0}, {0, 5}}).empty());    // far in space
    auto composed = audit_overlap_composed(d, {{0, 0}, {1, 1}});
    REQUIRE(composed.size() == 1);
    CHECK(audit_overlap_composed(d, {{0, 0}, {9, 0}}).empty());
}

TEST_CASE("every live cell has a nearby anchor") {
    RuleProgram pay = xor_program();
    SimulationDescriptor d = sparse_descriptor(1, pay);
    LocalRule host_rule = rule_of(sparsify(1, pay));
    RowConfig row = target_word({1, 0, 1, 1, 0, 1, 1, 1}, 1, 3);
    TrajectoryBlock block = run_deterministic(host_rule, encode(d, row), 20);
    ParentBounds bounds{12, 9, 9};  // 4q left, 3q right, 3u back
    CHECK(audit_parents(d, block, bounds).empty());

    // an isolated signal cell with no anchors anywhere violates
    TrajectoryBlock empty = block;
    for (auto& r : empty.rows)
        for (auto& c : r) c = CellState{};
    CellState stray;
    set_field(stray, *d.host_layout.find("Live"), 1);
    set_field(stray, *d.host_layout.find("Kind"), 0);
    set_field(stray, *d.host_layout.find("Count"), 1);
    empty.rows[15][20] = stray;
    auto violations = audit_parents(d, empty, bounds);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].t == 15);
    CHECK(violations[0].i == 20);

    std::string report = audit_report("parents", violations, 123);
    CHECK(report.find("VIOLATION parents at (20,15)") == 0);
    CHECK(audit_report("parents", {}, 7) == "OK parents checked=7\n");
}

TEST_CASE("base-column counter never lets the column blank out") {
    int n = 2, m = 5;
    RuleProgram p = g1(n, sparsify(n, identity_program()));
    CHECK(p.validated);
    LocalRule rule = rule_of(p);
    REQUIRE(p.layout.find("CCount") != nullptr);

    RowConfig first;
    first.cells.assign(5 * static_cast<std::size_t>(m), CellState{});
    for (int b = 0; b < 5; ++b) {
        CellState s;
        set_field(s, *p.layout.find("Live"), 1);
        set_field(s, *p.layout.find("Kind"), 1);
        set_field(s, *p.layout.find("V"), 1);
        // seed mid-cycle phase: a birth raises the counter to 1 on its own
        set_field(s, *p.layout.find("CCount"), 1);
        first.cells[static_cast<std::size_t>(b * m)] = s;
    }
    TrajectoryBlock block = run_deterministic(rule, first, 4 * m - 1);
    for (int t = 0; t < block.row_count(); ++t)
        for (int b = 0; b < 5; ++b) {
            CAPTURE(t);
            CAPTURE(b);
            CHECK_FALSE(block.at(t, b * m).is_blank());
        }
    // the counter walks its cycle; the return signal covers its zero step
    for (int t = 0; t < block.row_count(); ++t) {
        CHECK(field_of(p, block.at(t, 0), "CCount") == (1 + t) % m);
        if ((1 + t) % m == 0) {
            CHECK(field_of(p, block.at(t, 0), "Kind") == 2);
            CHECK(field_of(p, block.at(t, 0), "Count") == 2 * n);
        }
    }

    CHECK_THROWS_AS(g1(2, xor_program()), Error);             // not sparsified
    CHECK_THROWS_AS(g1(1, sparsify(2, xor_program())), Error);  // level mismatch
}

TEST_CASE("pattern layer replays the pinned point set after each visit") {
    int n = 2, m = 5;
    RuleProgram p = g2(n, sparsify(n, identity_program()));
    CHECK(p.validated);
    LocalRule rule = rule_of(p);
    const Field* elem = p.layout.find("CElem");
    REQUIRE(elem != nullptr);

    std::vector<std::string> labels = l_labels(n);
    auto ix = [&](const std::string& name) {
        for (std::size_t j = 0; j < labels.size(); ++j)
            if (labels[j] == name) return static_cast<std::int64_t>(j);
        REQUIRE(false);
        return std::int64_t{-1};
    };

    RowConfig first;
    first.cells.assign(5 * static_cast<std::size_t>(m), CellState{});
    for (int b = 0; b < 5; ++b) {
        CellState s;
        set_field(s, *p.layout.find("Live"), 1);
        set_field(s, *p.layout.find("Kind"), 1);
        set_field(s, *p.layout.find("V"), 1);
        first.cells[static_cast<std::size_t>(b * m)] = s;
    }
    TrajectoryBlock block = run_deterministic(rule, first, 14);

    // seeds appear at the first rebirth, one pattern row later the three
    // points of the second row, then extinction until the next visit
    for (int b = 0; b < 5; ++b) {
        int c = b * m;
        CHECK(get_field(block.at(5, c), *elem) == ix(l_label_of({0, 0})));
        CHECK(get_field(block.at(6, c), *elem) == ix(l_label_of({0, 1})));
        CHECK(get_field(block.at(6, c + 1), *elem) == ix(l_label_of({1, 1})));
        if (c > 0)
            CHECK(get_field(block.at(6, c - 1), *elem) == ix(l_label_of({-1, 1})));
        CHECK(get_field(block.at(6, c + 2), *elem) == 0);
        CHECK(get_field(block.at(7, c), *elem) == 0);
        CHECK(get_field(block.at(7, c + 1), *elem) == 0);
        CHECK(get_field(block.at(10, c), *elem) == ix(l_label_of({0, 0})));
    }
    for (int t = 0; t < 5; ++t)
        for (int i = 0; i < block.width; ++i)
            CHECK(get_field(block.at(t, i), *elem) == 0);

    CHECK_THROWS_AS(g2(2, identity_program()), Error);
}
