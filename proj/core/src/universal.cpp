#include "casim/universal.hpp"

#include <algorithm>
#include <utility>

namespace casim {

namespace {

Expr num(std::int64_t v) { return num_lit(v); }

Expr band(Expr a, Expr b) { return binop(ExprOp::And, std::move(a), std::move(b)); }
Expr bor(Expr a, Expr b) { return binop(ExprOp::Or, std::move(a), std::move(b)); }
Expr bnot(Expr a) { return unop(ExprOp::Not, std::move(a)); }
Expr eq(Expr a, Expr b) { return binop(ExprOp::Eq, std::move(a), std::move(b)); }
Expr ne(Expr a, Expr b) { return binop(ExprOp::Ne, std::move(a), std::move(b)); }
Expr lt(Expr a, Expr b) { return binop(ExprOp::Lt, std::move(a), std::move(b)); }
Expr ge(Expr a, Expr b) { return binop(ExprOp::Ge, std::move(a), std::move(b)); }
Expr add(Expr a, Expr b) { return binop(ExprOp::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return binop(ExprOp::Sub, std::move(a), std::move(b)); }
Expr emod(Expr a, Expr b) { return binop(ExprOp::Mod, std::move(a), std::move(b)); }

ProcDecl make_die() {
    ProcDecl d;
    d.name = "Die";
    d.body.push_back(assign({"Live"}, bool_lit(false)));
    d.body.push_back(assign({"Addr", "Age"}, num(0)));
    d.body.push_back(assign({"Simu", "Prog", "LMail", "RMail", "Out"}, num(0)));
    d.body.push_back(assign({"Work"}, num(0)));
    d.body.push_back(assign({"LBor", "RBor", "Doom"}, bool_lit(false)));
    return d;
}

// Age = CSize or Age = CSize/2; doubling the age avoids a division.
Expr age_exception() {
    return bor(eq(ref("Age"), ref("CSize")),
               eq(add(ref("Age"), ref("Age")), ref("CSize")));
}

ProcDecl make_valid() {
    std::vector<IfArm> arms;
    {
        // A border flag requires a blank cell on that side, except when two
        // creation fronts meet at age CSize/2 or two fresh colonies touch at
        // age CSize.
        IfArm a;
        a.cond = band(eq(ref("Live", -1), ref("LBor")),
                      bnot(band(ref("LBor"),
                                band(ref("RBor", -1), age_exception()))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        IfArm a;
        a.cond = band(eq(ref("Live", 1), ref("RBor")),
                      bnot(band(ref("RBor"),
                                band(ref("LBor", 1), age_exception()))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        // A neighbor's flag pointing here is fatal unless this cell holds the
        // matching flag at one of the meeting ages above.
        IfArm a;
        a.cond = bor(band(ref("LBor", 1), bnot(band(ref("RBor"), age_exception()))),
                     band(ref("RBor", -1), bnot(band(ref("LBor"), age_exception()))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        IfArm a;
        a.cond = band(ref("Live", -1),
                      bor(ne(emod(add(ref("Addr", -1), num(1)), ref("CSize")),
                             ref("Addr")),
                          ne(ref("Age", -1), ref("Age"))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        IfArm a;
        a.cond = band(ref("Live", 1),
                      bor(ne(ref("Addr"),
                             emod(sub(ref("Addr", 1), num(1)), ref("CSize"))),
                          ne(ref("Age"), ref("Age", 1))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        // Blocking flags live only on colony border cells.
        IfArm a;
        a.cond = band(ref("LBor"),
                      band(ge(ref("Age"), ref("CSize")), ne(ref("Addr"), num(0))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        IfArm a;
        a.cond = band(ref("RBor"), band(ge(ref("Age"), ref("CSize")),
                                        ne(ref("Addr"), sub(ref("CSize"), num(1)))));
        a.body.push_back(return_stmt(bool_lit(false)));
        arms.push_back(std::move(a));
    }
    {
        IfArm a;
        a.body.push_back(return_stmt(bool_lit(true)));
        arms.push_back(std::move(a));
    }
    ProcDecl v;
    v.name = "Valid";
    v.body.push_back(if_stmt(std::move(arms)));
    return v;
}

ProcDecl make_birth() {
    ProcDecl b;
    b.name = "Birth";
    b.body.push_back(call_stmt(call("Die", {})));
    std::vector<IfArm> arms;
    {
        // A left-creative right neighbor extends its colony leftward.
        IfArm a;
        a.cond = band(ref("LBor", 1),
                      eq(ref("Age", 1),
                         emod(sub(ref("CSize"), ref("Addr", 1)), ref("CSize"))));
        a.body.push_back(assign({"Live"}, bool_lit(true)));
        a.body.push_back(
            assign({"Addr"}, emod(sub(ref("Addr", 1), num(1)), ref("CSize"))));
        a.body.push_back(assign({"Age"}, add(ref("Age", 1), num(1))));
        a.body.push_back(assign({"RMail"}, ref("RMail", 1)));
        a.body.push_back(assign({"LBor"}, bool_lit(true)));
        arms.push_back(std::move(a));
    }
    {
        IfArm a;
        a.cond = band(ref("RBor", -1),
                      eq(ref("Age", -1),
                         emod(add(ref("Addr", -1), num(1)), ref("CSize"))));
        a.body.push_back(assign({"Live"}, bool_lit(true)));
        a.body.push_back(
            assign({"Addr"}, emod(add(ref("Addr", -1), num(1)), ref("CSize"))));
        a.body.push_back(assign({"Age"}, add(ref("Age", -1), num(1))));
        a.body.push_back(assign({"LMail"}, ref("LMail", -1)));
        a.body.push_back(assign({"RBor"}, bool_lit(true)));
        arms.push_back(std::move(a));
    }
    b.body.push_back(if_stmt(std::move(arms)));
    return b;
}

std::vector<Expr> agent_common_args() {
    std::vector<Expr> a;
    a.push_back(ref("SimProg"));
    a.push_back(ref("CSize"));
    a.push_back(ref("WPeriod"));
    a.push_back(ref("Addr"));
    a.push_back(ref("Age"));
    a.push_back(ref("Work", -1));
    a.push_back(ref("Work"));
    a.push_back(ref("Work", 1));
    return a;
}

std::vector<Stmt> compute_stmts() {
    std::vector<Expr> out_args = agent_common_args();
    out_args.push_back(ref("Out"));
    std::vector<Expr> doom_args = agent_common_args();
    doom_args.push_back(ref("Doom"));
    std::vector<Expr> work_args = agent_common_args();
    for (int nbr : {-1, 0, 1}) {
        work_args.push_back(ref("LMail", nbr));
        work_args.push_back(ref("Simu", nbr));
        work_args.push_back(ref("RMail", nbr));
    }
    // Out and Doom must read the pre-update Work, so AgentWork comes last.
    std::vector<Stmt> body;
    body.push_back(assign({"Out"}, call("AgentOut", std::move(out_args))));
    body.push_back(assign({"Doom"}, call("AgentDoom", std::move(doom_args))));
    body.push_back(assign({"Work"}, call("AgentWork", std::move(work_args))));
    return body;
}

std::vector<Stmt> commit_stmts() {
    std::vector<Stmt> body;
    {
        std::vector<IfArm> protect;
        IfArm p1;
        p1.cond = band(eq(ref("Addr"), num(0)), ref("Doom", -1));
        p1.body.push_back(assign({"LBor"}, bool_lit(true)));
        protect.push_back(std::move(p1));
        IfArm p2;
        p2.cond = band(eq(ref("Addr"), sub(ref("CSize"), num(1))), ref("Doom", 1));
        p2.body.push_back(assign({"RBor"}, bool_lit(true)));
        protect.push_back(std::move(p2));
        body.push_back(if_stmt(std::move(protect)));
    }
    {
        std::vector<IfArm> arms;
        IfArm doomed;
        doomed.cond = ref("Doom");
        doomed.body.push_back(call_stmt(call("Die", {})));
        arms.push_back(std::move(doomed));
        IfArm survive;
        survive.body.push_back(assign({"Simu", "RMail", "LMail"}, ref("Out")));
        survive.body.push_back(assign({"Age"}, num(0)));
        arms.push_back(std::move(survive));
        body.push_back(if_stmt(std::move(arms)));
    }
    return body;
}

std::vector<Stmt> working_stmts() {
    std::vector<Stmt> body;
    {
        IfArm retrieve;
        retrieve.cond = lt(ref("Age"), ref("CSize"));
        retrieve.body.push_back(assign({"LBor", "RBor"}, bool_lit(false)));
        retrieve.body.push_back(assign({"LMail"}, ref("LMail", -1)));
        retrieve.body.push_back(assign({"RMail"}, ref("RMail", 1)));
        body.push_back(if_stmt({std::move(retrieve)}));
    }
    {
        IfArm freeze;
        freeze.cond = eq(ref("Age"), ref("CSize"));
        freeze.body.push_back(assign({"Doom"}, bool_lit(false)));
        std::vector<IfArm> unblock;
        IfArm u1;
        u1.cond = band(ref("LBor"), ref("Live", -1));
        u1.body.push_back(assign({"LBor"}, bool_lit(false)));
        unblock.push_back(std::move(u1));
        IfArm u2;
        u2.cond = band(ref("RBor"), ref("Live", 1));
        u2.body.push_back(assign({"RBor"}, bool_lit(false)));
        unblock.push_back(std::move(u2));
        freeze.body.push_back(if_stmt(std::move(unblock)));
        freeze.body.push_back(assign({"Work"}, num(0)));
        freeze.body.push_back(
            assign({"Prog"}, index_expr(ref("SimProg"), ref("Addr"))));
        body.push_back(if_stmt({std::move(freeze)}));
    }
    {
        IfArm compute;
        compute.cond = lt(ref("CSize"), ref("Age"));
        compute.body = compute_stmts();
        body.push_back(if_stmt({std::move(compute)}));
    }
    body.push_back(assign({"Age"}, add(ref("Age"), num(1))));
    return body;
}

std::vector<Stmt> main_body() {
    // Self-reads see earlier writes from the same pass, so the age update is
    // placed inside each branch instead of after the whole dispatch; a dying
    // cell must not see its own reset age incremented.
    IfArm commit;
    commit.cond = eq(ref("Age"), sub(ref("WPeriod"), num(1)));
    commit.body = commit_stmts();
    IfArm working;
    working.body = working_stmts();

    IfArm valid;
    valid.cond = call("Valid", {});
    valid.body.push_back(if_stmt({std::move(commit), std::move(working)}));
    IfArm invalid;
    invalid.body.push_back(call_stmt(call("Die", {})));

    IfArm live;
    live.cond = ref("Live");
    live.body.push_back(if_stmt({std::move(valid), std::move(invalid)}));
    IfArm dead;
    dead.body.push_back(call_stmt(call("Birth", {})));

    std::vector<Stmt> body;
    body.push_back(if_stmt({std::move(live), std::move(dead)}));
    return body;
}

void check_params(const UniversalParams& params) {
    if (!params.target || !params.target->validated)
        raise(ErrorKind::Precondition, "universal simulator needs a validated target");
    int k = params.target->state_bits();
    if (k < 1 || k > 8)
        raise(ErrorKind::Precondition,
              "universal simulator supports target widths 1..8, got " +
                  std::to_string(k));
    if (params.csize < 4 || params.csize % 4 != 0)
        raise(ErrorKind::Precondition,
              "colony size must be a positive multiple of 4, got " +
                  std::to_string(params.csize));
    if (params.csize < k + 1)
        raise(ErrorKind::Precondition,
              "colony size " + std::to_string(params.csize) +
                  " cannot gather " + std::to_string(k) + " state bits");
    if (params.wperiod < 4 * params.csize)
        raise(ErrorKind::Precondition,
              "work period must be at least four colony sizes, got " +
                  std::to_string(params.wperiod));
}

struct Slots {
    Field live, addr, age, simu, work, prog, lmail, rmail, out, lbor, rbor, doom;
};

Slots slots_of(const FieldLayout& layout) {
    auto take = [&](const char* name) {
        const Field* f = layout.find(name);
        if (!f) raise(ErrorKind::Internal, std::string("missing field ") + name);
        return *f;
    };
    Slots s;
    s.live = take("Live");
    s.addr = take("Addr");
    s.age = take("Age");
    s.simu = take("Simu");
    s.work = take("Work");
    s.prog = take("Prog");
    s.lmail = take("LMail");
    s.rmail = take("RMail");
    s.out = take("Out");
    s.lbor = take("LBor");
    s.rbor = take("RBor");
    s.doom = take("Doom");
    return s;
}

} // namespace

UniversalParams make_universal(std::shared_ptr<const RuleProgram> target, int csize,
                               int wperiod) {
    UniversalParams params;
    params.csize = csize;
    params.wperiod = wperiod;
    params.target = std::move(target);
    check_params(params);
    return params;
}

std::pair<int, int> min_dimensions(const RuleProgram& target, const CostProfile& profile) {
    if (!target.validated)
        raise(ErrorKind::Precondition, "min_dimensions needs a validated target");
    std::int64_t text_bits = static_cast<std::int64_t>(encode_bits(target).size());
    std::int64_t need = std::max<std::int64_t>(
        {profile.space_bits, text_bits, target.state_bits(), 4});
    int q = static_cast<int>((need + 3) / 4 * 4);
    int u = 6 * q + static_cast<int>(profile.time_steps);
    return {q, u};
}

RuleProgram universal_program(const UniversalParams& params) {
    check_params(params);
    RuleProgram p;
    {
        ParamDecl d;
        d.kind = ParamKind::Num;
        d.name = "CSize";
        d.value = num(params.csize);
        p.params.push_back(std::move(d));
    }
    {
        ParamDecl d;
        d.kind = ParamKind::Num;
        d.name = "WPeriod";
        d.value = num(params.wperiod);
        p.params.push_back(std::move(d));
    }
    {
        ParamDecl d;
        d.kind = ParamKind::Str;
        d.name = "SimProg";
        d.value = str_lit(encode_bits(*params.target));
        p.params.push_back(std::move(d));
    }
    auto bool_field = [&](const char* name) {
        FieldDecl f;
        f.kind = FieldKind::Boolean;
        f.name = name;
        p.fields.push_back(std::move(f));
    };
    auto bits_field = [&](const char* name, int length) {
        FieldDecl f;
        f.kind = FieldKind::Bitstring;
        f.name = name;
        f.length = length;
        p.fields.push_back(std::move(f));
    };
    bool_field("Live");
    {
        FieldDecl f;
        f.kind = FieldKind::Number;
        f.name = "Addr";
        f.max_expr = sub(ref("CSize"), num(1));
        p.fields.push_back(std::move(f));
    }
    {
        FieldDecl f;
        f.kind = FieldKind::Number;
        f.name = "Age";
        f.max_expr = sub(ref("WPeriod"), num(1));
        p.fields.push_back(std::move(f));
    }
    bits_field("Simu", 1);
    {
        // Presence bit, three gathered bits per target bit, doom bit on top:
        // 26 bits, held as a number since bit lengths are written in unary.
        FieldDecl f;
        f.kind = FieldKind::Number;
        f.name = "Work";
        f.max_expr = num((std::int64_t{1} << 26) - 1);
        p.fields.push_back(std::move(f));
    }
    bits_field("Prog", 1);
    bits_field("LMail", 1);
    bits_field("RMail", 1);
    bits_field("Out", 1);
    bool_field("LBor");
    bool_field("RBor");
    bool_field("Doom");

    p.procs.push_back(make_die());
    p.procs.push_back(make_valid());
    p.procs.push_back(make_birth());
    p.body = main_body();
    return finalize(std::move(p));
}

SimulationDescriptor universal_descriptor(const UniversalParams& params) {
    RuleProgram host = universal_program(params);
    const int q = params.csize;
    const int u = params.wperiod;
    const int k = params.target->state_bits();
    const int base_row = u - 2 * q;
    Slots s = slots_of(host.layout);

    SimulationDescriptor d;
    d.q = q;
    d.u = u;
    d.base_col = 0;
    d.base_row = base_row;
    d.host_layout = host.layout;
    d.target_layout = params.target->layout;
    d.name = "universal(" + std::to_string(q) + "x" + std::to_string(u) + ")";

    d.macro_predicate = [q, base_row, s](const PatternReader& read) {
        for (int col = 0; col < q; ++col) {
            CellState c = read(col, base_row);
            if (get_field(c, s.live) == 0) return false;
            if (get_field(c, s.age) != base_row) return false;
            if (get_field(c, s.addr) != col) return false;
        }
        return true;
    };
    d.state_fn = [k, base_row, s](const PatternReader& read) {
        CellState out;
        for (int j = 0; j < k; ++j) {
            if (get_field(read(j, base_row), s.simu) != 0) out.set_bit(j, true);
        }
        return out;
    };
    d.base_hint = [base_row, s](const CellState& c) {
        return get_field(c, s.live) != 0 && get_field(c, s.age) == base_row &&
               get_field(c, s.addr) == 0;
    };
    d.encoder = [q, k, s](const RowConfig& target_row) {
        RowConfig host_row;
        host_row.boundary = target_row.boundary;
        host_row.cells.resize(static_cast<std::size_t>(target_row.width()) *
                              static_cast<std::size_t>(q));
        for (int i = 0; i < target_row.width(); ++i) {
            const CellState& t = target_row.cells[static_cast<std::size_t>(i)];
            for (int j = 0; j < q; ++j) {
                CellState c;
                set_field(c, s.live, 1);
                set_field(c, s.addr, j);
                set_field(c, s.age, 0);
                std::int64_t bit = j < k && t.get_bit(j) ? 1 : 0;
                set_field(c, s.simu, bit);
                set_field(c, s.lmail, bit);
                set_field(c, s.rmail, bit);
                host_row.cells[static_cast<std::size_t>(i) *
                                   static_cast<std::size_t>(q) +
                               static_cast<std::size_t>(j)] = c;
            }
        }
        return host_row;
    };
    return d;
}

int classify_macrocell(const UniversalParams& params, const TrajectoryBlock& block,
                       Coord anchor) {
    const int q = params.csize;
    const int u = params.wperiod;
    if (anchor.t < 0 || anchor.i < 0 || anchor.t + u > block.row_count() ||
        anchor.i + q > block.width)
        raise(ErrorKind::Precondition, "macro-cell window leaves the block");
    SimulationDescriptor d = universal_descriptor(params);
    Slots s = slots_of(d.host_layout);
    auto read = [&](int col, int row) {
        return block.at(anchor.t + row, anchor.i + col);
    };
    if (!d.macro_predicate(read))
        raise(ErrorKind::Precondition, "window is not a macro-cell");

    // A cell born at window row g carries its border flag exactly there:
    // the next pass clears it. Interior rebuild fronts meet at row Q/2; a
    // one-sided rebuild finishes at row Q on the far border column.
    auto left_cocreative = [&](int col, int row) {
        CellState c = read(col, row);
        return get_field(c, s.live) != 0 && get_field(c, s.lbor) != 0 &&
               get_field(c, s.addr) == col && get_field(c, s.age) == row;
    };
    auto right_cocreative = [&](int col, int row) {
        CellState c = read(col, row);
        return get_field(c, s.live) != 0 && get_field(c, s.rbor) != 0 &&
               get_field(c, s.addr) == col && get_field(c, s.age) == row;
    };
    if (right_cocreative(q / 2 - 1, q / 2) && left_cocreative(q / 2, q / 2)) return 4;
    if (right_cocreative(q - 1, q)) return 2;
    if (left_cocreative(0, q)) return 3;
    return 1;
}

DemandingOracle universal_demanding_oracle(const UniversalParams& params) {
    RuleProgram host = universal_program(params);
    Slots s = slots_of(host.layout);
    const std::int64_t q = params.csize;
    const std::int64_t u = params.wperiod;
    return [q, u, s](const CellState& c, int delta) -> std::optional<bool> {
        if (c.is_blank()) return false;
        if (get_field(c, s.live) == 0) return true;  // dead states are never produced
        std::int64_t age = get_field(c, s.age);
        std::int64_t addr = get_field(c, s.addr);
        if (age >= u || addr >= q) return std::nullopt;  // outside the rule's ranges
        bool lbor = get_field(c, s.lbor) != 0;
        bool rbor = get_field(c, s.rbor) != 0;
        if (lbor && rbor) return true;  // at most one flag is ever set
        std::int64_t lmail = get_field(c, s.lmail);
        std::int64_t rmail = get_field(c, s.rmail);
        std::int64_t simu = get_field(c, s.simu);
        std::int64_t out = get_field(c, s.out);
        bool doom = get_field(c, s.doom) != 0;
        if (age == 0) {
            // Only the commit writes age 0: Simu and both mails equal Out and
            // the doom flag was clear.
            if (simu != out || lmail != out || rmail != out || doom) return true;
            if (lbor) return addr == 0 ? delta >= 0 : true;
            if (rbor) return addr == q - 1 ? delta <= 0 : true;
            return true;  // interior commits require live neighbors on both sides
        }
        if (age <= q) {
            // Flags at these ages come from births only, which zero every
            // field except the address, age, flag and inherited mail bit.
            if (lbor) {
                bool born = age == q - addr && simu == 0 && lmail == 0 && out == 0 &&
                            !doom && get_field(c, s.work) == 0 &&
                            get_field(c, s.prog) == 0;
                return born ? delta == 1 : true;
            }
            if (rbor) {
                bool born = age == addr + 1 && simu == 0 && rmail == 0 && out == 0 &&
                            !doom && get_field(c, s.work) == 0 &&
                            get_field(c, s.prog) == 0;
                return born ? delta == -1 : true;
            }
            // Mail shifts in from the neighbors; a set bit pins that side.
            if (delta == 0) return true;
            return delta == -1 ? lmail != 0 : rmail != 0;
        }
        // Ages past the retrieval phase: flags mark blocking border cells
        // whose outer side may be blank; everything else needs live flanks.
        if (lbor) return addr == 0 ? delta >= 0 : true;
        if (rbor) return addr == q - 1 ? delta <= 0 : true;
        return true;
    };
}

} // namespace casim
