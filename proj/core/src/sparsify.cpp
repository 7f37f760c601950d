#include "casim/transforms.hpp"

#include "casim/interp.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace casim {

namespace {

RuleProgram validated_copy(const RuleProgram& p, const char* who) {
    RuleProgram copy = p;
    if (!copy.validated) {
        auto errors = validate(copy);
        if (!errors.empty()) {
            std::string msg = std::string(who) + ": input program is invalid:";
            for (const auto& e : errors) {
                msg += "\n  ";
                msg += e;
            }
            raise(ErrorKind::Validate, msg);
        }
    }
    return copy;
}

void pin_this_expr(Expr& e, const std::string& text) {
    if (e.op == ExprOp::ThisRef) {
        e = str_lit(text);
        return;
    }
    for (Expr& a : e.args) pin_this_expr(a, text);
}

void pin_this_stmts(std::vector<Stmt>& body, const std::string& text) {
    for (Stmt& s : body) {
        if (s.value) pin_this_expr(*s.value, text);
        for (IfArm& arm : s.arms) {
            if (arm.cond) pin_this_expr(*arm.cond, text);
            pin_this_stmts(arm.body, text);
        }
    }
}

// The embedded copy must behave exactly like the standalone payload, so This
// is frozen to the payload's own source text before any renaming.
RuleProgram embedded_payload(RuleProgram copy, bool reserve_step_name) {
    std::string text =
        copy.canonical_text.empty() ? print_canonical(copy) : copy.canonical_text;
    for (ParamDecl& d : copy.params) pin_this_expr(d.value, text);
    for (FieldDecl& d : copy.fields) pin_this_expr(d.max_expr, text);
    for (ProcDecl& d : copy.procs) pin_this_stmts(d.body, text);
    pin_this_stmts(copy.body, text);

    std::vector<std::string> taken = {"N",    "Live",        "Kind",      "Count",
                                      "Lft",  "Rgt",         "Ret",       "Die",
                                      "Blank", "InputTriple", "CopyRight", "CopyLeft",
                                      "k"};
    if (reserve_step_name) taken.push_back("PayloadStep");
    rename_clashes(copy, taken);
    return copy;
}

Expr two_n() { return binop(ExprOp::Mul, num_lit(2), ref("N")); }

Expr and_all(std::vector<Expr> terms) {
    Expr acc = std::move(terms.front());
    for (std::size_t i = 1; i < terms.size(); ++i)
        acc = binop(ExprOp::And, std::move(acc), std::move(terms[i]));
    return acc;
}

Expr not_live(int nbr) { return unop(ExprOp::Not, ref("Live", nbr)); }

Expr kind_is(int nbr, const char* label) {
    return binop(ExprOp::Eq, ref("Kind", nbr), ref(label));
}

Expr count_eq(int nbr, Expr rhs) {
    return binop(ExprOp::Eq, ref("Count", nbr), std::move(rhs));
}

ProcDecl make_die(const RuleProgram& pay) {
    ProcDecl d;
    d.name = "Die";
    d.body.push_back(assign({"Live"}, bool_lit(false)));
    d.body.push_back(assign({"Kind"}, ref("Lft")));
    d.body.push_back(assign({"Count"}, num_lit(0)));
    for (const FieldDecl& f : pay.fields) {
        switch (f.kind) {
        case FieldKind::Boolean:
            d.body.push_back(assign({f.name}, bool_lit(false)));
            break;
        case FieldKind::Enumeration:
            d.body.push_back(assign({f.name}, ref(f.labels.front())));
            break;
        default:
            d.body.push_back(assign({f.name}, num_lit(0)));
            break;
        }
    }
    return d;
}

// True iff the payload-state of this cell is the payload's blank state.
ProcDecl make_blank(const RuleProgram& pay) {
    ProcDecl d;
    d.name = "Blank";
    std::optional<Expr> acc;
    for (const FieldDecl& f : pay.fields) {
        Expr term = f.kind == FieldKind::Boolean
                        ? unop(ExprOp::Not, ref(f.name))
                        : f.kind == FieldKind::Enumeration
                              ? binop(ExprOp::Eq, ref(f.name), ref(f.labels.front()))
                              : binop(ExprOp::Eq, ref(f.name), num_lit(0));
        acc = acc ? binop(ExprOp::And, std::move(*acc), std::move(term))
                  : std::move(term);
    }
    d.body.push_back(return_stmt(acc ? std::move(*acc) : bool_lit(true)));
    return d;
}

ProcDecl make_input_triple() {
    auto clause = [](int nbr, const char* label) {
        return binop(ExprOp::Or, not_live(nbr),
                     binop(ExprOp::And, count_eq(nbr, two_n()), kind_is(nbr, label)));
    };
    Expr any_live = binop(ExprOp::Or,
                          binop(ExprOp::Or, ref("Live", -1), ref("Live")),
                          ref("Live", 1));
    ProcDecl d;
    d.name = "InputTriple";
    d.body.push_back(return_stmt(
        and_all({clause(-1, "Rgt"), clause(0, "Ret"), clause(1, "Lft"),
                 std::move(any_live)})));
    return d;
}

// dir = +1 copies the right neighbor, dir = -1 the left one.
ProcDecl make_copy(const char* name, int dir, const RuleProgram& pay) {
    ProcDecl d;
    d.name = name;
    d.formals = {"k"};
    d.body.push_back(assign({"Live"}, bool_lit(true)));
    d.body.push_back(assign({"Kind"}, ref("k")));
    d.body.push_back(
        assign({"Count"}, binop(ExprOp::Add, ref("Count", dir), num_lit(1))));
    for (const FieldDecl& f : pay.fields)
        d.body.push_back(assign({f.name}, ref(f.name, dir)));
    return d;
}

Stmt copy_call(const char* name, const char* kind_label) {
    return call_stmt(call(name, {ref(kind_label)}));
}

std::vector<IfArm> sparse_arms(const RuleProgram& pay, bool wrap) {
    std::vector<IfArm> arms;

    IfArm compute;
    compute.cond = call("InputTriple", {});
    if (wrap)
        compute.body.push_back(call_stmt(call("PayloadStep", {})));
    else
        compute.body = pay.body;
    IfArm died;
    died.cond = call("Blank", {});
    died.body.push_back(call_stmt(call("Die", {})));
    IfArm born;
    born.body.push_back(assign({"Live"}, bool_lit(true)));
    born.body.push_back(assign({"Count"}, num_lit(0)));
    born.body.push_back(assign({"Kind"}, ref("Rgt")));
    compute.body.push_back(if_stmt({std::move(died), std::move(born)}));
    arms.push_back(std::move(compute));

    auto arm = [&arms](Expr cond, Stmt action) {
        IfArm a;
        a.cond = std::move(cond);
        a.body.push_back(std::move(action));
        arms.push_back(std::move(a));
    };

    arm(and_all({not_live(0), not_live(1), kind_is(-1, "Rgt"),
                 binop(ExprOp::Lt, ref("Count", -1), two_n())}),
        copy_call("CopyLeft", "Rgt"));
    arm(and_all({kind_is(0, "Lft"), not_live(1), kind_is(-1, "Rgt"),
                 count_eq(-1, ref("N")), count_eq(0, ref("N"))}),
        copy_call("CopyLeft", "Rgt"));
    arm(and_all({not_live(0), not_live(-1), kind_is(1, "Rgt"),
                 count_eq(1, num_lit(0))}),
        copy_call("CopyRight", "Lft"));
    arm(and_all({not_live(0), not_live(-1), kind_is(1, "Lft"),
                 binop(ExprOp::Lt, num_lit(0), ref("Count", 1)),
                 binop(ExprOp::Lt, ref("Count", 1), two_n())}),
        copy_call("CopyRight", "Lft"));
    arm(and_all({kind_is(0, "Rgt"), not_live(-1), kind_is(1, "Lft"),
                 count_eq(1, ref("N")), count_eq(0, ref("N"))}),
        copy_call("CopyRight", "Lft"));
    arm(and_all({kind_is(0, "Ret"), not_live(-1), kind_is(1, "Lft"),
                 binop(ExprOp::Lt, ref("N"), ref("Count", 1)),
                 binop(ExprOp::Eq, ref("Count", 1), ref("Count")),
                 binop(ExprOp::Lt, ref("Count"), two_n())}),
        copy_call("CopyRight", "Lft"));
    // The left disjunct alone misses the n = 1 lattice, where the returning
    // cell is born next to a left mover at Count = N; -N+1 = N-1 mod 2N+1
    // only when N = 1, so the extra disjunct never fires at other levels.
    arm(and_all({not_live(0),
                 binop(ExprOp::Or, not_live(-1),
                       binop(ExprOp::And, kind_is(-1, "Lft"),
                             count_eq(-1, ref("N")))),
                 kind_is(1, "Rgt"), count_eq(1, ref("N"))}),
        copy_call("CopyRight", "Ret"));
    arm(and_all({not_live(0), not_live(-1), kind_is(1, "Ret"),
                 binop(ExprOp::Lt, ref("N"), ref("Count", 1)),
                 binop(ExprOp::Lt, ref("Count", 1), two_n())}),
        copy_call("CopyRight", "Ret"));

    IfArm fall;
    fall.body.push_back(call_stmt(call("Die", {})));
    arms.push_back(std::move(fall));
    return arms;
}

} // namespace

RuleProgram sparsify(int n, const RuleProgram& payload) {
    if (n < 1) raise(ErrorKind::Precondition, "sparsification level must be at least 1");
    RuleProgram pay = validated_copy(payload, "sparsify");
    bool wrap = contains_return(pay.body);
    pay = embedded_payload(std::move(pay), wrap);

    RuleProgram out;
    ParamDecl level;
    level.kind = ParamKind::Num;
    level.name = "N";
    level.value = num_lit(n);
    out.params.push_back(std::move(level));
    for (const ParamDecl& d : pay.params) out.params.push_back(d);

    FieldDecl live;
    live.kind = FieldKind::Boolean;
    live.name = "Live";
    FieldDecl kind;
    kind.kind = FieldKind::Enumeration;
    kind.name = "Kind";
    kind.labels = {"Lft", "Rgt", "Ret"};
    FieldDecl count;
    count.kind = FieldKind::Number;
    count.name = "Count";
    count.max_expr = two_n();
    out.fields.push_back(std::move(live));
    out.fields.push_back(std::move(kind));
    out.fields.push_back(std::move(count));
    for (const FieldDecl& d : pay.fields) out.fields.push_back(d);

    out.procs.push_back(make_die(pay));
    out.procs.push_back(make_blank(pay));
    out.procs.push_back(make_input_triple());
    out.procs.push_back(make_copy("CopyRight", 1, pay));
    out.procs.push_back(make_copy("CopyLeft", -1, pay));
    for (const ProcDecl& d : pay.procs) out.procs.push_back(d);
    if (wrap) {
        ProcDecl step;
        step.name = "PayloadStep";
        step.body = pay.body;
        out.procs.push_back(std::move(step));
    }

    out.body.push_back(if_stmt(sparse_arms(pay, wrap)));
    return finalize(std::move(out));
}

RuleProgram sparsify_partial(const std::vector<int>& good, int n,
                             const RuleProgram& payload) {
    if (std::find(good.begin(), good.end(), n) != good.end())
        return sparsify(n, payload);
    return validated_copy(payload, "sparsify_partial");
}

Transform compose_transform(Transform outer, Transform inner) {
    return [outer = std::move(outer), inner = std::move(inner)](
               int n, const RuleProgram& p) { return outer(n, inner(n, p)); };
}

SimulationDescriptor sparse_descriptor(int n, const RuleProgram& payload) {
    RuleProgram pay = validated_copy(payload, "sparse_descriptor");
    RuleProgram host = sparsify(n, pay);
    int m = 2 * n + 1;

    SimulationDescriptor d;
    d.q = m;
    d.u = m;
    d.base_col = 0;
    d.base_row = 0;
    d.host_layout = host.layout;
    d.target_layout = pay.layout;
    d.name = "sparse(" + std::to_string(n) + ")";

    FieldLayout hl = host.layout;
    FieldLayout tl = pay.layout;
    auto fresh_base = [hl](const CellState& s) {
        return get_field(s, hl.at(0)) == 1 && get_field(s, hl.at(1)) == 1 &&
               get_field(s, hl.at(2)) == 0;
    };
    d.base_hint = fresh_base;
    d.macro_predicate = [fresh_base](const PatternReader& read) {
        return fresh_base(read(0, 0));
    };
    d.state_fn = [hl, tl](const PatternReader& read) {
        CellState base = read(0, 0);
        CellState out;
        for (std::size_t j = 0; j < tl.size(); ++j)
            set_field(out, tl.at(j), get_field(base, hl.at(j + 3)));
        return out;
    };
    d.encoder = [hl, tl, m](const RowConfig& target_row) {
        RowConfig host_row;
        host_row.boundary = target_row.boundary;
        host_row.cells.assign(static_cast<std::size_t>(target_row.width()) *
                                  static_cast<std::size_t>(m),
                              CellState{});
        for (int i = 0; i < target_row.width(); ++i) {
            const CellState& t = target_row.cells[static_cast<std::size_t>(i)];
            if (t.is_blank()) continue;
            CellState base;
            set_field(base, hl.at(0), 1);
            set_field(base, hl.at(1), 1);
            set_field(base, hl.at(2), 0);
            for (std::size_t j = 0; j < tl.size(); ++j)
                set_field(base, hl.at(j + 3), get_field(t, tl.at(j)));
            host_row.cells[static_cast<std::size_t>(i) * static_cast<std::size_t>(m)] =
                base;
        }
        return host_row;
    };
    return d;
}

DemandingOracle sparse_demanding_oracle(int n, const RuleProgram& payload) {
    RuleProgram pay = validated_copy(payload, "sparse_demanding_oracle");
    RuleProgram host = sparsify(n, pay);
    FieldLayout hl = host.layout;
    FieldLayout tl = pay.layout;
    std::int64_t level = n;

    // Base-cell answers reduce to the payload rule; feasible only for small
    // payload alphabets.
    struct BaseScan {
        std::mutex mutex;
        std::map<std::pair<std::uint64_t, int>, bool> memo;
        std::optional<LocalRule> rule;
        std::vector<CellState> universe;
    };
    auto scan = std::make_shared<BaseScan>();
    if (tl.width() <= 8) {
        scan->rule = rule_of(pay);
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << tl.width()); ++v) {
            CellState s;
            s.w[0] = v;
            scan->universe.push_back(s);
        }
    }

    return [hl, tl, level, scan](const CellState& c,
                                 int delta) -> std::optional<bool> {
        if (delta < -1 || delta > 1)
            raise(ErrorKind::Precondition, "delta must be in {-1,0,1}");
        std::int64_t live = get_field(c, hl.at(0));
        std::int64_t kind = get_field(c, hl.at(1));
        std::int64_t count = get_field(c, hl.at(2));
        if (live == 0) {
            // Only the all-zero state is reachable among dead states, and it
            // arises from the all-blank neighborhood.
            return !c.is_blank();
        }
        if (kind == 1 && count == 0) {
            CellState s;
            for (std::size_t j = 0; j < tl.size(); ++j)
                set_field(s, tl.at(j), get_field(c, hl.at(j + 3)));
            // A base cell never carries a blank payload (the birth branch dies
            // instead), so that state is unproducible and vacuously demanding.
            if (s.is_blank()) return true;
            if (!scan->rule) return std::nullopt;
            std::lock_guard<std::mutex> lock(scan->mutex);
            auto key = std::make_pair(s.w[0], delta);
            auto it = scan->memo.find(key);
            if (it == scan->memo.end())
                it = scan->memo
                         .emplace(key, demanding_exhaustive(*scan->rule, s, delta,
                                                            scan->universe))
                         .first;
            return it->second;
        }
        if (kind == 1)
            return count <= 2 * level ? delta == -1 : true;
        if (kind == 0)
            return count >= 1 && count <= 2 * level ? delta == 1 : true;
        if (kind == 2)
            return count >= level + 1 && count <= 2 * level ? delta == 1 : true;
        // no rule branch writes the fourth label encoding, so such states
        // are unproducible and vacuously demanding
        return true;
    };
}

} // namespace casim
