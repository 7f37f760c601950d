#include "casim/transforms.hpp"

#include <string>
#include <utility>
#include <vector>

namespace casim {

namespace {

Expr two_n() { return binop(ExprOp::Mul, num_lit(2), ref("N")); }

// True for a cell that has just become the base of a macro-cell.
Expr fresh_base_cond() {
    return binop(ExprOp::And, binop(ExprOp::Eq, ref("Kind"), ref("Rgt")),
                 binop(ExprOp::Eq, ref("Count"), num_lit(0)));
}

// Checks the marks sparsify leaves behind and renames everything that would
// clash with the names about to be added.
RuleProgram sparse_input(int n, const RuleProgram& sparse, const char* who,
                         std::vector<std::string> taken) {
    RuleProgram copy = sparse;
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

    auto fail = [&](const std::string& what) {
        raise(ErrorKind::Precondition,
              std::string(who) + " expects a sparsified program: " + what);
    };
    const ParamDecl* level = nullptr;
    for (const ParamDecl& d : copy.params)
        if (d.name == "N") level = &d;
    if (!level || level->kind != ParamKind::Num || level->value.op != ExprOp::NumLit)
        fail("no literal num param N");
    if (level->value.num != n)
        fail("param N is " + std::to_string(level->value.num) + ", not " +
             std::to_string(n));
    auto field = [&](const char* name) -> const FieldDecl* {
        for (const FieldDecl& d : copy.fields)
            if (d.name == name) return &d;
        return nullptr;
    };
    const FieldDecl* live = field("Live");
    if (!live || live->kind != FieldKind::Boolean) fail("no bool field Live");
    const FieldDecl* kind = field("Kind");
    if (!kind || kind->kind != FieldKind::Enumeration ||
        kind->labels != std::vector<std::string>{"Lft", "Rgt", "Ret"})
        fail("no enum field Kind in {Lft, Rgt, Ret}");
    const FieldDecl* count = field("Count");
    if (!count || count->kind != FieldKind::Number) fail("no num field Count");

    rename_clashes(copy, taken);
    return copy;
}

} // namespace

RuleProgram g1(int n, const RuleProgram& sparse) {
    if (n < 1) raise(ErrorKind::Precondition, "level must be at least 1");
    RuleProgram out = sparse_input(n, sparse, "g1", {"CCount"});

    FieldDecl cc;
    cc.kind = FieldKind::Number;
    cc.name = "CCount";
    cc.max_expr = two_n();
    out.fields.push_back(std::move(cc));

    // A base column stays non-blank for a whole cycle: the counter starts at 1
    // when the base forms and runs mod 2N+1, reaching 0 exactly when the
    // returning cell brings the column back to life.
    IfArm fresh;
    fresh.cond = fresh_base_cond();
    fresh.body.push_back(assign({"CCount"}, num_lit(1)));
    IfArm running;
    running.cond = binop(ExprOp::Gt, ref("CCount"), num_lit(0));
    running.body.push_back(
        assign({"CCount"},
               binop(ExprOp::Mod, binop(ExprOp::Add, ref("CCount"), num_lit(1)),
                     binop(ExprOp::Add, two_n(), num_lit(1)))));
    IfArm idle;
    idle.body.push_back(assign({"CCount"}, num_lit(0)));
    out.body.push_back(if_stmt({std::move(fresh), std::move(running), std::move(idle)}));

    return finalize(std::move(out));
}

RuleProgram g2(int n, const RuleProgram& sparse) {
    if (n < 1) raise(ErrorKind::Precondition, "level must be at least 1");
    std::vector<std::string> labels = l_labels(n);
    std::vector<std::string> taken = labels;
    taken.push_back("CElem");
    taken.push_back("LRule");
    RuleProgram out = sparse_input(n, sparse, "g2", std::move(taken));

    FieldDecl ce;
    ce.kind = FieldKind::Enumeration;
    ce.name = "CElem";
    ce.labels = labels;
    out.fields.push_back(std::move(ce));

    // Every fresh base seeds the pattern's root; elsewhere the pattern layer
    // evolves by the pinned local rule and dies out to Non after row n-1.
    IfArm seed;
    seed.cond = fresh_base_cond();
    seed.body.push_back(assign({"CElem"}, ref(l_label_of(LPoint{0, 0}))));
    IfArm follow;
    follow.body.push_back(assign(
        {"CElem"}, call("LRule", {ref("N"), ref("CElem", -1), ref("CElem"),
                                  ref("CElem", 1)})));
    out.body.push_back(if_stmt({std::move(seed), std::move(follow)}));

    return finalize(std::move(out));
}

} // namespace casim
