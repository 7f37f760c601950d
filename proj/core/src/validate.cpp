#include "casim/lang.hpp"
#include "lang_internal.hpp"

#include <cstdlib>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace casim {

namespace detail {

int builtin_index(const std::string& name) {
    for (int i = 0; i < kBuiltinCount; ++i)
        if (name == builtin_name(static_cast<Builtin>(i))) return i;
    return -1;
}

const char* builtin_name(Builtin b) {
    switch (b) {
    case Builtin::Gs: return "Gs";
    case Builtin::G1: return "G1";
    case Builtin::G2: return "G2";
    case Builtin::IncLevel: return "IncLevel";
    case Builtin::LRule: return "LRule";
    case Builtin::AgentWork: return "AgentWork";
    case Builtin::AgentOut: return "AgentOut";
    case Builtin::AgentDoom: return "AgentDoom";
    }
    return "?";
}

int builtin_arity(Builtin b) {
    switch (b) {
    case Builtin::Gs:
    case Builtin::G1:
    case Builtin::G2: return 2;
    case Builtin::IncLevel: return 1;
    case Builtin::LRule: return 4;
    case Builtin::AgentWork: return 17;
    case Builtin::AgentOut:
    case Builtin::AgentDoom: return 9;
    }
    return 0;
}

} // namespace detail

namespace {

using detail::Builtin;

struct Type {
    enum class Tag { Unknown, Num, Bool, Str, Enum, Void, Conflict };
    Tag tag = Tag::Unknown;
    int enum_field = -1;
};

Type t_unknown() { return {}; }
Type t_num() { return {Type::Tag::Num, -1}; }
Type t_bool() { return {Type::Tag::Bool, -1}; }
Type t_str() { return {Type::Tag::Str, -1}; }
Type t_void() { return {Type::Tag::Void, -1}; }
Type t_enum(int field) { return {Type::Tag::Enum, field}; }
Type t_conflict() { return {Type::Tag::Conflict, -1}; }

Type merge(Type a, Type b) {
    if (a.tag == Type::Tag::Unknown) return b;
    if (b.tag == Type::Tag::Unknown) return a;
    if (a.tag == Type::Tag::Conflict || b.tag == Type::Tag::Conflict) return t_conflict();
    if (a.tag != b.tag) return t_conflict();
    if (a.tag == Type::Tag::Enum && a.enum_field != b.enum_field) return t_conflict();
    return a;
}

std::string type_name(Type t) {
    switch (t.tag) {
    case Type::Tag::Unknown: return "unknown";
    case Type::Tag::Num: return "number";
    case Type::Tag::Bool: return "boolean";
    case Type::Tag::Str: return "string";
    case Type::Tag::Enum: return "enumeration";
    case Type::Tag::Void: return "no value";
    case Type::Tag::Conflict: return "conflicting";
    }
    return "?";
}

enum class Scope { ParamInit, FieldMax, ProcBody, MainBody };

struct Checker {
    RuleProgram& p;
    std::vector<std::string> errors;

    std::unordered_map<std::string, int> param_ix, field_ix, proc_ix;
    std::unordered_map<std::string, std::pair<int, int>> label_ix;  // field, value
    std::vector<Type> param_type;
    std::vector<std::vector<Type>> formal_type;
    std::vector<Type> return_type;
    std::vector<char> proc_called;
    bool recording = true;  // suppress duplicate diagnostics during fixpoint warmup
    bool changed = false;

    explicit Checker(RuleProgram& prog) : p(prog) {}

    void err(int line, int col, const std::string& msg) {
        if (!recording) return;
        errors.push_back("line " + std::to_string(line) + ":" + std::to_string(col) +
                         ": " + msg);
    }

    // -- pass 0: name tables ------------------------------------------------

    bool global_taken(const std::string& name) const {
        return param_ix.count(name) || field_ix.count(name) || proc_ix.count(name) ||
               label_ix.count(name);
    }

    void collect_names() {
        for (std::size_t i = 0; i < p.params.size(); ++i) {
            const ParamDecl& d = p.params[i];
            if (global_taken(d.name))
                err(d.line, d.col, "duplicate name '" + d.name + "'");
            else
                param_ix[d.name] = static_cast<int>(i);
        }
        for (std::size_t i = 0; i < p.fields.size(); ++i) {
            const FieldDecl& d = p.fields[i];
            if (global_taken(d.name)) {
                err(d.line, d.col, "duplicate name '" + d.name + "'");
                continue;
            }
            field_ix[d.name] = static_cast<int>(i);
            if (d.kind == FieldKind::Enumeration) {
                if (d.labels.size() < 2)
                    err(d.line, d.col,
                        "enumeration '" + d.name + "' needs at least two labels");
                for (std::size_t v = 0; v < d.labels.size(); ++v) {
                    const std::string& label = d.labels[v];
                    if (global_taken(label))
                        err(d.line, d.col, "duplicate name '" + label + "'");
                    else
                        label_ix[label] = {static_cast<int>(i), static_cast<int>(v)};
                }
            }
        }
        for (std::size_t i = 0; i < p.procs.size(); ++i) {
            const ProcDecl& d = p.procs[i];
            if (global_taken(d.name)) {
                err(d.line, d.col, "duplicate name '" + d.name + "'");
                continue;
            }
            proc_ix[d.name] = static_cast<int>(i);
        }
        for (const ProcDecl& d : p.procs) {
            std::unordered_set<std::string> seen;
            for (const std::string& f : d.formals) {
                if (!seen.insert(f).second)
                    err(d.line, d.col, "duplicate formal '" + f + "' in " + d.name);
                if (global_taken(f))
                    err(d.line, d.col,
                        "formal '" + f + "' of " + d.name + " shadows another name");
            }
        }
    }

    // -- pass 1: reference resolution ---------------------------------------

    int formal_slot(int proc, const std::string& name) const {
        if (proc < 0) return -1;
        const ProcDecl& d = p.procs[static_cast<std::size_t>(proc)];
        for (std::size_t i = 0; i < d.formals.size(); ++i)
            if (d.formals[i] == name) return static_cast<int>(i);
        return -1;
    }

    void resolve(Expr& e, Scope scope, int proc, int param_limit) {
        e.ref_kind = RefKind::Unresolved;
        e.slot = -1;
        e.label_field = -1;
        e.label_value = 0;
        switch (e.op) {
        case ExprOp::NumLit:
        case ExprOp::BoolLit:
        case ExprOp::StrLit:
            return;
        case ExprOp::ThisRef:
            if (scope != Scope::ParamInit)
                err(e.line, e.col, "This is only allowed in a parameter initializer");
            return;
        case ExprOp::Ref: {
            int fs = scope == Scope::ProcBody ? formal_slot(proc, e.str) : -1;
            if (fs >= 0) {
                if (e.nbr != 0) {
                    err(e.line, e.col, "neighbor suffix on formal '" + e.str + "'");
                    return;
                }
                e.ref_kind = RefKind::Formal;
                e.slot = fs;
                return;
            }
            auto pi = param_ix.find(e.str);
            if (pi != param_ix.end()) {
                if (scope == Scope::ParamInit && pi->second >= param_limit) {
                    err(e.line, e.col,
                        "parameter '" + e.str + "' used before its declaration");
                    return;
                }
                if (e.nbr != 0) {
                    err(e.line, e.col, "neighbor suffix on parameter '" + e.str + "'");
                    return;
                }
                e.ref_kind = RefKind::Param;
                e.slot = pi->second;
                return;
            }
            auto li = label_ix.find(e.str);
            if (li != label_ix.end()) {
                if (e.nbr != 0) {
                    err(e.line, e.col, "neighbor suffix on label '" + e.str + "'");
                    return;
                }
                e.ref_kind = RefKind::EnumLabel;
                e.label_field = li->second.first;
                e.label_value = li->second.second;
                return;
            }
            auto fi = field_ix.find(e.str);
            if (fi != field_ix.end()) {
                if (scope == Scope::ParamInit || scope == Scope::FieldMax) {
                    err(e.line, e.col,
                        "field '" + e.str + "' cannot be read outside the rule body");
                    return;
                }
                e.ref_kind = RefKind::Field;
                e.slot = fi->second;
                return;
            }
            err(e.line, e.col, "undefined name '" + e.str + "'");
            return;
        }
        case ExprOp::Index:
            resolve(e.args[0], scope, proc, param_limit);
            resolve(e.args[1], scope, proc, param_limit);
            return;
        case ExprOp::Call: {
            for (Expr& a : e.args) resolve(a, scope, proc, param_limit);
            if (scope == Scope::FieldMax) {
                err(e.line, e.col, "a field maximum must be a constant expression");
                return;
            }
            auto it = proc_ix.find(e.str);
            if (it != proc_ix.end()) {
                if (scope == Scope::ParamInit) {
                    err(e.line, e.col,
                        "procedures cannot be called in a parameter initializer");
                    return;
                }
                e.slot = it->second;
                std::size_t want =
                    p.procs[static_cast<std::size_t>(it->second)].formals.size();
                if (e.args.size() != want)
                    err(e.line, e.col,
                        e.str + " expects " + std::to_string(want) + " argument(s), got " +
                            std::to_string(e.args.size()));
                return;
            }
            int b = detail::builtin_index(e.str);
            if (b >= 0) {
                Builtin bb = static_cast<Builtin>(b);
                e.slot = detail::builtin_slot(bb);
                int want = detail::builtin_arity(bb);
                if (static_cast<int>(e.args.size()) != want)
                    err(e.line, e.col,
                        e.str + " expects " + std::to_string(want) + " argument(s), got " +
                            std::to_string(e.args.size()));
                return;
            }
            err(e.line, e.col, "undefined procedure '" + e.str + "'");
            return;
        }
        default:
            for (Expr& a : e.args) resolve(a, scope, proc, param_limit);
            return;
        }
    }

    void resolve_stmts(std::vector<Stmt>& body, Scope scope, int proc) {
        for (Stmt& s : body) resolve_stmt(s, scope, proc);
    }

    void resolve_stmt(Stmt& s, Scope scope, int proc) {
        switch (s.kind) {
        case Stmt::Kind::Assign: {
            s.target_slots.clear();
            for (const std::string& t : s.targets) {
                auto fi = field_ix.find(t);
                if (fi == field_ix.end()) {
                    if (param_ix.count(t) || formal_slot(proc, t) >= 0 ||
                        label_ix.count(t) || proc_ix.count(t))
                        err(s.line, s.col, "'" + t + "' is not an assignable field");
                    else
                        err(s.line, s.col, "undefined field '" + t + "'");
                    s.target_slots.push_back(-1);
                } else {
                    s.target_slots.push_back(fi->second);
                }
            }
            resolve(*s.value, scope, proc, 0);
            return;
        }
        case Stmt::Kind::Call:
            resolve(*s.value, scope, proc, 0);
            if (s.value->op != ExprOp::Call)
                err(s.line, s.col, "expected a call statement");
            return;
        case Stmt::Kind::Return:
            if (s.value) {
                if (scope == Scope::MainBody)
                    err(s.line, s.col, "the top-level body cannot return a value");
                resolve(*s.value, scope, proc, 0);
            }
            return;
        case Stmt::Kind::If: {
            if (s.arms.empty()) {
                err(s.line, s.col, "conditional with no branches");
                return;
            }
            for (std::size_t i = 0; i < s.arms.size(); ++i) {
                IfArm& arm = s.arms[i];
                if (arm.cond) {
                    resolve(*arm.cond, scope, proc, 0);
                } else if (i + 1 != s.arms.size()) {
                    err(s.line, s.col, "else branch must come last");
                }
                if (i == 0 && !arm.cond) err(s.line, s.col, "first branch needs a condition");
                resolve_stmts(arm.body, scope, proc);
            }
            return;
        }
        }
    }

    // -- pass 2: acyclic calls ---------------------------------------------

    void find_calls(const Expr& e, std::vector<int>& out) const {
        if (e.op == ExprOp::Call && e.slot >= 0) out.push_back(e.slot);
        for (const Expr& a : e.args) find_calls(a, out);
    }

    void find_calls(const std::vector<Stmt>& body, std::vector<int>& out) const {
        for (const Stmt& s : body) {
            if (s.value) find_calls(*s.value, out);
            for (const IfArm& arm : s.arms) {
                if (arm.cond) find_calls(*arm.cond, out);
                find_calls(arm.body, out);
            }
        }
    }

    void check_acyclic() {
        std::size_t n = p.procs.size();
        std::vector<std::vector<int>> callees(n);
        for (std::size_t i = 0; i < n; ++i) find_calls(p.procs[i].body, callees[i]);
        std::vector<int> color(n, 0);  // 0 new, 1 active, 2 done
        bool reported = false;
        auto dfs = [&](auto&& self, std::size_t v) -> void {
            color[v] = 1;
            for (int w : callees[v]) {
                if (color[static_cast<std::size_t>(w)] == 1) {
                    if (!reported) {
                        reported = true;
                        err(p.procs[v].line, p.procs[v].col,
                            "recursive call involving procedure '" + p.procs[v].name +
                                "'");
                    }
                    continue;
                }
                if (color[static_cast<std::size_t>(w)] == 0)
                    self(self, static_cast<std::size_t>(w));
            }
            color[v] = 2;
        };
        for (std::size_t i = 0; i < n; ++i)
            if (color[i] == 0) dfs(dfs, i);
    }

    // -- pass 3: parameter taint and eager evaluation ----------------------

    static bool contains_call(const Expr& e) {
        if (e.op == ExprOp::Call) return true;
        for (const Expr& a : e.args)
            if (contains_call(a)) return true;
        return false;
    }

    bool references_lazy(const Expr& e) const {
        if (e.op == ExprOp::Ref && e.ref_kind == RefKind::Param &&
            p.param_lazy[static_cast<std::size_t>(e.slot)])
            return true;
        for (const Expr& a : e.args)
            if (references_lazy(a)) return true;
        return false;
    }

    std::optional<Value> fold(const Expr& e) {
        switch (e.op) {
        case ExprOp::NumLit: {
            Value v;
            v.kind = Value::Kind::Num;
            v.num = e.num;
            return v;
        }
        case ExprOp::BoolLit: {
            Value v;
            v.kind = Value::Kind::Bool;
            v.boolean = e.boolean;
            return v;
        }
        case ExprOp::StrLit: {
            Value v;
            v.kind = Value::Kind::Str;
            v.str = e.str;
            return v;
        }
        case ExprOp::Ref:
            if (e.ref_kind == RefKind::Param) {
                const auto& slot = p.param_values[static_cast<std::size_t>(e.slot)];
                if (!slot) return std::nullopt;
                return *slot;
            }
            if (e.ref_kind == RefKind::EnumLabel) {
                Value v;
                v.kind = Value::Kind::Enum;
                v.enum_field = e.label_field;
                v.num = e.label_value;
                return v;
            }
            return std::nullopt;
        case ExprOp::Index: {
            auto base = fold(e.args[0]);
            auto idx = fold(e.args[1]);
            if (!base || !idx || base->kind != Value::Kind::Str ||
                idx->kind != Value::Kind::Num)
                return std::nullopt;
            Value v;
            v.kind = Value::Kind::Num;
            std::int64_t i = idx->num;
            v.num = i >= 0 && i < static_cast<std::int64_t>(base->str.size()) &&
                            base->str[static_cast<std::size_t>(i)] == '1'
                        ? 1
                        : 0;
            return v;
        }
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Mod: {
            auto a = fold(e.args[0]);
            auto b = fold(e.args[1]);
            if (!a || !b || a->kind != Value::Kind::Num || b->kind != Value::Kind::Num)
                return std::nullopt;
            Value v;
            v.kind = Value::Kind::Num;
            if (e.op == ExprOp::Add) v.num = a->num + b->num;
            if (e.op == ExprOp::Sub) v.num = a->num - b->num;
            if (e.op == ExprOp::Mul) v.num = a->num * b->num;
            if (e.op == ExprOp::Mod) {
                if (b->num == 0) {
                    err(e.line, e.col, "mod by zero in a constant expression");
                    return std::nullopt;
                }
                std::int64_t r = a->num % b->num;
                if (r < 0) r += b->num < 0 ? -b->num : b->num;
                v.num = r;
            }
            return v;
        }
        case ExprOp::Eq:
        case ExprOp::Ne:
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: {
            auto a = fold(e.args[0]);
            auto b = fold(e.args[1]);
            if (!a || !b) return std::nullopt;
            bool both_num = a->kind == Value::Kind::Num && b->kind == Value::Kind::Num;
            Value v;
            v.kind = Value::Kind::Bool;
            if (e.op == ExprOp::Eq || e.op == ExprOp::Ne) {
                bool eq;
                if (both_num)
                    eq = a->num == b->num;
                else if (a->kind == Value::Kind::Bool && b->kind == Value::Kind::Bool)
                    eq = a->boolean == b->boolean;
                else if (a->kind == Value::Kind::Enum && b->kind == Value::Kind::Enum &&
                         a->enum_field == b->enum_field)
                    eq = a->num == b->num;
                else
                    return std::nullopt;
                v.boolean = e.op == ExprOp::Eq ? eq : !eq;
                return v;
            }
            if (!both_num) return std::nullopt;
            switch (e.op) {
            case ExprOp::Lt: v.boolean = a->num < b->num; break;
            case ExprOp::Le: v.boolean = a->num <= b->num; break;
            case ExprOp::Gt: v.boolean = a->num > b->num; break;
            default: v.boolean = a->num >= b->num; break;
            }
            return v;
        }
        case ExprOp::Not: {
            auto a = fold(e.args[0]);
            if (!a || a->kind != Value::Kind::Bool) return std::nullopt;
            Value v;
            v.kind = Value::Kind::Bool;
            v.boolean = !a->boolean;
            return v;
        }
        case ExprOp::And:
        case ExprOp::Or: {
            auto a = fold(e.args[0]);
            auto b = fold(e.args[1]);
            if (!a || !b || a->kind != Value::Kind::Bool || b->kind != Value::Kind::Bool)
                return std::nullopt;
            Value v;
            v.kind = Value::Kind::Bool;
            v.boolean = e.op == ExprOp::And ? (a->boolean && b->boolean)
                                            : (a->boolean || b->boolean);
            return v;
        }
        default:
            return std::nullopt;
        }
    }

    int enum_field_of_param(int slot) const {
        // chase label or enum-parameter references in the initializer
        int guard = 0;
        while (guard++ < 64) {
            const Expr& init = p.params[static_cast<std::size_t>(slot)].value;
            if (init.op != ExprOp::Ref) return -1;
            if (init.ref_kind == RefKind::EnumLabel) return init.label_field;
            if (init.ref_kind == RefKind::Param &&
                p.params[static_cast<std::size_t>(init.slot)].kind == ParamKind::Enum) {
                slot = init.slot;
                continue;
            }
            return -1;
        }
        return -1;
    }

    void eval_params() {
        p.param_values.assign(p.params.size(), std::nullopt);
        p.param_lazy.assign(p.params.size(), false);
        param_type.assign(p.params.size(), t_unknown());
        for (std::size_t i = 0; i < p.params.size(); ++i) {
            ParamDecl& d = p.params[i];
            switch (d.kind) {
            case ParamKind::Num: param_type[i] = t_num(); break;
            case ParamKind::Bool: param_type[i] = t_bool(); break;
            case ParamKind::Str: param_type[i] = t_str(); break;
            case ParamKind::Enum: {
                int f = enum_field_of_param(static_cast<int>(i));
                if (f < 0)
                    err(d.line, d.col,
                        "enum parameter '" + d.name + "' must be set to a label");
                param_type[i] = t_enum(f);
                break;
            }
            }
            bool lazy = mentions_this(d.value) || contains_call(d.value) ||
                        references_lazy(d.value);
            p.param_lazy[i] = lazy;
            if (lazy) continue;
            auto v = fold(d.value);
            if (!v) {
                err(d.line, d.col,
                    "cannot evaluate initializer of parameter '" + d.name + "'");
                continue;
            }
            bool ok = false;
            switch (d.kind) {
            case ParamKind::Num: ok = v->kind == Value::Kind::Num; break;
            case ParamKind::Bool: ok = v->kind == Value::Kind::Bool; break;
            case ParamKind::Str: ok = v->kind == Value::Kind::Str; break;
            case ParamKind::Enum: ok = v->kind == Value::Kind::Enum; break;
            }
            if (!ok) {
                err(d.line, d.col,
                    "initializer of '" + d.name + "' does not match its declared kind");
                continue;
            }
            p.param_values[i] = *v;
        }
    }

    // -- pass 4: layout -----------------------------------------------------

    void build_layout() {
        std::vector<Field> out;
        for (FieldDecl& d : p.fields) {
            switch (d.kind) {
            case FieldKind::Boolean:
                out.push_back(boolean_field(d.name));
                break;
            case FieldKind::Number: {
                if (references_lazy(d.max_expr) || contains_call(d.max_expr) ||
                    mentions_this(d.max_expr)) {
                    err(d.line, d.col,
                        "maximum of field '" + d.name +
                            "' depends on a lazily evaluated parameter");
                    continue;
                }
                auto v = fold(d.max_expr);
                if (!v || v->kind != Value::Kind::Num) {
                    err(d.line, d.col,
                        "maximum of field '" + d.name + "' is not a constant number");
                    continue;
                }
                if (v->num < 1) {
                    err(d.line, d.col,
                        "maximum of field '" + d.name + "' must be at least 1");
                    continue;
                }
                out.push_back(number_field(d.name, static_cast<std::uint64_t>(v->num)));
                break;
            }
            case FieldKind::Enumeration:
                if (d.labels.size() < 2) continue;  // reported in collect_names
                out.push_back(enum_field(d.name, d.labels));
                break;
            case FieldKind::Bitstring:
                out.push_back(bitstring_field(d.name, d.length));
                break;
            }
        }
        if (!errors.empty()) return;
        try {
            p.layout = FieldLayout(out);
        } catch (const Error& e) {
            errors.push_back(e.what());
        }
    }

    // -- pass 5: types ------------------------------------------------------

    Type field_type(int slot) const {
        const FieldDecl& d = p.fields[static_cast<std::size_t>(slot)];
        switch (d.kind) {
        case FieldKind::Boolean: return t_bool();
        case FieldKind::Number: return t_num();
        case FieldKind::Enumeration: return t_enum(slot);
        case FieldKind::Bitstring: return t_num();
        }
        return t_unknown();
    }

    void infer_formal(const Expr& e, int proc, Type t) {
        if (proc < 0 || t.tag == Type::Tag::Unknown) return;
        if (e.op != ExprOp::Ref || e.ref_kind != RefKind::Formal) return;
        Type& cur = formal_type[static_cast<std::size_t>(proc)]
                               [static_cast<std::size_t>(e.slot)];
        Type next = merge(cur, t);
        if (next.tag != cur.tag || next.enum_field != cur.enum_field) {
            cur = next;
            changed = true;
        }
    }

    bool numeric(Type t) const {
        return t.tag == Type::Tag::Num || t.tag == Type::Tag::Unknown ||
               t.tag == Type::Tag::Conflict;
    }

    bool boolish(Type t) const {
        return t.tag == Type::Tag::Bool || t.tag == Type::Tag::Unknown ||
               t.tag == Type::Tag::Conflict;
    }

    Type type_expr(const Expr& e, int proc) {
        switch (e.op) {
        case ExprOp::NumLit: return t_num();
        case ExprOp::BoolLit: return t_bool();
        case ExprOp::StrLit: return t_str();
        case ExprOp::ThisRef: return t_str();
        case ExprOp::Ref:
            switch (e.ref_kind) {
            case RefKind::Param: return param_type[static_cast<std::size_t>(e.slot)];
            case RefKind::Field: return field_type(e.slot);
            case RefKind::Formal:
                return formal_type[static_cast<std::size_t>(proc)]
                                  [static_cast<std::size_t>(e.slot)];
            case RefKind::EnumLabel: return t_enum(e.label_field);
            case RefKind::Unresolved: return t_unknown();
            }
            return t_unknown();
        case ExprOp::Index: {
            Type base = type_expr(e.args[0], proc);
            Type idx = type_expr(e.args[1], proc);
            if (base.tag != Type::Tag::Str && base.tag != Type::Tag::Unknown)
                err(e.line, e.col, "indexing a " + type_name(base) + " value");
            if (!numeric(idx))
                err(e.line, e.col, "string index must be a number");
            infer_formal(e.args[1], proc, t_num());
            return t_num();
        }
        case ExprOp::Call: {
            std::vector<Type> arg_types;
            arg_types.reserve(e.args.size());
            for (const Expr& a : e.args) arg_types.push_back(type_expr(a, proc));
            if (e.slot >= 0) {
                std::size_t callee = static_cast<std::size_t>(e.slot);
                proc_called[callee] = 1;
                for (std::size_t i = 0;
                     i < arg_types.size() && i < formal_type[callee].size(); ++i) {
                    Type& cur = formal_type[callee][i];
                    Type next = merge(cur, arg_types[i]);
                    if (next.tag == Type::Tag::Conflict &&
                        cur.tag != Type::Tag::Conflict)
                        err(e.line, e.col,
                            "argument " + std::to_string(i + 1) + " of " + e.str +
                                " conflicts with another call site");
                    if (next.tag != cur.tag || next.enum_field != cur.enum_field) {
                        cur = next;
                        changed = true;
                    }
                }
                return return_type[callee];
            }
            if (detail::is_builtin_slot(e.slot))
                return type_builtin(e, arg_types, proc);
            return t_unknown();
        }
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Mod: {
            Type a = type_expr(e.args[0], proc);
            Type b = type_expr(e.args[1], proc);
            if (!numeric(a) || !numeric(b))
                err(e.line, e.col, "arithmetic on a " +
                                       type_name(!numeric(a) ? a : b) + " value");
            infer_formal(e.args[0], proc, t_num());
            infer_formal(e.args[1], proc, t_num());
            return t_num();
        }
        case ExprOp::Eq:
        case ExprOp::Ne: {
            Type a = type_expr(e.args[0], proc);
            Type b = type_expr(e.args[1], proc);
            Type m = merge(a, b);
            if (m.tag == Type::Tag::Conflict)
                err(e.line, e.col, "comparing a " + type_name(a) + " with a " +
                                       type_name(b) + " value");
            else if (m.tag == Type::Tag::Str)
                err(e.line, e.col, "strings cannot be compared");
            infer_formal(e.args[0], proc, b);
            infer_formal(e.args[1], proc, a);
            return t_bool();
        }
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: {
            Type a = type_expr(e.args[0], proc);
            Type b = type_expr(e.args[1], proc);
            if (!numeric(a) || !numeric(b))
                err(e.line, e.col, "ordering requires numbers");
            infer_formal(e.args[0], proc, t_num());
            infer_formal(e.args[1], proc, t_num());
            return t_bool();
        }
        case ExprOp::Not: {
            Type a = type_expr(e.args[0], proc);
            if (!boolish(a)) err(e.line, e.col, "not applied to a " + type_name(a));
            infer_formal(e.args[0], proc, t_bool());
            return t_bool();
        }
        case ExprOp::And:
        case ExprOp::Or: {
            Type a = type_expr(e.args[0], proc);
            Type b = type_expr(e.args[1], proc);
            if (!boolish(a) || !boolish(b))
                err(e.line, e.col, "logical operator applied to a " +
                                       type_name(!boolish(a) ? a : b));
            infer_formal(e.args[0], proc, t_bool());
            infer_formal(e.args[1], proc, t_bool());
            return t_bool();
        }
        }
        return t_unknown();
    }

    Type type_builtin(const Expr& e, const std::vector<Type>& args, int proc) {
        Builtin b = detail::builtin_of_slot(e.slot);
        auto want = [&](std::size_t i, Type t, const char* what) {
            if (i >= args.size()) return;
            Type m = merge(args[i], t);
            if (m.tag == Type::Tag::Conflict)
                err(e.args[i].line, e.args[i].col,
                    std::string("argument ") + std::to_string(i + 1) + " of " + e.str +
                        " must be a " + what);
            infer_formal(e.args[i], proc, t);
        };
        switch (b) {
        case Builtin::Gs:
        case Builtin::G1:
        case Builtin::G2:
            want(0, t_num(), "number");
            want(1, t_str(), "string");
            return t_str();
        case Builtin::IncLevel:
            want(0, t_str(), "string");
            return t_str();
        case Builtin::LRule: {
            want(0, t_num(), "number");
            Type et = t_unknown();
            for (std::size_t i = 1; i < 4 && i < args.size(); ++i) et = merge(et, args[i]);
            if (et.tag == Type::Tag::Conflict ||
                (et.tag != Type::Tag::Unknown && et.tag != Type::Tag::Enum)) {
                err(e.line, e.col,
                    "LRule arguments 2..4 must be values of one enumeration");
                return t_unknown();
            }
            for (std::size_t i = 1; i < 4 && i < e.args.size(); ++i)
                infer_formal(e.args[i], proc, et);
            return et;
        }
        case Builtin::AgentWork:
            want(0, t_str(), "string");
            for (std::size_t i = 1; i < 17; ++i) want(i, t_num(), "number");
            return t_num();
        case Builtin::AgentOut:
            want(0, t_str(), "string");
            for (std::size_t i = 1; i < 9; ++i) want(i, t_num(), "number");
            return t_num();
        case Builtin::AgentDoom:
            want(0, t_str(), "string");
            for (std::size_t i = 1; i < 8; ++i) want(i, t_num(), "number");
            want(8, t_bool(), "boolean");
            return t_bool();
        }
        return t_unknown();
    }

    void type_stmts(const std::vector<Stmt>& body, int proc) {
        for (const Stmt& s : body) type_stmt(s, proc);
    }

    void type_stmt(const Stmt& s, int proc) {
        switch (s.kind) {
        case Stmt::Kind::Assign: {
            Type v = type_expr(*s.value, proc);
            for (std::size_t i = 0; i < s.target_slots.size(); ++i) {
                int slot = s.target_slots[i];
                if (slot < 0) continue;
                const FieldDecl& d = p.fields[static_cast<std::size_t>(slot)];
                switch (d.kind) {
                case FieldKind::Boolean:
                    if (!boolish(v))
                        err(s.line, s.col,
                            "cannot assign a " + type_name(v) + " to boolean field '" +
                                d.name + "'");
                    infer_formal(*s.value, proc, t_bool());
                    break;
                case FieldKind::Number:
                case FieldKind::Bitstring:
                    if (!numeric(v) && v.tag != Type::Tag::Bool)
                        err(s.line, s.col,
                            "cannot assign a " + type_name(v) + " to numeric field '" +
                                d.name + "'");
                    break;
                case FieldKind::Enumeration: {
                    Type want = t_enum(slot);
                    if (merge(v, want).tag == Type::Tag::Conflict)
                        err(s.line, s.col,
                            "cannot assign a " + type_name(v) + " to enumeration field '" +
                                d.name + "'");
                    infer_formal(*s.value, proc, want);
                    break;
                }
                }
            }
            return;
        }
        case Stmt::Kind::Call:
            type_expr(*s.value, proc);
            return;
        case Stmt::Kind::Return: {
            Type t = s.value ? type_expr(*s.value, proc) : t_void();
            if (proc >= 0) {
                Type& cur = return_type[static_cast<std::size_t>(proc)];
                Type next = merge(cur, t);
                if (next.tag == Type::Tag::Conflict && cur.tag != Type::Tag::Conflict)
                    err(s.line, s.col,
                        "inconsistent return value in procedure '" +
                            p.procs[static_cast<std::size_t>(proc)].name + "'");
                if (next.tag != cur.tag || next.enum_field != cur.enum_field) {
                    cur = next;
                    changed = true;
                }
            }
            return;
        }
        case Stmt::Kind::If:
            for (const IfArm& arm : s.arms) {
                if (arm.cond) {
                    Type c = type_expr(*arm.cond, proc);
                    if (!boolish(c))
                        err(s.line, s.col, "condition is a " + type_name(c) +
                                               ", not a boolean");
                    infer_formal(*arm.cond, proc, t_bool());
                }
                type_stmts(arm.body, proc);
            }
            return;
        }
    }

    static bool has_return(const std::vector<Stmt>& body, bool with_value) {
        for (const Stmt& s : body) {
            if (s.kind == Stmt::Kind::Return && bool(s.value) == with_value) return true;
            for (const IfArm& arm : s.arms)
                if (has_return(arm.body, with_value)) return true;
        }
        return false;
    }

    static bool always_returns(const std::vector<Stmt>& body) {
        for (const Stmt& s : body) {
            if (s.kind == Stmt::Kind::Return) return true;
            if (s.kind == Stmt::Kind::If && !s.arms.empty() && !s.arms.back().cond) {
                bool all = true;
                for (const IfArm& arm : s.arms) all = all && always_returns(arm.body);
                if (all) return true;
            }
        }
        return false;
    }

    void type_pass() {
        std::size_t n = p.procs.size();
        formal_type.assign(n, {});
        return_type.assign(n, t_unknown());
        proc_called.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            formal_type[i].assign(p.procs[i].formals.size(), t_unknown());
        recording = false;
        for (std::size_t round = 0; round <= n + 1; ++round) {
            changed = false;
            type_stmts(p.body, -1);
            for (std::size_t i = 0; i < n; ++i)
                type_stmts(p.procs[i].body, static_cast<int>(i));
            if (!changed) break;
        }
        // settle: procedures without a value return yield no value
        for (std::size_t i = 0; i < n; ++i)
            if (return_type[i].tag == Type::Tag::Unknown) return_type[i] = t_void();
        recording = true;
        type_stmts(p.body, -1);
        for (std::size_t i = 0; i < n; ++i) {
            type_stmts(p.procs[i].body, static_cast<int>(i));
            const ProcDecl& d = p.procs[i];
            bool value_ret = has_return(d.body, true);
            bool plain_ret = has_return(d.body, false);
            if (value_ret && plain_ret)
                err(d.line, d.col,
                    "procedure '" + d.name + "' mixes plain and value returns");
            if (value_ret && !always_returns(d.body))
                err(d.line, d.col,
                    "procedure '" + d.name + "' may fall through without a value");
        }
        // calls in expression position must produce a value
        check_void_uses(p.body, -1);
        for (std::size_t i = 0; i < n; ++i)
            check_void_uses(p.procs[i].body, static_cast<int>(i));
    }

    void check_void_expr(const Expr& e, bool value_needed) {
        if (e.op == ExprOp::Call) {
            if (value_needed && e.slot >= 0 &&
                return_type[static_cast<std::size_t>(e.slot)].tag == Type::Tag::Void)
                err(e.line, e.col, "procedure '" + e.str + "' returns no value");
            for (const Expr& a : e.args) check_void_expr(a, true);
            return;
        }
        for (const Expr& a : e.args) check_void_expr(a, true);
    }

    void check_void_uses(const std::vector<Stmt>& body, int proc) {
        for (const Stmt& s : body) {
            if (s.value) check_void_expr(*s.value, s.kind != Stmt::Kind::Call);
            for (const IfArm& arm : s.arms) {
                if (arm.cond) check_void_expr(*arm.cond, true);
                check_void_uses(arm.body, proc);
            }
            (void)proc;
        }
    }

    // -- driver -------------------------------------------------------------

    void run() {
        p.validated = false;
        p.layout = FieldLayout();
        if (p.body.empty()) {
            errors.push_back("program body is empty");
            return;
        }
        collect_names();
        if (!errors.empty()) return;
        for (std::size_t i = 0; i < p.params.size(); ++i)
            resolve(p.params[i].value, Scope::ParamInit, -1, static_cast<int>(i));
        for (FieldDecl& d : p.fields)
            if (d.kind == FieldKind::Number)
                resolve(d.max_expr, Scope::FieldMax, -1, 0);
        for (std::size_t i = 0; i < p.procs.size(); ++i)
            resolve_stmts(p.procs[i].body, Scope::ProcBody, static_cast<int>(i));
        resolve_stmts(p.body, Scope::MainBody, -1);
        if (!errors.empty()) return;
        check_acyclic();
        if (!errors.empty()) return;
        eval_params();
        if (!errors.empty()) return;
        build_layout();
        if (!errors.empty()) return;
        type_pass();
        if (!errors.empty()) return;
        p.lazy_cache = std::make_shared<ParamCache>();
        p.validated = true;
    }
};

} // namespace

std::vector<std::string> validate(RuleProgram& program) {
    Checker c(program);
    c.run();
    return c.errors;
}

RuleProgram finalize(RuleProgram program) {
    std::string text = print_canonical(program);
    RuleProgram out = parse(text);
    if (out.canonical_text != text)
        raise(ErrorKind::Internal, "canonical form is not a reprint fixed point");
    auto errors = validate(out);
    if (!errors.empty()) {
        std::string msg = "generated program is invalid:";
        for (const auto& e : errors) {
            msg += "\n  ";
            msg += e;
        }
        raise(ErrorKind::Validate, msg);
    }
    return out;
}

} // namespace casim
