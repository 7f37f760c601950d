#include "casim/interp.hpp"
#include "casim/transforms.hpp"
#include "interp_internal.hpp"
#include "lang_internal.hpp"

#include <mutex>
#include <unordered_map>

namespace casim {

namespace {

using detail::Builtin;
using detail::CostMeter;

Value make_num(std::int64_t v) {
    Value x;
    x.kind = Value::Kind::Num;
    x.num = v;
    return x;
}

Value make_bool(bool v) {
    Value x;
    x.kind = Value::Kind::Bool;
    x.boolean = v;
    return x;
}

Value make_str(std::string v) {
    Value x;
    x.kind = Value::Kind::Str;
    x.str = std::move(v);
    return x;
}

Value make_enum(int field, std::int64_t v) {
    Value x;
    x.kind = Value::Kind::Enum;
    x.enum_field = field;
    x.num = v;
    return x;
}

std::int64_t as_num(const Value& v) {
    switch (v.kind) {
    case Value::Kind::Num:
    case Value::Kind::Enum: return v.num;
    case Value::Kind::Bool: return v.boolean ? 1 : 0;
    case Value::Kind::Str: break;
    }
    raise(ErrorKind::Internal, "string where a number was expected");
}

bool as_bool(const Value& v) {
    switch (v.kind) {
    case Value::Kind::Bool: return v.boolean;
    case Value::Kind::Num:
    case Value::Kind::Enum: return v.num != 0;
    case Value::Kind::Str: break;
    }
    raise(ErrorKind::Internal, "string where a boolean was expected");
}

// Cache for transformation builtins keyed by (level, payload text).
struct TransformCache {
    std::mutex m;
    std::unordered_map<std::string, std::string> results;
};

TransformCache& transform_cache() {
    static TransformCache cache;
    return cache;
}

std::string cached_transform(char tag, std::int64_t n, const std::string& text,
                             const std::function<std::string()>& compute) {
    std::string key;
    key += tag;
    key += std::to_string(n);
    key += '\x1f';
    key += text;
    auto& cache = transform_cache();
    {
        std::lock_guard<std::mutex> lock(cache.m);
        auto it = cache.results.find(key);
        if (it != cache.results.end()) return it->second;
    }
    std::string value = compute();
    std::lock_guard<std::mutex> lock(cache.m);
    return cache.results.emplace(std::move(key), std::move(value)).first->second;
}

RuleProgram parse_payload(const std::string& text, const char* who) {
    RuleProgram payload = parse(text);
    auto errors = validate(payload);
    if (!errors.empty()) {
        std::string msg = std::string(who) + ": payload program is invalid:";
        for (const auto& e : errors) {
            msg += "\n  ";
            msg += e;
        }
        raise(ErrorKind::Validate, msg);
    }
    return payload;
}

struct Evaluator {
    const RuleProgram& p;
    const CellState* left = nullptr;
    const CellState* right = nullptr;
    CellState out;
    bool has_cells = false;
    EvalStats* stats = nullptr;
    CostMeter* meter = nullptr;
    std::vector<Value>* frame = nullptr;
    Value ret_value;

    Value read_field(int slot, int nbr) const {
        const Field& f = p.layout.at(static_cast<std::size_t>(slot));
        const CellState* src = nbr < 0 ? left : nbr > 0 ? right : &out;
        std::int64_t raw = get_field(*src, f);
        switch (f.kind) {
        case FieldKind::Boolean: return make_bool(raw != 0);
        case FieldKind::Number:
        case FieldKind::Bitstring: return make_num(raw);
        case FieldKind::Enumeration: return make_enum(slot, raw);
        }
        raise(ErrorKind::Internal, "unknown field kind");
    }

    void write_field(int slot, const Value& v) {
        const Field& f = p.layout.at(static_cast<std::size_t>(slot));
        std::int64_t raw = 0;
        switch (f.kind) {
        case FieldKind::Boolean:
            raw = as_bool(v) ? 1 : 0;
            break;
        case FieldKind::Number:
        case FieldKind::Bitstring: {
            std::int64_t x = as_num(v);
            std::uint64_t mask = f.width >= 64 ? ~0ull : ((1ull << f.width) - 1);
            raw = static_cast<std::int64_t>(static_cast<std::uint64_t>(x) & mask);
            std::int64_t max = f.kind == FieldKind::Number
                                   ? f.max_value
                                   : static_cast<std::int64_t>(mask);
            if (x < 0 || x > max)
                if (stats) ++stats->overflow_writes;
            break;
        }
        case FieldKind::Enumeration:
            raw = as_num(v);
            break;
        }
        set_field(out, f, raw);
    }

    Value eval_expr(const Expr& e) {
        if (meter) meter->step();
        switch (e.op) {
        case ExprOp::NumLit: return make_num(e.num);
        case ExprOp::BoolLit: return make_bool(e.boolean);
        case ExprOp::StrLit: return make_str(e.str);
        case ExprOp::ThisRef: return make_str(p.canonical_text);
        case ExprOp::Ref:
            switch (e.ref_kind) {
            case RefKind::Param: return param_value(p, e.slot);
            case RefKind::Field:
                if (!has_cells)
                    raise(ErrorKind::Internal, "field read without cell context");
                return read_field(e.slot, e.nbr);
            case RefKind::Formal:
                if (!frame) raise(ErrorKind::Internal, "formal read without a frame");
                return (*frame)[static_cast<std::size_t>(e.slot)];
            case RefKind::EnumLabel: return make_enum(e.label_field, e.label_value);
            case RefKind::Unresolved: break;
            }
            raise(ErrorKind::Internal, "unresolved reference in evaluation");
        case ExprOp::Index: {
            Value base = eval_expr(e.args[0]);
            if (meter) meter->push();
            Value idx = eval_expr(e.args[1]);
            if (meter) meter->pop();
            if (base.kind != Value::Kind::Str)
                raise(ErrorKind::Internal, "indexing a non-string");
            std::int64_t i = as_num(idx);
            bool one = i >= 0 && i < static_cast<std::int64_t>(base.str.size()) &&
                       base.str[static_cast<std::size_t>(i)] == '1';
            return make_num(one ? 1 : 0);
        }
        case ExprOp::Call: return eval_call(e);
        case ExprOp::Not: return make_bool(!as_bool(eval_expr(e.args[0])));
        case ExprOp::And: {
            Value a = eval_expr(e.args[0]);
            if (meter) meter->push();
            Value b = eval_expr(e.args[1]);
            if (meter) meter->pop();
            return make_bool(as_bool(a) && as_bool(b));
        }
        case ExprOp::Or: {
            Value a = eval_expr(e.args[0]);
            if (meter) meter->push();
            Value b = eval_expr(e.args[1]);
            if (meter) meter->pop();
            return make_bool(as_bool(a) || as_bool(b));
        }
        default: break;
        }
        Value a = eval_expr(e.args[0]);
        if (meter) meter->push();
        Value b = eval_expr(e.args[1]);
        if (meter) meter->pop();
        switch (e.op) {
        case ExprOp::Add: return make_num(as_num(a) + as_num(b));
        case ExprOp::Sub: return make_num(as_num(a) - as_num(b));
        case ExprOp::Mul: return make_num(as_num(a) * as_num(b));
        case ExprOp::Mod: {
            std::int64_t d = as_num(b);
            if (d == 0) raise(ErrorKind::Precondition, "mod by zero");
            std::int64_t r = as_num(a) % d;
            if (r < 0) r += d < 0 ? -d : d;
            return make_num(r);
        }
        case ExprOp::Eq: return make_bool(as_num(a) == as_num(b));
        case ExprOp::Ne: return make_bool(as_num(a) != as_num(b));
        case ExprOp::Lt: return make_bool(as_num(a) < as_num(b));
        case ExprOp::Le: return make_bool(as_num(a) <= as_num(b));
        case ExprOp::Gt: return make_bool(as_num(a) > as_num(b));
        case ExprOp::Ge: return make_bool(as_num(a) >= as_num(b));
        default: raise(ErrorKind::Internal, "unknown operator");
        }
    }

    Value eval_call(const Expr& e) {
        std::vector<Value> args;
        args.reserve(e.args.size());
        for (const Expr& a : e.args) {
            args.push_back(eval_expr(a));
            if (meter) meter->push();
        }
        if (meter) meter->pop(64 * static_cast<std::int64_t>(args.size()));
        if (e.slot >= 0) {
            const ProcDecl& d = p.procs[static_cast<std::size_t>(e.slot)];
            std::vector<Value>* saved = frame;
            Value saved_ret = ret_value;
            frame = &args;
            bool returned = exec_stmts(d.body);
            Value result = returned ? ret_value : make_num(0);
            frame = saved;
            ret_value = saved_ret;
            return result;
        }
        if (detail::is_builtin_slot(e.slot)) return eval_builtin(e, args);
        raise(ErrorKind::Internal, "call to an unresolved procedure");
    }

    Value eval_builtin(const Expr& e, const std::vector<Value>& args) {
        Builtin b = detail::builtin_of_slot(e.slot);
        switch (b) {
        case Builtin::Gs: {
            std::int64_t n = as_num(args[0]);
            const std::string& text = args[1].str;
            std::string bits = cached_transform('s', n, text, [&] {
                RuleProgram payload = parse_payload(text, "Gs");
                return encode_bits(sparsify(static_cast<int>(n), payload));
            });
            if (meter) meter->step(static_cast<std::int64_t>(text.size() + bits.size()));
            return make_str(bits);
        }
        case Builtin::G1: {
            std::int64_t n = as_num(args[0]);
            const std::string& text = args[1].str;
            std::string bits = cached_transform('1', n, text, [&] {
                RuleProgram payload = parse_payload(text, "G1");
                return encode_bits(
                    g1(static_cast<int>(n), sparsify(static_cast<int>(n), payload)));
            });
            if (meter) meter->step(static_cast<std::int64_t>(text.size() + bits.size()));
            return make_str(bits);
        }
        case Builtin::G2: {
            std::int64_t n = as_num(args[0]);
            const std::string& text = args[1].str;
            std::string bits = cached_transform('2', n, text, [&] {
                RuleProgram payload = parse_payload(text, "G2");
                return encode_bits(
                    g2(static_cast<int>(n), sparsify(static_cast<int>(n), payload)));
            });
            if (meter) meter->step(static_cast<std::int64_t>(text.size() + bits.size()));
            return make_str(bits);
        }
        case Builtin::IncLevel: {
            const std::string& text = args[0].str;
            std::string result = cached_transform('i', 0, text, [&] {
                RuleProgram prog = parse_payload(text, "IncLevel");
                return print_canonical(inc_level(prog));
            });
            if (meter)
                meter->step(static_cast<std::int64_t>(text.size() + result.size()));
            return make_str(result);
        }
        case Builtin::LRule: {
            if (meter) meter->step(4);
            std::int64_t n = as_num(args[0]);
            int field = -1;
            for (int i = 1; i <= 3; ++i)
                if (args[static_cast<std::size_t>(i)].kind == Value::Kind::Enum)
                    field = args[static_cast<std::size_t>(i)].enum_field;
            if (field < 0)
                raise(ErrorKind::Internal, "LRule arguments carry no label set");
            const auto& labels = p.fields[static_cast<std::size_t>(field)].labels;
            auto name_of = [&](const Value& v) -> const std::string& {
                static const std::string non = "Non";
                if (v.num < 0 || v.num >= static_cast<std::int64_t>(labels.size()))
                    return non;
                return labels[static_cast<std::size_t>(v.num)];
            };
            std::string result = l_rule(static_cast<int>(n), name_of(args[1]),
                                        name_of(args[2]), name_of(args[3]));
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == result)
                    return make_enum(field, static_cast<std::int64_t>(i));
            raise(ErrorKind::Internal, "LRule produced an unknown label");
        }
        case Builtin::AgentWork:
            if (meter) meter->step(4);
            return detail::builtin_agent_work(args);
        case Builtin::AgentOut:
            if (meter) meter->step(4);
            return detail::builtin_agent_out(args);
        case Builtin::AgentDoom:
            if (meter) meter->step(4);
            return detail::builtin_agent_doom(args);
        }
        raise(ErrorKind::Internal, "unknown builtin");
    }

    // true = a return statement unwound to here
    bool exec_stmts(const std::vector<Stmt>& body) {
        for (const Stmt& s : body)
            if (exec_stmt(s)) return true;
        return false;
    }

    bool exec_stmt(const Stmt& s) {
        if (meter) meter->step();
        switch (s.kind) {
        case Stmt::Kind::Assign: {
            Value v = eval_expr(*s.value);
            for (int slot : s.target_slots)
                if (slot >= 0) write_field(slot, v);
            return false;
        }
        case Stmt::Kind::Call:
            eval_expr(*s.value);
            return false;
        case Stmt::Kind::Return:
            ret_value = s.value ? eval_expr(*s.value) : make_num(0);
            return true;
        case Stmt::Kind::If:
            for (const IfArm& arm : s.arms) {
                if (!arm.cond || as_bool(eval_expr(*arm.cond)))
                    return exec_stmts(arm.body);
            }
            return false;
        }
        return false;
    }
};

Value check_param_kind(const ParamDecl& d, Value v) {
    bool ok = false;
    switch (d.kind) {
    case ParamKind::Num: ok = v.kind == Value::Kind::Num; break;
    case ParamKind::Bool: ok = v.kind == Value::Kind::Bool; break;
    case ParamKind::Str: ok = v.kind == Value::Kind::Str; break;
    case ParamKind::Enum: ok = v.kind == Value::Kind::Enum; break;
    }
    if (!ok)
        raise(ErrorKind::Validate,
              "lazily evaluated parameter '" + d.name + "' has the wrong kind");
    return v;
}

} // namespace

namespace detail {

CellState eval_metered(const RuleProgram& program, const CellState& a,
                       const CellState& b, const CellState& c, EvalStats* stats,
                       CostMeter* meter) {
    if (!program.validated)
        raise(ErrorKind::Precondition, "program has not been validated");
    Evaluator ev{program};
    ev.left = &a;
    ev.right = &c;
    ev.out = b;
    ev.has_cells = true;
    ev.stats = stats;
    ev.meter = meter;
    ev.exec_stmts(program.body);
    return ev.out;
}

} // namespace detail

CellState eval(const RuleProgram& program, const CellState& a, const CellState& b,
               const CellState& c, EvalStats* stats) {
    return detail::eval_metered(program, a, b, c, stats, nullptr);
}

Value param_value(const RuleProgram& program, int slot) {
    if (!program.validated)
        raise(ErrorKind::Precondition, "program has not been validated");
    std::size_t i = static_cast<std::size_t>(slot);
    if (i >= program.params.size())
        raise(ErrorKind::Lookup, "no parameter slot " + std::to_string(slot));
    if (program.param_values[i]) return *program.param_values[i];
    auto cache = program.lazy_cache;
    {
        std::lock_guard<std::mutex> lock(cache->mutex);
        auto it = cache->values.find(slot);
        if (it != cache->values.end()) return it->second;
    }
    // evaluate outside the lock; reads of earlier lazy parameters re-enter here
    Evaluator ev{program};
    Value v = check_param_kind(program.params[i], ev.eval_expr(program.params[i].value));
    std::lock_guard<std::mutex> lock(cache->mutex);
    return cache->values.emplace(slot, std::move(v)).first->second;
}

Value param_value(const RuleProgram& program, const std::string& name) {
    for (std::size_t i = 0; i < program.params.size(); ++i)
        if (program.params[i].name == name)
            return param_value(program, static_cast<int>(i));
    raise(ErrorKind::Lookup, "no parameter named '" + name + "'");
}

std::int64_t param_num(const RuleProgram& program, const std::string& name) {
    Value v = param_value(program, name);
    if (v.kind != Value::Kind::Num)
        raise(ErrorKind::Validate, "parameter '" + name + "' is not a number");
    return v.num;
}

namespace {

CellState state_from_raw(std::uint64_t lo, std::uint64_t hi, int bits) {
    CellState s;
    s.w[0] = bits >= 64 ? lo : (lo & ((bits == 0 ? 0 : (~0ull >> (64 - bits)))));
    if (bits > 64) {
        int rest = bits - 64;
        s.w[1] = hi & (rest >= 64 ? ~0ull : (~0ull >> (64 - rest)));
    }
    return s;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

void prefetch_lazy_params(const RuleProgram& program) {
    for (std::size_t i = 0; i < program.params.size(); ++i)
        if (program.param_lazy[i]) param_value(program, static_cast<int>(i));
}

} // namespace

CostProfile measure_costs(const RuleProgram& program) {
    if (!program.validated)
        raise(ErrorKind::Precondition, "program has not been validated");
    int k = program.state_bits();
    if (k > 16)
        raise(ErrorKind::Capacity,
              "exhaustive cost measurement limited to 16 state bits, have " +
                  std::to_string(k));
    if (3 * k > 26)
        raise(ErrorKind::Capacity,
              "exhaustive cost measurement would need 2^" + std::to_string(3 * k) +
                  " inputs; use sampling");
    prefetch_lazy_params(program);
    CostProfile profile;
    profile.exact = true;
    std::uint64_t m = 1ull << k;
    for (std::uint64_t a = 0; a < m; ++a)
        for (std::uint64_t b = 0; b < m; ++b)
            for (std::uint64_t c = 0; c < m; ++c) {
                detail::CostMeter meter;
                detail::eval_metered(program, state_from_raw(a, 0, k),
                                     state_from_raw(b, 0, k), state_from_raw(c, 0, k),
                                     nullptr, &meter);
                profile.time_steps = std::max(profile.time_steps, meter.time);
                profile.space_bits = std::max(profile.space_bits, meter.peak);
                ++profile.sampled_inputs;
            }
    profile.space_bits += k;
    return profile;
}

CostProfile measure_costs_sampled(const RuleProgram& program, int samples,
                                  std::uint64_t seed) {
    if (!program.validated)
        raise(ErrorKind::Precondition, "program has not been validated");
    if (samples < 1) raise(ErrorKind::Precondition, "need at least one sample");
    prefetch_lazy_params(program);
    int k = program.state_bits();
    CostProfile profile;
    std::uint64_t ctr = seed;
    for (int s = 0; s < samples; ++s) {
        CellState a, b, c;
        if (s > 0) {  // first sample is the all-blank neighborhood
            a = state_from_raw(mix64(ctr++), mix64(ctr++), k);
            b = state_from_raw(mix64(ctr++), mix64(ctr++), k);
            c = state_from_raw(mix64(ctr++), mix64(ctr++), k);
        }
        detail::CostMeter meter;
        detail::eval_metered(program, a, b, c, nullptr, &meter);
        profile.time_steps = std::max(profile.time_steps, meter.time);
        profile.space_bits = std::max(profile.space_bits, meter.peak);
        ++profile.sampled_inputs;
    }
    profile.space_bits += k;
    return profile;
}

} // namespace casim
