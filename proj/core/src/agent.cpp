#include "casim/interp.hpp"
#include "interp_internal.hpp"
#include "lang_internal.hpp"

#include <mutex>
#include <unordered_map>

namespace casim {

// ---------------------------------------------------------------------------
// Compiled form of a target program: a small stack machine. Procedures are
// inlined (calls are acyclic), formals become local slots, parameters are
// folded to constants. Locals live in the low slots of the machine's stack.

struct AgentCode {
    enum class Op : std::uint8_t {
        PushNum,
        PushLocal,
        StoreLocal,
        ReadL,
        ReadS,
        ReadR,
        StoreField,
        Dup,
        Pop,
        Add,
        Sub,
        Mul,
        Mod,
        Eq,
        Ne,
        Lt,
        Le,
        Gt,
        Ge,
        Not,
        And,
        Or,
        StrIndex,
        Jz,
        Jmp,
        Halt,
    };
    struct Ins {
        Op op;
        std::int64_t a = 0;  // immediate / slot / jump target / pool index
    };
    std::vector<Ins> code;
    std::vector<std::string> strings;
    int locals = 0;
};

namespace {

using Op = AgentCode::Op;

struct Compiler {
    const RuleProgram& p;
    AgentCode out;
    int local_top = 0;

    struct Frame {
        int base = 0;                 // first local slot of this inline
        std::vector<std::size_t>* end_jumps = nullptr;
    };
    std::vector<Frame> frames;

    std::size_t emit(Op op, std::int64_t a = 0) {
        out.code.push_back({op, a});
        return out.code.size() - 1;
    }

    void patch(std::size_t at) { out.code[at].a = static_cast<std::int64_t>(out.code.size()); }

    [[noreturn]] void cannot(const std::string& what) {
        raise(ErrorKind::Capacity, "cannot embed this program into an agent: " + what);
    }

    bool proc_returns_value(const ProcDecl& d) const {
        return value_return_in(d.body);
    }

    static bool value_return_in(const std::vector<Stmt>& body) {
        for (const Stmt& s : body) {
            if (s.kind == Stmt::Kind::Return && s.value) return true;
            for (const IfArm& a : s.arms)
                if (value_return_in(a.body)) return true;
        }
        return false;
    }

    Value folded_param(int slot) {
        if (p.param_lazy[static_cast<std::size_t>(slot)])
            cannot("parameter '" + p.params[static_cast<std::size_t>(slot)].name +
                   "' is evaluated lazily");
        return *p.param_values[static_cast<std::size_t>(slot)];
    }

    // Index bases must be compile-time strings; nothing else may be one.
    std::string constant_string(const Expr& e) {
        if (e.op == ExprOp::StrLit) return e.str;
        if (e.op == ExprOp::Ref && e.ref_kind == RefKind::Param) {
            Value v = folded_param(e.slot);
            if (v.kind == Value::Kind::Str) return v.str;
        }
        cannot("a string value that is not a constant");
    }

    void compile_expr(const Expr& e) {
        switch (e.op) {
        case ExprOp::NumLit:
            emit(Op::PushNum, e.num);
            return;
        case ExprOp::BoolLit:
            emit(Op::PushNum, e.boolean ? 1 : 0);
            return;
        case ExprOp::StrLit:
            cannot("a free-standing string literal");
        case ExprOp::ThisRef:
            cannot("a reference to the program's own text");
        case ExprOp::Ref:
            switch (e.ref_kind) {
            case RefKind::Param: {
                Value v = folded_param(e.slot);
                switch (v.kind) {
                case Value::Kind::Num:
                case Value::Kind::Enum:
                    emit(Op::PushNum, v.num);
                    return;
                case Value::Kind::Bool:
                    emit(Op::PushNum, v.boolean ? 1 : 0);
                    return;
                case Value::Kind::Str:
                    cannot("a string parameter used as a value");
                }
                return;
            }
            case RefKind::Field:
                emit(e.nbr < 0 ? Op::ReadL : e.nbr > 0 ? Op::ReadR : Op::ReadS, e.slot);
                return;
            case RefKind::Formal:
                if (frames.empty()) cannot("a formal outside a procedure");
                emit(Op::PushLocal, frames.back().base + e.slot);
                return;
            case RefKind::EnumLabel:
                emit(Op::PushNum, e.label_value);
                return;
            case RefKind::Unresolved:
                cannot("an unresolved name");
            }
            return;
        case ExprOp::Index: {
            std::string s = constant_string(e.args[0]);
            out.strings.push_back(std::move(s));
            compile_expr(e.args[1]);
            emit(Op::StrIndex, static_cast<std::int64_t>(out.strings.size() - 1));
            return;
        }
        case ExprOp::Call:
            if (detail::is_builtin_slot(e.slot)) cannot("a builtin call");
            inline_call(e);
            return;
        case ExprOp::Not:
            compile_expr(e.args[0]);
            emit(Op::Not);
            return;
        default:
            break;
        }
        compile_expr(e.args[0]);
        compile_expr(e.args[1]);
        switch (e.op) {
        case ExprOp::Add: emit(Op::Add); break;
        case ExprOp::Sub: emit(Op::Sub); break;
        case ExprOp::Mul: emit(Op::Mul); break;
        case ExprOp::Mod: emit(Op::Mod); break;
        case ExprOp::Eq: emit(Op::Eq); break;
        case ExprOp::Ne: emit(Op::Ne); break;
        case ExprOp::Lt: emit(Op::Lt); break;
        case ExprOp::Le: emit(Op::Le); break;
        case ExprOp::Gt: emit(Op::Gt); break;
        case ExprOp::Ge: emit(Op::Ge); break;
        case ExprOp::And: emit(Op::And); break;
        case ExprOp::Or: emit(Op::Or); break;
        default: raise(ErrorKind::Internal, "unexpected operator in agent compile");
        }
    }

    void inline_call(const Expr& e) {
        const ProcDecl& d = p.procs[static_cast<std::size_t>(e.slot)];
        int base = local_top;
        local_top += static_cast<int>(d.formals.size());
        if (local_top > out.locals) out.locals = local_top;
        // slots reserved first: calls nested in arguments allocate above them
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            compile_expr(e.args[i]);
            emit(Op::StoreLocal, base + static_cast<std::int64_t>(i));
        }
        std::vector<std::size_t> end_jumps;
        frames.push_back({base, &end_jumps});
        compile_stmts(d.body);
        frames.pop_back();
        for (std::size_t at : end_jumps) patch(at);
        local_top = base;
    }

    void compile_stmts(const std::vector<Stmt>& body) {
        for (const Stmt& s : body) compile_stmt(s);
    }

    void compile_stmt(const Stmt& s) {
        switch (s.kind) {
        case Stmt::Kind::Assign: {
            compile_expr(*s.value);
            for (std::size_t i = 0; i + 1 < s.target_slots.size(); ++i) emit(Op::Dup);
            // stores consume one copy each, innermost duplicate first
            for (auto it = s.target_slots.rbegin(); it != s.target_slots.rend(); ++it)
                emit(Op::StoreField, *it);
            return;
        }
        case Stmt::Kind::Call: {
            const Expr& call = *s.value;
            bool value = !detail::is_builtin_slot(call.slot) && call.slot >= 0 &&
                         proc_returns_value(p.procs[static_cast<std::size_t>(call.slot)]);
            compile_expr(call);
            if (value) emit(Op::Pop);
            return;
        }
        case Stmt::Kind::Return: {
            if (s.value) compile_expr(*s.value);
            if (frames.empty()) {
                // main body: bare return ends the program
                emit(Op::Jmp, -1);
                main_end_jumps.push_back(out.code.size() - 1);
            } else {
                emit(Op::Jmp, -1);
                frames.back().end_jumps->push_back(out.code.size() - 1);
            }
            return;
        }
        case Stmt::Kind::If: {
            std::vector<std::size_t> exits;
            for (std::size_t i = 0; i < s.arms.size(); ++i) {
                const IfArm& arm = s.arms[i];
                std::size_t skip = 0;
                if (arm.cond) {
                    compile_expr(*arm.cond);
                    skip = emit(Op::Jz, -1);
                }
                compile_stmts(arm.body);
                bool last = i + 1 == s.arms.size();
                if (!last) exits.push_back(emit(Op::Jmp, -1));
                if (arm.cond) patch(skip);
            }
            for (std::size_t at : exits) patch(at);
            return;
        }
        }
    }

    std::vector<std::size_t> main_end_jumps;

    AgentCode run() {
        compile_stmts(p.body);
        for (std::size_t at : main_end_jumps) patch(at);
        emit(Op::Halt);
        return std::move(out);
    }
};

std::int64_t field_mask_store(const Field& f, std::int64_t v) {
    switch (f.kind) {
    case FieldKind::Boolean: return v != 0 ? 1 : 0;
    case FieldKind::Number:
    case FieldKind::Bitstring:
    case FieldKind::Enumeration: {
        std::uint64_t mask = f.width >= 64 ? ~0ull : ((1ull << f.width) - 1);
        return static_cast<std::int64_t>(static_cast<std::uint64_t>(v) & mask);
    }
    }
    return v;
}

std::int64_t euclid_mod(std::int64_t a, std::int64_t b) {
    if (b == 0) raise(ErrorKind::Precondition, "mod by zero in an agent program");
    std::int64_t r = a % b;
    if (r < 0) r += b < 0 ? -b : b;
    return r;
}

CellState unpack_track(std::uint32_t buffer, int lane, int k) {
    CellState s;
    for (int j = 0; j < k; ++j)
        if ((buffer >> (3 * j + lane)) & 1u) s.set_bit(j, true);
    return s;
}

std::uint32_t low_bits(const CellState& s, int k) {
    return static_cast<std::uint32_t>(s.w[0] & ((k >= 64 ? ~0ull : (1ull << k) - 1)));
}

} // namespace

AgentMachine make_agent(std::shared_ptr<const RuleProgram> target,
                        AgentBackend backend, int colony_size,
                        std::vector<std::uint8_t> lmail,
                        std::vector<std::uint8_t> simu,
                        std::vector<std::uint8_t> rmail) {
    if (!target || !target->validated)
        raise(ErrorKind::Precondition, "agent target must be a validated program");
    int k = target->state_bits();
    if (k < 1) raise(ErrorKind::Precondition, "agent target has no state bits");
    if (k > detail::kMaxAgentBits)
        raise(ErrorKind::Capacity, "agent targets are limited to " +
                                       std::to_string(detail::kMaxAgentBits) +
                                       " state bits, have " + std::to_string(k));
    if (colony_size < k)
        raise(ErrorKind::Precondition, "colony smaller than the target state");
    std::size_t q = static_cast<std::size_t>(colony_size);
    if (lmail.size() != q || simu.size() != q || rmail.size() != q)
        raise(ErrorKind::Precondition, "track lengths must equal the colony size");
    AgentMachine m;
    m.target = std::move(target);
    m.backend = backend;
    m.colony_size = colony_size;
    m.target_bits = k;
    m.lmail = std::move(lmail);
    m.simu = std::move(simu);
    m.rmail = std::move(rmail);
    m.out.assign(q, 0);
    if (backend == AgentBackend::Literal) {
        Compiler c{*m.target};
        m.code = std::make_shared<const AgentCode>(c.run());
    }
    return m;
}

namespace {

void fault_out_of_space(AgentMachine& m) {
    m.fault = true;
    m.doom = true;  // not enough room: the colony dies
    m.halted = true;
    m.phase = 3;
    std::fill(m.out.begin(), m.out.end(), std::uint8_t{0});
}

void vm_push(AgentMachine& m, std::int64_t v) {
    m.stack.push_back(v);
    if (64 * static_cast<std::int64_t>(m.stack.size()) > 4 * m.colony_size)
        fault_out_of_space(m);
}

std::int64_t vm_pop(AgentMachine& m) {
    std::int64_t v = m.stack.back();
    m.stack.pop_back();
    return v;
}

void literal_compute_step(AgentMachine& m) {
    const AgentCode& code = *m.code;
    const AgentCode::Ins& ins = code.code[static_cast<std::size_t>(m.ip)];
    const auto& fields = m.target->layout;
    std::int64_t next = m.ip + 1;
    switch (ins.op) {
    case Op::PushNum: vm_push(m, ins.a); break;
    case Op::PushLocal: vm_push(m, m.stack[static_cast<std::size_t>(ins.a)]); break;
    case Op::StoreLocal: m.stack[static_cast<std::size_t>(ins.a)] = vm_pop(m); break;
    case Op::ReadL:
    case Op::ReadR: {
        int lane = ins.op == Op::ReadL ? 0 : 2;
        CellState s = unpack_track(m.buffer, lane, m.target_bits);
        vm_push(m, get_field(s, fields.at(static_cast<std::size_t>(ins.a))));
        break;
    }
    case Op::ReadS: {
        CellState s;
        s.w[0] = m.outbits;
        vm_push(m, get_field(s, fields.at(static_cast<std::size_t>(ins.a))));
        break;
    }
    case Op::StoreField: {
        const Field& f = fields.at(static_cast<std::size_t>(ins.a));
        CellState s;
        s.w[0] = m.outbits;
        set_field(s, f, field_mask_store(f, vm_pop(m)));
        m.outbits = static_cast<std::uint32_t>(s.w[0]);
        break;
    }
    case Op::Dup: vm_push(m, m.stack.back()); break;
    case Op::Pop: vm_pop(m); break;
    case Op::Add: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a + b);
        break;
    }
    case Op::Sub: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a - b);
        break;
    }
    case Op::Mul: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a * b);
        break;
    }
    case Op::Mod: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, euclid_mod(a, b));
        break;
    }
    case Op::Eq: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a == b ? 1 : 0);
        break;
    }
    case Op::Ne: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a != b ? 1 : 0);
        break;
    }
    case Op::Lt: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a < b ? 1 : 0);
        break;
    }
    case Op::Le: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a <= b ? 1 : 0);
        break;
    }
    case Op::Gt: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a > b ? 1 : 0);
        break;
    }
    case Op::Ge: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, a >= b ? 1 : 0);
        break;
    }
    case Op::Not: vm_push(m, vm_pop(m) == 0 ? 1 : 0); break;
    case Op::And: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, (a != 0 && b != 0) ? 1 : 0);
        break;
    }
    case Op::Or: {
        std::int64_t b = vm_pop(m), a = vm_pop(m);
        vm_push(m, (a != 0 || b != 0) ? 1 : 0);
        break;
    }
    case Op::StrIndex: {
        std::int64_t i = vm_pop(m);
        const std::string& s = code.strings[static_cast<std::size_t>(ins.a)];
        bool one = i >= 0 && i < static_cast<std::int64_t>(s.size()) &&
                   s[static_cast<std::size_t>(i)] == '1';
        vm_push(m, one ? 1 : 0);
        break;
    }
    case Op::Jz:
        if (vm_pop(m) == 0) next = ins.a;
        break;
    case Op::Jmp: next = ins.a; break;
    case Op::Halt: {
        std::uint32_t mask = (1u << m.target_bits) - 1;
        m.outbits &= mask;
        m.doom = m.outbits == 0;
        m.phase = 2;
        return;
    }
    }
    if (!m.halted) m.ip = next;
}

} // namespace

AgentMachine agent_step(AgentMachine m) {
    if (m.halted) raise(ErrorKind::Precondition, "agent machine already halted");
    ++m.step_count;
    switch (m.phase) {
    case 0: {  // gather: one cell per step, head sweeps right
        std::size_t h = static_cast<std::size_t>(m.head);
        std::uint32_t bits = static_cast<std::uint32_t>(m.lmail[h] != 0) |
                             (static_cast<std::uint32_t>(m.simu[h] != 0) << 1) |
                             (static_cast<std::uint32_t>(m.rmail[h] != 0) << 2);
        m.buffer |= bits << (3 * m.head);
        if (m.head == m.target_bits - 1) {
            m.phase = 1;
            if (m.backend == AgentBackend::Literal) {
                m.outbits = low_bits(unpack_track(m.buffer, 1, m.target_bits),
                                     m.target_bits);
                m.stack.assign(static_cast<std::size_t>(m.code->locals), 0);
                m.ip = 0;
            }
        } else {
            ++m.head;
        }
        break;
    }
    case 1: {  // compute
        if (m.backend == AgentBackend::Oracle) {
            CellState l = unpack_track(m.buffer, 0, m.target_bits);
            CellState s = unpack_track(m.buffer, 1, m.target_bits);
            CellState r = unpack_track(m.buffer, 2, m.target_bits);
            CellState out = eval(*m.target, l, s, r);
            m.outbits = low_bits(out, m.target_bits);
            m.doom = out.is_blank();
            m.phase = 2;
        } else {
            literal_compute_step(m);
        }
        break;
    }
    case 2: {  // write: one Out bit per step, head sweeps left
        m.out[static_cast<std::size_t>(m.head)] =
            static_cast<std::uint8_t>((m.outbits >> m.head) & 1u);
        if (m.head == 0) {
            m.phase = 3;
            m.halted = true;
        } else {
            --m.head;
        }
        break;
    }
    default:
        m.halted = true;
        break;
    }
    return m;
}

AgentMachine run_agent(AgentMachine m, std::int64_t max_steps) {
    while (!m.halted) {
        if (m.step_count >= max_steps)
            raise(ErrorKind::Capacity, "agent did not halt within the step budget");
        m = agent_step(std::move(m));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Agent builtins: the same computation expressed as per-cell, per-age update
// functions on the Work/Out/Doom tracks of a universal-simulator colony.

namespace detail {

std::shared_ptr<const CachedTarget> cached_target(const std::string& bits) {
    static std::mutex m;
    static std::unordered_map<std::string, std::shared_ptr<const CachedTarget>> cache;
    {
        std::lock_guard<std::mutex> lock(m);
        auto it = cache.find(bits);
        if (it != cache.end()) return it->second;
    }
    auto program = std::make_shared<const RuleProgram>(decode_bits(bits));
    auto entry = std::make_shared<const CachedTarget>(
        CachedTarget{program, rule_of(*program), program->state_bits()});
    std::lock_guard<std::mutex> lock(m);
    return cache.emplace(bits, std::move(entry)).first->second;
}

namespace {

std::int64_t shifted_bit(std::int64_t v, int by) {
    if (by >= 63 || by < 0) return 0;
    return (v >> by) & 1;
}

struct AgentArgs {
    std::shared_ptr<const CachedTarget> target;
    AgentSchedule sched;
    std::int64_t addr = 0, age = 0;
    std::int64_t wm = 0, w = 0, wp = 0;
};

AgentArgs common_args(const std::vector<Value>& args) {
    AgentArgs a;
    a.target = cached_target(args[0].str);
    a.sched.q = args[1].num;
    a.sched.u = args[2].num;
    a.addr = args[3].num;
    a.age = args[4].num;
    a.wm = args[5].num;
    a.w = args[6].num;
    a.wp = args[7].num;
    return a;
}

// The moving token's result form after the evaluation step: bit 0 presence,
// bits 1..24 the new state bits, bit 25 the doom flag.
std::int64_t eval_form(const AgentArgs& a, std::int64_t work) {
    std::uint32_t buffer =
        static_cast<std::uint32_t>(work >> 1) & kBufferMask;
    int k = a.target->bits;
    CellState l, s, r;
    for (int j = 0; j < k; ++j) {
        if ((buffer >> (3 * j)) & 1u) l.set_bit(j, true);
        if ((buffer >> (3 * j + 1)) & 1u) s.set_bit(j, true);
        if ((buffer >> (3 * j + 2)) & 1u) r.set_bit(j, true);
    }
    CellState out = a.target->rule.apply3(l, s, r);
    std::int64_t outbits =
        static_cast<std::int64_t>(out.w[0] & ((1ull << k) - 1));
    bool doom = out.is_blank();
    return 1 | (outbits << 1) | (doom ? (std::int64_t{1} << 25) : 0);
}

} // namespace

Value builtin_agent_work(const std::vector<Value>& args) {
    AgentArgs a = common_args(args);
    std::int64_t lmailm = args[8].num, simum = args[9].num, rmailm = args[10].num;
    Value r;
    r.kind = Value::Kind::Num;
    const std::int64_t g = a.age;
    if (a.sched.gather(g)) {
        std::int64_t taker = g - a.sched.q;
        if (a.addr == taker) {
            std::int64_t w = a.wm;
            std::int64_t j = a.addr - 1;
            if (j < a.target->bits && 3 * j + 2 < 24) {
                std::int64_t bits = (lmailm != 0 ? 1 : 0) | (simum != 0 ? 2 : 0) |
                                    (rmailm != 0 ? 4 : 0);
                w |= bits << (1 + 3 * j);
            }
            r.num = w;
        } else if (a.addr == taker - 1) {
            r.num = 0;
        } else {
            r.num = a.w;
        }
    } else if (a.sched.eval_step(g)) {
        r.num = a.addr == a.sched.q - 1 ? eval_form(a, a.w) : a.w;
    } else if (a.sched.write(g)) {
        std::int64_t taker = a.sched.u - 3 - g;
        if (a.addr == taker)
            r.num = a.wp;
        else if (a.addr == taker + 1)
            r.num = 0;
        else
            r.num = a.w;
    } else if (a.sched.cleanup(g)) {
        r.num = 0;
    } else {
        r.num = a.w;
    }
    return r;
}

Value builtin_agent_out(const std::vector<Value>& args) {
    AgentArgs a = common_args(args);
    const Value& prev = args[8];
    Value r;
    r.kind = Value::Kind::Num;
    r.num = prev.num;
    const std::int64_t g = a.age;
    if (a.sched.eval_step(g)) {
        if (a.addr == a.sched.q - 1)
            r.num = shifted_bit(eval_form(a, a.w), static_cast<int>(1 + a.addr));
    } else if (a.sched.write(g)) {
        if (a.addr == a.sched.u - 3 - g)
            r.num = shifted_bit(a.wp, static_cast<int>(1 + a.addr));
    }
    return r;
}

Value builtin_agent_doom(const std::vector<Value>& args) {
    AgentArgs a = common_args(args);
    const Value& prev = args[8];
    Value r;
    r.kind = Value::Kind::Bool;
    r.boolean = prev.kind == Value::Kind::Bool ? prev.boolean : prev.num != 0;
    const std::int64_t g = a.age;
    if (a.sched.eval_step(g)) {
        if (a.addr == a.sched.q - 1)
            r.boolean = shifted_bit(eval_form(a, a.w), 25) != 0;
    } else if (a.sched.write(g)) {
        if (a.addr == a.sched.u - 3 - g) r.boolean = shifted_bit(a.wp, 25) != 0;
    }
    return r;
}

} // namespace detail

} // namespace casim
