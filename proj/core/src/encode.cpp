#include "casim/lang.hpp"

#include <unordered_map>
#include <unordered_set>

namespace casim {

std::string encode_bits(const RuleProgram& program) {
    std::string text = print_canonical(program);
    std::string bits;
    bits.reserve(text.size() * 8);
    for (char c : text) {
        unsigned byte = static_cast<unsigned char>(c);
        for (int k = 7; k >= 0; --k) bits += ((byte >> k) & 1u) ? '1' : '0';
    }
    return bits;
}

RuleProgram decode_bits(const std::string& bits) {
    if (bits.size() % 8 != 0)
        raise(ErrorKind::Length, "bit count " + std::to_string(bits.size()) +
                                     " is not a multiple of 8");
    std::string text;
    text.reserve(bits.size() / 8);
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        unsigned byte = 0;
        for (std::size_t k = 0; k < 8; ++k) {
            char b = bits[i + k];
            if (b != '0' && b != '1')
                raise(ErrorKind::Validate, "encoded program contains a non-bit character");
            byte = (byte << 1) | static_cast<unsigned>(b - '0');
        }
        text += static_cast<char>(byte);
    }
    RuleProgram p = parse(text);
    auto errors = validate(p);
    if (!errors.empty()) {
        std::string msg = "decoded program is invalid:";
        for (const auto& e : errors) {
            msg += "\n  ";
            msg += e;
        }
        raise(ErrorKind::Validate, msg);
    }
    return p;
}

RuleProgram inc_level(const RuleProgram& program) {
    RuleProgram out = program;
    for (ParamDecl& d : out.params) {
        if (d.name != "Level") continue;
        if (d.kind != ParamKind::Num || d.value.op != ExprOp::NumLit)
            raise(ErrorKind::Precondition,
                  "parameter Level is not a literal number");
        ++d.value.num;
        out.validated = false;
        out.param_values.clear();
        out.param_lazy.clear();
        out.lazy_cache.reset();
        out.canonical_text = print_canonical(out);
        return out;
    }
    raise(ErrorKind::Precondition, "program has no Level parameter");
}

bool mentions_this(const Expr& e) {
    if (e.op == ExprOp::ThisRef) return true;
    for (const Expr& a : e.args)
        if (mentions_this(a)) return true;
    return false;
}

bool contains_return(const std::vector<Stmt>& body) {
    for (const Stmt& s : body) {
        if (s.kind == Stmt::Kind::Return) return true;
        for (const IfArm& arm : s.arms)
            if (contains_return(arm.body)) return true;
    }
    return false;
}

namespace {

void rename_expr(Expr& e, const std::unordered_map<std::string, std::string>& map) {
    if (e.op == ExprOp::Ref || e.op == ExprOp::Call) {
        auto it = map.find(e.str);
        if (it != map.end()) e.str = it->second;
    }
    for (Expr& a : e.args) rename_expr(a, map);
}

void rename_stmts(std::vector<Stmt>& body,
                  const std::unordered_map<std::string, std::string>& map) {
    for (Stmt& s : body) {
        for (std::string& t : s.targets) {
            auto it = map.find(t);
            if (it != map.end()) t = it->second;
        }
        if (s.value) rename_expr(*s.value, map);
        for (IfArm& arm : s.arms) {
            if (arm.cond) rename_expr(*arm.cond, map);
            rename_stmts(arm.body, map);
        }
    }
}

} // namespace

void rename_clashes(RuleProgram& program, const std::vector<std::string>& taken) {
    std::unordered_set<std::string> avoid(taken.begin(), taken.end());
    std::unordered_set<std::string> own;
    auto note = [&](const std::string& n) { own.insert(n); };
    for (const ParamDecl& d : program.params) note(d.name);
    for (const FieldDecl& d : program.fields) {
        note(d.name);
        for (const std::string& l : d.labels) note(l);
    }
    for (const ProcDecl& d : program.procs) {
        note(d.name);
        for (const std::string& f : d.formals) note(f);
    }

    std::unordered_map<std::string, std::string> map;
    auto fresh = [&](const std::string& old) {
        for (int k = 0;; ++k) {
            std::string candidate = "u" + std::to_string(k) + "_" + old;
            if (!avoid.count(candidate) && !own.count(candidate)) {
                own.insert(candidate);
                return candidate;
            }
        }
    };
    for (const std::string& n : own)
        if (avoid.count(n)) map.emplace(n, "");
    for (auto& [old, neu] : map) neu = fresh(old);
    if (map.empty()) return;

    for (ParamDecl& d : program.params) {
        auto it = map.find(d.name);
        if (it != map.end()) d.name = it->second;
        rename_expr(d.value, map);
    }
    for (FieldDecl& d : program.fields) {
        auto it = map.find(d.name);
        if (it != map.end()) d.name = it->second;
        for (std::string& l : d.labels) {
            auto lt = map.find(l);
            if (lt != map.end()) l = lt->second;
        }
        rename_expr(d.max_expr, map);
    }
    for (ProcDecl& d : program.procs) {
        auto it = map.find(d.name);
        if (it != map.end()) d.name = it->second;
        for (std::string& f : d.formals) {
            auto ft = map.find(f);
            if (ft != map.end()) f = ft->second;
        }
        rename_stmts(d.body, map);
    }
    rename_stmts(program.body, map);
    program.validated = false;
    program.canonical_text = print_canonical(program);
}

} // namespace casim
