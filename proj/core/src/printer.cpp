#include "casim/lang.hpp"

#include <string>

namespace casim {

namespace {

int prec(const Expr& e) {
    switch (e.op) {
    case ExprOp::Or: return 1;
    case ExprOp::And: return 2;
    case ExprOp::Not: return 3;
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge: return 4;
    case ExprOp::Add:
    case ExprOp::Sub: return 5;
    case ExprOp::Mul:
    case ExprOp::Mod: return 6;
    default: return 7;
    }
}

const char* op_text(ExprOp op) {
    switch (op) {
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Mod: return "mod";
    case ExprOp::Eq: return "=";
    case ExprOp::Ne: return "!=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::And: return "and";
    case ExprOp::Or: return "or";
    default: return "?";
    }
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '\\')
            out += "\\\\";
        else if (c == '"')
            out += "\\\"";
        else if (c == '\n')
            out += "\\n";
        else
            out += c;
    }
    out += '"';
    return out;
}

void emit(const Expr& e, int min_prec, std::string& out) {
    int p = prec(e);
    bool wrap = p < min_prec;
    if (wrap) out += '(';
    switch (e.op) {
    case ExprOp::NumLit:
        out += std::to_string(e.num);
        break;
    case ExprOp::BoolLit:
        out += e.boolean ? "True" : "False";
        break;
    case ExprOp::StrLit:
        out += quote(e.str);
        break;
    case ExprOp::ThisRef:
        out += "This";
        break;
    case ExprOp::Ref:
        out += e.str;
        if (e.nbr < 0) out += '-';
        if (e.nbr > 0) out += '+';
        break;
    case ExprOp::Index:
        emit(e.args[0], 7, out);
        out += '[';
        emit(e.args[1], 1, out);
        out += ']';
        break;
    case ExprOp::Call:
        out += e.str;
        out += '(';
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out += ", ";
            emit(e.args[i], 1, out);
        }
        out += ')';
        break;
    case ExprOp::Not:
        out += "not ";
        emit(e.args[0], 3, out);
        break;
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge:
        emit(e.args[0], p + 1, out);
        out += ' ';
        out += op_text(e.op);
        out += ' ';
        emit(e.args[1], p + 1, out);
        break;
    default:  // left-associative binary operators
        emit(e.args[0], p, out);
        out += ' ';
        out += op_text(e.op);
        out += ' ';
        emit(e.args[1], p + 1, out);
        break;
    }
    if (wrap) out += ')';
}

void emit_stmts(const std::vector<Stmt>& body, int indent, std::string& out);

void emit_stmt(const Stmt& s, int indent, std::string& out) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    switch (s.kind) {
    case Stmt::Kind::Assign: {
        out += pad;
        for (std::size_t i = 0; i < s.targets.size(); ++i) {
            if (i) out += ", ";
            out += s.targets[i];
        }
        out += " <- ";
        emit(*s.value, 1, out);
        out += '\n';
        break;
    }
    case Stmt::Kind::Call:
        out += pad;
        emit(*s.value, 1, out);
        out += '\n';
        break;
    case Stmt::Kind::Return:
        out += pad;
        out += "return";
        if (s.value) {
            out += ' ';
            emit(*s.value, 1, out);
        }
        out += '\n';
        break;
    case Stmt::Kind::If: {
        for (std::size_t i = 0; i < s.arms.size(); ++i) {
            const IfArm& arm = s.arms[i];
            out += pad;
            if (i == 0) {
                out += "if ";
                emit(*arm.cond, 1, out);
                out += " then\n";
            } else if (arm.cond) {
                out += "elsif ";
                emit(*arm.cond, 1, out);
                out += " then\n";
            } else {
                out += "else\n";
            }
            emit_stmts(arm.body, indent + 1, out);
        }
        out += pad;
        out += "end\n";
        break;
    }
    }
}

void emit_stmts(const std::vector<Stmt>& body, int indent, std::string& out) {
    for (const Stmt& s : body) emit_stmt(s, indent, out);
}

} // namespace

std::string print_expr(const Expr& e) {
    std::string out;
    emit(e, 1, out);
    return out;
}

std::string print_canonical(const RuleProgram& program) {
    std::string out;
    for (const ParamDecl& d : program.params) {
        switch (d.kind) {
        case ParamKind::Num: out += "num param "; break;
        case ParamKind::Bool: out += "bool param "; break;
        case ParamKind::Enum: out += "enum param "; break;
        case ParamKind::Str: out += "string param "; break;
        }
        out += d.name;
        out += " = ";
        emit(d.value, 1, out);
        out += '\n';
    }
    for (const FieldDecl& d : program.fields) {
        switch (d.kind) {
        case FieldKind::Boolean:
            out += "bool field ";
            out += d.name;
            break;
        case FieldKind::Number:
            out += "num field ";
            out += d.name;
            out += " <= ";
            emit(d.max_expr, 1, out);
            break;
        case FieldKind::Enumeration:
            out += "enum field ";
            out += d.name;
            out += " in {";
            for (std::size_t i = 0; i < d.labels.size(); ++i) {
                if (i) out += ", ";
                out += d.labels[i];
            }
            out += '}';
            break;
        case FieldKind::Bitstring:
            out += "bits field ";
            out += d.name;
            out += " len ";
            out.append(static_cast<std::size_t>(d.length), '1');
            break;
        }
        out += '\n';
    }
    for (const ProcDecl& d : program.procs) {
        out += '\n';
        out += "proc ";
        out += d.name;
        out += '(';
        for (std::size_t i = 0; i < d.formals.size(); ++i) {
            if (i) out += ", ";
            out += d.formals[i];
        }
        out += ")\n";
        emit_stmts(d.body, 1, out);
        out += "end\n";
    }
    if (!program.params.empty() || !program.fields.empty() || !program.procs.empty())
        out += '\n';
    emit_stmts(program.body, 0, out);
    return out;
}

} // namespace casim
