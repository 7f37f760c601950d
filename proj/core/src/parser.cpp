#include "casim/lang.hpp"
#include "lang_internal.hpp"

#include <utility>

namespace casim {

// --- AST factories ---------------------------------------------------------

Expr num_lit(std::int64_t v) {
    Expr e;
    e.op = ExprOp::NumLit;
    e.num = v;
    return e;
}

Expr bool_lit(bool v) {
    Expr e;
    e.op = ExprOp::BoolLit;
    e.boolean = v;
    return e;
}

Expr str_lit(std::string s) {
    Expr e;
    e.op = ExprOp::StrLit;
    e.str = std::move(s);
    return e;
}

Expr this_ref() {
    Expr e;
    e.op = ExprOp::ThisRef;
    return e;
}

Expr ref(std::string name, int nbr) {
    Expr e;
    e.op = ExprOp::Ref;
    e.str = std::move(name);
    e.nbr = nbr;
    return e;
}

Expr call(std::string name, std::vector<Expr> args) {
    Expr e;
    e.op = ExprOp::Call;
    e.str = std::move(name);
    e.args = std::move(args);
    return e;
}

Expr index_expr(Expr base, Expr index) {
    Expr e;
    e.op = ExprOp::Index;
    e.args.push_back(std::move(base));
    e.args.push_back(std::move(index));
    return e;
}

Expr unop(ExprOp op, Expr x) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(x));
    return e;
}

Expr binop(ExprOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

Stmt assign(std::vector<std::string> targets, Expr value) {
    Stmt s;
    s.kind = Stmt::Kind::Assign;
    s.targets = std::move(targets);
    s.value = std::move(value);
    return s;
}

Stmt if_stmt(std::vector<IfArm> arms) {
    Stmt s;
    s.kind = Stmt::Kind::If;
    s.arms = std::move(arms);
    return s;
}

Stmt return_stmt(std::optional<Expr> value) {
    Stmt s;
    s.kind = Stmt::Kind::Return;
    s.value = std::move(value);
    return s;
}

Stmt call_stmt(Expr call_expression) {
    Stmt s;
    s.kind = Stmt::Kind::Call;
    s.value = std::move(call_expression);
    return s;
}

// --- Parser ----------------------------------------------------------------

namespace {

using detail::Tok;
using detail::Token;

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(detail::lex(text)) {}

    RuleProgram run() {
        RuleProgram p;
        while (is_decl_start(peek().kind)) parse_decl(p);
        while (peek().kind == Tok::KwProc) p.procs.push_back(parse_proc());
        p.body = parse_stmts();
        if (peek().kind != Tok::End)
            fail(peek(), std::string("unexpected ") + detail::token_name(peek().kind));
        if (p.body.empty()) fail(peek(), "program body is empty");
        return p;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(int ahead = 0) const {
        std::size_t i = pos_ + static_cast<std::size_t>(ahead);
        if (i >= toks_.size()) i = toks_.size() - 1;  // End token
        return toks_[i];
    }

    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] static void fail(const Token& t, const std::string& msg) {
        raise(ErrorKind::Syntax, "line " + std::to_string(t.line) + ":" +
                                     std::to_string(t.col) + ": " + msg);
    }

    const Token& expect(Tok kind, const char* what) {
        if (peek().kind != kind)
            fail(peek(), std::string("expected ") + what + ", found " +
                             detail::token_name(peek().kind));
        return advance();
    }

    void expect_newline() { expect(Tok::Newline, "end of line"); }

    static bool is_decl_start(Tok t) {
        return t == Tok::KwNum || t == Tok::KwBool || t == Tok::KwEnum ||
               t == Tok::KwString || t == Tok::KwBits;
    }

    void parse_decl(RuleProgram& p) {
        const Token& kw = advance();
        bool is_param = peek().kind == Tok::KwParam;
        if (is_param)
            advance();
        else
            expect(Tok::KwField, "'param' or 'field'");
        const Token& name = expect(Tok::Ident, "a name");
        if (is_param) {
            ParamDecl d;
            switch (kw.kind) {
            case Tok::KwNum: d.kind = ParamKind::Num; break;
            case Tok::KwBool: d.kind = ParamKind::Bool; break;
            case Tok::KwEnum: d.kind = ParamKind::Enum; break;
            case Tok::KwString: d.kind = ParamKind::Str; break;
            default: fail(kw, "'bits' declares a field, not a parameter");
            }
            d.name = name.text;
            d.line = name.line;
            d.col = name.col;
            expect(Tok::Eq, "'='");
            d.value = parse_expr();
            expect_newline();
            p.params.push_back(std::move(d));
            return;
        }
        FieldDecl d;
        d.name = name.text;
        d.line = name.line;
        d.col = name.col;
        switch (kw.kind) {
        case Tok::KwBool:
            d.kind = FieldKind::Boolean;
            break;
        case Tok::KwNum:
            d.kind = FieldKind::Number;
            expect(Tok::Le, "'<='");
            d.max_expr = parse_expr();
            break;
        case Tok::KwEnum: {
            d.kind = FieldKind::Enumeration;
            expect(Tok::KwIn, "'in'");
            expect(Tok::LBrace, "'{'");
            d.labels.push_back(expect(Tok::Ident, "a label").text);
            while (peek().kind == Tok::Comma) {
                advance();
                d.labels.push_back(expect(Tok::Ident, "a label").text);
            }
            expect(Tok::RBrace, "'}'");
            break;
        }
        case Tok::KwBits: {
            d.kind = FieldKind::Bitstring;
            expect(Tok::KwLen, "'len'");
            const Token& len = expect(Tok::Int, "a unary length");
            for (char c : len.text)
                if (c != '1') fail(len, "bit length is written in unary (a run of 1s)");
            d.length = static_cast<int>(len.text.size());
            break;
        }
        default:
            fail(kw, "'string' declares a parameter, not a field");
        }
        expect_newline();
        p.fields.push_back(std::move(d));
    }

    ProcDecl parse_proc() {
        expect(Tok::KwProc, "'proc'");
        ProcDecl d;
        const Token& name = expect(Tok::Ident, "a procedure name");
        d.name = name.text;
        d.line = name.line;
        d.col = name.col;
        expect(Tok::LParen, "'('");
        if (peek().kind != Tok::RParen) {
            d.formals.push_back(expect(Tok::Ident, "a formal name").text);
            while (peek().kind == Tok::Comma) {
                advance();
                d.formals.push_back(expect(Tok::Ident, "a formal name").text);
            }
        }
        expect(Tok::RParen, "')'");
        expect_newline();
        d.body = parse_stmts();
        expect(Tok::KwEnd, "'end'");
        expect_newline();
        return d;
    }

    std::vector<Stmt> parse_stmts() {
        std::vector<Stmt> out;
        for (;;) {
            Tok k = peek().kind;
            if (k == Tok::KwEnd || k == Tok::KwElsif || k == Tok::KwElse || k == Tok::End)
                return out;
            out.push_back(parse_stmt());
        }
    }

    Stmt parse_stmt() {
        const Token& t = peek();
        Stmt s;
        s.line = t.line;
        s.col = t.col;
        switch (t.kind) {
        case Tok::KwIf: {
            advance();
            s.kind = Stmt::Kind::If;
            IfArm first;
            first.cond = parse_expr();
            expect(Tok::KwThen, "'then'");
            expect_newline();
            first.body = parse_stmts();
            s.arms.push_back(std::move(first));
            while (peek().kind == Tok::KwElsif) {
                advance();
                IfArm arm;
                arm.cond = parse_expr();
                expect(Tok::KwThen, "'then'");
                expect_newline();
                arm.body = parse_stmts();
                s.arms.push_back(std::move(arm));
            }
            if (peek().kind == Tok::KwElse) {
                advance();
                expect_newline();
                IfArm arm;
                arm.body = parse_stmts();
                s.arms.push_back(std::move(arm));
            }
            expect(Tok::KwEnd, "'end'");
            expect_newline();
            return s;
        }
        case Tok::KwReturn: {
            advance();
            s.kind = Stmt::Kind::Return;
            if (peek().kind != Tok::Newline) s.value = parse_expr();
            expect_newline();
            return s;
        }
        case Tok::Ident: {
            if (peek(1).kind == Tok::LParen) {
                s.kind = Stmt::Kind::Call;
                s.value = parse_primary();
                expect_newline();
                return s;
            }
            s.kind = Stmt::Kind::Assign;
            s.targets.push_back(advance().text);
            while (peek().kind == Tok::Comma) {
                advance();
                s.targets.push_back(expect(Tok::Ident, "a field name").text);
            }
            expect(Tok::Arrow, "'<-'");
            s.value = parse_expr();
            expect_newline();
            return s;
        }
        case Tok::SuffixIdent:
            fail(t, "cannot assign to a neighbor's field");
        default:
            fail(t, std::string("expected a statement, found ") +
                        detail::token_name(t.kind));
        }
    }

    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (peek().kind == Tok::KwOr) {
            const Token& op = advance();
            Expr e = binop(ExprOp::Or, std::move(lhs), parse_and());
            e.line = op.line;
            e.col = op.col;
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (peek().kind == Tok::KwAnd) {
            const Token& op = advance();
            Expr e = binop(ExprOp::And, std::move(lhs), parse_not());
            e.line = op.line;
            e.col = op.col;
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_not() {
        if (peek().kind == Tok::KwNot) {
            const Token& op = advance();
            Expr e = unop(ExprOp::Not, parse_not());
            e.line = op.line;
            e.col = op.col;
            return e;
        }
        return parse_cmp();
    }

    static bool cmp_op(Tok t, ExprOp& out) {
        switch (t) {
        case Tok::Eq: out = ExprOp::Eq; return true;
        case Tok::Ne: out = ExprOp::Ne; return true;
        case Tok::Lt: out = ExprOp::Lt; return true;
        case Tok::Le: out = ExprOp::Le; return true;
        case Tok::Gt: out = ExprOp::Gt; return true;
        case Tok::Ge: out = ExprOp::Ge; return true;
        default: return false;
        }
    }

    Expr parse_cmp() {
        Expr lhs = parse_add();
        ExprOp op;
        if (!cmp_op(peek().kind, op)) return lhs;
        const Token& t = advance();
        Expr e = binop(op, std::move(lhs), parse_add());
        e.line = t.line;
        e.col = t.col;
        ExprOp again;
        if (cmp_op(peek().kind, again)) fail(peek(), "comparisons do not chain");
        return e;
    }

    Expr parse_add() {
        Expr lhs = parse_mul();
        for (;;) {
            Tok k = peek().kind;
            if (k != Tok::Plus && k != Tok::Minus) return lhs;
            const Token& op = advance();
            Expr e = binop(k == Tok::Plus ? ExprOp::Add : ExprOp::Sub, std::move(lhs),
                           parse_mul());
            e.line = op.line;
            e.col = op.col;
            lhs = std::move(e);
        }
    }

    Expr parse_mul() {
        Expr lhs = parse_primary();
        for (;;) {
            Tok k = peek().kind;
            if (k != Tok::Star && k != Tok::KwMod) return lhs;
            const Token& op = advance();
            Expr e = binop(k == Tok::Star ? ExprOp::Mul : ExprOp::Mod, std::move(lhs),
                           parse_primary());
            e.line = op.line;
            e.col = op.col;
            lhs = std::move(e);
        }
    }

    Expr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Int: {
            advance();
            Expr e = num_lit(t.num);
            e.line = t.line;
            e.col = t.col;
            return e;
        }
        case Tok::KwTrue:
        case Tok::KwFalse: {
            advance();
            Expr e = bool_lit(t.kind == Tok::KwTrue);
            e.line = t.line;
            e.col = t.col;
            return e;
        }
        case Tok::Str: {
            advance();
            Expr e = str_lit(t.text);
            e.line = t.line;
            e.col = t.col;
            return e;
        }
        case Tok::KwThis: {
            advance();
            Expr e = this_ref();
            e.line = t.line;
            e.col = t.col;
            return maybe_index(std::move(e));
        }
        case Tok::SuffixIdent: {
            advance();
            Expr e = ref(t.text, t.nbr);
            e.line = t.line;
            e.col = t.col;
            return e;
        }
        case Tok::Ident: {
            advance();
            if (peek().kind == Tok::LParen) {
                advance();
                std::vector<Expr> args;
                if (peek().kind != Tok::RParen) {
                    args.push_back(parse_expr());
                    while (peek().kind == Tok::Comma) {
                        advance();
                        args.push_back(parse_expr());
                    }
                }
                expect(Tok::RParen, "')'");
                Expr e = call(t.text, std::move(args));
                e.line = t.line;
                e.col = t.col;
                return e;
            }
            Expr e = ref(t.text);
            e.line = t.line;
            e.col = t.col;
            return maybe_index(std::move(e));
        }
        case Tok::LParen: {
            advance();
            Expr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        default:
            fail(t, std::string("expected an expression, found ") +
                        detail::token_name(t.kind));
        }
    }

    Expr maybe_index(Expr base) {
        if (peek().kind != Tok::LBracket) return base;
        const Token& t = advance();
        Expr idx = parse_expr();
        expect(Tok::RBracket, "']'");
        Expr e = index_expr(std::move(base), std::move(idx));
        e.line = t.line;
        e.col = t.col;
        return e;
    }
};

} // namespace

RuleProgram parse(const std::string& text) {
    RuleProgram p = Parser(text).run();
    p.canonical_text = print_canonical(p);
    return p;
}

} // namespace casim
