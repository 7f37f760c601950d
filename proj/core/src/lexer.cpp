#include "lang_internal.hpp"

#include <cctype>
#include <unordered_map>

namespace casim::detail {

namespace {

const std::unordered_map<std::string, Tok>& keyword_table() {
    static const std::unordered_map<std::string, Tok> table = {
        {"num", Tok::KwNum},       {"bool", Tok::KwBool},   {"enum", Tok::KwEnum},
        {"string", Tok::KwString}, {"bits", Tok::KwBits},   {"param", Tok::KwParam},
        {"field", Tok::KwField},   {"proc", Tok::KwProc},   {"end", Tok::KwEnd},
        {"if", Tok::KwIf},         {"elsif", Tok::KwElsif}, {"else", Tok::KwElse},
        {"then", Tok::KwThen},     {"in", Tok::KwIn},       {"len", Tok::KwLen},
        {"and", Tok::KwAnd},       {"or", Tok::KwOr},       {"not", Tok::KwNot},
        {"mod", Tok::KwMod},       {"return", Tok::KwReturn},
        {"True", Tok::KwTrue},     {"False", Tok::KwFalse}, {"This", Tok::KwThis},
    };
    return table;
}

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

[[noreturn]] void fail(int line, int col, const std::string& msg) {
    raise(ErrorKind::Syntax,
          "line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

} // namespace

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1, col = 1;
    auto push = [&](Tok kind, int tl, int tc) {
        Token t;
        t.kind = kind;
        t.line = tl;
        t.col = tc;
        out.push_back(t);
        return &out.back();
    };
    while (i < text.size()) {
        char c = text[i];
        int tl = line, tc = col;
        if (c == '\n') {
            // collapse runs of blank lines into one separator
            if (!out.empty() && out.back().kind != Tok::Newline) push(Tok::Newline, tl, tc);
            ++i;
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                digits += text[i];
                ++i;
                ++col;
            }
            if (i < text.size() && ident_start(text[i]))
                fail(line, col, "number immediately followed by a letter");
            Token* t = push(Tok::Int, tl, tc);
            t->text = digits;
            if (digits.size() > 18) fail(tl, tc, "integer literal too large");
            t->num = std::stoll(digits);
            continue;
        }
        if (ident_start(c)) {
            std::string name;
            while (i < text.size() && ident_char(text[i])) {
                name += text[i];
                ++i;
                ++col;
            }
            auto kw = keyword_table().find(name);
            if (kw != keyword_table().end()) {
                push(kw->second, tl, tc);
                continue;
            }
            // a + or - glued to the identifier is a neighbor suffix unless it
            // starts a longer token (letter, digit, underscore, or call paren)
            if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
                char next = i + 1 < text.size() ? text[i + 1] : '\0';
                if (!ident_char(next) && next != '(') {
                    Token* t = push(Tok::SuffixIdent, tl, tc);
                    t->text = name;
                    t->nbr = text[i] == '+' ? 1 : -1;
                    ++i;
                    ++col;
                    continue;
                }
            }
            Token* t = push(Tok::Ident, tl, tc);
            t->text = name;
            continue;
        }
        if (c == '"') {
            ++i;
            ++col;
            std::string value;
            bool closed = false;
            while (i < text.size()) {
                char d = text[i];
                if (d == '\n') break;
                ++i;
                ++col;
                if (d == '"') {
                    closed = true;
                    break;
                }
                if (d == '\\') {
                    if (i >= text.size()) break;
                    char e = text[i];
                    ++i;
                    ++col;
                    if (e == 'n')
                        value += '\n';
                    else if (e == '"')
                        value += '"';
                    else if (e == '\\')
                        value += '\\';
                    else
                        fail(line, col, std::string("unknown escape \\") + e);
                    continue;
                }
                value += d;
            }
            if (!closed) fail(tl, tc, "unterminated string literal");
            Token* t = push(Tok::Str, tl, tc);
            t->text = value;
            continue;
        }
        auto two = [&](char a, char b) {
            return c == a && i + 1 < text.size() && text[i + 1] == b;
        };
        if (two('<', '-')) {
            push(Tok::Arrow, tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (two('<', '=')) {
            push(Tok::Le, tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (two('>', '=')) {
            push(Tok::Ge, tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (two('!', '=')) {
            push(Tok::Ne, tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        Tok kind;
        switch (c) {
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case ',': kind = Tok::Comma; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '=': kind = Tok::Eq; break;
        case '<': kind = Tok::Lt; break;
        case '>': kind = Tok::Gt; break;
        default: fail(line, col, std::string("unexpected character '") + c + "'");
        }
        push(kind, tl, tc);
        ++i;
        ++col;
    }
    if (!out.empty() && out.back().kind != Tok::Newline) push(Tok::Newline, line, col);
    push(Tok::End, line, col);
    return out;
}

const char* token_name(Tok t) {
    switch (t) {
    case Tok::End: return "end of input";
    case Tok::Newline: return "end of line";
    case Tok::Ident: return "identifier";
    case Tok::SuffixIdent: return "neighbor reference";
    case Tok::Int: return "integer";
    case Tok::Str: return "string";
    case Tok::KwNum: return "'num'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwEnum: return "'enum'";
    case Tok::KwString: return "'string'";
    case Tok::KwBits: return "'bits'";
    case Tok::KwParam: return "'param'";
    case Tok::KwField: return "'field'";
    case Tok::KwProc: return "'proc'";
    case Tok::KwEnd: return "'end'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElsif: return "'elsif'";
    case Tok::KwElse: return "'else'";
    case Tok::KwThen: return "'then'";
    case Tok::KwIn: return "'in'";
    case Tok::KwLen: return "'len'";
    case Tok::KwAnd: return "'and'";
    case Tok::KwOr: return "'or'";
    case Tok::KwNot: return "'not'";
    case Tok::KwMod: return "'mod'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwTrue: return "'True'";
    case Tok::KwFalse: return "'False'";
    case Tok::KwThis: return "'This'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Arrow: return "'<-'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    }
    return "?";
}

} // namespace casim::detail
