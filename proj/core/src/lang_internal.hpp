#pragma once
#include "casim/error.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace casim::detail {

enum class Tok {
    End,
    Newline,
    Ident,
    SuffixIdent,  // identifier with a directly attached + or - neighbor suffix
    Int,
    Str,
    KwNum,
    KwBool,
    KwEnum,
    KwString,
    KwBits,
    KwParam,
    KwField,
    KwProc,
    KwEnd,
    KwIf,
    KwElsif,
    KwElse,
    KwThen,
    KwIn,
    KwLen,
    KwAnd,
    KwOr,
    KwNot,
    KwMod,
    KwReturn,
    KwTrue,
    KwFalse,
    KwThis,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Arrow,  // <-
    Plus,
    Minus,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;      // identifier name, raw digits, or unescaped string
    std::int64_t num = 0;  // Int value
    int nbr = 0;           // SuffixIdent: -1 or +1
    int line = 1, col = 1;
};

std::vector<Token> lex(const std::string& text);

const char* token_name(Tok t);

// Built-in functions callable from rule programs. Slot annotation for a call
// to builtin b is -2 - b so that user procedure indices stay non-negative.
enum class Builtin {
    Gs = 0,
    G1,
    G2,
    IncLevel,
    LRule,
    AgentWork,
    AgentOut,
    AgentDoom,
};

inline constexpr int kBuiltinCount = 8;

// Returns -1 for unknown names.
int builtin_index(const std::string& name);
int builtin_arity(Builtin b);
const char* builtin_name(Builtin b);

inline int builtin_slot(Builtin b) { return -2 - static_cast<int>(b); }
inline bool is_builtin_slot(int slot) { return slot <= -2; }
inline Builtin builtin_of_slot(int slot) { return static_cast<Builtin>(-2 - slot); }

} // namespace casim::detail
