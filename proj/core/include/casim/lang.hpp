#pragma once
#include "casim/bits.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace casim {

// ---------------------------------------------------------------------------
// Expressions

enum class ExprOp {
    NumLit,
    BoolLit,
    StrLit,
    ThisRef,
    Ref,    // param, field (with optional neighbor suffix), formal, enum label
    Index,  // string indexing: args[0][args[1]]
    Call,   // procedure or builtin: str(args...)
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
};

enum class RefKind { Unresolved, Param, Field, Formal, EnumLabel };

struct Expr {
    ExprOp op = ExprOp::NumLit;
    std::int64_t num = 0;      // NumLit
    bool boolean = false;      // BoolLit
    std::string str;           // StrLit text (unescaped) or Ref/Call name
    int nbr = 0;               // Ref: -1 left neighbor, +1 right, 0 own
    std::vector<Expr> args;    // operands / call arguments
    int line = 0, col = 0;

    // filled in by validate
    RefKind ref_kind = RefKind::Unresolved;
    int slot = -1;              // param/field/formal index
    int label_field = -1;       // EnumLabel: owning enum field
    std::int64_t label_value = 0;
};

Expr num_lit(std::int64_t v);
Expr bool_lit(bool v);
Expr str_lit(std::string s);
Expr this_ref();
Expr ref(std::string name, int nbr = 0);
Expr call(std::string name, std::vector<Expr> args);
Expr index_expr(Expr base, Expr index);
Expr unop(ExprOp op, Expr x);
Expr binop(ExprOp op, Expr lhs, Expr rhs);

// ---------------------------------------------------------------------------
// Statements

struct Stmt;

struct IfArm {
    std::optional<Expr> cond;  // nullopt = else arm
    std::vector<Stmt> body;
};

struct Stmt {
    enum class Kind { Assign, If, Return, Call };
    Kind kind = Kind::Assign;
    std::vector<std::string> targets;  // Assign: one or more own-cell fields
    std::vector<int> target_slots;     // field indices, filled by validate
    std::optional<Expr> value;         // Assign value / Return value / Call expr
    std::vector<IfArm> arms;           // If
    int line = 0, col = 0;
};

Stmt assign(std::vector<std::string> targets, Expr value);
Stmt if_stmt(std::vector<IfArm> arms);
Stmt return_stmt(std::optional<Expr> value = std::nullopt);
Stmt call_stmt(Expr call_expression);

// ---------------------------------------------------------------------------
// Declarations and programs

enum class ParamKind { Num, Bool, Enum, Str };

struct ParamDecl {
    ParamKind kind = ParamKind::Num;
    std::string name;
    Expr value;
    int line = 0, col = 0;
};

struct FieldDecl {
    FieldKind kind = FieldKind::Boolean;
    std::string name;
    Expr max_expr;                    // Number: inclusive maximum
    std::vector<std::string> labels;  // Enumeration
    int length = 0;                   // Bitstring (written in unary)
    int line = 0, col = 0;
};

struct ProcDecl {
    std::string name;
    std::vector<std::string> formals;
    std::vector<Stmt> body;
    int line = 0, col = 0;
};

// Runtime value of a parameter or expression.
struct Value {
    enum class Kind { Num, Bool, Str, Enum };
    Kind kind = Kind::Num;
    std::int64_t num = 0;
    bool boolean = false;
    std::string str;
    int enum_field = -1;  // field index owning the label set
};

// Lazily evaluated parameter slots (those whose initializers mention This).
struct ParamCache {
    std::mutex mutex;
    std::map<int, Value> values;
};

struct RuleProgram {
    std::vector<ParamDecl> params;
    std::vector<FieldDecl> fields;
    std::vector<ProcDecl> procs;
    std::vector<Stmt> body;
    std::string canonical_text;  // filled by parse / finalize

    // validate() annotations
    bool validated = false;
    FieldLayout layout;
    std::vector<std::optional<Value>> param_values;  // nullopt = lazy (This-tainted)
    std::vector<bool> param_lazy;
    std::shared_ptr<ParamCache> lazy_cache;

    int state_bits() const { return layout.width(); }
};

// ---------------------------------------------------------------------------
// Operations

RuleProgram parse(const std::string& text);

std::string print_canonical(const RuleProgram& program);
std::string print_expr(const Expr& e);

// Resolves references, checks write legality and call acyclicity, evaluates
// eager parameters, and computes the layout. Empty result = ok.
std::vector<std::string> validate(RuleProgram& program);

// Convenience: canonical-print, reparse, validate; raises on any failure.
// The round trip guarantees canonical_text is a fixed point.
RuleProgram finalize(RuleProgram program);

FieldLayout layout_of(const RuleProgram& program);

// 8 bits per character of canonical text, most significant bit first.
std::string encode_bits(const RuleProgram& program);
RuleProgram decode_bits(const std::string& bits);

// Identical program with the numeric Level parameter incremented.
RuleProgram inc_level(const RuleProgram& program);

// AST surgery used by the transformations: rename every declaration and
// reference whose name is in `taken`, using reserved prefixes u0_, u1_, ...
void rename_clashes(RuleProgram& program, const std::vector<std::string>& taken);

bool mentions_this(const Expr& e);
bool contains_return(const std::vector<Stmt>& body);

} // namespace casim
