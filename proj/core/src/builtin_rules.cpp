#include "casim/programs.hpp"

namespace casim {

RuleProgram program_from_source(const std::string& text) {
    RuleProgram p = parse(text);
    auto errors = validate(p);
    if (!errors.empty()) {
        std::string msg = "invalid program:";
        for (const auto& e : errors) {
            msg += "\n  ";
            msg += e;
        }
        raise(ErrorKind::Validate, msg);
    }
    return p;
}

RuleProgram xor_program() {
    return program_from_source("bits field V len 1\n"
                               "V <- (V- + V + V+) mod 2\n");
}

RuleProgram identity_program() {
    return program_from_source("bits field V len 1\n"
                               "V <- V\n");
}

RuleProgram always_blank_program() {
    return program_from_source("bits field V len 1\n"
                               "V <- 0\n");
}

RuleProgram shift_program() {
    return program_from_source("bits field V len 1\n"
                               "V <- V+\n");
}

RuleProgram counter_program() {
    return program_from_source(
        "num param Modulus = 10\n"
        "num field Counter <= Modulus - 1\n"
        "proc Proc(n)\n"
        "  if Counter- = n then\n"
        "    Counter <- (Counter + 1) mod Modulus\n"
        "  end\n"
        "end\n"
        "if Counter != Counter+ then\n"
        "  Proc(Counter+)\n"
        "else\n"
        "  Proc(0)\n"
        "end\n");
}

} // namespace casim
