#pragma once
#include "casim/lang.hpp"

namespace casim {

// Parse + validate, raising on any error. Convenience for fixed sources.
RuleProgram program_from_source(const std::string& text);

// One-bit payloads used throughout the tests and tools.
RuleProgram xor_program();           // V <- (V- + V + V+) mod 2
RuleProgram identity_program();      // V <- V
RuleProgram always_blank_program();  // V <- 0
RuleProgram shift_program();         // V <- V+

// The mod-10 counter with a synchronizing procedure.
RuleProgram counter_program();

} // namespace casim
