#pragma once
#include "casim/lang.hpp"
#include "casim/rule.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace casim {

struct EvalStats {
    std::int64_t overflow_writes = 0;  // numeric writes clamped mod 2^width
};

// One application of the program's local rule: neighbors a (left) and c
// (right) are read-only, b is the cell's own state. Pure.
CellState eval(const RuleProgram& program, const CellState& a, const CellState& b,
               const CellState& c, EvalStats* stats = nullptr);

// Value of a parameter; evaluates and caches lazily initialized ones.
Value param_value(const RuleProgram& program, int slot);
Value param_value(const RuleProgram& program, const std::string& name);
std::int64_t param_num(const RuleProgram& program, const std::string& name);

// Memoizing radius-1 rule adapter over eval.
LocalRule rule_of(const RuleProgram& program);

struct CostProfile {
    std::int64_t time_steps = 0;      // worst observed primitive evaluations
    std::int64_t space_bits = 0;      // worst observed live temporaries + state
    std::int64_t sampled_inputs = 0;
    bool exact = false;
};

// Exhaustive over all neighborhoods; capacity error when the input space is
// too large (state wider than 16 bits or more than ~2^26 triples).
CostProfile measure_costs(const RuleProgram& program);
CostProfile measure_costs_sampled(const RuleProgram& program, int samples,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Agent: the in-colony evaluator of the universal simulator, runnable on its
// own. The literal backend steps a bytecode machine compiled from the target
// program; the oracle backend follows the same external schedule and latches
// the result computed directly. Both end with identical Out bits.

enum class AgentBackend { Literal, Oracle };

struct AgentCode;  // compiled form, defined in the implementation

struct AgentMachine {
    std::shared_ptr<const RuleProgram> target;
    std::shared_ptr<const AgentCode> code;  // literal backend only
    AgentBackend backend = AgentBackend::Oracle;
    int colony_size = 0;
    int target_bits = 0;

    // read-only tracks, one bit per colony cell
    std::vector<std::uint8_t> lmail, simu, rmail;
    // written tracks
    std::vector<std::uint8_t> out;
    bool doom = false;

    // control state
    int phase = 0;  // 0 gather, 1 compute, 2 write, 3 done
    int head = 0;
    std::int64_t ip = 0;
    std::uint32_t buffer = 0;       // gathered (L,S,R) bits, 3 per target bit
    std::uint32_t outbits = 0;
    std::vector<std::int64_t> stack;
    std::int64_t step_count = 0;
    bool halted = false;
    bool fault = false;  // ran out of working space
};

AgentMachine make_agent(std::shared_ptr<const RuleProgram> target,
                        AgentBackend backend, int colony_size,
                        std::vector<std::uint8_t> lmail,
                        std::vector<std::uint8_t> simu,
                        std::vector<std::uint8_t> rmail);

AgentMachine agent_step(AgentMachine m);  // error when already halted
AgentMachine run_agent(AgentMachine m, std::int64_t max_steps = 1 << 22);

} // namespace casim
