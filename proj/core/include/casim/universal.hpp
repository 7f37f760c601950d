#pragma once
#include "casim/interp.hpp"
#include "casim/sim.hpp"

#include <memory>
#include <utility>

namespace casim {

// Colony-based programmatic simulator: width-Q colonies of the emitted rule
// jointly evaluate an embedded target program once per U-step work period.
struct UniversalParams {
    int csize = 0;    // Q, divisible by 4
    int wperiod = 0;  // U, at least 4Q
    std::shared_ptr<const RuleProgram> target;
};

// Structural checks only (divisibility, schedule room, target width); the
// measured-cost inequalities are the domain of min_dimensions.
UniversalParams make_universal(std::shared_ptr<const RuleProgram> target, int csize,
                               int wperiod);

// Smallest (Q, U) fitting the measured profile: Q is the least multiple of 4
// covering the working space, the program text bits and the target state
// width; U = 6Q + the measured time.
std::pair<int, int> min_dimensions(const RuleProgram& target, const CostProfile& profile);

// Emits the colony rule: retrieval phase on ages [0, Q), frozen setup at age
// Q, agent computation strictly between Q and U-1, commit or death at U-1.
RuleProgram universal_program(const UniversalParams& params);

// Simulation of the target by the colony rule: base (0, U-2Q), macro-cells
// are consistent all-live colonies on that row, decoding reads their Simu
// bits. The encoder builds age-0 colonies for every target cell.
SimulationDescriptor universal_descriptor(const UniversalParams& params);

// Lifecycle of the macro-cell window at `anchor`: 1 = colony carried a state
// through the whole period, 2 = rebuilt from the left neighbor, 3 = rebuilt
// from the right, 4 = rebuilt from both sides meeting in the middle.
// The window must lie inside the block and satisfy the macro predicate.
int classify_macrocell(const UniversalParams& params, const TrajectoryBlock& block,
                       Coord anchor);

// delta-demanding answers for colony states, exact on every state the rule
// can produce; defers only on bit patterns outside the Addr/Age ranges.
DemandingOracle universal_demanding_oracle(const UniversalParams& params);

} // namespace casim
