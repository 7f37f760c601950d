#pragma once
#include "casim/graphs.hpp"
#include "casim/lang.hpp"
#include "casim/rule.hpp"

#include <functional>
#include <string>
#include <vector>

namespace casim {

// Reads one host cell of a Q x U window; col in [0,Q), row in [0,U) with row 0
// the earliest time step.
using PatternReader = std::function<CellState(int col, int row)>;

// Executable simulation: width Q, period U, base cell (a,b), a macro-cell
// predicate over Q x U windows and a decoding map from windows to one target
// state. The decoded state is target-blank whenever the predicate fails.
struct SimulationDescriptor {
    int q = 0;
    int u = 0;
    int base_col = 0;  // a, 0 <= a < q
    int base_row = 0;  // b, 0 <= b < u
    FieldLayout host_layout;
    FieldLayout target_layout;
    std::function<bool(const PatternReader&)> macro_predicate;
    std::function<CellState(const PatternReader&)> state_fn;
    // fast necessary condition on the base cell alone; may be null
    std::function<bool(const CellState&)> base_hint;
    // target row -> host row of width q * |target|; may be null
    std::function<RowConfig(const RowConfig&)> encoder;
    std::string name;
};

RowConfig encode(const SimulationDescriptor& d, const RowConfig& target_row);

// Blockwise decode: reads the window whose top-left host corner is (col0, row0)
// and spans cols*q x rows*u host cells.
std::vector<std::vector<CellState>> decode(const SimulationDescriptor& d,
                                           const TrajectoryBlock& block, int col0,
                                           int row0, int cols, int rows);

// Decode a single macro-cell window anchored at host (col0, row0).
CellState decode_one(const SimulationDescriptor& d, const TrajectoryBlock& block,
                     int col0, int row0);

SimulationDescriptor compose_sim(const SimulationDescriptor& outer,
                                 const SimulationDescriptor& inner);

// All (i, t) whose Q x U window satisfies the macro predicate. When lattice is
// true only multiples of (q, u) are scanned.
std::vector<Coord> find_macrocells(const SimulationDescriptor& d,
                                   const TrajectoryBlock& block, bool lattice = false);

enum class RigidityVariant { Rigid, Weak, Strong };

std::vector<Violation> audit_rigidity(const SimulationDescriptor& d,
                                      const LocalRule& target_rule,
                                      const TrajectoryBlock& block,
                                      RigidityVariant variant);

std::vector<Violation> audit_connecting(const SimulationDescriptor& d,
                                        const LocalRule& host_rule,
                                        const LocalRule& target_rule,
                                        const TrajectoryBlock& block,
                                        const DemandingOracle& oracle = nullptr);

std::vector<Violation> audit_overlap(const SimulationDescriptor& d,
                                     const std::vector<Coord>& anchors);

// Overlap rule for composed descriptors: windows closer than a third of the
// period in both axes violate.
std::vector<Violation> audit_overlap_composed(const SimulationDescriptor& d,
                                              const std::vector<Coord>& anchors);

struct ParentBounds {
    std::int64_t left = 0;   // anchor allowed in [i - left, i + right]
    std::int64_t right = 0;
    std::int64_t back = 0;   // and in [t - back, t]
};

std::vector<Violation> audit_parents(const SimulationDescriptor& d,
                                     const TrajectoryBlock& block,
                                     const ParentBounds& bounds);

// Render an audit report: one VIOLATION line per entry, then an OK summary
// line when the list is empty.
std::string audit_report(const std::string& kind,
                         const std::vector<Violation>& violations,
                         std::int64_t checked);

} // namespace casim
