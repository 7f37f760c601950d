#pragma once
#include "casim/lang.hpp"
#include "casim/rule.hpp"
#include "casim/sim.hpp"

#include <functional>
#include <string>
#include <vector>

namespace casim {

// ---------------------------------------------------------------------------
// Pinned point sets L(n) and their evolution rule.

struct LPoint {
    int i = 0;  // column, in [-n+1, n-1]
    int t = 0;  // row, in [0, n-1]
    friend bool operator==(const LPoint&, const LPoint&) = default;
};

// Point set of n elements inside [-n+1, n-1] x [0, n-1] whose top row t = n-1
// is fully populated and whose columns each hold O(log n) points.
std::vector<LPoint> l_set(int n);

// Label alphabet for l_rule: "Non" (index 0) then one label per point of
// l_set(n), ordered by (t, i).
std::vector<std::string> l_labels(int n);
std::string l_label_of(const LPoint& p);

// Local evolution rule f_n over the label alphabet: row t of the pattern
// produces row t+1; everything else maps to "Non". Certified single-valued at
// construction.
std::string l_rule(int n, const std::string& a, const std::string& b,
                   const std::string& c);

// ---------------------------------------------------------------------------
// Sparsification.

// Wraps a radius-1 program so that live content appears only once per (2n+1)
// steps in a (2n+1)-spaced lattice; one payload step per cycle.
RuleProgram sparsify(int n, const RuleProgram& payload);

// Adds a base-column liveness counter so base columns are never blank inside a
// cycle (the sparsified rule alone leaves them blank between visits). The
// input must already be sparsified: num param N plus Live/Kind/Count fields.
RuleProgram g1(int n, const RuleProgram& sparse);

// Adds an l_set(n) pattern layer seeded at every base cell; the pattern plays
// out over the following n rows and then extinguishes. Same precondition.
RuleProgram g2(int n, const RuleProgram& sparse);

using Transform = std::function<RuleProgram(int, const RuleProgram&)>;

// Applies the transform only on levels listed in `good`; other levels pass the
// payload through unchanged.
RuleProgram sparsify_partial(const std::vector<int>& good, int n,
                             const RuleProgram& payload);

// (outer o inner)(n, p) = outer(n, inner(n, p))
Transform compose_transform(Transform outer, Transform inner);

// Simulation of the payload by its sparsification: Q = U = 2n+1, base (0,0),
// macro-cells are fresh base cells, decoding reads the payload fields.
SimulationDescriptor sparse_descriptor(int n, const RuleProgram& payload);

// delta-demanding answers for states of the sparsified rule. Returns nullopt
// only for states it cannot classify.
DemandingOracle sparse_demanding_oracle(int n, const RuleProgram& payload);

} // namespace casim
