#pragma once
#include "casim/bits.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace casim {

// A radius-r local rule on {0,1}^K. The blank state need not be quiescent;
// quiescent() records whether it is (checked once at construction).
class LocalRule {
public:
    // fn receives 2*radius+1 consecutive cells, oldest-row order left to right.
    using ApplyFn = std::function<CellState(const CellState*)>;

    LocalRule(int state_bits, int radius, ApplyFn fn, std::string origin);

    int state_bits() const { return state_bits_; }
    int radius() const { return radius_; }
    const std::string& origin() const { return origin_; }
    bool quiescent() const { return quiescent_; }

    CellState apply(const CellState* neighborhood) const { return fn_(neighborhood); }
    CellState apply3(const CellState& l, const CellState& c, const CellState& r) const;

private:
    int state_bits_;
    int radius_;
    ApplyFn fn_;
    std::string origin_;
    bool quiescent_;
};

enum class Boundary { BlankPadded, Periodic };

struct RowConfig {
    std::vector<CellState> cells;
    Boundary boundary = Boundary::BlankPadded;

    int width() const { return static_cast<int>(cells.size()); }
    // Reads outside the window follow the boundary policy.
    CellState read(long long i) const;
};

struct Violation {
    long long t = 0;
    long long i = 0;
    std::string kind;
    std::string detail;
};

// One synchronous step; same width as the input. Output is bit-identical for
// every thread count.
RowConfig step(const LocalRule& rule, const RowConfig& row, int threads = 1);

// Word application without boundary: output length |word| - 2*radius.
std::vector<CellState> step_word(const LocalRule& rule, const std::vector<CellState>& word);

// Empty result iff y is a valid nondeterministic-blanking image of x:
// every y_i is either apply(neighborhood_i) or blank.
std::vector<Violation> check_tilde_step(const LocalRule& rule, const RowConfig& x,
                                        const RowConfig& y);

// Empty result iff additionally each y_i may arise by regarding any subset of
// the neighborhood as blank; all 2^(2r+1) subsets are tried.
std::vector<Violation> check_hat_step(const LocalRule& rule, const RowConfig& x,
                                      const RowConfig& y);

// Rule equal to shift-by-i after k applications of `rule`; radius k*r + |i|.
LocalRule compose_shift_power(const LocalRule& rule, int shift, int power);

// May answer demanding queries analytically; nullopt defers to the scanner.
using DemandingOracle = std::function<std::optional<bool>(const CellState&, int delta)>;

// True iff every state triple from `universe` mapping to c has a non-blank
// delta-component. The universe is extended with the blank state. Radius-1
// rules only; |universe|^3 above `budget` is a capacity error.
bool demanding_exhaustive(const LocalRule& rule, const CellState& c, int delta,
                          std::vector<CellState> universe,
                          std::size_t budget = std::size_t{1} << 24);

} // namespace casim
