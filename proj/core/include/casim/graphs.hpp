#pragma once
#include "casim/rule.hpp"

#include <cstdint>
#include <vector>

namespace casim {

enum class StepMode { Deterministic, Tilde, Hat };

// A W x T spacetime window. rows[0] is the initial row; time increases with
// the row index. choices[t] records the nondeterminism used to produce
// rows[t+1]: 0 = deterministic image; tilde: 1 = blanked; hat: mask+1 where
// mask bit j blanks neighborhood position j.
struct TrajectoryBlock {
    int width = 0;
    StepMode mode = StepMode::Deterministic;
    Boundary boundary = Boundary::BlankPadded;
    std::uint64_t seed = 0;
    double blank_prob = 0.0;
    std::vector<std::vector<CellState>> rows;
    std::vector<std::vector<std::uint16_t>> choices;

    int row_count() const { return static_cast<int>(rows.size()); }
    const CellState& at(int t, int i) const;
    RowConfig row(int t) const;
};

// Deterministic per (seed, t, i); the basis of replayable sampling.
std::uint64_t cell_hash(std::uint64_t seed, std::uint64_t t, std::uint64_t i);

TrajectoryBlock run_deterministic(const LocalRule& rule, const RowConfig& first, int steps,
                                  int threads = 1);

// Each cell independently becomes blank with probability blank_prob.
TrajectoryBlock sample_tilde(const LocalRule& rule, const RowConfig& first, int steps,
                             double blank_prob, std::uint64_t seed);

// Each cell independently, with probability blank_prob, applies the rule to a
// uniformly chosen blanking subset of its neighborhood.
TrajectoryBlock sample_hat(const LocalRule& rule, const RowConfig& first, int steps,
                           double blank_prob, std::uint64_t seed);

// Row-by-row validation with the checker matching block.mode.
std::vector<Violation> check_trajectory(const LocalRule& rule, const TrajectoryBlock& block);

struct Coord {
    int t = 0;
    int i = 0;
    friend bool operator==(const Coord&, const Coord&) = default;
};

// Adjacency structure over the non-blank cells of a block. Edges are directed
// from earlier to later rows: bit (delta+1) of the in-mask of (t, i) is an
// edge from (t-1, i+delta). Strong edges additionally require the head state
// to be delta-demanding; strong is always a subset of weak.
class CellGraph {
public:
    CellGraph() = default;
    CellGraph(int width, int rows);

    int width() const { return width_; }
    int rows() const { return rows_; }
    bool in_window(int t, int i) const {
        return t >= 0 && t < rows_ && i >= 0 && i < width_;
    }
    bool nonblank(int t, int i) const;
    std::uint8_t weak_in(int t, int i) const;
    std::uint8_t strong_in(int t, int i) const;

    void set_nonblank(int t, int i);
    void add_edge(int t, int i, int delta, bool strong);

private:
    int width_ = 0;
    int rows_ = 0;
    std::vector<std::uint8_t> nonblank_;
    std::vector<std::uint8_t> weak_;
    std::vector<std::uint8_t> strong_;
};

CellGraph build_graphs(const TrajectoryBlock& block, const LocalRule& rule,
                       DemandingOracle oracle = nullptr, std::size_t budget = std::size_t{1}
                                                                             << 24);

// Directed reachability (time-increasing) over the chosen edge set.
bool connected(const CellGraph& graph, Coord from, Coord to, bool strong);

} // namespace casim
