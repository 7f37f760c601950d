#include "casim/graphs.hpp"

#include <deque>
#include <unordered_map>

namespace casim {

const CellState& TrajectoryBlock::at(int t, int i) const {
    if (t < 0 || t >= row_count() || i < 0 || i >= width)
        raise(ErrorKind::Lookup, "block coordinate out of range");
    return rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
}

RowConfig TrajectoryBlock::row(int t) const {
    if (t < 0 || t >= row_count())
        raise(ErrorKind::Lookup, "block row out of range");
    return RowConfig{rows[static_cast<std::size_t>(t)], boundary};
}

std::uint64_t cell_hash(std::uint64_t seed, std::uint64_t t, std::uint64_t i) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    };
    return mix(mix(mix(seed) ^ t) ^ i);
}

namespace {

double unit_double(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

TrajectoryBlock make_block(StepMode mode, const RowConfig& first, double blank_prob,
                           std::uint64_t seed) {
    TrajectoryBlock b;
    b.width = first.width();
    b.mode = mode;
    b.boundary = first.boundary;
    b.seed = seed;
    b.blank_prob = blank_prob;
    b.rows.push_back(first.cells);
    return b;
}

} // namespace

TrajectoryBlock run_deterministic(const LocalRule& rule, const RowConfig& first, int steps,
                                  int threads) {
    if (steps < 0)
        raise(ErrorKind::Precondition, "negative step count");
    TrajectoryBlock b = make_block(StepMode::Deterministic, first, 0.0, 0);
    RowConfig current = first;
    for (int t = 0; t < steps; ++t) {
        current = step(rule, current, threads);
        b.rows.push_back(current.cells);
        b.choices.emplace_back(static_cast<std::size_t>(b.width), 0);
    }
    return b;
}

TrajectoryBlock sample_tilde(const LocalRule& rule, const RowConfig& first, int steps,
                             double blank_prob, std::uint64_t seed) {
    TrajectoryBlock b = make_block(StepMode::Tilde, first, blank_prob, seed);
    RowConfig current = first;
    for (int t = 0; t < steps; ++t) {
        RowConfig next = step(rule, current);
        std::vector<std::uint16_t> marks(static_cast<std::size_t>(b.width), 0);
        for (int i = 0; i < b.width; ++i) {
            std::uint64_t h = cell_hash(seed, static_cast<std::uint64_t>(t + 1),
                                        static_cast<std::uint64_t>(i));
            if (unit_double(h) < blank_prob) {
                next.cells[static_cast<std::size_t>(i)] = CellState{};
                marks[static_cast<std::size_t>(i)] = 1;
            }
        }
        b.rows.push_back(next.cells);
        b.choices.push_back(std::move(marks));
        current = std::move(next);
    }
    return b;
}

TrajectoryBlock sample_hat(const LocalRule& rule, const RowConfig& first, int steps,
                           double blank_prob, std::uint64_t seed) {
    TrajectoryBlock b = make_block(StepMode::Hat, first, blank_prob, seed);
    int r = rule.radius();
    int span = 2 * r + 1;
    RowConfig current = first;
    std::vector<CellState> nbhd(static_cast<std::size_t>(span));
    for (int t = 0; t < steps; ++t) {
        RowConfig next;
        next.boundary = current.boundary;
        next.cells.resize(static_cast<std::size_t>(b.width));
        std::vector<std::uint16_t> marks(static_cast<std::size_t>(b.width), 0);
        for (int i = 0; i < b.width; ++i) {
            std::uint64_t h = cell_hash(seed, static_cast<std::uint64_t>(t + 1),
                                        static_cast<std::uint64_t>(i));
            unsigned mask = 0;
            if (unit_double(h) < blank_prob) {
                mask = static_cast<unsigned>(
                    cell_hash(seed ^ 0x5bd1e995u, static_cast<std::uint64_t>(t + 1),
                              static_cast<std::uint64_t>(i)) &
                    ((1u << span) - 1));
                marks[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(mask + 1);
            }
            for (int d = -r; d <= r; ++d)
                nbhd[static_cast<std::size_t>(d + r)] =
                    (mask >> (d + r)) & 1u ? CellState{} : current.read(i + d);
            next.cells[static_cast<std::size_t>(i)] = rule.apply(nbhd.data());
        }
        b.rows.push_back(next.cells);
        b.choices.push_back(std::move(marks));
        current = std::move(next);
    }
    return b;
}

std::vector<Violation> check_trajectory(const LocalRule& rule, const TrajectoryBlock& block) {
    if (block.row_count() < 2)
        raise(ErrorKind::Precondition, "trajectory check needs at least 2 rows");
    std::vector<Violation> out;
    for (int t = 0; t + 1 < block.row_count(); ++t) {
        RowConfig x = block.row(t);
        RowConfig y = block.row(t + 1);
        std::vector<Violation> step_violations;
        switch (block.mode) {
        case StepMode::Deterministic: {
            RowConfig image = step(rule, x);
            for (int i = 0; i < block.width; ++i)
                if (!(image.cells[static_cast<std::size_t>(i)] ==
                      y.cells[static_cast<std::size_t>(i)]))
                    step_violations.push_back(
                        {0, i, "det-step", "cell differs from the rule image"});
            break;
        }
        case StepMode::Tilde:
            step_violations = check_tilde_step(rule, x, y);
            break;
        case StepMode::Hat:
            step_violations = check_hat_step(rule, x, y);
            break;
        }
        for (Violation& v : step_violations) {
            v.t = t + 1;
            out.push_back(std::move(v));
        }
    }
    return out;
}

CellGraph::CellGraph(int width, int rows) : width_(width), rows_(rows) {
    std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(rows);
    nonblank_.assign(n, 0);
    weak_.assign(n, 0);
    strong_.assign(n, 0);
}

bool CellGraph::nonblank(int t, int i) const {
    return in_window(t, i) &&
           nonblank_[static_cast<std::size_t>(t) * static_cast<std::size_t>(width_) +
                     static_cast<std::size_t>(i)] != 0;
}

std::uint8_t CellGraph::weak_in(int t, int i) const {
    return weak_[static_cast<std::size_t>(t) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(i)];
}

std::uint8_t CellGraph::strong_in(int t, int i) const {
    return strong_[static_cast<std::size_t>(t) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(i)];
}

void CellGraph::set_nonblank(int t, int i) {
    nonblank_[static_cast<std::size_t>(t) * static_cast<std::size_t>(width_) +
              static_cast<std::size_t>(i)] = 1;
}

void CellGraph::add_edge(int t, int i, int delta, bool strong) {
    std::size_t idx = static_cast<std::size_t>(t) * static_cast<std::size_t>(width_) +
                      static_cast<std::size_t>(i);
    std::uint8_t bit = static_cast<std::uint8_t>(1u << (delta + 1));
    weak_[idx] |= bit;
    if (strong)
        strong_[idx] |= bit;
}

CellGraph build_graphs(const TrajectoryBlock& block, const LocalRule& rule,
                       DemandingOracle oracle, std::size_t budget) {
    CellGraph g(block.width, block.row_count());
    for (int t = 0; t < block.row_count(); ++t)
        for (int i = 0; i < block.width; ++i)
            if (!block.at(t, i).is_blank())
                g.set_nonblank(t, i);

    // Lazy demanding memo; the scan universe is the set of observed states.
    std::vector<CellState> universe;
    std::unordered_map<CellState, std::uint8_t, CellStateHash> seen;
    for (int t = 0; t < block.row_count(); ++t)
        for (int i = 0; i < block.width; ++i) {
            const CellState& s = block.at(t, i);
            if (seen.emplace(s, 0).second)
                universe.push_back(s);
        }
    // per state: bits 0..2 = answer for delta -1..1, bits 4..6 = answered
    std::unordered_map<CellState, std::uint8_t, CellStateHash> memo;
    auto is_demanding = [&](const CellState& s, int delta) {
        std::uint8_t& slot = memo[s];
        std::uint8_t bit = static_cast<std::uint8_t>(1u << (delta + 1));
        if (slot & static_cast<std::uint8_t>(bit << 4))
            return (slot & bit) != 0;
        bool answer;
        std::optional<bool> hint = oracle ? oracle(s, delta) : std::nullopt;
        if (hint.has_value())
            answer = *hint;
        else
            answer = demanding_exhaustive(rule, s, delta, universe, budget);
        slot |= static_cast<std::uint8_t>(bit << 4);
        if (answer)
            slot |= bit;
        return answer;
    };

    for (int t = 1; t < block.row_count(); ++t)
        for (int i = 0; i < block.width; ++i) {
            if (!g.nonblank(t, i))
                continue;
            for (int delta = -1; delta <= 1; ++delta) {
                if (!g.nonblank(t - 1, i + delta))
                    continue;
                g.add_edge(t, i, delta, is_demanding(block.at(t, i), delta));
            }
        }
    return g;
}

bool connected(const CellGraph& graph, Coord from, Coord to, bool strong) {
    if (!graph.nonblank(from.t, from.i) || !graph.nonblank(to.t, to.i))
        raise(ErrorKind::Lookup, "connectivity endpoints must be non-blank cells");
    if (from == to)
        return true;
    if (to.t < from.t)
        return false;
    std::vector<std::uint8_t> visited(
        static_cast<std::size_t>(graph.width()) * static_cast<std::size_t>(graph.rows()), 0);
    auto idx = [&](Coord c) {
        return static_cast<std::size_t>(c.t) * static_cast<std::size_t>(graph.width()) +
               static_cast<std::size_t>(c.i);
    };
    std::deque<Coord> queue{from};
    visited[idx(from)] = 1;
    while (!queue.empty()) {
        Coord cur = queue.front();
        queue.pop_front();
        // heads one row later: (t+1, cur.i - delta) has in-edge bit delta from cur
        for (int delta = -1; delta <= 1; ++delta) {
            Coord head{cur.t + 1, cur.i - delta};
            if (!graph.in_window(head.t, head.i))
                continue;
            std::uint8_t mask =
                strong ? graph.strong_in(head.t, head.i) : graph.weak_in(head.t, head.i);
            if (!(mask & (1u << (delta + 1))))
                continue;
            if (visited[idx(head)])
                continue;
            if (head == to)
                return true;
            visited[idx(head)] = 1;
            queue.push_back(head);
        }
    }
    return false;
}

} // namespace casim
