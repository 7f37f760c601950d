#include "casim/sim.hpp"

#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace casim {

namespace {

const char* variant_name(RigidityVariant v) {
    switch (v) {
    case RigidityVariant::Rigid: return "rigidity";
    case RigidityVariant::Weak: return "rigidity-weak";
    case RigidityVariant::Strong: return "rigidity-strong";
    }
    return "rigidity";
}

} // namespace

std::vector<Violation> audit_rigidity(const SimulationDescriptor& d,
                                      const LocalRule& target_rule,
                                      const TrajectoryBlock& block,
                                      RigidityVariant variant) {
    std::vector<Violation> out;
    bool periodic = block.boundary == Boundary::Periodic;
    const char* kind = variant_name(variant);
    // Every (col, row) alignment of the macro-cell lattice is a decode of a
    // shifted sub-block, so one sampled block yields q*u checks.
    for (int r0 = 0; r0 < d.u; ++r0) {
        int rows = (block.row_count() - r0) / d.u;
        if (rows < 2) break;
        for (int c0 = 0; c0 < d.q; ++c0) {
            if (periodic && (c0 != 0 || block.width % d.q != 0)) continue;
            int cols = (block.width - c0) / d.q;
            if (cols < (periodic ? 1 : 3)) continue;
            auto grid = decode(d, block, c0, r0, cols, rows);
            for (int r = 0; r + 1 < rows; ++r) {
                RowConfig from{grid[static_cast<std::size_t>(r)], block.boundary};
                RowConfig to{grid[static_cast<std::size_t>(r) + 1], block.boundary};
                auto step = variant == RigidityVariant::Weak
                                ? check_hat_step(target_rule, from, to)
                                : check_tilde_step(target_rule, from, to);
                for (const Violation& v : step) {
                    // edge target cells read truncated neighborhoods
                    if (!periodic && (v.i == 0 || v.i == cols - 1)) continue;
                    out.push_back({r0 + (r + 1) * static_cast<long long>(d.u),
                                   c0 + v.i * static_cast<long long>(d.q), kind,
                                   v.detail + "; alignment (" + std::to_string(c0) +
                                       "," + std::to_string(r0) + ")"});
                }
            }
        }
    }
    return out;
}

std::vector<Violation> audit_connecting(const SimulationDescriptor& d,
                                        const LocalRule& host_rule,
                                        const LocalRule& target_rule,
                                        const TrajectoryBlock& block,
                                        const DemandingOracle& oracle) {
    std::vector<Violation> out;
    int tk = d.target_layout.width();
    if (tk > 8)
        raise(ErrorKind::Capacity,
              "connecting audit scans all target states; needs at most 8 state bits, got " +
                  std::to_string(tk));
    std::vector<CellState> universe;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << tk); ++v) {
        CellState s;
        s.w[0] = v;
        universe.push_back(s);
    }
    std::map<std::pair<std::uint64_t, int>, bool> memo;
    auto target_demanding = [&](const CellState& s, int delta) {
        auto key = std::make_pair(s.w[0], delta);
        auto it = memo.find(key);
        if (it == memo.end())
            it = memo.emplace(key, demanding_exhaustive(target_rule, s, delta, universe))
                     .first;
        return it->second;
    };

    int cols = block.width / d.q;
    int rows = block.row_count() / d.u;
    if (rows < 2 || cols < 1) return out;
    auto grid = decode(d, block, 0, 0, cols, rows);
    CellGraph graph = build_graphs(block, host_rule, oracle);

    for (int t = 1; t < rows; ++t)
        for (int i = 0; i < cols; ++i) {
            const CellState& child = grid[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
            if (child.is_blank()) continue;
            for (int delta = -1; delta <= 1; ++delta) {
                int j = i + delta;
                if (j < 0 || j >= cols) continue;
                if (grid[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(j)]
                        .is_blank())
                    continue;
                if (!target_demanding(child, delta)) continue;
                Coord from{(t - 1) * d.u + d.base_row, j * d.q + d.base_col};
                Coord to{t * d.u + d.base_row, i * d.q + d.base_col};
                if (!connected(graph, from, to, true))
                    out.push_back({to.t, to.i, "connecting",
                                   "no demanding path from base (" +
                                       std::to_string(from.i) + "," +
                                       std::to_string(from.t) + ")"});
            }
        }
    return out;
}

std::vector<Violation> audit_overlap(const SimulationDescriptor& d,
                                     const std::vector<Coord>& anchors) {
    std::vector<Violation> out;
    long long di_limit = d.q;
    long long dt_limit = d.u - 3LL * d.q;
    for (std::size_t a = 0; a < anchors.size(); ++a)
        for (std::size_t b = a + 1; b < anchors.size(); ++b) {
            long long di = std::llabs(static_cast<long long>(anchors[a].i) - anchors[b].i);
            long long dt = std::llabs(static_cast<long long>(anchors[a].t) - anchors[b].t);
            if (di < di_limit && dt < dt_limit)
                out.push_back({anchors[b].t, anchors[b].i, "overlap",
                               "window overlaps the anchor at (" +
                                   std::to_string(anchors[a].i) + "," +
                                   std::to_string(anchors[a].t) + ")"});
        }
    return out;
}

std::vector<Violation> audit_overlap_composed(const SimulationDescriptor& d,
                                              const std::vector<Coord>& anchors) {
    std::vector<Violation> out;
    for (std::size_t a = 0; a < anchors.size(); ++a)
        for (std::size_t b = a + 1; b < anchors.size(); ++b) {
            long long di = std::llabs(static_cast<long long>(anchors[a].i) - anchors[b].i);
            long long dt = std::llabs(static_cast<long long>(anchors[a].t) - anchors[b].t);
            if (3 * di < d.q && 3 * dt < d.u)
                out.push_back({anchors[b].t, anchors[b].i, "overlap-composed",
                               "windows share more than two thirds of both periods with (" +
                                   std::to_string(anchors[a].i) + "," +
                                   std::to_string(anchors[a].t) + ")"});
        }
    return out;
}

std::vector<Violation> audit_parents(const SimulationDescriptor& d,
                                     const TrajectoryBlock& block,
                                     const ParentBounds& bounds) {
    std::vector<Violation> out;
    int w = block.width;
    int h = block.row_count();
    std::vector<Coord> anchors = find_macrocells(d, block);
    std::vector<std::vector<int>> prefix(static_cast<std::size_t>(h) + 1,
                                         std::vector<int>(static_cast<std::size_t>(w) + 1, 0));
    for (const Coord& a : anchors)
        prefix[static_cast<std::size_t>(a.t) + 1][static_cast<std::size_t>(a.i) + 1] += 1;
    for (int t = 1; t <= h; ++t)
        for (int i = 1; i <= w; ++i)
            prefix[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] +=
                prefix[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(i)] +
                prefix[static_cast<std::size_t>(t)][static_cast<std::size_t>(i) - 1] -
                prefix[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(i) - 1];
    auto rect_count = [&](long long t0, long long t1, long long i0, long long i1) {
        return prefix[static_cast<std::size_t>(t1 + 1)][static_cast<std::size_t>(i1 + 1)] -
               prefix[static_cast<std::size_t>(t0)][static_cast<std::size_t>(i1 + 1)] -
               prefix[static_cast<std::size_t>(t1 + 1)][static_cast<std::size_t>(i0)] +
               prefix[static_cast<std::size_t>(t0)][static_cast<std::size_t>(i0)];
    };

    for (int t = 0; t < h; ++t)
        for (int i = 0; i < w; ++i) {
            if (block.at(t, i).is_blank()) continue;
            long long i0 = i - bounds.left;
            long long i1 = i + bounds.right;
            long long t0 = t - bounds.back;
            long long t1 = t;
            // only decisive when the whole search window is scannable
            if (i0 < 0 || t0 < 0 || i1 > w - d.q || t1 > h - d.u) continue;
            if (rect_count(t0, t1, i0, i1) == 0)
                out.push_back({t, i, "parents",
                               "no anchor within [" + std::to_string(i0) + "," +
                                   std::to_string(i1) + "] x [" + std::to_string(t0) +
                                   "," + std::to_string(t1) + "]"});
        }
    return out;
}

std::string audit_report(const std::string& kind,
                         const std::vector<Violation>& violations,
                         std::int64_t checked) {
    std::string out;
    for (const Violation& v : violations) {
        out += "VIOLATION " + kind + " at (" + std::to_string(v.i) + "," +
               std::to_string(v.t) + ") detail=" + v.detail + "\n";
    }
    if (violations.empty())
        out += "OK " + kind + " checked=" + std::to_string(checked) + "\n";
    return out;
}

} // namespace casim
