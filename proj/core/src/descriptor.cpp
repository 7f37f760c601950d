#include "casim/sim.hpp"

#include <string>
#include <utility>

namespace casim {

namespace {

bool layouts_match(const FieldLayout& a, const FieldLayout& b) {
    if (a.width() != b.width() || a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Field& fa = a.at(i);
        const Field& fb = b.at(i);
        if (fa.name != fb.name || fa.kind != fb.kind || fa.width != fb.width ||
            fa.offset != fb.offset)
            return false;
    }
    return true;
}

void check_window(const SimulationDescriptor& d, const TrajectoryBlock& block,
                  int col0, int row0, int cols, int rows) {
    if (cols < 0 || rows < 0 || col0 < 0 || row0 < 0)
        raise(ErrorKind::Precondition, "decode window must be non-negative");
    if (col0 + cols * d.q > block.width || row0 + rows * d.u > block.row_count())
        raise(ErrorKind::Length,
              "decode window " + std::to_string(cols) + "x" + std::to_string(rows) +
                  " at (" + std::to_string(col0) + "," + std::to_string(row0) +
                  ") exceeds the " + std::to_string(block.width) + "x" +
                  std::to_string(block.row_count()) + " block");
}

PatternReader window_reader(const TrajectoryBlock& block, int col0, int row0) {
    return [&block, col0, row0](int col, int row) { return block.at(row0 + row, col0 + col); };
}

} // namespace

RowConfig encode(const SimulationDescriptor& d, const RowConfig& target_row) {
    if (!d.encoder)
        raise(ErrorKind::Precondition,
              "descriptor '" + d.name + "' does not provide an encoder");
    return d.encoder(target_row);
}

CellState decode_one(const SimulationDescriptor& d, const TrajectoryBlock& block,
                     int col0, int row0) {
    check_window(d, block, col0, row0, 1, 1);
    PatternReader read = window_reader(block, col0, row0);
    return d.macro_predicate(read) ? d.state_fn(read) : CellState{};
}

std::vector<std::vector<CellState>> decode(const SimulationDescriptor& d,
                                           const TrajectoryBlock& block, int col0,
                                           int row0, int cols, int rows) {
    check_window(d, block, col0, row0, cols, rows);
    std::vector<std::vector<CellState>> out(static_cast<std::size_t>(rows));
    for (int t = 0; t < rows; ++t) {
        auto& row = out[static_cast<std::size_t>(t)];
        row.resize(static_cast<std::size_t>(cols));
        for (int i = 0; i < cols; ++i) {
            PatternReader read = window_reader(block, col0 + i * d.q, row0 + t * d.u);
            row[static_cast<std::size_t>(i)] =
                d.macro_predicate(read) ? d.state_fn(read) : CellState{};
        }
    }
    return out;
}

SimulationDescriptor compose_sim(const SimulationDescriptor& outer,
                                 const SimulationDescriptor& inner) {
    if (!layouts_match(outer.target_layout, inner.host_layout))
        raise(ErrorKind::Precondition,
              "compose_sim: target layout of '" + outer.name +
                  "' differs from host layout of '" + inner.name + "'");
    SimulationDescriptor d;
    d.q = outer.q * inner.q;
    d.u = outer.u * inner.u;
    d.base_col = outer.base_col + outer.q * inner.base_col;
    d.base_row = outer.base_row + outer.u * inner.base_row;
    d.host_layout = outer.host_layout;
    d.target_layout = inner.target_layout;
    d.name = outer.name + " o " + inner.name;

    // Decodes the outer blocks lazily, presenting the inner descriptor with a
    // window of mid-level states.
    auto lift = [op = outer.macro_predicate, os = outer.state_fn, oq = outer.q,
                 ou = outer.u](PatternReader read) {
        return PatternReader([op, os, oq, ou, read = std::move(read)](int mc, int mr) {
            PatternReader sub = [&read, mc, mr, oq, ou](int c, int r) {
                return read(mc * oq + c, mr * ou + r);
            };
            return op(sub) ? os(sub) : CellState{};
        });
    };
    d.macro_predicate = [lift, pred = inner.macro_predicate](const PatternReader& read) {
        return pred(lift(read));
    };
    d.state_fn = [lift, state = inner.state_fn](const PatternReader& read) {
        return state(lift(read));
    };
    d.base_hint = outer.base_hint;
    if (outer.encoder && inner.encoder)
        d.encoder = [oe = outer.encoder, ie = inner.encoder](const RowConfig& row) {
            return oe(ie(row));
        };
    return d;
}

std::vector<Coord> find_macrocells(const SimulationDescriptor& d,
                                   const TrajectoryBlock& block, bool lattice) {
    std::vector<Coord> out;
    int step_i = lattice ? d.q : 1;
    int step_t = lattice ? d.u : 1;
    for (int t = 0; t + d.u <= block.row_count(); t += step_t)
        for (int i = 0; i + d.q <= block.width; i += step_i) {
            if (d.base_hint &&
                !d.base_hint(block.at(t + d.base_row, i + d.base_col)))
                continue;
            if (d.macro_predicate(window_reader(block, i, t)))
                out.push_back(Coord{t, i});
        }
    return out;
}

} // namespace casim
