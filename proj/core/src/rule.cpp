#include "casim/rule.hpp"

#include <algorithm>
#include <thread>

namespace casim {

LocalRule::LocalRule(int state_bits, int radius, ApplyFn fn, std::string origin)
    : state_bits_(state_bits), radius_(radius), fn_(std::move(fn)), origin_(std::move(origin)) {
    if (state_bits_ < 1 || state_bits_ > kMaxStateBits)
        raise(ErrorKind::Capacity, "rule state width out of range");
    if (radius_ < 1)
        raise(ErrorKind::Precondition, "rule radius must be >= 1");
    std::vector<CellState> blanks(static_cast<std::size_t>(2 * radius_ + 1));
    quiescent_ = fn_(blanks.data()).is_blank();
}

CellState LocalRule::apply3(const CellState& l, const CellState& c, const CellState& r) const {
    if (radius_ != 1)
        raise(ErrorKind::Precondition, "apply3 requires a radius-1 rule");
    CellState nbhd[3] = {l, c, r};
    return fn_(nbhd);
}

CellState RowConfig::read(long long i) const {
    long long n = width();
    if (i >= 0 && i < n)
        return cells[static_cast<std::size_t>(i)];
    if (boundary == Boundary::BlankPadded)
        return CellState{};
    long long m = ((i % n) + n) % n;
    return cells[static_cast<std::size_t>(m)];
}

namespace {

void step_range(const LocalRule& rule, const RowConfig& row, int begin, int end,
                std::vector<CellState>& out) {
    int r = rule.radius();
    std::vector<CellState> nbhd(static_cast<std::size_t>(2 * r + 1));
    for (int i = begin; i < end; ++i) {
        for (int d = -r; d <= r; ++d)
            nbhd[static_cast<std::size_t>(d + r)] = row.read(i + d);
        out[static_cast<std::size_t>(i)] = rule.apply(nbhd.data());
    }
}

} // namespace

RowConfig step(const LocalRule& rule, const RowConfig& row, int threads) {
    if (row.width() < 1)
        raise(ErrorKind::Precondition, "step requires a nonempty row");
    RowConfig out;
    out.boundary = row.boundary;
    out.cells.resize(row.cells.size());
    int n = row.width();
    int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        step_range(rule, row, 0, n, out.cells);
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int begin = w * chunk;
        int end = std::min(n, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back(
            [&rule, &row, begin, end, &out] { step_range(rule, row, begin, end, out.cells); });
    }
    for (std::thread& t : pool)
        t.join();
    return out;
}

std::vector<CellState> step_word(const LocalRule& rule, const std::vector<CellState>& word) {
    int r = rule.radius();
    int span = 2 * r + 1;
    if (static_cast<int>(word.size()) < span)
        raise(ErrorKind::Length, "step_word needs at least " + std::to_string(span) + " cells");
    std::vector<CellState> out(word.size() - static_cast<std::size_t>(2 * r));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = rule.apply(word.data() + i);
    return out;
}

std::vector<Violation> check_tilde_step(const LocalRule& rule, const RowConfig& x,
                                        const RowConfig& y) {
    if (x.width() != y.width())
        raise(ErrorKind::Length, "row widths differ");
    std::vector<Violation> out;
    int r = rule.radius();
    std::vector<CellState> nbhd(static_cast<std::size_t>(2 * r + 1));
    for (int i = 0; i < x.width(); ++i) {
        const CellState& got = y.cells[static_cast<std::size_t>(i)];
        if (got.is_blank())
            continue;
        for (int d = -r; d <= r; ++d)
            nbhd[static_cast<std::size_t>(d + r)] = x.read(i + d);
        if (rule.apply(nbhd.data()) == got)
            continue;
        out.push_back({0, i, "tilde-step", "cell is neither the rule image nor blank"});
    }
    return out;
}

std::vector<Violation> check_hat_step(const LocalRule& rule, const RowConfig& x,
                                      const RowConfig& y) {
    if (x.width() != y.width())
        raise(ErrorKind::Length, "row widths differ");
    std::vector<Violation> out;
    int r = rule.radius();
    int span = 2 * r + 1;
    std::vector<CellState> nbhd(static_cast<std::size_t>(span));
    std::vector<CellState> masked(static_cast<std::size_t>(span));
    for (int i = 0; i < x.width(); ++i) {
        const CellState& got = y.cells[static_cast<std::size_t>(i)];
        if (got.is_blank())
            continue;
        for (int d = -r; d <= r; ++d)
            nbhd[static_cast<std::size_t>(d + r)] = x.read(i + d);
        bool ok = false;
        for (unsigned mask = 0; mask < (1u << span) && !ok; ++mask) {
            for (int j = 0; j < span; ++j)
                masked[static_cast<std::size_t>(j)] =
                    (mask >> j) & 1u ? CellState{} : nbhd[static_cast<std::size_t>(j)];
            ok = rule.apply(masked.data()) == got;
        }
        if (!ok)
            out.push_back({0, i, "hat-step", "cell outside every blanking-subset image"});
    }
    return out;
}

LocalRule compose_shift_power(const LocalRule& rule, int shift, int power) {
    if (power < 1)
        raise(ErrorKind::Precondition, "power must be >= 1");
    int r = rule.radius();
    int radius = power * r + std::abs(shift);
    int span = 2 * radius + 1;
    // capture by value so the composed rule owns its ingredients
    LocalRule inner = rule;
    auto fn = [inner, shift, power, radius, span](const CellState* nbhd) {
        std::vector<CellState> word(nbhd, nbhd + span);
        for (int k = 0; k < power; ++k)
            word = step_word(inner, word);
        // word is centered on the original center; entry |shift| is the center
        long long center = (static_cast<long long>(word.size()) - 1) / 2;
        return word[static_cast<std::size_t>(center + shift)];
    };
    return LocalRule(rule.state_bits(), radius, std::move(fn),
                     "composed(shift=" + std::to_string(shift) +
                         ",power=" + std::to_string(power) + "," + rule.origin() + ")");
}

bool demanding_exhaustive(const LocalRule& rule, const CellState& c, int delta,
                          std::vector<CellState> universe, std::size_t budget) {
    if (rule.radius() != 1)
        raise(ErrorKind::Precondition, "demanding scan requires a radius-1 rule");
    if (delta < -1 || delta > 1)
        raise(ErrorKind::Precondition, "delta must be in {-1,0,1}");
    if (std::find(universe.begin(), universe.end(), CellState{}) == universe.end())
        universe.push_back(CellState{});
    std::size_t n = universe.size();
    if (n * n * n > budget)
        raise(ErrorKind::Capacity, "demanding scan over " + std::to_string(n) +
                                       " states exceeds the triple budget");
    for (const CellState& l : universe)
        for (const CellState& x : universe)
            for (const CellState& r : universe) {
                if (!(rule.apply3(l, x, r) == c))
                    continue;
                const CellState& component = delta < 0 ? l : (delta > 0 ? r : x);
                if (component.is_blank())
                    return false;
            }
    return true;
}

} // namespace casim
