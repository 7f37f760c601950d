#include "casim/interp.hpp"

#include <memory>
#include <mutex>
#include <unordered_map>

namespace casim {

namespace {

// Shared across copies of the returned LocalRule's apply function.
struct Memo {
    std::shared_ptr<const RuleProgram> program;
    int k = 0;
    std::mutex m;

    // 3k <= 20: dense table indexed by a | b<<k | c<<2k, value+1 (0 = unset)
    std::vector<std::uint64_t> dense;
    bool use_dense = false;

    // otherwise a bounded map over the full triple of states
    struct KeyHash {
        std::size_t operator()(const std::array<std::uint64_t, 6>& k) const {
            std::uint64_t h = 0x9e3779b97f4a7c15ull;
            for (std::uint64_t w : k) {
                h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            }
            return static_cast<std::size_t>(h);
        }
    };
    std::unordered_map<std::array<std::uint64_t, 6>, CellState, KeyHash> map;
    static constexpr std::size_t kMapLimit = 1u << 23;
};

} // namespace

LocalRule rule_of(const RuleProgram& program) {
    if (!program.validated)
        raise(ErrorKind::Precondition, "program has not been validated");
    auto memo = std::make_shared<Memo>();
    memo->program = std::make_shared<RuleProgram>(program);  // snapshot
    memo->k = program.state_bits();
    if (3 * memo->k <= 20) {
        memo->use_dense = true;
        memo->dense.assign(1ull << (3 * memo->k), 0);
    }
    int k = memo->k;
    auto fn = [memo, k](const CellState* cells) -> CellState {
        const CellState& a = cells[0];
        const CellState& b = cells[1];
        const CellState& c = cells[2];
        if (memo->use_dense) {
            std::uint64_t idx = a.w[0] | (b.w[0] << k) | (c.w[0] << (2 * k));
            {
                std::lock_guard<std::mutex> lock(memo->m);
                std::uint64_t hit = memo->dense[idx];
                if (hit) {
                    CellState r;
                    r.w[0] = hit - 1;
                    return r;
                }
            }
            CellState r = eval(*memo->program, a, b, c);
            std::lock_guard<std::mutex> lock(memo->m);
            memo->dense[idx] = r.w[0] + 1;
            return r;
        }
        std::array<std::uint64_t, 6> key{a.w[0], a.w[1], b.w[0],
                                         b.w[1], c.w[0], c.w[1]};
        {
            std::lock_guard<std::mutex> lock(memo->m);
            auto it = memo->map.find(key);
            if (it != memo->map.end()) return it->second;
        }
        CellState r = eval(*memo->program, a, b, c);
        std::lock_guard<std::mutex> lock(memo->m);
        if (memo->map.size() >= Memo::kMapLimit) memo->map.clear();
        memo->map.emplace(key, r);
        return r;
    };
    return LocalRule(k, 1, std::move(fn), "rule_of(program)");
}

} // namespace casim
