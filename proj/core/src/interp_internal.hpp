#pragma once
#include "casim/interp.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace casim::detail {

struct CostMeter {
    std::int64_t time = 0;
    std::int64_t live = 0;
    std::int64_t peak = 0;
    void step(std::int64_t n = 1) { time += n; }
    void push(std::int64_t bits = 64) {
        live += bits;
        if (live > peak) peak = live;
    }
    void pop(std::int64_t bits = 64) { live -= bits; }
};

CellState eval_metered(const RuleProgram& program, const CellState& a,
                       const CellState& b, const CellState& c, EvalStats* stats,
                       CostMeter* meter);

// Decoded SimProg targets, shared by the agent builtins and the agent machine.
struct CachedTarget {
    std::shared_ptr<const RuleProgram> program;
    LocalRule rule;
    int bits = 0;
};
std::shared_ptr<const CachedTarget> cached_target(const std::string& bits);

// Colony-internal computation schedule in terms of the pre-increment age g.
// Ages are: 0..q-1 mail shift, q freeze, q+1..2q-1 gather sweep right,
// 2q..u-3-q parked at the last cell, u-2-q evaluate, u-1-q..u-3 write sweep
// left, u-2 cleanup, u-1 commit.
struct AgentSchedule {
    std::int64_t q = 0, u = 0;
    bool gather(std::int64_t g) const { return g >= q + 1 && g <= 2 * q - 1; }
    bool eval_step(std::int64_t g) const { return g == u - 2 - q; }
    bool write(std::int64_t g) const { return g >= u - 1 - q && g <= u - 3; }
    bool cleanup(std::int64_t g) const { return g == u - 2; }
};

inline constexpr std::uint32_t kBufferMask = (1u << 24) - 1;
inline constexpr int kMaxAgentBits = 8;  // 3 bits gathered per target bit

Value builtin_agent_work(const std::vector<Value>& args);
Value builtin_agent_out(const std::vector<Value>& args);
Value builtin_agent_doom(const std::vector<Value>& args);

} // namespace casim::detail
