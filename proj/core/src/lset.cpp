#include "casim/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <set>

namespace casim {

namespace {

// points keyed (t, i); labels[0] = "Non", labels[k] = point k-1
struct LData {
    int n = 0;
    std::vector<LPoint> points;
    std::vector<std::string> labels;
    std::map<std::string, int> label_index;
    // f_n as a table over label indices: (a,b,c) -> target index (0 = Non)
    std::map<std::array<int, 3>, int> rule;
};

void build_points(int n, std::set<std::pair<int, int>>& out, int di, int dt) {
    if (n == 1) {
        out.insert({dt, di});
        return;
    }
    if (n == 2) {
        out.insert({dt, di});
        for (int i = -1; i <= 1; ++i) out.insert({dt + 1, di + i});
        return;
    }
    int n_hi = (n + 2) / 2;  // ceil((n+1)/2)
    int n_lo = (n + 1) / 2;  // floor((n+1)/2)
    for (int k = 0; k < n_lo; ++k) out.insert({dt + k, di - k});
    for (int k = 0; k < n_hi; ++k) out.insert({dt + k, di + k});
    build_points(n_hi, out, di - n_lo + 1, dt + n_lo - 1);
    build_points(n_lo, out, di + n_hi - 1, dt + n_hi - 1);
}

int ceil_log2(int x) {
    int b = 0;
    while ((1 << b) < x) ++b;
    return b;
}

std::shared_ptr<const LData> build(int n) {
    if (n < 1) raise(ErrorKind::Precondition, "level must be at least 1");
    auto d = std::make_shared<LData>();
    d->n = n;
    std::set<std::pair<int, int>> raw;
    build_points(n, raw, 0, 0);
    for (const auto& [t, i] : raw) d->points.push_back({i, t});

    // containment and full top row
    std::map<int, int> column_count;
    std::set<int> top_row;
    for (const LPoint& p : d->points) {
        if (p.i < -n + 1 || p.i > n - 1 || p.t < 0 || p.t > n - 1)
            raise(ErrorKind::Internal, "point outside the bounding box");
        ++column_count[p.i];
        if (p.t == n - 1) top_row.insert(p.i);
    }
    if (static_cast<int>(top_row.size()) != 2 * n - 1)
        raise(ErrorKind::Internal, "top row of the point set is not full");

    // per-column cardinality bound
    int bound = 2 * ceil_log2(n + 1) + 2;
    for (const auto& [col, count] : column_count)
        if (count > bound)
            raise(ErrorKind::Internal,
                  "column " + std::to_string(col) + " holds " + std::to_string(count) +
                      " points, bound " + std::to_string(bound));

    d->labels.push_back("Non");
    for (const LPoint& p : d->points) d->labels.push_back(l_label_of(p));
    for (std::size_t k = 0; k < d->labels.size(); ++k)
        d->label_index[d->labels[k]] = static_cast<int>(k);

    // eta rows: index of the label at (i, t), 0 where no point
    auto eta = [&](int t, int i) -> int {
        auto it = raw.find({t, i});
        if (it == raw.end()) return 0;
        return d->label_index.at(l_label_of({i, t}));
    };

    // evolution table: each point of row t >= 1 is produced by its
    // radius-1 neighborhood in row t-1; collisions would make it ill-defined
    for (const LPoint& p : d->points) {
        if (p.t == 0) continue;
        std::array<int, 3> key{eta(p.t - 1, p.i - 1), eta(p.t - 1, p.i),
                               eta(p.t - 1, p.i + 1)};
        if (key == std::array<int, 3>{0, 0, 0})
            raise(ErrorKind::Internal,
                  "point " + l_label_of(p) + " has an all-blank neighborhood");
        int target = d->label_index.at(l_label_of(p));
        auto [it, inserted] = d->rule.emplace(key, target);
        if (!inserted && it->second != target)
            raise(ErrorKind::Internal,
                  "neighborhood collision between " + d->labels[static_cast<std::size_t>(
                                                          it->second)] +
                      " and " + l_label_of(p));
    }

    // replaying the rule from row 0 must reproduce every later row exactly
    std::map<int, int> row;
    row[0] = d->label_index.at("E0_0");
    for (int t = 1; t <= n - 1; ++t) {
        std::map<int, int> next;
        for (int i = -n + 1; i <= n - 1; ++i) {
            auto at = [&](int j) {
                auto it = row.find(j);
                return it == row.end() ? 0 : it->second;
            };
            auto it = d->rule.find({at(i - 1), at(i), at(i + 1)});
            int v = it == d->rule.end() ? 0 : it->second;
            if (v != eta(t, i))
                raise(ErrorKind::Internal,
                      "evolution mismatch at row " + std::to_string(t) + ", column " +
                          std::to_string(i));
            if (v != 0) next[i] = v;
        }
        row = std::move(next);
    }
    return d;
}

std::shared_ptr<const LData> cached(int n) {
    static std::mutex m;
    static std::map<int, std::shared_ptr<const LData>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto d = build(n);
    cache.emplace(n, d);
    return d;
}

} // namespace

std::string l_label_of(const LPoint& p) {
    std::string s = "E";
    if (p.i < 0)
        s += "m" + std::to_string(-p.i);
    else
        s += std::to_string(p.i);
    s += "_" + std::to_string(p.t);
    return s;
}

std::vector<LPoint> l_set(int n) { return cached(n)->points; }

std::vector<std::string> l_labels(int n) { return cached(n)->labels; }

std::string l_rule(int n, const std::string& a, const std::string& b,
                   const std::string& c) {
    auto d = cached(n);
    auto idx = [&](const std::string& name) {
        auto it = d->label_index.find(name);
        if (it == d->label_index.end())
            raise(ErrorKind::Lookup, "unknown pattern label '" + name + "'");
        return it->second;
    };
    auto it = d->rule.find({idx(a), idx(b), idx(c)});
    if (it == d->rule.end()) return "Non";
    return d->labels[static_cast<std::size_t>(it->second)];
}

} // namespace casim
