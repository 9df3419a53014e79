#pragma once

#include "latinapprox/rational.hpp"

#include <limits>
#include <queue>
#include <vector>

namespace latinapprox {

// Dinic's max-flow with exact big-integer capacities. Capacities are scaled
// rationals, so no tolerance enters the feasibility decision.
class MaxFlow {
public:
    explicit MaxFlow(int nodes) : head_(nodes, -1), level_(nodes), it_(nodes) {}

    int add_edge(int from, int to, Integer cap) {
        int id = static_cast<int>(to_.size());
        to_.push_back(to);
        cap_.push_back(std::move(cap));
        next_.push_back(head_[from]);
        head_[from] = id;
        to_.push_back(from);
        cap_.push_back(0);
        next_.push_back(head_[to]);
        head_[to] = id + 1;
        return id;
    }

    // Flow pushed through forward edge id.
    Integer flow_on(int id) const { return cap_[id ^ 1]; }

    Integer run(int s, int t) {
        Integer total = 0;
        while (bfs(s, t)) {
            it_ = head_;
            while (true) {
                Integer pushed = dfs(s, t, Integer(-1));
                if (pushed == 0) break;
                total += pushed;
            }
        }
        s_ = s;
        return total;
    }

    // After run(): nodes reachable from the source in the residual graph
    // (the source side of a minimum cut).
    std::vector<char> min_cut_side() const {
        std::vector<char> seen(head_.size(), 0);
        std::queue<int> q;
        q.push(s_);
        seen[s_] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e = head_[u]; e != -1; e = next_[e])
                if (cap_[e] > 0 && !seen[to_[e]]) {
                    seen[to_[e]] = 1;
                    q.push(to_[e]);
                }
        }
        return seen;
    }

private:
    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        q.push(s);
        level_[s] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e = head_[u]; e != -1; e = next_[e])
                if (cap_[e] > 0 && level_[to_[e]] < 0) {
                    level_[to_[e]] = level_[u] + 1;
                    q.push(to_[e]);
                }
        }
        return level_[t] >= 0;
    }

    // limit < 0 means unbounded.
    Integer dfs(int u, int t, Integer limit) {
        if (u == t) return limit < 0 ? Integer(0) : limit;  // handled by caller for source
        for (int& e = it_[u]; e != -1; e = next_[e]) {
            int v = to_[e];
            if (cap_[e] <= 0 || level_[v] != level_[u] + 1) continue;
            Integer pass = limit < 0 ? cap_[e] : (limit < cap_[e] ? limit : cap_[e]);
            if (v == t) {
                cap_[e] -= pass;
                cap_[e ^ 1] += pass;
                return pass;
            }
            Integer pushed = dfs(v, t, pass);
            if (pushed > 0) {
                cap_[e] -= pushed;
                cap_[e ^ 1] += pushed;
                return pushed;
            }
            level_[v] = -1;
        }
        return 0;
    }

    std::vector<int> head_, next_, to_, level_, it_;
    std::vector<Integer> cap_;
    int s_ = 0;
};

}  // namespace latinapprox
