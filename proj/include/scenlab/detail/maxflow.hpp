#pragma once

#include <cstddef>
#include <queue>
#include <vector>

namespace scenlab::detail {

/// Dinic max-flow with double capacities; small graphs only (bipartite
/// coupling feasibility checks), so the classic O(V^2 E) bound is ample.
class MaxFlow {
  public:
    explicit MaxFlow(int n) : graph_(static_cast<std::size_t>(n)) {}

    void add_edge(int u, int v, double cap) {
        auto& gu = graph_[static_cast<std::size_t>(u)];
        auto& gv = graph_[static_cast<std::size_t>(v)];
        gu.push_back({v, cap, static_cast<int>(gv.size())});
        gv.push_back({u, 0.0, static_cast<int>(gu.size()) - 1});
    }

    double run(int s, int t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            iter_.assign(graph_.size(), 0);
            while (true) {
                const double f = dfs(s, t, kInf);
                if (f <= kEps) break;
                flow += f;
            }
        }
        return flow;
    }

  private:
    struct Edge {
        int to;
        double cap;
        int rev;
    };

    static constexpr double kInf = 1e30;
    static constexpr double kEps = 1e-14;

    bool bfs(int s, int t) {
        level_.assign(graph_.size(), -1);
        std::queue<int> q;
        level_[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (const Edge& e : graph_[static_cast<std::size_t>(u)]) {
                if (e.cap > kEps && level_[static_cast<std::size_t>(e.to)] < 0) {
                    level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
                    q.push(e.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }

    double dfs(int u, int t, double pushed) {
        if (u == t) return pushed;
        for (int& i = iter_[static_cast<std::size_t>(u)];
             i < static_cast<int>(graph_[static_cast<std::size_t>(u)].size()); ++i) {
            Edge& e = graph_[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)];
            if (e.cap <= kEps || level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(u)] + 1)
                continue;
            const double f = dfs(e.to, t, std::min(pushed, e.cap));
            if (f > kEps) {
                e.cap -= f;
                graph_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += f;
                return f;
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Edge>> graph_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

} // namespace scenlab::detail
