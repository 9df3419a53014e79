#pragma once

#include "latinapprox/errors.hpp"

#include <utility>
#include <vector>

namespace latinapprox {

// Proper edge coloring of a bipartite multigraph with `colors` >= max degree
// colors (Koenig's theorem, constructive). Edges are processed in input
// order; when the smallest color free at the left endpoint is busy at the
// right endpoint, the two-colored alternating path starting at the right
// endpoint is flipped. The path can never reach the left endpoint (it would
// have to arrive on a color that endpoint is missing), so the flip is safe.
// Deterministic. O(E * path length).
inline std::vector<int> bipartite_edge_coloring(int n_left, int n_right,
                                                const std::vector<std::pair<int, int>>& edges,
                                                int colors) {
    const int V = n_left + n_right;
    std::vector<int> deg(V, 0);
    for (auto& [u, v] : edges) {
        ++deg[u];
        ++deg[n_left + v];
    }
    for (int x = 0; x < V; ++x)
        if (deg[x] > colors)
            throw ConfigError("bipartite_edge_coloring: a vertex degree exceeds the color count");

    // at[v][c] = edge currently colored c at vertex v, or -1.
    std::vector<std::vector<int>> at(V, std::vector<int>(colors, -1));
    std::vector<int> color(edges.size(), -1);
    std::vector<std::pair<int, int>> ends(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) ends[e] = {edges[e].first, n_left + edges[e].second};

    auto other = [&](int e, int x) { return ends[e].first == x ? ends[e].second : ends[e].first; };

    for (size_t e0 = 0; e0 < edges.size(); ++e0) {
        int u = ends[e0].first, v = ends[e0].second;
        int a = 0;
        while (at[u][a] != -1) ++a;
        if (at[v][a] == -1) {
            at[u][a] = at[v][a] = static_cast<int>(e0);
            color[e0] = a;
            continue;
        }
        int b = 0;
        while (at[v][b] != -1) ++b;
        // Flip the a/b alternating path starting at v, freeing color a there.
        int cur = v, ca = a, cb = b;
        int e = at[cur][ca];
        at[cur][ca] = -1;
        while (e != -1) {
            int w = other(e, cur);
            int nxt = at[w][cb];
            at[w][ca] = -1;
            at[cur][cb] = e;
            at[w][cb] = e;
            color[e] = cb;
            cur = w;
            std::swap(ca, cb);
            e = nxt;
        }
        at[u][a] = at[v][a] = static_cast<int>(e0);
        color[e0] = a;
    }
    return color;
}

}  // namespace latinapprox
