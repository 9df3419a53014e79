#pragma once

#include "latinapprox/errors.hpp"
#include "latinapprox/maxflow.hpp"
#include "latinapprox/partition.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

namespace latinapprox {

namespace detail {

// Least common multiple of the denominators; scaling by it turns all
// weights/targets into exact integers for the flow solver.
inline Integer common_denominator(const AtomizedSpace& space, const RadoInstance& inst) {
    Integer l = 1;
    auto fold = [&l](const Rational& q) { l = lcm(l, denominator(q)); };
    for (const auto& w : space.weights) fold(w);
    for (const auto& t : inst.targets) fold(t);
    return l;
}

struct FractionalAllocation {
    // x[a] = list of (set, scaled flow > 0) the atom is split across.
    std::vector<std::vector<std::pair<int, Integer>>> x;
};

}  // namespace detail

// Exhaustively enumerated Hall check for small instances (test oracle).
inline bool hall_feasible_bruteforce(const AtomizedSpace& space, const RadoInstance& inst,
                                     std::vector<int>* witness = nullptr) {
    const int n = inst.size();
    if (n > 20) throw ConfigError("hall_feasible_bruteforce limited to n <= 20");
    const Integer L = detail::common_denominator(space, inst);
    std::vector<Integer> w(space.size()), t(n);
    for (int a = 0; a < space.size(); ++a) w[a] = scaled_int(space.weights[a], L);
    for (int i = 0; i < n; ++i) t[i] = scaled_int(inst.targets[i], L);
    std::vector<unsigned> atom_mask(space.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int a : inst.cover_sets[i]) atom_mask[a] |= 1u << i;

    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        Integer lhs = 0, rhs = 0;
        for (int a = 0; a < space.size(); ++a)
            if (atom_mask[a] & mask) lhs += w[a];
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) rhs += t[i];
        if (lhs < rhs) {
            if (witness) {
                witness->clear();
                for (int i = 0; i < n; ++i)
                    if (mask & (1u << i)) witness->push_back(i);
            }
            return false;
        }
    }
    return true;
}

// Rado allocation on an atomized space, by max-flow plus whole-atom
// reassignment along the flow.
//
//   source -> set i            capacity = target_i
//   set i  -> atom a in S_i    effectively unbounded
//   atom a -> sink             capacity = weight_a
//
// If the flow value falls short of the total measure, the reachable side of
// the minimum cut is a Hall-violating subset and is thrown as the witness.
// Otherwise split atoms are resolved per支tree of the fractional support:
// cycles are cancelled exactly (set loads unchanged), which leaves at most
// (sets in tree - 1) split atoms per tree; those few are assigned by exact
// search minimizing the worst deviation, lexicographically smallest on ties.
// A deviation above `tolerance` (default: the largest atom weight) or an
// empty cell raises AtomTooCoarse, since an empty cell cannot carry its
// representative.
inline Partition rado_allocate(const AtomizedSpace& space, const RadoInstance& inst,
                               const std::vector<GroupElement>& witnesses = {},
                               std::optional<Rational> tolerance = std::nullopt) {
    const int n = inst.size();
    const int A = space.size();
    if (n == 0) throw ConfigError("rado_allocate: empty instance");
    Rational total_t(0);
    for (const auto& t : inst.targets) {
        if (t <= 0) throw ConfigError("rado_allocate: targets must be positive");
        total_t += t;
    }
    if (total_t != space.total()) throw ConfigError("rado_allocate: targets must sum to the total measure");

    const Integer L = detail::common_denominator(space, inst);
    std::vector<Integer> wS(A), tS(n);
    Integer totalS = 0;
    for (int a = 0; a < A; ++a) wS[a] = scaled_int(space.weights[a], L);
    for (int i = 0; i < n; ++i) {
        tS[i] = scaled_int(inst.targets[i], L);
        totalS += tS[i];
    }

    // Nodes: 0 = source, 1..n = sets, n+1..n+A = atoms, n+A+1 = sink.
    MaxFlow flow(n + A + 2);
    const int SRC = 0, SINK = n + A + 1;
    std::vector<int> src_edges(n);
    std::vector<std::vector<std::pair<int, int>>> set_edges(n);  // (atom, edge id)
    for (int i = 0; i < n; ++i) src_edges[i] = flow.add_edge(SRC, 1 + i, tS[i]);
    const Integer INF = totalS + 1;
    for (int i = 0; i < n; ++i)
        for (int a : inst.cover_sets[i])
            set_edges[i].emplace_back(a, flow.add_edge(1 + i, 1 + n + a, INF));
    for (int a = 0; a < A; ++a) flow.add_edge(1 + n + a, SINK, wS[a]);

    Integer value = flow.run(SRC, SINK);
    if (value < totalS) {
        auto side = flow.min_cut_side();
        std::vector<int> witness;
        Rational lhs(0), rhs(0);
        std::vector<char> hit(A, 0);
        for (int i = 0; i < n; ++i)
            if (side[1 + i]) {
                witness.push_back(i);
                rhs += inst.targets[i];
                for (int a : inst.cover_sets[i])
                    if (!hit[a]) {
                        hit[a] = 1;
                        lhs += space.weights[a];
                    }
            }
        throw HallViolation("Hall condition violated on a subset of " +
                                std::to_string(witness.size()) + " sets",
                            witness, rat_str(lhs), rat_str(rhs));
    }

    // Fractional assignment per atom.
    std::vector<std::vector<std::pair<int, Integer>>> x(A);
    for (int i = 0; i < n; ++i)
        for (auto [a, e] : set_edges[i]) {
            Integer f = flow.flow_on(e);
            if (f > 0) x[a].emplace_back(i, f);
        }

    // Cycle cancellation on the bipartite support graph (sets x split atoms):
    // pushing around a cycle keeps every set load and atom total fixed and
    // zeroes one edge, so the support becomes a forest.
    auto find_entry = [&](int a, int i) -> Integer& {
        for (auto& pr : x[a])
            if (pr.first == i) return pr.second;
        throw Error("internal: missing flow entry");
    };
    while (true) {
        // DFS over nodes: sets 0..n-1, atoms n..n+A-1 (split atoms only).
        std::vector<int> parent(n + A, -2), parent_atom(n + A, -1);
        bool cancelled = false;
        for (int root = 0; root < n && !cancelled; ++root) {
            if (parent[root] != -2) continue;
            std::vector<int> stack{root};
            parent[root] = -1;
            while (!stack.empty() && !cancelled) {
                int u = stack.back();
                stack.pop_back();
                if (u < n) {
                    for (int a = 0; a < A && !cancelled; ++a) {
                        if (x[a].size() < 2) continue;
                        bool incident = false;
                        for (auto& pr : x[a])
                            if (pr.first == u) incident = true;
                        if (!incident) continue;
                        int av = n + a;
                        if (parent[av] == -2) {
                            parent[av] = u;
                            stack.push_back(av);
                        }
                    }
                } else {
                    int a = u - n;
                    for (auto& pr : x[a]) {
                        int sv = pr.first;
                        if (sv == parent[u]) continue;
                        if (parent[sv] == -2) {
                            parent[sv] = u;
                            stack.push_back(sv);
                        } else {
                            // cycle: sv ..=.. u plus edge (u -> sv)
                            std::vector<int> path_u, path_v;
                            for (int w = u; w != -1; w = parent[w]) path_u.push_back(w);
                            for (int w = sv; w != -1; w = parent[w]) path_v.push_back(w);
                            // trim to the common suffix root
                            while (path_u.size() > 1 && path_v.size() > 1 &&
                                   path_u[path_u.size() - 2] == path_v[path_v.size() - 2]) {
                                path_u.pop_back();
                                path_v.pop_back();
                            }
                            std::vector<int> cycle(path_u.begin(), path_u.end());
                            for (auto it = path_v.rbegin() + 1; it != path_v.rend(); ++it)
                                cycle.push_back(*it);
                            cycle.push_back(u);  // close
                            // Alternating +/- along atom-set incidences.
                            std::vector<std::pair<int, int>> plus, minus;  // (atom, set)
                            for (size_t s = 0; s + 1 < cycle.size(); ++s) {
                                int p = cycle[s], q = cycle[s + 1];
                                int atom = (p >= n ? p : q) - n;
                                int set = p >= n ? q : p;
                                if (s % 2 == 0) plus.emplace_back(atom, set);
                                else minus.emplace_back(atom, set);
                            }
                            // Each atom appears once with + and once with -;
                            // orient so delta = min over minus edges.
                            Integer delta = -1;
                            for (auto& [am, sm] : minus) {
                                Integer v = find_entry(am, sm);
                                if (delta < 0 || v < delta) delta = v;
                            }
                            for (auto& [ap, sp] : plus) find_entry(ap, sp) += delta;
                            for (auto& [am, sm] : minus) find_entry(am, sm) -= delta;
                            for (int a2 = 0; a2 < A; ++a2)
                                std::erase_if(x[a2], [](const auto& pr) { return pr.second == 0; });
                            cancelled = true;
                        }
                    }
                }
            }
        }
        if (!cancelled) break;
    }

    // Loads from whole atoms; split atoms resolved per tree.
    std::vector<int> owner(A, -1);
    std::vector<Integer> load(n, 0);
    std::vector<int> split;
    for (int a = 0; a < A; ++a) {
        if (x[a].empty()) continue;  // zero-weight atom or unreached (impossible at full flow)
        if (x[a].size() == 1) {
            owner[a] = x[a][0].first;
            load[owner[a]] += wS[a];
        } else {
            split.push_back(a);
        }
    }

    // Connected components over split atoms.
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    {
        std::vector<std::vector<int>> adj(n);
        for (int a : split)
            for (size_t p = 1; p < x[a].size(); ++p) {
                adj[x[a][0].first].push_back(x[a][p].first);
                adj[x[a][p].first].push_back(x[a][0].first);
            }
        for (int i = 0; i < n; ++i) {
            if (comp[i] != -1) continue;
            std::vector<int> stack{i};
            comp[i] = ncomp;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int v : adj[u])
                    if (comp[v] == -1) {
                        comp[v] = ncomp;
                        stack.push_back(v);
                    }
            }
            ++ncomp;
        }
    }
    std::vector<std::vector<int>> comp_atoms(ncomp);
    for (int a : split) comp_atoms[comp[x[a][0].first]].push_back(a);

    for (int c = 0; c < ncomp; ++c) {
        auto& atoms = comp_atoms[c];
        if (atoms.empty()) continue;
        std::sort(atoms.begin(), atoms.end());
        std::vector<int> sets;
        for (int i = 0; i < n; ++i)
            if (comp[i] == c) sets.push_back(i);

        std::vector<int> choice(atoms.size(), 0), best_choice;
        Integer best_dev = -1;
        std::vector<Integer> base(sets.size());
        for (size_t s = 0; s < sets.size(); ++s) base[s] = load[sets[s]] - tS[sets[s]];

        std::vector<Integer> delta(sets.size());
        auto eval = [&](auto&& self, size_t pos) -> void {
            if (pos == atoms.size()) {
                Integer worst = 0;
                for (size_t s = 0; s < sets.size(); ++s) {
                    Integer d = base[s] + delta[s];
                    if (d < 0) d = -d;
                    if (d > worst) worst = d;
                }
                if (best_dev < 0 || worst < best_dev) {
                    best_dev = worst;
                    best_choice = choice;
                }
                return;
            }
            int a = atoms[pos];
            for (size_t k = 0; k < x[a].size(); ++k) {
                choice[pos] = static_cast<int>(k);
                int set = x[a][k].first;
                size_t si = std::lower_bound(sets.begin(), sets.end(), set) - sets.begin();
                delta[si] += wS[a];
                self(self, pos + 1);
                delta[si] -= wS[a];
            }
        };
        eval(eval, 0);

        for (size_t p = 0; p < atoms.size(); ++p) {
            int a = atoms[p];
            owner[a] = x[a][best_choice[p]].first;
            load[owner[a]] += wS[a];
        }
    }

    // Build the partition and validate the tolerance contract.
    Rational tol = tolerance ? *tolerance : space.max_weight();
    Partition part;
    part.cell_measure = inst.targets[0];
    part.cells.resize(n);
    for (int a = 0; a < A; ++a)
        if (owner[a] >= 0) part.cells[owner[a]].atom_ids.push_back(a);
    Rational max_dev(0);
    for (int i = 0; i < n; ++i) {
        Cell& cell = part.cells[i];
        if (cell.atom_ids.empty())
            throw AtomTooCoarse("cell " + std::to_string(i) +
                                " received no atoms; refine the resolution");
        cell.measure = 0;
        for (int a : cell.atom_ids) cell.measure += space.weights[a];
        cell.representative = space.points[cell.atom_ids.front()];
        cell.fineness_witness =
            i < static_cast<int>(witnesses.size()) ? witnesses[i] : cell.representative;
        max_dev = rat_max(max_dev, rat_abs(cell.measure - inst.targets[i]));
    }
    if (max_dev > tol)
        throw AtomTooCoarse("allocation deviation " + rat_str(max_dev) + " exceeds tolerance " +
                            rat_str(tol));
    return part;
}

}  // namespace latinapprox
