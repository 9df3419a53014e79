#pragma once

#include "latinapprox/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace latinapprox {

struct LatinSquare {
    int order = 0;
    std::vector<int> table;  // row-major

    int at(int r, int c) const { return table[static_cast<size_t>(r) * order + c]; }
    void set(int r, int c, int v) { table[static_cast<size_t>(r) * order + c] = v; }

    bool valid() const {
        for (int r = 0; r < order; ++r) {
            std::vector<char> row(order, 0), col(order, 0);
            for (int c = 0; c < order; ++c) {
                int v = at(r, c), w = at(c, r);
                if (v < 0 || v >= order || w < 0 || w >= order) return false;
                if (row[v]++ || col[w]++) return false;
            }
        }
        return true;
    }
};

// -1 marks an empty cell; filled cells must not repeat in a row or column,
// i.e. a*x = b and x*a = b each have at most one solution.
struct PartialLatinSquare {
    int order = 0;
    std::vector<int> table;

    int at(int r, int c) const { return table[static_cast<size_t>(r) * order + c]; }
    void set(int r, int c, int v) { table[static_cast<size_t>(r) * order + c] = v; }
    bool filled(int r, int c) const { return at(r, c) >= 0; }

    static PartialLatinSquare empty(int order) {
        PartialLatinSquare p;
        p.order = order;
        p.table.assign(static_cast<size_t>(order) * order, -1);
        return p;
    }

    std::int64_t filled_count() const {
        return std::count_if(table.begin(), table.end(), [](int v) { return v >= 0; });
    }

    bool valid() const {
        for (int r = 0; r < order; ++r) {
            std::vector<char> row(order, 0), col(order, 0);
            for (int c = 0; c < order; ++c) {
                int v = at(r, c), w = at(c, r);
                if (v >= order || w >= order) return false;
                if (v >= 0 && row[v]++) return false;
                if (w >= 0 && col[w]++) return false;
            }
        }
        return true;
    }
};

// Partition of {0..N-1} into n contiguous classes of equal size t.
struct GroupedPartition {
    int order = 0;
    int group_count = 0;
    int group_size = 0;

    int group_of(int q) const { return q / group_size; }
    int member(int group, int pos) const { return group * group_size + pos; }

    static GroupedPartition contiguous(int groups, int size) {
        GroupedPartition g;
        g.group_count = groups;
        g.group_size = size;
        g.order = groups * size;
        return g;
    }
};

using GqqTriple = std::array<int, 3>;
using Gqq = std::set<GqqTriple>;

// Generalized quotient quasigroup: (i,j,k) belongs iff some q in Q_i and
// q' in Q_j have q*q' in Q_k.
inline Gqq gqq_of(const LatinSquare& sq, const GroupedPartition& g) {
    Gqq out;
    for (int r = 0; r < sq.order; ++r)
        for (int c = 0; c < sq.order; ++c)
            out.insert({g.group_of(r), g.group_of(c), g.group_of(sq.at(r, c))});
    return out;
}

inline Gqq gqq_of(const PartialLatinSquare& sq, const GroupedPartition& g) {
    Gqq out;
    for (int r = 0; r < sq.order; ++r)
        for (int c = 0; c < sq.order; ++c)
            if (sq.filled(r, c)) out.insert({g.group_of(r), g.group_of(c), g.group_of(sq.at(r, c))});
    return out;
}

// Converts a quasigroup into a loop with two-sided unit q0:
//   a = inverse of the permutation in row q0 (q0 * a(x) = x)
//   b = inverse of the permutation in column a(q0) (b(x) * a(q0) = x)
//   x * y = b(x) ∘ a(y)
// Then q0*x = x*q0 = x for all x, and b(q0) = q0.
inline LatinSquare loopify(const LatinSquare& sq, int q0, std::vector<int>* a_out = nullptr,
                           std::vector<int>* b_out = nullptr) {
    const int N = sq.order;
    if (q0 < 0 || q0 >= N) throw ConfigError("loopify: q0 out of range");
    std::vector<int> a(N), b(N);
    for (int c = 0; c < N; ++c) a[sq.at(q0, c)] = c;
    const int c0 = a[q0];
    for (int r = 0; r < N; ++r) b[sq.at(r, c0)] = r;

    LatinSquare out;
    out.order = N;
    out.table.resize(static_cast<size_t>(N) * N);
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y) out.set(x, y, sq.at(b[x], a[y]));
    if (a_out) *a_out = std::move(a);
    if (b_out) *b_out = std::move(b);
    return out;
}

// Block-count tensor of a (partial) square under a grouped partition:
// counts[(k*n + j)*n + i] = #{(r,c) : r in Q_i, c in Q_j, table in Q_k}.
template <typename Square>
inline std::vector<std::int64_t> amalgamation_of(const Square& sq, const GroupedPartition& g) {
    const int n = g.group_count;
    std::vector<std::int64_t> counts(static_cast<size_t>(n) * n * n, 0);
    for (int r = 0; r < sq.order; ++r)
        for (int c = 0; c < sq.order; ++c) {
            int v = sq.at(r, c);
            if (v < 0) continue;
            int i = g.group_of(r), j = g.group_of(c), k = g.group_of(v);
            ++counts[(static_cast<size_t>(k) * n + j) * n + i];
        }
    return counts;
}

// Seeded pseudo-random Latin square: a random isotopy (row, column and
// symbol permutations) applied to the cyclic table. Distribution is not
// uniform over all Latin squares; adequate wherever tests just need valid,
// varied squares.
inline LatinSquare random_latin_square(int order, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> rp(order), cp(order), sp(order);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::iota(sp.begin(), sp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), rng);
    std::shuffle(cp.begin(), cp.end(), rng);
    std::shuffle(sp.begin(), sp.end(), rng);
    LatinSquare sq;
    sq.order = order;
    sq.table.resize(static_cast<size_t>(order) * order);
    for (int r = 0; r < order; ++r)
        for (int c = 0; c < order; ++c) sq.set(r, c, sp[(rp[r] + cp[c]) % order]);
    return sq;
}

}  // namespace latinapprox
