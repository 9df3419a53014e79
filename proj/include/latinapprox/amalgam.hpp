#pragma once

#include "latinapprox/edge_coloring.hpp"
#include "latinapprox/errors.hpp"
#include "latinapprox/latin.hpp"
#include "latinapprox/tensor.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace latinapprox {

enum class RoundMode { compact, partial, partial_with_loops };

// Integer scaling of the measure tensor. Line sums are bounded by t, with
// equality everywhere in compact mode and on the required pair sets in
// partial mode. supp(entries) stays inside the support mask inherited from
// the tensor.
struct IntegerAmalgam {
    int n = 0;
    std::int64_t t = 0;
    std::vector<std::int64_t> e;  // n^3, i fastest then j then k
    std::vector<char> mask;       // allowed support
    // required equality sets (n*n): k-lines on S, j-lines on S', i-lines on S''
    std::vector<char> reqS, reqSp, reqSpp;

    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(k) * n + j) * n + i;
    }
    std::int64_t sum_over_k(int i, int j) const {
        std::int64_t s = 0;
        for (int k = 0; k < n; ++k) s += e[idx(i, j, k)];
        return s;
    }
    std::int64_t sum_over_j(int i, int k) const {
        std::int64_t s = 0;
        for (int j = 0; j < n; ++j) s += e[idx(i, j, k)];
        return s;
    }
    std::int64_t sum_over_i(int j, int k) const {
        std::int64_t s = 0;
        for (int i = 0; i < n; ++i) s += e[idx(i, j, k)];
        return s;
    }

    bool compact_valid() const {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (sum_over_k(a, b) != t || sum_over_j(a, b) != t || sum_over_i(a, b) != t)
                    return false;
        for (size_t x = 0; x < e.size(); ++x)
            if (e[x] < 0 || (e[x] > 0 && !mask[x])) return false;
        return true;
    }

    static IntegerAmalgam compact_from_entries(int n, std::int64_t t, std::vector<std::int64_t> entries) {
        IntegerAmalgam m;
        m.n = n;
        m.t = t;
        m.e = std::move(entries);
        m.mask.assign(m.e.size(), 0);
        for (size_t x = 0; x < m.e.size(); ++x) m.mask[x] = m.e[x] > 0;
        m.reqS.assign(static_cast<size_t>(n) * n, 1);
        m.reqSp = m.reqS;
        m.reqSpp = m.reqS;
        return m;
    }
};

// ---------------------------------------------------------------------------
// Rounding
// ---------------------------------------------------------------------------

// Rounds an exact tensor to an integer amalgam with target line sum t:
// proportional floor of t*n^2*w/nu(C)^2 followed by a greedy repair that adds
// the per-line deficits on supp(w) only, capped so the two crossing lines
// never exceed t. Repair phases run per axis (k-lines, then j-lines, then
// i-lines); a line that cannot reach its target raises RoundingInfeasible and
// the caller retries with a doubled t.
inline IntegerAmalgam round_to_amalgam(const WTensor& w, const SupportSets& s, std::int64_t target_t,
                                       RoundMode mode) {
    if (w.mode != TensorMode::exact)
        throw UnsupportedGeometry("round_to_amalgam requires an exact tensor");
    if (target_t < 1) throw ConfigError("target_t must be >= 1");
    const int n = w.n;

    IntegerAmalgam m;
    m.n = n;
    m.t = target_t;
    m.e.assign(static_cast<size_t>(n) * n * n, 0);
    m.mask.assign(m.e.size(), 0);
    const size_t nn = static_cast<size_t>(n) * n;
    if (mode == RoundMode::compact) {
        m.reqS.assign(nn, 1);
        m.reqSp.assign(nn, 1);
        m.reqSpp.assign(nn, 1);
    } else {
        m.reqS = s.S;
        if (mode == RoundMode::partial_with_loops) {
            m.reqSp = s.Sp;
            m.reqSpp = s.Spp;
        } else {
            m.reqSp.assign(nn, 0);
            m.reqSpp.assign(nn, 0);
        }
    }

    const Rational scale = Rational(target_t) * n * n / w.window_measure_sq;
    for (size_t x = 0; x < m.e.size(); ++x) {
        if (w.exact[x] > 0) {
            m.mask[x] = 1;
            m.e[x] = floor_i64(w.exact[x] * scale);
        }
    }

    // Current line sums.
    std::vector<std::int64_t> Lij(nn, 0), Lik(nn, 0), Ljk(nn, 0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                std::int64_t v = m.e[m.idx(i, j, k)];
                Lij[static_cast<size_t>(j) * n + i] += v;
                Lik[static_cast<size_t>(k) * n + i] += v;
                Ljk[static_cast<size_t>(k) * n + j] += v;
            }
    auto lij = [&](int i, int j) -> std::int64_t& { return Lij[static_cast<size_t>(j) * n + i]; };
    auto lik = [&](int i, int k) -> std::int64_t& { return Lik[static_cast<size_t>(k) * n + i]; };
    auto ljk = [&](int j, int k) -> std::int64_t& { return Ljk[static_cast<size_t>(k) * n + j]; };

    struct Cand {
        int pos;           // free index value
        std::int64_t slack;
        Rational frac;     // discarded fractional part, larger first
    };

    // Repairs one line: axis selects which index is summed over.
    auto repair_line = [&](char axis, int a, int b) {
        std::int64_t deficit =
            target_t - (axis == 'k' ? lij(a, b) : axis == 'j' ? lik(a, b) : ljk(a, b));
        while (deficit > 0) {
            int best = -1;
            std::int64_t best_slack = 0;
            Rational best_frac(-1);
            for (int pos = 0; pos < n; ++pos) {
                int i = axis == 'k' ? a : (axis == 'j' ? a : pos);
                int j = axis == 'k' ? b : (axis == 'j' ? pos : a);
                int k = axis == 'k' ? pos : b;
                size_t x = m.idx(i, j, k);
                if (!m.mask[x]) continue;
                std::int64_t slack;
                if (axis == 'k') slack = std::min(target_t - lik(i, k), target_t - ljk(j, k));
                else if (axis == 'j') slack = std::min(target_t - lij(i, j), target_t - ljk(j, k));
                else slack = std::min(target_t - lij(i, j), target_t - lik(i, k));
                if (slack <= 0) continue;
                Rational frac = w.exact[x] * scale - m.e[x];
                if (best < 0 || frac > best_frac ||
                    (frac == best_frac && slack > best_slack)) {
                    best = pos;
                    best_slack = slack;
                    best_frac = frac;
                }
            }
            if (best < 0) return false;
            int i = axis == 'k' ? a : (axis == 'j' ? a : best);
            int j = axis == 'k' ? b : (axis == 'j' ? best : a);
            int k = axis == 'k' ? best : b;
            std::int64_t add = std::min(deficit, best_slack);
            m.e[m.idx(i, j, k)] += add;
            lij(i, j) += add;
            lik(i, k) += add;
            ljk(j, k) += add;
            deficit -= add;
        }
        return true;
    };

    auto phase = [&](char axis, const std::vector<char>& req) {
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a)
                if (req[static_cast<size_t>(b) * n + a] && !repair_line(axis, a, b))
                    throw RoundingInfeasible(std::string("cannot reach line target on axis ") +
                                             axis + " at (" + std::to_string(a) + "," +
                                             std::to_string(b) + "); retry with larger t");
    };
    phase('k', m.reqS);
    phase('j', m.reqSp);
    phase('i', m.reqSpp);

    // Validation: caps everywhere, equalities where required.
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            size_t id = static_cast<size_t>(b) * n + a;
            if (lij(a, b) > target_t || lik(a, b) > target_t || ljk(a, b) > target_t)
                throw RoundingInfeasible("line cap exceeded after repair");
            if (m.reqS[id] && lij(a, b) != target_t)
                throw RoundingInfeasible("k-line equality unmet after repair");
            if (m.reqSp[id] && lik(a, b) != target_t)
                throw RoundingInfeasible("j-line equality unmet after repair");
            if (m.reqSpp[id] && ljk(a, b) != target_t)
                throw RoundingInfeasible("i-line equality unmet after repair");
        }
    return m;
}

// ---------------------------------------------------------------------------
// Realization by detachment
// ---------------------------------------------------------------------------

namespace detail {

// Shared construction behind realize_amalgamation and realize_partial.
// Stage 1 detaches rows and columns at once: because the group size equals t,
// every concrete row (and column) of block (i,j) receives symbol-group k
// exactly m_ijk times, realized by a cyclic layout of the block's symbol
// multiset (padded with blanks when the block is not full). Stage 2 detaches
// symbols: the cells of each symbol-group form a bipartite graph of degree
// <= t, and a proper t-edge-coloring assigns the concrete symbols so no row
// or column repeats one.
inline std::pair<PartialLatinSquare, GroupedPartition> realize_core(const IntegerAmalgam& m,
                                                                    std::uint64_t seed) {
    const int n = m.n;
    const int t = static_cast<int>(m.t);
    const int N = n * t;
    GroupedPartition g = GroupedPartition::contiguous(n, t);

    // Stage 1: symbol-GROUP layout per block.
    std::vector<int> F(static_cast<size_t>(N) * N, -1);
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dull);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<int> seq;
            seq.reserve(t);
            for (int k = 0; k < n; ++k)
                for (std::int64_t c = 0; c < m.e[m.idx(i, j, k)]; ++c) seq.push_back(k);
            if (static_cast<int>(seq.size()) > t)
                throw RealizationFailed("block mass exceeds t*t");
            seq.resize(t, -1);  // blanks
            if (seed != 0) std::shuffle(seq.begin(), seq.end(), rng);
            for (int r = 0; r < t; ++r)
                for (int c = 0; c < t; ++c)
                    F[static_cast<size_t>(i * t + r) * N + (j * t + c)] = seq[(r + c) % t];
        }

    // Stage 2: concrete symbols by edge coloring, one group at a time.
    PartialLatinSquare out = PartialLatinSquare::empty(N);
    for (int k = 0; k < n; ++k) {
        std::vector<std::pair<int, int>> cells;
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c)
                if (F[static_cast<size_t>(r) * N + c] == k) cells.emplace_back(r, c);
        std::vector<int> colors = bipartite_edge_coloring(N, N, cells, t);
        std::vector<int> symbol_of(t);
        std::iota(symbol_of.begin(), symbol_of.end(), 0);
        if (seed != 0) std::shuffle(symbol_of.begin(), symbol_of.end(), rng);
        for (size_t x = 0; x < cells.size(); ++x)
            out.set(cells[x].first, cells[x].second, k * t + symbol_of[colors[x]]);
    }

    if (!out.valid()) throw RealizationFailed("detachment produced an invalid square");
    // The contract: block counts equal t * m, exactly.
    auto counts = amalgamation_of(out, g);
    for (size_t x = 0; x < counts.size(); ++x)
        if (counts[x] != m.t * m.e[x])
            throw RealizationFailed("amalgamation of the output differs from t*m");
    return {std::move(out), g};
}

}  // namespace detail

// Realizes a compact amalgam (all line sums = t) as a Latin square of order
// n*t with groups of size t whose block-count tensor equals t*m; hence the
// gqq of the output is exactly supp(m).
inline std::pair<LatinSquare, GroupedPartition> realize_amalgamation(const IntegerAmalgam& m,
                                                                     std::uint64_t seed = 0) {
    for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b)
            if (m.sum_over_k(a, b) != m.t || m.sum_over_j(a, b) != m.t || m.sum_over_i(a, b) != m.t)
                throw ConfigError("realize_amalgamation needs a compact amalgam (all line sums = t)");
    auto [partial, g] = detail::realize_core(m, seed);
    LatinSquare sq;
    sq.order = partial.order;
    sq.table = partial.table;
    if (!sq.valid()) throw RealizationFailed("compact realization left empty cells");
    return {std::move(sq), g};
}

// Realizes a partial-mode amalgam as a partial Latin square. Every block
// (i,j) whose k-line sums to t (in particular every pair in S) comes out
// fully filled; rows whose j-line meets S' contain all of Q_k, and dually for
// S''; the grouped support equals supp(m).
inline std::pair<PartialLatinSquare, GroupedPartition> realize_partial(const IntegerAmalgam& m,
                                                                       std::uint64_t seed = 0) {
    for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b)
            if (m.sum_over_k(a, b) > m.t || m.sum_over_j(a, b) > m.t || m.sum_over_i(a, b) > m.t)
                throw ConfigError("realize_partial: a line sum exceeds t");
    return detail::realize_core(m, seed);
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

// Backtracking realization for cross-checks: the lexicographically least
// Latin square (row-major scan, symbols ascending) whose block counts equal
// t * m, or nullopt if none exists. Exponential; orders up to 8.
inline std::optional<LatinSquare> brute_force_realize(const IntegerAmalgam& m) {
    const int n = m.n;
    const int t = static_cast<int>(m.t);
    const int N = n * t;
    if (N > 8) throw ConfigError("brute_force_realize limited to order <= 8");

    std::vector<std::int64_t> budget(m.e.size());
    for (size_t x = 0; x < m.e.size(); ++x) budget[x] = m.t * m.e[x];

    LatinSquare sq;
    sq.order = N;
    sq.table.assign(static_cast<size_t>(N) * N, -1);
    std::vector<std::uint32_t> row_used(N, 0), col_used(N, 0);

    auto dfs = [&](auto&& self, int pos) -> bool {
        if (pos == N * N) return true;
        const int r = pos / N, c = pos % N;
        const int bi = r / t, bj = c / t;
        for (int v = 0; v < N; ++v) {
            const std::uint32_t bit = 1u << v;
            if ((row_used[r] & bit) || (col_used[c] & bit)) continue;
            std::int64_t& q = budget[m.idx(bi, bj, v / t)];
            if (q <= 0) continue;
            row_used[r] |= bit;
            col_used[c] |= bit;
            --q;
            sq.set(r, c, v);
            if (self(self, pos + 1)) return true;
            ++q;
            row_used[r] &= ~bit;
            col_used[c] &= ~bit;
        }
        return false;
    };
    if (!dfs(dfs, 0)) return std::nullopt;
    return sq;
}

// ---------------------------------------------------------------------------
// Completion (embedding into order 2N)
// ---------------------------------------------------------------------------

// Embeds a partial Latin square of order N into a Latin square of order 2N
// whose top-left corner preserves every filled cell. Three edge-coloring
// rounds:
//   1. empty cells of the top-left quadrant get the fresh symbols N..2N-1
//      (empty-cell graph has degree <= N);
//   2. the top-right quadrant: rows x missing-symbols graph is N-regular on
//      the row side, one color per new column;
//   3. the bottom half: columns x missing-symbols graph is N-regular, one
//      color per new row, each class a perfect matching.
inline LatinSquare complete_partial(const PartialLatinSquare& p) {
    if (!p.valid()) throw ConfigError("complete_partial: invalid partial square");
    const int N = p.order;
    const int M = 2 * N;
    LatinSquare out;
    out.order = M;
    out.table.assign(static_cast<size_t>(M) * M, -1);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c)
            if (p.filled(r, c)) out.set(r, c, p.at(r, c));

    // Round 1: fresh symbols into the empty cells.
    {
        std::vector<std::pair<int, int>> holes;
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c)
                if (!p.filled(r, c)) holes.emplace_back(r, c);
        std::vector<int> col = bipartite_edge_coloring(N, N, holes, N);
        for (size_t x = 0; x < holes.size(); ++x)
            out.set(holes[x].first, holes[x].second, N + col[x]);
    }

    // Round 2: top-right quadrant.
    {
        std::vector<std::pair<int, int>> missing;  // (row, symbol)
        for (int r = 0; r < N; ++r) {
            std::vector<char> have(M, 0);
            for (int c = 0; c < N; ++c) have[out.at(r, c)] = 1;
            for (int s = 0; s < M; ++s)
                if (!have[s]) missing.emplace_back(r, s);
        }
        std::vector<int> col = bipartite_edge_coloring(N, M, missing, N);
        for (size_t x = 0; x < missing.size(); ++x)
            out.set(missing[x].first, N + col[x], missing[x].second);
    }

    // Round 3: bottom half.
    {
        std::vector<std::pair<int, int>> missing;  // (column, symbol)
        for (int c = 0; c < M; ++c) {
            std::vector<char> have(M, 0);
            for (int r = 0; r < N; ++r) have[out.at(r, c)] = 1;
            for (int s = 0; s < M; ++s)
                if (!have[s]) missing.emplace_back(c, s);
        }
        std::vector<int> col = bipartite_edge_coloring(M, M, missing, N);
        for (size_t x = 0; x < missing.size(); ++x)
            out.set(N + col[x], missing[x].first, missing[x].second);
    }

    if (!out.valid()) throw RealizationFailed("completion produced an invalid square");
    return out;
}

}  // namespace latinapprox
