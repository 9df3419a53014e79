#pragma once

#include "latinapprox/amalgam.hpp"
#include "latinapprox/group.hpp"
#include "latinapprox/latin.hpp"
#include "latinapprox/partition.hpp"
#include "latinapprox/rado.hpp"
#include "latinapprox/tensor.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace latinapprox {

// Parallelism cap for pair verification, from LATINAPPROX_THREADS (default 1).
// Reductions run per fixed-size chunk and merge in chunk order, so results
// are identical for any thread count.
inline int verification_threads() {
    if (const char* env = std::getenv("LATINAPPROX_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    return 1;
}

// The (Q, alpha) pair: a quasigroup with a grouped partition and an injection
// alpha into the group with alpha(Q_i) inside cell P_i. Indices past the
// original partial square (locally compact case) map outside the window.
struct ApproxMap {
    LatinSquare square;
    GroupedPartition groups;
    std::vector<GroupElement> alpha;
    std::vector<char> in_window;
};

struct ApproximationReport {
    bool density_ok = false;
    Rational max_product_error;
    Rational mean_product_error;
    Rational epsilon_bound;  // 3 * max cell diameter
    std::int64_t pair_count = 0;

    // loop variant only
    int q0 = -1;
    Rational a_displacement;
    Rational b_displacement;
    bool unit_laws_ok = false;
};

// Full trace of one pipeline run; tests inspect the intermediate stages.
struct PipelineRun {
    Partition partition;
    WTensor tensor;
    SupportSets supports;
    IntegerAmalgam amalgam;
    std::int64_t t_used = 0;
    ApproxMap map;
    ApproximationReport report;
    // locally compact only
    std::optional<PartialLatinSquare> partial;
    CompactWindow window;
};

namespace detail {

inline Rational cell_diameter(const GroupModel& model, const Cell& c) {
    if (c.element >= 0) return Rational(0);
    if (!c.bounds) throw UnsupportedGeometry("cell diameter needs box cells");
    Rational d(0);
    for (int a = 0; a < c.bounds->dim(); ++a) {
        Rational w = c.bounds->width(a);
        if (model.kind() == GroupKind::torus) w = rat_min(w, Rational(1, 2));
        d = rat_max(d, w);
    }
    return d;
}

// t distinct points strictly inside a cell: spread along axis 0, centered on
// the remaining axes. Injectivity into the (infinite) cell is what the
// construction needs; the layout is deterministic.
inline std::vector<GroupElement> alpha_points(const GroupModel& model, const Cell& c, int t) {
    std::vector<GroupElement> pts;
    if (c.element >= 0) {
        if (t != 1) throw ConfigError("singleton cells admit exactly one alpha point");
        pts.push_back(c.representative);
        return pts;
    }
    const Box& b = *c.bounds;
    for (int s = 0; s < t; ++s) {
        GroupElement g;
        for (int a = 0; a < b.dim(); ++a) {
            if (a == 0)
                g.coords.push_back(b.axes[0].first + b.width(0) * (2 * s + 1) / (2 * t));
            else
                g.coords.push_back(b.axes[a].first + b.width(a) / 2);
        }
        pts.push_back(std::move(g));
    }
    return pts;
}

struct PairErrorStats {
    Rational max_err;
    Rational sum_err;
    std::int64_t count = 0;
};

// Product-error scan over index pairs, optionally restricted; deterministic
// chunked parallel reduction.
template <typename Eligible>
inline PairErrorStats product_errors(const GroupModel& model, const ApproxMap& map,
                                     Eligible&& eligible) {
    const int N = map.square.order;
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(N) * N);
    for (int q1 = 0; q1 < N; ++q1)
        for (int q2 = 0; q2 < N; ++q2)
            if (eligible(q1, q2)) pairs.emplace_back(q1, q2);

    const int threads = std::min<int>(verification_threads(), 1 + static_cast<int>(pairs.size()) / 64);
    const size_t chunk = (pairs.size() + threads - 1) / std::max(threads, 1);
    std::vector<PairErrorStats> partial(std::max<size_t>(threads, 1));
    auto work = [&](int tid) {
        PairErrorStats st;
        st.max_err = 0;
        st.sum_err = 0;
        size_t lo = tid * chunk, hi = std::min(pairs.size(), lo + chunk);
        for (size_t x = lo; x < hi; ++x) {
            auto [q1, q2] = pairs[x];
            int q3 = map.square.at(q1, q2);
            Rational err = model.dist(map.alpha[q3], model.mul(map.alpha[q1], map.alpha[q2]));
            st.max_err = rat_max(st.max_err, err);
            st.sum_err += err;
            ++st.count;
        }
        partial[tid] = std::move(st);
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < threads; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
    }
    PairErrorStats total;
    total.max_err = 0;
    total.sum_err = 0;
    for (const auto& st : partial) {
        total.max_err = rat_max(total.max_err, st.max_err);
        total.sum_err += st.sum_err;
        total.count += st.count;
    }
    return total;
}

inline bool density_exact(const Partition& p, const ApproxMap& map, int t) {
    // every cell holds exactly t alpha images (windowed indices only)
    std::vector<int> count(p.size(), 0);
    for (int q = 0; q < map.square.order; ++q) {
        if (!map.in_window.empty() && !map.in_window[q]) continue;
        int i = map.groups.group_of(q);
        const Cell& c = p.cells[i];
        bool inside = c.element >= 0 ? (c.representative == map.alpha[q])
                                     : c.bounds->contains(map.alpha[q]);
        if (!inside) return false;
        ++count[i];
    }
    for (int i = 0; i < p.size(); ++i)
        if (count[i] != t) return false;
    return true;
}

}  // namespace detail

// Compact pipeline: lattice (or singleton) partition -> exact tensor ->
// integer amalgam -> detachment -> alpha -> verification. The product-error
// bound 3 * max cell diameter follows from the support witness: both
// alpha(q1 q2) and alpha(q1)alpha(q2) sit within one, resp. two, cell
// diameters of a common point of P_i P_j ∩ P_k.
inline PipelineRun approximate_compact(const GroupModel& model, int n_cells, std::int64_t t_hint,
                                       std::uint64_t seed = 0) {
    if (!model.compact()) throw KindMismatch("approximate_compact needs a compact model");
    PipelineRun run;
    run.window = CompactWindow::all();
    std::int64_t t = t_hint < 1 ? 1 : t_hint;
    if (model.kind() == GroupKind::finite) {
        run.partition = finite_partition(model);
        t = 1;  // singleton cells carry exactly one alpha point
    } else {
        run.partition = lattice_partition(model, n_cells);
    }
    run.tensor = w_exact(run.partition, model, run.window);
    run.supports = SupportSets::full(run.partition.size());

    for (int attempt = 0;; ++attempt) {
        try {
            run.amalgam = round_to_amalgam(run.tensor, run.supports, t, RoundMode::compact);
            break;
        } catch (const RoundingInfeasible&) {
            if (attempt >= 4) throw;
            t *= 2;
        }
    }
    run.t_used = t;

    auto [sq, groups] = realize_amalgamation(run.amalgam, seed);
    run.map.square = std::move(sq);
    run.map.groups = groups;
    run.map.alpha.resize(run.map.square.order);
    run.map.in_window.assign(run.map.square.order, 1);
    for (int i = 0; i < run.partition.size(); ++i) {
        auto pts = detail::alpha_points(model, run.partition.cells[i], static_cast<int>(t));
        for (int s = 0; s < static_cast<int>(t); ++s)
            run.map.alpha[groups.member(i, s)] = pts[s];
    }

    Rational diam(0);
    for (const Cell& c : run.partition.cells)
        diam = rat_max(diam, detail::cell_diameter(model, c));
    run.report.epsilon_bound = diam * 3;
    run.report.density_ok = detail::density_exact(run.partition, run.map, static_cast<int>(t));

    auto stats = detail::product_errors(model, run.map, [](int, int) { return true; });
    run.report.max_product_error = stats.max_err;
    run.report.mean_product_error = stats.count ? stats.sum_err / stats.count : Rational(0);
    run.report.pair_count = stats.count;
    return run;
}

// Locally compact pipeline on the real line: the window C inflates the inner
// target B = [-s, s] to [-3s, 3s] so products of B-cells stay deep inside C;
// the partial square covers every S-block before completion, and completion
// doubles the order with fresh indices mapped outside C. Product errors are
// measured over pairs whose alpha values lie in B.
inline PipelineRun approximate_locally_compact(const GroupModel& model, const Rational& b_halfwidth,
                                               int n_cells, std::int64_t t_hint,
                                               std::uint64_t seed = 0) {
    if (model.kind() != GroupKind::real_line)
        throw KindMismatch("approximate_locally_compact supports the real_line model");
    if (b_halfwidth <= 0) throw ConfigError("inner target must have positive halfwidth");
    PipelineRun run;
    Box cbox;
    cbox.axes.emplace_back(-b_halfwidth * 3, b_halfwidth * 3);
    run.window = CompactWindow::of_box(cbox);
    run.partition = window_partition(model, run.window, n_cells);
    run.tensor = w_exact(run.partition, model, run.window);
    run.supports = support_sets(run.partition, model, run.window);

    std::int64_t t = t_hint < 1 ? 1 : t_hint;
    for (int attempt = 0;; ++attempt) {
        try {
            run.amalgam = round_to_amalgam(run.tensor, run.supports, t, RoundMode::partial);
            break;
        } catch (const RoundingInfeasible&) {
            if (attempt >= 4) throw;
            t *= 2;
        }
    }
    run.t_used = t;

    auto [partial, groups] = realize_partial(run.amalgam, seed);
    run.partial = partial;

    LatinSquare completed = complete_partial(partial);
    const int Nprime = partial.order;
    run.map.square = std::move(completed);
    run.map.groups = groups;  // groups of the original indices
    run.map.alpha.resize(run.map.square.order);
    run.map.in_window.assign(run.map.square.order, 0);
    for (int i = 0; i < run.partition.size(); ++i) {
        auto pts = detail::alpha_points(model, run.partition.cells[i], static_cast<int>(t));
        for (int s = 0; s < static_cast<int>(t); ++s) {
            run.map.alpha[groups.member(i, s)] = pts[s];
            run.map.in_window[groups.member(i, s)] = 1;
        }
    }
    // completion-only indices: distinct points beyond the window
    const Rational c_hi = run.window.box.axes[0].second;
    for (int q = Nprime; q < run.map.square.order; ++q)
        run.map.alpha[q] = GroupElement{{c_hi + 1 + (q - Nprime)}};

    Rational diam(0);
    for (const Cell& c : run.partition.cells)
        diam = rat_max(diam, detail::cell_diameter(model, c));
    run.report.epsilon_bound = diam * 3;
    run.report.density_ok = detail::density_exact(run.partition, run.map, static_cast<int>(t));

    auto in_B = [&](int q) {
        if (q >= Nprime) return false;
        const Rational& x = run.map.alpha[q].coords[0];
        return x >= -b_halfwidth && x <= b_halfwidth;
    };
    auto stats = detail::product_errors(model, run.map,
                                        [&](int q1, int q2) { return in_B(q1) && in_B(q2); });
    run.report.max_product_error = stats.max_err;
    run.report.mean_product_error = stats.count ? stats.sum_err / stats.count : Rational(0);
    run.report.pair_count = stats.count;
    return run;
}

// Loop pipeline: compact run, then the unit is installed at the index whose
// alpha value is nearest the identity (lowest index on ties). The unit laws
// hold exactly; the report adds the displacement of the two permutations,
// max over x of dist(alpha(a(x)), alpha(x)) and likewise for b.
inline PipelineRun loop_approximate(const GroupModel& model, int n_cells, std::int64_t t_hint,
                                    std::uint64_t seed = 0) {
    PipelineRun run = approximate_compact(model, n_cells, t_hint, seed);
    const GroupElement e = model.identity();
    int q0 = 0;
    Rational best = run.map.alpha.empty() ? Rational(0) : model.dist(run.map.alpha[0], e);
    for (int q = 1; q < run.map.square.order; ++q) {
        Rational d = model.dist(run.map.alpha[q], e);
        if (d < best) {
            best = d;
            q0 = q;
        }
    }
    std::vector<int> a, b;
    run.map.square = loopify(run.map.square, q0, &a, &b);
    run.report.q0 = q0;

    bool units = true;
    for (int x = 0; x < run.map.square.order && units; ++x)
        units = run.map.square.at(q0, x) == x && run.map.square.at(x, q0) == x;
    run.report.unit_laws_ok = units;

    Rational da(0), db(0);
    for (int x = 0; x < run.map.square.order; ++x) {
        da = rat_max(da, model.dist(run.map.alpha[a[x]], run.map.alpha[x]));
        db = rat_max(db, model.dist(run.map.alpha[b[x]], run.map.alpha[x]));
    }
    run.report.a_displacement = da;
    run.report.b_displacement = db;

    auto stats = detail::product_errors(model, run.map, [](int, int) { return true; });
    run.report.max_product_error = stats.max_err;
    run.report.mean_product_error = stats.count ? stats.sum_err / stats.count : Rational(0);
    run.report.pair_count = stats.count;
    return run;
}

// ---------------------------------------------------------------------------
// Unimodularity probe
// ---------------------------------------------------------------------------

struct ProbeLine {
    int i = 0, j = 0;
    double sum = 0;
    double stddev = 0;
};

// Line-sum disparity of the k-lines that the locally compact line law forces
// equal. For a unimodular model the statistic stays inside the Monte Carlo
// noise floor; for the affine group it exceeds it, which is the expected
// outcome, not a failure.
struct ProbeReport {
    bool exact = false;
    int line_count = 0;
    double median = 0;
    double max_abs_disparity = 0;
    double max_rel_disparity = 0;
    double max_sigma_ratio = 0;  // |sum - median| / stddev, worst line
    bool exceeds_noise = false;  // any line beyond 4 stddev
    std::vector<ProbeLine> lines;
};

inline ProbeReport unimodularity_probe(const GroupModel& model, const CompactWindow& window,
                                       int n_cells, std::int64_t samples, std::uint64_t seed) {
    Partition part;
    switch (model.kind()) {
        case GroupKind::torus: part = lattice_partition(model, n_cells); break;
        case GroupKind::finite: part = finite_partition(model); break;
        case GroupKind::real_line:
        case GroupKind::affine_line: part = window_partition(model, window, n_cells); break;
    }
    SupportSets sup = support_sets(part, model, window);

    ProbeReport rep;
    const int n = part.size();
    if (samples <= 0) {
        WTensor w = w_exact(part, model, window);
        LineSums ls = line_sums(w);
        rep.exact = true;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (sup.in_S(i, j))
                    rep.lines.push_back(
                        {i, j, to_double(ls.over_k[static_cast<size_t>(j) * n + i]), 0.0});
    } else {
        WTensor w = w_montecarlo(part, model, window, samples, seed);
        LineSums ls = line_sums(w);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (!sup.in_S(i, j)) continue;
                double var = 0;
                for (int k = 0; k < n; ++k) {
                    double sd = w.sd[w.idx(i, j, k)];
                    var += sd * sd;
                }
                rep.lines.push_back({i, j, ls.over_k_d[static_cast<size_t>(j) * n + i],
                                     std::sqrt(var)});
            }
    }
    rep.line_count = static_cast<int>(rep.lines.size());
    if (rep.lines.empty()) return rep;

    std::vector<double> vals;
    for (const auto& l : rep.lines) vals.push_back(l.sum);
    std::sort(vals.begin(), vals.end());
    const size_t m = vals.size();
    rep.median = m % 2 ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);

    for (const auto& l : rep.lines) {
        double dev = std::abs(l.sum - rep.median);
        rep.max_abs_disparity = std::max(rep.max_abs_disparity, dev);
        if (rep.median != 0)
            rep.max_rel_disparity = std::max(rep.max_rel_disparity, dev / rep.median);
        if (rep.exact) {
            if (dev > 0) rep.exceeds_noise = true;
        } else if (l.stddev > 0) {
            rep.max_sigma_ratio = std::max(rep.max_sigma_ratio, dev / l.stddev);
            if (dev > 4.0 * l.stddev) rep.exceeds_noise = true;
        }
    }
    return rep;
}

}  // namespace latinapprox
