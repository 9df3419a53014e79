#pragma once

#include "latinapprox/errors.hpp"
#include "latinapprox/group.hpp"
#include "latinapprox/rational.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace latinapprox {

// ceil(p/q) for a rational p/q.
inline Integer ceil_int(const Rational& q) { return -floor_int(-q); }

// One cell of a partition: an exact box, a finite-group element, or a set of
// atoms from an AtomizedSpace. The fineness witness is a group element g with
// cell <= g*U, checked by verify_partition.
struct Cell {
    std::optional<Box> bounds;
    int element = -1;            // finite kind
    std::vector<int> atom_ids;   // atomized kind
    GroupElement representative;
    GroupElement fineness_witness;
    Rational measure;
};

struct Partition {
    std::vector<Cell> cells;
    Rational cell_measure;  // common target measure
    CompactWindow window;

    int size() const { return static_cast<int>(cells.size()); }
};

// Exact equisize lattice partition of the d-torus: n^d half-open boxes of
// measure n^-d, representatives at box centers.
inline Partition lattice_partition(const GroupModel& model, int n_per_axis) {
    if (model.kind() != GroupKind::torus) throw KindMismatch("lattice_partition needs a torus");
    if (n_per_axis < 1) throw ConfigError("n_per_axis must be >= 1");
    const int d = model.dim();
    const Rational w = Rational(1) / n_per_axis;

    Partition p;
    p.window = CompactWindow::all();
    p.cell_measure = 1;
    for (int a = 0; a < d; ++a) p.cell_measure *= w;

    std::vector<int> idx(d, 0);
    while (true) {
        Cell c;
        Box b;
        GroupElement rep;
        for (int a = 0; a < d; ++a) {
            Rational lo = Rational(idx[a]) * w;
            b.axes.emplace_back(lo, lo + w);
            rep.coords.push_back(lo + w / 2);
        }
        c.bounds = std::move(b);
        c.representative = rep;
        c.fineness_witness = rep;
        c.measure = p.cell_measure;
        p.cells.push_back(std::move(c));

        int a = d - 1;
        while (a >= 0 && ++idx[a] == n_per_axis) idx[a--] = 0;
        if (a < 0) break;
    }
    return p;
}

// Singleton partition of a finite group: one cell per element, measure 1/|G|.
inline Partition finite_partition(const GroupModel& model) {
    if (model.kind() != GroupKind::finite) throw KindMismatch("finite_partition needs a finite model");
    Partition p;
    p.window = CompactWindow::all();
    p.cell_measure = Rational(1) / model.order();
    for (int i = 0; i < model.order(); ++i) {
        Cell c;
        c.element = i;
        c.representative = model.element(i);
        c.fineness_witness = c.representative;
        c.measure = p.cell_measure;
        p.cells.push_back(std::move(c));
    }
    return p;
}

// Equisize box partition of a window.
//   real_line:    n equal-width intervals.
//   affine_line:  na x nb grid, harmonic in a (equal increments of 1/a, the
//                 left-Haar-uniform scale) and uniform in b; n must be a
//                 perfect square unless na/nb are given.
inline Partition window_partition(const GroupModel& model, const CompactWindow& window, int n_cells,
                                  int na = 0, int nb = 0) {
    if (window.whole_group) throw UnsupportedGeometry("window_partition needs an explicit box");
    Partition p;
    p.window = window;

    if (model.kind() == GroupKind::real_line) {
        if (n_cells < 1) throw ConfigError("n_cells must be >= 1");
        const Rational lo = window.box.axes[0].first;
        const Rational w = window.box.width(0) / n_cells;
        p.cell_measure = w;
        for (int i = 0; i < n_cells; ++i) {
            Cell c;
            Box b;
            b.axes.emplace_back(lo + w * i, lo + w * (i + 1));
            c.representative = GroupElement{{lo + w * i + w / 2}};
            c.fineness_witness = c.representative;
            c.measure = w;
            c.bounds = std::move(b);
            p.cells.push_back(std::move(c));
        }
        return p;
    }

    if (model.kind() == GroupKind::affine_line) {
        if (na == 0) {
            int r = 1;
            while (r * r < n_cells) ++r;
            if (r * r != n_cells)
                throw ConfigError("affine window partition needs a square n_cells (or explicit na,nb)");
            na = nb = r;
        }
        const Rational a0 = window.box.axes[0].first, a1 = window.box.axes[0].second;
        const Rational b0 = window.box.axes[1].first, b1 = window.box.axes[1].second;
        if (a0 <= 0) throw UnsupportedGeometry("affine window must have a > 0");
        const Rational inv0 = Rational(1) / a0, inv1 = Rational(1) / a1;
        const Rational dinv = (inv0 - inv1) / na;  // measure of each a-slice per unit b
        const Rational db = (b1 - b0) / nb;
        p.cell_measure = dinv * db;
        for (int i = 0; i < na; ++i) {
            Rational alo = Rational(1) / (inv0 - dinv * i);
            Rational ahi = Rational(1) / (inv0 - dinv * (i + 1));
            Rational arep = Rational(2) / (inv0 - dinv * i + inv0 - dinv * (i + 1));
            for (int j = 0; j < nb; ++j) {
                Cell c;
                Box b;
                b.axes.emplace_back(alo, ahi);
                b.axes.emplace_back(b0 + db * j, b0 + db * (j + 1));
                c.representative = GroupElement{{arep, b0 + db * j + db / 2}};
                c.fineness_witness = c.representative;
                c.measure = p.cell_measure;
                c.bounds = std::move(b);
                p.cells.push_back(std::move(c));
            }
        }
        return p;
    }
    throw KindMismatch("window_partition supports real_line and affine_line");
}

// Discretized stand-in for a non-atomic measure space: a grid of small cells,
// each represented by its center point and exact weight. Atoms belong to
// cover sets and partition cells by their center points.
struct AtomizedSpace {
    std::vector<GroupElement> points;
    std::vector<Rational> weights;
    Rational resolution;

    int size() const { return static_cast<int>(points.size()); }
    Rational total() const {
        Rational s(0);
        for (const auto& w : weights) s += w;
        return s;
    }
    Rational max_weight() const {
        Rational m(0);
        for (const auto& w : weights) m = rat_max(m, w);
        return m;
    }
};

inline AtomizedSpace atomize(const GroupModel& model, const CompactWindow& window,
                             const Rational& resolution) {
    if (resolution <= 0) throw ConfigError("resolution must be positive");
    AtomizedSpace sp;
    sp.resolution = resolution;

    Box b;
    if (window.whole_group) {
        if (model.kind() != GroupKind::torus)
            throw UnsupportedGeometry("atomize: whole-group windows require a torus");
        for (int a = 0; a < model.dim(); ++a) b.axes.emplace_back(Rational(0), Rational(1));
    } else {
        if (model.kind() != GroupKind::real_line && model.kind() != GroupKind::torus)
            throw UnsupportedGeometry("atomize supports torus and real_line");
        b = window.box;
    }

    const int d = b.dim();
    std::vector<int> counts(d);
    std::vector<Rational> steps(d);
    for (int a = 0; a < d; ++a) {
        counts[a] = static_cast<int>(ceil_int(b.width(a) / resolution).convert_to<long>());
        steps[a] = b.width(a) / counts[a];
    }
    std::vector<int> idx(d, 0);
    while (true) {
        GroupElement pt;
        Rational w(1);
        for (int a = 0; a < d; ++a) {
            pt.coords.push_back(b.axes[a].first + steps[a] * idx[a] + steps[a] / 2);
            w *= steps[a];
        }
        sp.points.push_back(std::move(pt));
        sp.weights.push_back(w);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == counts[a]) idx[a--] = 0;
        if (a < 0) break;
    }
    return sp;
}

// Rado instance: cover sets S_1..S_n of atoms (union = all atoms) and
// positive targets summing to the total measure.
struct RadoInstance {
    std::vector<std::vector<int>> cover_sets;
    std::vector<Rational> targets;

    int size() const { return static_cast<int>(cover_sets.size()); }
};

struct CoverResult {
    std::vector<GroupElement> centers;  // H
    AtomizedSpace space;
    RadoInstance instance;
};

// Greedy lattice cover of the window by U-balls: centers spaced U.radius
// apart, equal targets measure/|H|. The Hall condition is checked exactly on
// singletons and the full set and spot-checked on random subsets; failure
// raises CoverInfeasible.
inline CoverResult build_cover(const GroupModel& model, const CompactWindow& window,
                               const NeighborhoodSpec& U, const Rational& resolution,
                               unsigned spot_check_seed = 12345, int spot_checks = 200) {
    if (U.radius <= 0) throw ConfigError("U.radius must be positive");
    CoverResult res;
    res.space = atomize(model, window, resolution);

    if (model.kind() == GroupKind::torus) {
        // one center suffices when a single ball covers the circle
        const int c = U.radius * 2 >= 1
                          ? 1
                          : static_cast<int>(ceil_int(Rational(1) / U.radius).convert_to<long>());
        std::vector<int> idx(model.dim(), 0);
        while (true) {
            GroupElement g;
            for (int a = 0; a < model.dim(); ++a) g.coords.push_back(Rational(idx[a]) / c);
            res.centers.push_back(std::move(g));
            int a = model.dim() - 1;
            while (a >= 0 && ++idx[a] == c) idx[a--] = 0;
            if (a < 0) break;
        }
    } else if (model.kind() == GroupKind::real_line) {
        const Rational lo = window.box.axes[0].first;
        const Rational width = window.box.width(0);
        // windows inside one U-translate get the trivial single-center cover
        const int c = width <= U.radius * 2
                          ? 1
                          : static_cast<int>(ceil_int(width / U.radius).convert_to<long>());
        const Rational step = width / c;
        for (int k = 0; k < c; ++k)
            res.centers.push_back(GroupElement{{lo + step * k + step / 2}});
    } else {
        throw UnsupportedGeometry("build_cover supports torus and real_line");
    }

    const int n = static_cast<int>(res.centers.size());
    res.instance.cover_sets.assign(n, {});
    const Rational total = window_measure(model, window);
    res.instance.targets.assign(n, total / n);

    std::vector<char> covered(res.space.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < res.space.size(); ++a)
            if (model.dist(res.space.points[a], res.centers[i]) <= U.radius) {
                res.instance.cover_sets[i].push_back(a);
                covered[a] = 1;
            }

    for (int a = 0; a < res.space.size(); ++a)
        if (!covered[a])
            throw CoverInfeasible("atom " + std::to_string(a) + " not covered by any U-translate");

    // Hall: singletons exactly.
    for (int i = 0; i < n; ++i) {
        Rational m(0);
        for (int a : res.instance.cover_sets[i]) m += res.space.weights[a];
        if (m < res.instance.targets[i])
            throw CoverInfeasible("singleton Hall condition fails for center " + std::to_string(i));
    }
    // Full set is exact by coverage. Intermediate subsets: random spot checks.
    std::mt19937_64 rng(spot_check_seed);
    for (int trial = 0; trial < spot_checks; ++trial) {
        std::vector<char> in(n, 0);
        std::vector<char> hit(res.space.size(), 0);
        Rational target(0), measure(0);
        int members = 0;
        for (int i = 0; i < n; ++i)
            if (rng() & 1) {
                in[i] = 1;
                ++members;
                target += res.instance.targets[i];
                for (int a : res.instance.cover_sets[i])
                    if (!hit[a]) {
                        hit[a] = 1;
                        measure += res.space.weights[a];
                    }
            }
        if (members && measure < target)
            throw CoverInfeasible("spot-checked Hall condition fails on a subset of size " +
                                  std::to_string(members));
    }
    return res;
}

// Largest distance from the witness to any point of the box, in the model
// metric. Used for the fineness check cell <= witness * U.
inline Rational sup_dist_to_box(const GroupModel& model, const GroupElement& witness, const Box& b) {
    switch (model.kind()) {
        case GroupKind::torus: {
            Rational worst(0);
            for (int a = 0; a < b.dim(); ++a) {
                const Rational& w = witness.coords[a];
                Rational antipode = mod1(w + Rational(1, 2));
                Rational s;
                if (antipode >= b.axes[a].first && antipode < b.axes[a].second)
                    s = Rational(1, 2);
                else
                    s = rat_max(circle_dist(w, b.axes[a].first), circle_dist(w, b.axes[a].second));
                worst = rat_max(worst, s);
            }
            return worst;
        }
        case GroupKind::real_line: {
            const Rational& w = witness.coords[0];
            return rat_max(rat_abs(w - b.axes[0].first), rat_abs(w - b.axes[0].second));
        }
        default:
            throw UnsupportedGeometry("sup_dist_to_box supports torus and real_line");
    }
}

struct PartitionReport {
    bool equisize = false;
    Rational max_measure_deviation;
    bool fine = false;
    bool fineness_checked = false;
    bool representatives_ok = false;
};

// Checks the partition invariants: equal cell measures (exact deviation
// reported), U-fineness via the stored witnesses, and representative
// membership. Atom cells are checked through their atom center points.
inline PartitionReport verify_partition(const Partition& p, const NeighborhoodSpec& U,
                                        const GroupModel& model,
                                        const AtomizedSpace* space = nullptr) {
    PartitionReport rep;
    rep.max_measure_deviation = 0;
    rep.representatives_ok = true;
    bool fine = true, checked = true;
    for (const Cell& c : p.cells) {
        rep.max_measure_deviation = rat_max(rep.max_measure_deviation, rat_abs(c.measure - p.cell_measure));
        if (c.bounds) {
            if (model.kind() == GroupKind::affine_line) {
                checked = false;  // no exact sup-distance for the affine gauge
            } else {
                if (sup_dist_to_box(model, c.fineness_witness, *c.bounds) > U.radius) fine = false;
            }
            if (!c.bounds->contains(c.representative)) rep.representatives_ok = false;
        } else if (c.element >= 0) {
            if (model.dist(c.representative, c.fineness_witness) > U.radius) fine = false;
            if (model.index_of(c.representative) != c.element) rep.representatives_ok = false;
        } else {
            if (!space) throw ConfigError("verify_partition: atom cells need the AtomizedSpace");
            bool rep_in_cell = false;
            for (int a : c.atom_ids) {
                if (model.dist(space->points[a], c.fineness_witness) > U.radius) fine = false;
                if (space->points[a] == c.representative) rep_in_cell = true;
            }
            if (!rep_in_cell) rep.representatives_ok = false;
        }
    }
    rep.equisize = rep.max_measure_deviation == 0;
    rep.fine = fine && checked;
    rep.fineness_checked = checked;
    return rep;
}

}  // namespace latinapprox
