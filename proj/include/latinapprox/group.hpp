#pragma once

#include "latinapprox/errors.hpp"
#include "latinapprox/rational.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace latinapprox {

enum class GroupKind { torus, finite, real_line, affine_line };

inline std::string kind_name(GroupKind k) {
    switch (k) {
        case GroupKind::torus: return "torus";
        case GroupKind::finite: return "finite";
        case GroupKind::real_line: return "real_line";
        case GroupKind::affine_line: return "affine_line";
    }
    return "?";
}

// Coordinates are exact rationals:
//   torus(d)     d coordinates in [0,1)
//   finite       one coordinate = element index
//   real_line    one coordinate
//   affine_line  (a, b) with a > 0, acting as x -> a*x + b
struct GroupElement {
    std::vector<Rational> coords;

    bool operator==(const GroupElement& o) const { return coords == o.coords; }
    bool operator<(const GroupElement& o) const { return coords < o.coords; }
};

// x mod 1, result in [0,1).
inline Rational mod1(const Rational& x) {
    Rational r = x - Rational(floor_int(x));
    if (r < 0) r += 1;  // only when floor_int misbehaves; keep the invariant anyway
    if (r >= 1) r -= 1;
    return r;
}

// Distance on the circle R/Z.
inline Rational circle_dist(const Rational& a, const Rational& b) {
    Rational d = mod1(a - b);
    return rat_min(d, Rational(1) - d);
}

struct CayleyTable {
    int order = 0;
    std::vector<int> table;  // row-major, table[r*order + c]

    int at(int r, int c) const { return table[static_cast<size_t>(r) * order + c]; }

    static CayleyTable cyclic(int n) {
        CayleyTable t;
        t.order = n;
        t.table.resize(static_cast<size_t>(n) * n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) t.table[static_cast<size_t>(r) * n + c] = (r + c) % n;
        return t;
    }

    // S_3 with elements enumerated as permutations of {0,1,2} in lexicographic
    // order; composition (p*q)(x) = p(q(x)).
    static CayleyTable symmetric3() {
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        auto find = [&](const int* p) {
            for (int i = 0; i < 6; ++i)
                if (perms[i][0] == p[0] && perms[i][1] == p[1] && perms[i][2] == p[2]) return i;
            return -1;
        };
        CayleyTable t;
        t.order = 6;
        t.table.resize(36);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) {
                int comp[3];
                for (int x = 0; x < 3; ++x) comp[x] = perms[r][perms[c][x]];
                t.table[static_cast<size_t>(r) * 6 + c] = find(comp);
            }
        return t;
    }

    static CayleyTable from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open cayley table: " + path);
        std::vector<std::vector<int>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<int> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stoi(cell));
            rows.push_back(std::move(row));
        }
        CayleyTable t;
        t.order = static_cast<int>(rows.size());
        for (auto& r : rows) {
            if (static_cast<int>(r.size()) != t.order)
                throw ConfigError("cayley table is not square in " + path);
            t.table.insert(t.table.end(), r.begin(), r.end());
        }
        t.validate_group();
        return t;
    }

    int identity() const {
        for (int e = 0; e < order; ++e) {
            bool ok = true;
            for (int x = 0; x < order && ok; ++x) ok = at(e, x) == x && at(x, e) == x;
            if (ok) return e;
        }
        throw ConfigError("cayley table has no identity");
    }

    int inverse(int g) const {
        int e = identity();
        for (int h = 0; h < order; ++h)
            if (at(g, h) == e) return h;
        throw ConfigError("cayley table has no inverse for element " + std::to_string(g));
    }

    // Latin + identity + inverses + full associativity. Desk-scale orders only.
    void validate_group() const {
        for (int r = 0; r < order; ++r) {
            std::vector<char> row(order, 0), col(order, 0);
            for (int c = 0; c < order; ++c) {
                int v = at(r, c), w = at(c, r);
                if (v < 0 || v >= order || w < 0 || w >= order)
                    throw ConfigError("cayley entry out of range");
                if (row[v]++ || col[w]++) throw ConfigError("cayley table is not a Latin square");
            }
        }
        (void)identity();
        for (int g = 0; g < order; ++g) (void)inverse(g);
        for (int a = 0; a < order; ++a)
            for (int b = 0; b < order; ++b)
                for (int c = 0; c < order; ++c)
                    if (at(at(a, b), c) != at(a, at(b, c)))
                        throw ConfigError("cayley table is not associative");
    }
};

// A concrete group with exact operations and a Haar measure descriptor.
// torus(d) and finite carry the normalized measure (total 1); real_line is
// Lebesgue; affine_line carries the left Haar measure da db / a^2, and is the
// only non-unimodular kind.
class GroupModel {
public:
    static GroupModel torus(int d) {
        if (d < 1) throw ConfigError("torus dimension must be >= 1");
        GroupModel m;
        m.kind_ = GroupKind::torus;
        m.dim_ = d;
        return m;
    }
    static GroupModel finite(CayleyTable t) {
        t.validate_group();
        GroupModel m;
        m.kind_ = GroupKind::finite;
        m.dim_ = 1;
        m.cayley_ = std::move(t);
        m.inverse_.resize(m.cayley_.order);
        for (int g = 0; g < m.cayley_.order; ++g) m.inverse_[g] = m.cayley_.inverse(g);
        return m;
    }
    static GroupModel real_line() {
        GroupModel m;
        m.kind_ = GroupKind::real_line;
        m.dim_ = 1;
        return m;
    }
    static GroupModel affine_line() {
        GroupModel m;
        m.kind_ = GroupKind::affine_line;
        m.dim_ = 2;
        return m;
    }

    GroupKind kind() const { return kind_; }
    int dim() const { return dim_; }
    const CayleyTable& cayley() const { return cayley_; }
    int order() const { return cayley_.order; }

    bool compact() const { return kind_ == GroupKind::torus || kind_ == GroupKind::finite; }
    bool unimodular() const { return kind_ != GroupKind::affine_line; }

    GroupElement identity() const {
        switch (kind_) {
            case GroupKind::torus: return {std::vector<Rational>(dim_, Rational(0))};
            case GroupKind::finite: return {{Rational(cayley_.identity())}};
            case GroupKind::real_line: return {{Rational(0)}};
            case GroupKind::affine_line: return {{Rational(1), Rational(0)}};
        }
        throw Error("unreachable");
    }

    GroupElement mul(const GroupElement& g, const GroupElement& h) const {
        check(g);
        check(h);
        switch (kind_) {
            case GroupKind::torus: {
                GroupElement r;
                r.coords.reserve(dim_);
                for (int a = 0; a < dim_; ++a) r.coords.push_back(mod1(g.coords[a] + h.coords[a]));
                return r;
            }
            case GroupKind::finite:
                return {{Rational(cayley_.at(index_of(g), index_of(h)))}};
            case GroupKind::real_line:
                return {{g.coords[0] + h.coords[0]}};
            case GroupKind::affine_line:
                // (a,b)(c,d) = (ac, ad + b)
                return {{g.coords[0] * h.coords[0], g.coords[0] * h.coords[1] + g.coords[1]}};
        }
        throw Error("unreachable");
    }

    GroupElement inv(const GroupElement& g) const {
        check(g);
        switch (kind_) {
            case GroupKind::torus: {
                GroupElement r;
                r.coords.reserve(dim_);
                for (int a = 0; a < dim_; ++a) r.coords.push_back(mod1(-g.coords[a]));
                return r;
            }
            case GroupKind::finite:
                return {{Rational(inverse_[index_of(g)])}};
            case GroupKind::real_line:
                return {{-g.coords[0]}};
            case GroupKind::affine_line:
                return {{Rational(1) / g.coords[0], -g.coords[1] / g.coords[0]}};
        }
        throw Error("unreachable");
    }

    // Left-invariant distance. torus: max over axes of the circle distance;
    // finite: discrete 0/1; real_line: |a-b|; affine_line: a rational-valued
    // symmetric gauge of g^-1 h (probe-only kind, triangle inequality unused).
    Rational dist(const GroupElement& g, const GroupElement& h) const {
        check(g);
        check(h);
        switch (kind_) {
            case GroupKind::torus: {
                Rational d(0);
                for (int a = 0; a < dim_; ++a) d = rat_max(d, circle_dist(g.coords[a], h.coords[a]));
                return d;
            }
            case GroupKind::finite:
                return index_of(g) == index_of(h) ? Rational(0) : Rational(1);
            case GroupKind::real_line:
                return rat_abs(g.coords[0] - h.coords[0]);
            case GroupKind::affine_line: {
                GroupElement q = mul(inv(g), h);
                const Rational& a = q.coords[0];
                Rational b = rat_abs(q.coords[1]);
                return rat_max(a, Rational(1) / a) - 1 + rat_max(b, b / a);
            }
        }
        throw Error("unreachable");
    }

    int index_of(const GroupElement& g) const {
        if (kind_ != GroupKind::finite) throw KindMismatch("index_of on non-finite model");
        return static_cast<int>(floor_i64(g.coords[0]));
    }

    GroupElement element(int idx) const {
        if (kind_ != GroupKind::finite) throw KindMismatch("element on non-finite model");
        if (idx < 0 || idx >= cayley_.order) throw ConfigError("element index out of range");
        return {{Rational(idx)}};
    }

private:
    void check(const GroupElement& g) const {
        if (static_cast<int>(g.coords.size()) != dim_)
            throw KindMismatch("element has " + std::to_string(g.coords.size()) +
                               " coordinates, model " + kind_name(kind_) + " expects " +
                               std::to_string(dim_));
    }

    GroupKind kind_ = GroupKind::torus;
    int dim_ = 1;
    CayleyTable cayley_;
    std::vector<int> inverse_;
};

// Symmetric metric ball around the identity (U = U^-1 holds for all kinds
// because dist(e, g) = dist(e, g^-1) for the metrics above).
struct NeighborhoodSpec {
    Rational radius;
};

// Axis-aligned half-open box [lo, hi) per axis. Boundaries carry measure
// zero, so half-open cells tile windows with exact disjointness.
struct Box {
    std::vector<std::pair<Rational, Rational>> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    Rational width(int a) const { return axes[a].second - axes[a].first; }
    bool contains(const GroupElement& g) const {
        for (int a = 0; a < dim(); ++a)
            if (g.coords[a] < axes[a].first || g.coords[a] >= axes[a].second) return false;
        return true;
    }
};

// A compact window C, with an optional inner target B for the locally
// compact pipeline. For compact kinds the window is the whole group.
struct CompactWindow {
    bool whole_group = true;
    Box box;  // unused when whole_group

    static CompactWindow all() { return CompactWindow{}; }
    static CompactWindow of_box(Box b) { return CompactWindow{false, std::move(b)}; }
};

// Haar measure of a box under the model's measure descriptor.
inline Rational box_measure(const GroupModel& model, const Box& b) {
    switch (model.kind()) {
        case GroupKind::torus:
        case GroupKind::real_line: {
            Rational m(1);
            for (int a = 0; a < b.dim(); ++a) m *= b.width(a);
            return m;
        }
        case GroupKind::affine_line: {
            // left Haar da db / a^2 over [a0,a1) x [b0,b1)
            const Rational &a0 = b.axes[0].first, &a1 = b.axes[0].second;
            if (a0 <= 0) throw UnsupportedGeometry("affine box must have a > 0");
            return (Rational(1) / a0 - Rational(1) / a1) * b.width(1);
        }
        case GroupKind::finite:
            throw UnsupportedGeometry("box measure undefined for finite models");
    }
    throw Error("unreachable");
}

inline Rational window_measure(const GroupModel& model, const CompactWindow& w) {
    if (w.whole_group) {
        if (!model.compact()) throw UnsupportedGeometry("whole-group window needs a compact model");
        return Rational(1);
    }
    return box_measure(model, w.box);
}

}  // namespace latinapprox
