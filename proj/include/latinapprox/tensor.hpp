#pragma once

#include "latinapprox/errors.hpp"
#include "latinapprox/group.hpp"
#include "latinapprox/partition.hpp"
#include "latinapprox/rational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace latinapprox {

// ---------------------------------------------------------------------------
// Exact interval mass helpers
// ---------------------------------------------------------------------------

// Area of {(x,y) in [p,q) x [r,s) : x - y <= t}. Piecewise quadratic in t.
inline Rational diff_cdf_area(const Rational& p, const Rational& q, const Rational& r,
                              const Rational& s, const Rational& t) {
    // g(y) = clamp(t + y - p, 0, q - p); integral over y in [r, s].
    const Rational a = q - p;
    const Rational y1 = p - t;      // g = 0 below
    const Rational y2 = q - t;      // g = a above
    Rational area(0);
    Rational flat_lo = rat_max(r, y2);
    if (s > flat_lo) area += a * (s - flat_lo);
    Rational lo = rat_max(r, y1), hi = rat_min(s, y2);
    if (hi > lo) area += (t - p) * (hi - lo) + (hi * hi - lo * lo) / 2;
    return area;
}

// Mass of {x in [p,q), y in [r,s) : x - y in [u,v)} on the line.
inline Rational diff_mass_line(const Rational& p, const Rational& q, const Rational& r,
                               const Rational& s, const Rational& u, const Rational& v) {
    return diff_cdf_area(p, q, r, s, v) - diff_cdf_area(p, q, r, s, u);
}

// Same on the circle R/Z: cells within [0,1), target arc [u,v) <= [0,1).
// The difference lies in (-1, 1), so two integer shifts cover every case.
inline Rational diff_mass_circle(const Rational& p, const Rational& q, const Rational& r,
                                 const Rational& s, const Rational& u, const Rational& v) {
    return diff_mass_line(p, q, r, s, u, v) + diff_mass_line(p, q, r, s, u - 1, v - 1);
}

// Overlap length of two half-open intervals.
inline Rational interval_overlap(const Rational& a, const Rational& b, const Rational& c,
                                 const Rational& d) {
    Rational lo = rat_max(a, c), hi = rat_min(b, d);
    return hi > lo ? hi - lo : Rational(0);
}

// Overlap length of arcs on the circle; the first interval may have length
// up to 2 (a Minkowski sum of two cells).
inline Rational arc_overlap(const Rational& a, const Rational& b, const Rational& c,
                            const Rational& d) {
    Rational total(0);
    for (int m = -2; m <= 2; ++m) total += interval_overlap(a, b, c + m, d + m);
    return total;
}

// ---------------------------------------------------------------------------
// WTensor
// ---------------------------------------------------------------------------

enum class TensorMode { exact, montecarlo };

// The measure tensor w_ijk = integral over C x C of
// chi_i(x y^-1) chi_j(y) chi_k(x) dHaar(x) dHaar(y).
// Exact mode stores rationals; Monte Carlo mode stores per-entry estimates
// with batch-based standard errors, plus per-(j,k) stratum totals (needed for
// the i-line laws, whose summands share a stratum and are correlated).
struct WTensor {
    int n = 0;
    TensorMode mode = TensorMode::exact;
    Rational window_measure_sq;  // nu(C)^2

    std::vector<Rational> exact;

    std::vector<double> est;
    std::vector<double> sd;
    std::vector<double> stratum_total;     // n*n, indexed j + n*k
    std::vector<double> stratum_total_sd;  // n*n

    // Flattened with i fastest, then j, then k.
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(k) * n + j) * n + i;
    }
    Rational line_target() const { return window_measure_sq / (Rational(n) * n); }
};

// Index-pair supports of the locally compact pipeline:
//   S   = {(i,j) : P_i * P_j      <= C}
//   S'  = {(i,k) : P_i^-1 * P_k   <= C}
//   S'' = {(j,k) : P_k * P_j^-1   <= C}
struct SupportSets {
    int n = 0;
    std::vector<char> S, Sp, Spp;  // n*n masks, first index fastest

    bool in_S(int i, int j) const { return S[static_cast<size_t>(j) * n + i] != 0; }
    bool in_Sp(int i, int k) const { return Sp[static_cast<size_t>(k) * n + i] != 0; }
    bool in_Spp(int j, int k) const { return Spp[static_cast<size_t>(k) * n + j] != 0; }

    static SupportSets full(int n) {
        SupportSets s;
        s.n = n;
        s.S.assign(static_cast<size_t>(n) * n, 1);
        s.Sp = s.S;
        s.Spp = s.S;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Exact tensor
// ---------------------------------------------------------------------------

inline WTensor w_exact(const Partition& p, const GroupModel& model, const CompactWindow& window) {
    const int n = p.size();
    WTensor w;
    w.n = n;
    w.mode = TensorMode::exact;
    {
        Rational m = window_measure(model, window);
        w.window_measure_sq = m * m;
    }
    w.exact.assign(static_cast<size_t>(n) * n * n, Rational(0));

    switch (model.kind()) {
        case GroupKind::finite: {
            // Singleton cells: x = p_k, y = p_j, and x y^-1 lands in the cell
            // of the element k j^-1.
            const Rational v = Rational(1) / (Rational(model.order()) * model.order());
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j) {
                    if (p.cells[k].element < 0 || p.cells[j].element < 0)
                        throw UnsupportedGeometry("finite w_exact needs singleton cells");
                    int prod = model.cayley().at(p.cells[k].element,
                                                 model.cayley().inverse(p.cells[j].element));
                    for (int i = 0; i < n; ++i)
                        if (p.cells[i].element == prod) w.exact[w.idx(i, j, k)] = v;
                }
            return w;
        }
        case GroupKind::torus:
        case GroupKind::real_line: {
            const bool circ = model.kind() == GroupKind::torus;
            const int d = model.dim();
            for (int k = 0; k < n; ++k) {
                const Box& bk = *p.cells[k].bounds;
                for (int j = 0; j < n; ++j) {
                    const Box& bj = *p.cells[j].bounds;
                    for (int i = 0; i < n; ++i) {
                        const Box& bi = *p.cells[i].bounds;
                        Rational v(1);
                        for (int a = 0; a < d && v != 0; ++a) {
                            Rational m =
                                circ ? diff_mass_circle(bk.axes[a].first, bk.axes[a].second,
                                                        bj.axes[a].first, bj.axes[a].second,
                                                        bi.axes[a].first, bi.axes[a].second)
                                     : diff_mass_line(bk.axes[a].first, bk.axes[a].second,
                                                      bj.axes[a].first, bj.axes[a].second,
                                                      bi.axes[a].first, bi.axes[a].second);
                            v *= m;
                        }
                        if (v != 0) w.exact[w.idx(i, j, k)] = v;
                    }
                }
            }
            return w;
        }
        default:
            throw UnsupportedGeometry("w_exact supports torus, finite and real_line models");
    }
}

// ---------------------------------------------------------------------------
// Support sets by exact interval arithmetic (undecided pairs are excluded)
// ---------------------------------------------------------------------------

namespace detail {

struct Hull {
    std::vector<std::pair<Rational, Rational>> axes;  // closed hulls
};

inline Hull hull_of(const Box& b) {
    Hull h;
    h.axes = b.axes;
    return h;
}

inline Hull hull_mul(const GroupModel& model, const Hull& x, const Hull& y) {
    Hull r;
    switch (model.kind()) {
        case GroupKind::real_line:
            r.axes.push_back({x.axes[0].first + y.axes[0].first, x.axes[0].second + y.axes[0].second});
            return r;
        case GroupKind::affine_line: {
            // (a,b)(c,d) = (ac, ad + b); a,c > 0
            const auto& [alo, ahi] = x.axes[0];
            const auto& [blo, bhi] = x.axes[1];
            const auto& [clo, chi] = y.axes[0];
            const auto& [dlo, dhi] = y.axes[1];
            Rational plo = rat_min(rat_min(alo * dlo, alo * dhi), rat_min(ahi * dlo, ahi * dhi));
            Rational phi = rat_max(rat_max(alo * dlo, alo * dhi), rat_max(ahi * dlo, ahi * dhi));
            r.axes.push_back({alo * clo, ahi * chi});
            r.axes.push_back({plo + blo, phi + bhi});
            return r;
        }
        default:
            throw UnsupportedGeometry("hull_mul supports real_line and affine_line");
    }
}

inline Hull hull_inv(const GroupModel& model, const Hull& x) {
    Hull r;
    switch (model.kind()) {
        case GroupKind::real_line:
            r.axes.push_back({-x.axes[0].second, -x.axes[0].first});
            return r;
        case GroupKind::affine_line: {
            // (a,b)^-1 = (1/a, -b/a)
            const auto& [alo, ahi] = x.axes[0];
            const auto& [blo, bhi] = x.axes[1];
            r.axes.push_back({Rational(1) / ahi, Rational(1) / alo});
            Rational c1 = -blo / alo, c2 = -blo / ahi, c3 = -bhi / alo, c4 = -bhi / ahi;
            r.axes.push_back({rat_min(rat_min(c1, c2), rat_min(c3, c4)),
                              rat_max(rat_max(c1, c2), rat_max(c3, c4))});
            return r;
        }
        default:
            throw UnsupportedGeometry("hull_inv supports real_line and affine_line");
    }
}

inline bool hull_inside(const Hull& h, const Box& window) {
    for (size_t a = 0; a < h.axes.size(); ++a)
        if (h.axes[a].first < window.axes[a].first || h.axes[a].second > window.axes[a].second)
            return false;
    return true;
}

}  // namespace detail

inline SupportSets support_sets(const Partition& p, const GroupModel& model,
                                const CompactWindow& window) {
    const int n = p.size();
    if (window.whole_group) return SupportSets::full(n);

    SupportSets s;
    s.n = n;
    s.S.assign(static_cast<size_t>(n) * n, 0);
    s.Sp = s.S;
    s.Spp = s.S;
    for (int x = 0; x < n; ++x) {
        if (!p.cells[x].bounds) throw UnsupportedGeometry("support_sets needs box cells");
        detail::Hull hx = detail::hull_of(*p.cells[x].bounds);
        detail::Hull hx_inv = detail::hull_inv(model, hx);
        for (int y = 0; y < n; ++y) {
            detail::Hull hy = detail::hull_of(*p.cells[y].bounds);
            // S: P_x * P_y inside C
            if (detail::hull_inside(detail::hull_mul(model, hx, hy), window.box))
                s.S[static_cast<size_t>(y) * n + x] = 1;
            // S': P_x^-1 * P_y inside C  (pair (i,k) = (x,y))
            if (detail::hull_inside(detail::hull_mul(model, hx_inv, hy), window.box))
                s.Sp[static_cast<size_t>(y) * n + x] = 1;
            // S'': P_y * P_x^-1 inside C  (pair (j,k) = (x,y))
            if (detail::hull_inside(detail::hull_mul(model, hy, hx_inv), window.box))
                s.Spp[static_cast<size_t>(y) * n + x] = 1;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Monte Carlo tensor
// ---------------------------------------------------------------------------

namespace detail {

// Locates points in a grid-structured box partition (every partition this
// library constructs is one). Double precision; boundary ties carry zero mass.
struct GridLocator {
    int dim = 0;
    std::vector<std::vector<double>> breaks;  // per axis, ascending cell lows
    std::vector<double> his;                  // per axis, overall hi
    std::map<std::vector<int>, int> cell_of;  // axis indices -> cell id

    explicit GridLocator(const Partition& p) {
        dim = p.cells[0].bounds->dim();
        std::vector<std::vector<Rational>> lows(dim);
        for (const Cell& c : p.cells)
            for (int a = 0; a < dim; ++a) lows[a].push_back(c.bounds->axes[a].first);
        breaks.resize(dim);
        his.resize(dim);
        for (int a = 0; a < dim; ++a) {
            std::sort(lows[a].begin(), lows[a].end());
            lows[a].erase(std::unique(lows[a].begin(), lows[a].end()), lows[a].end());
            for (const Rational& q : lows[a]) breaks[a].push_back(to_double(q));
            Rational hi = p.cells[0].bounds->axes[a].second;
            for (const Cell& c : p.cells) hi = rat_max(hi, c.bounds->axes[a].second);
            his[a] = to_double(hi);
        }
        for (int id = 0; id < p.size(); ++id) {
            std::vector<int> key(dim);
            for (int a = 0; a < dim; ++a) {
                double lo = to_double(p.cells[id].bounds->axes[a].first);
                key[a] = static_cast<int>(std::lower_bound(breaks[a].begin(), breaks[a].end(),
                                                           lo + 1e-12) -
                                          breaks[a].begin()) -
                         1;
                if (key[a] < 0) key[a] = 0;
            }
            cell_of[key] = id;
        }
    }

    // -1 when outside the grid.
    int locate(const double* coords) const {
        std::vector<int> key(dim);
        for (int a = 0; a < dim; ++a) {
            double v = coords[a];
            if (v < breaks[a].front() || v >= his[a]) return -1;
            key[a] = static_cast<int>(std::upper_bound(breaks[a].begin(), breaks[a].end(), v) -
                                      breaks[a].begin()) -
                     1;
        }
        auto it = cell_of.find(key);
        return it == cell_of.end() ? -1 : it->second;
    }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t j, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (j * 1315423911ull + k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Stratified Monte Carlo estimate of the tensor: for each cell pair (j,k) an
// equal number of samples x ~ Haar|P_k, y ~ Haar|P_j is drawn and the product
// x y^-1 is located. Strata use independent seeds derived from (seed, j, k)
// and are reduced in a fixed order, so runs are bit-reproducible.
inline WTensor w_montecarlo(const Partition& p, const GroupModel& model,
                            const CompactWindow& window, std::int64_t samples,
                            std::uint64_t seed, int batches = 100) {
    const int n = p.size();
    if (samples < static_cast<std::int64_t>(n) * n) throw ConfigError("too few samples");
    for (const Cell& c : p.cells)
        if (!c.bounds) throw UnsupportedGeometry("w_montecarlo needs box cells");

    WTensor w;
    w.n = n;
    w.mode = TensorMode::montecarlo;
    {
        Rational m = window_measure(model, window);
        w.window_measure_sq = m * m;
    }
    const size_t n3 = static_cast<size_t>(n) * n * n;
    w.est.assign(n3, 0.0);
    w.sd.assign(n3, 0.0);
    w.stratum_total.assign(static_cast<size_t>(n) * n, 0.0);
    w.stratum_total_sd.assign(static_cast<size_t>(n) * n, 0.0);

    detail::GridLocator locator(p);
    const int d = model.dim();
    const std::int64_t per_stratum = samples / (static_cast<std::int64_t>(n) * n);
    const int B = std::max<int>(2, static_cast<int>(std::min<std::int64_t>(batches, per_stratum)));

    std::vector<double> cell_measure(n);
    for (int c = 0; c < n; ++c) cell_measure[c] = to_double(p.cells[c].measure);

    // Per-cell sampling parameters in doubles.
    struct CellSampler {
        double lo[2], width[2];
        double inv_lo, inv_span;  // affine a-axis: uniform in 1/a
    };
    std::vector<CellSampler> samplers(n);
    const bool affine = model.kind() == GroupKind::affine_line;
    for (int c = 0; c < n; ++c) {
        const Box& b = *p.cells[c].bounds;
        for (int a = 0; a < d; ++a) {
            samplers[c].lo[a] = to_double(b.axes[a].first);
            samplers[c].width[a] = to_double(b.axes[a].second - b.axes[a].first);
        }
        if (affine) {
            double alo = to_double(b.axes[0].first), ahi = to_double(b.axes[0].second);
            samplers[c].inv_lo = 1.0 / alo;
            samplers[c].inv_span = 1.0 / alo - 1.0 / ahi;
        }
    }

    std::vector<std::int64_t> hits(static_cast<size_t>(n) * B);
    std::vector<std::int64_t> tot_hits(B);
    std::vector<double> batch_vals(B);

    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            std::mt19937_64 rng(detail::mix_seed(seed, j, k));
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::fill(hits.begin(), hits.end(), 0);
            std::fill(tot_hits.begin(), tot_hits.end(), 0);

            const auto& sj = samplers[j];
            const auto& sk = samplers[k];
            for (std::int64_t s = 0; s < per_stratum; ++s) {
                const int b = static_cast<int>(s % B);
                double x[2], y[2], z[2];
                if (affine) {
                    x[0] = 1.0 / (sk.inv_lo - unif(rng) * sk.inv_span);
                    x[1] = sk.lo[1] + unif(rng) * sk.width[1];
                    y[0] = 1.0 / (sj.inv_lo - unif(rng) * sj.inv_span);
                    y[1] = sj.lo[1] + unif(rng) * sj.width[1];
                    z[0] = x[0] / y[0];
                    z[1] = x[1] - z[0] * y[1];
                } else {
                    for (int a = 0; a < d; ++a) {
                        x[a] = sk.lo[a] + unif(rng) * sk.width[a];
                        y[a] = sj.lo[a] + unif(rng) * sj.width[a];
                        z[a] = x[a] - y[a];
                        if (model.kind() == GroupKind::torus) {
                            z[a] -= std::floor(z[a]);
                            if (z[a] >= 1.0) z[a] = 0.0;
                        }
                    }
                }
                int i = locator.locate(z);
                if (i >= 0) {
                    ++hits[static_cast<size_t>(i) * B + b];
                    ++tot_hits[b];
                }
            }

            const double scale = cell_measure[j] * cell_measure[k];
            const double per_batch = static_cast<double>(per_stratum) / B;
            auto batch_stats = [&](const std::int64_t* counts, double& mean, double& stderr_out) {
                double m = 0;
                for (int b = 0; b < B; ++b) {
                    // batch b receives ceil/floor share of samples
                    std::int64_t nb = per_stratum / B + (b < per_stratum % B ? 1 : 0);
                    batch_vals[b] = nb > 0 ? scale * counts[b] / nb : 0.0;
                    m += batch_vals[b];
                }
                m /= B;
                double var = 0;
                for (int b = 0; b < B; ++b) var += (batch_vals[b] - m) * (batch_vals[b] - m);
                var /= (B - 1);
                mean = m;
                stderr_out = std::sqrt(var / B);
                (void)per_batch;
            };

            for (int i = 0; i < n; ++i) {
                double mean, se;
                batch_stats(&hits[static_cast<size_t>(i) * B], mean, se);
                w.est[w.idx(i, j, k)] = mean;
                w.sd[w.idx(i, j, k)] = se;
            }
            double mean, se;
            batch_stats(tot_hits.data(), mean, se);
            w.stratum_total[static_cast<size_t>(k) * n + j] = mean;
            w.stratum_total_sd[static_cast<size_t>(k) * n + j] = se;
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Line sums and the line laws
// ---------------------------------------------------------------------------

struct LineSums {
    int n = 0;
    bool exact_mode = true;
    // over_i indexed (j,k); over_j indexed (i,k); over_k indexed (i,j);
    // first index fastest.
    std::vector<Rational> over_i, over_j, over_k;
    std::vector<double> over_i_d, over_j_d, over_k_d;
};

inline LineSums line_sums(const WTensor& w) {
    LineSums ls;
    ls.n = w.n;
    ls.exact_mode = w.mode == TensorMode::exact;
    const int n = w.n;
    const size_t nn = static_cast<size_t>(n) * n;
    if (ls.exact_mode) {
        ls.over_i.assign(nn, Rational(0));
        ls.over_j.assign(nn, Rational(0));
        ls.over_k.assign(nn, Rational(0));
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const Rational& v = w.exact[w.idx(i, j, k)];
                    if (v == 0) continue;
                    ls.over_i[static_cast<size_t>(k) * n + j] += v;
                    ls.over_j[static_cast<size_t>(k) * n + i] += v;
                    ls.over_k[static_cast<size_t>(j) * n + i] += v;
                }
    } else {
        ls.over_i_d.assign(nn, 0.0);
        ls.over_j_d.assign(nn, 0.0);
        ls.over_k_d.assign(nn, 0.0);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double v = w.est[w.idx(i, j, k)];
                    ls.over_i_d[static_cast<size_t>(k) * n + j] += v;
                    ls.over_j_d[static_cast<size_t>(k) * n + i] += v;
                    ls.over_k_d[static_cast<size_t>(j) * n + i] += v;
                }
    }
    return ls;
}

struct LineLawViolation {
    char axis;  // 'i', 'j' or 'k' — the summed index
    int a, b;   // remaining pair (j,k) / (i,k) / (i,j)
    double sum;
    double expected;
    double tolerance;  // 0 in exact mode
};

struct LineLawReport {
    bool ok = false;
    Rational target;  // nu(C)^2 / n^2
    std::vector<LineLawViolation> violations;
    bool support_witness_ok = true;  // w_ijk > 0 => nu(P_i P_j ∩ P_k) > 0
};

// nu(P_i * P_j ∩ P_k) > 0, decided exactly for the exact-geometry kinds.
inline bool product_intersects_cell(const Partition& p, const GroupModel& model, int i, int j, int k) {
    switch (model.kind()) {
        case GroupKind::finite: {
            int prod = model.cayley().at(p.cells[i].element, p.cells[j].element);
            return p.cells[k].element == prod;
        }
        case GroupKind::torus: {
            for (int a = 0; a < model.dim(); ++a) {
                const auto& ia = p.cells[i].bounds->axes[a];
                const auto& ja = p.cells[j].bounds->axes[a];
                const auto& ka = p.cells[k].bounds->axes[a];
                if (arc_overlap(ia.first + ja.first, ia.second + ja.second, ka.first, ka.second) ==
                    0)
                    return false;
            }
            return true;
        }
        case GroupKind::real_line: {
            const auto& ia = p.cells[i].bounds->axes[0];
            const auto& ja = p.cells[j].bounds->axes[0];
            const auto& ka = p.cells[k].bounds->axes[0];
            return interval_overlap(ia.first + ja.first, ia.second + ja.second, ka.first,
                                    ka.second) > 0;
        }
        default:
            return true;  // no exact geometry; skip
    }
}

// Checks the line-sum laws against the target nu(C)^2/n^2:
//   compact windows: every line sum equals the target
//   box windows:     every line sum is <= target, with equality for k-lines
//                    on S, j-lines on S', i-lines on S''
// Exact tensors are checked with rational equality; Monte Carlo tensors
// within 4 standard errors (i-lines use the stratum-total errors, since their
// summands are correlated within a stratum). Violations are returned, not
// thrown: for a non-unimodular model they are the expected outcome.
inline LineLawReport verify_line_laws(const WTensor& w, const SupportSets& s, bool compact,
                                      const Partition* p = nullptr,
                                      const GroupModel* model = nullptr) {
    LineLawReport rep;
    rep.target = w.line_target();
    const int n = w.n;
    const double target_d = to_double(rep.target);
    LineSums ls = line_sums(w);

    auto check_line = [&](char axis, int a, int b, const Rational* sum_e, double sum_d,
                          double tol_d, bool require_equal) {
        if (w.mode == TensorMode::exact) {
            if (require_equal ? (*sum_e != rep.target) : (*sum_e > rep.target))
                rep.violations.push_back({axis, a, b, to_double(*sum_e), target_d, 0.0});
        } else {
            if (require_equal ? std::abs(sum_d - target_d) > tol_d : sum_d > target_d + tol_d)
                rep.violations.push_back({axis, a, b, sum_d, target_d, tol_d});
        }
    };

    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            size_t id = static_cast<size_t>(k) * n + j;
            double tol = w.mode == TensorMode::montecarlo ? 4.0 * w.stratum_total_sd[id] : 0.0;
            double sum = w.mode == TensorMode::montecarlo ? ls.over_i_d[id] : 0.0;
            bool eq = compact || s.in_Spp(j, k);
            check_line('i', j, k, w.mode == TensorMode::exact ? &ls.over_i[id] : nullptr, sum, tol,
                       eq);
        }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            size_t id = static_cast<size_t>(k) * n + i;
            double tol = 0.0, sum = 0.0;
            if (w.mode == TensorMode::montecarlo) {
                double var = 0;
                for (int j = 0; j < n; ++j) {
                    double sd = w.sd[w.idx(i, j, k)];
                    var += sd * sd;  // strata (j,k) independent across j
                }
                tol = 4.0 * std::sqrt(var);
                sum = ls.over_j_d[id];
            }
            bool eq = compact || s.in_Sp(i, k);
            check_line('j', i, k, w.mode == TensorMode::exact ? &ls.over_j[id] : nullptr, sum, tol,
                       eq);
        }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            size_t id = static_cast<size_t>(j) * n + i;
            double tol = 0.0, sum = 0.0;
            if (w.mode == TensorMode::montecarlo) {
                double var = 0;
                for (int k = 0; k < n; ++k) {
                    double sd = w.sd[w.idx(i, j, k)];
                    var += sd * sd;  // strata (j,k) independent across k
                }
                tol = 4.0 * std::sqrt(var);
                sum = ls.over_k_d[id];
            }
            bool eq = compact || s.in_S(i, j);
            check_line('k', i, j, w.mode == TensorMode::exact ? &ls.over_k[id] : nullptr, sum, tol,
                       eq);
        }

    if (p && model && w.mode == TensorMode::exact) {
        for (int k = 0; k < n && rep.support_witness_ok; ++k)
            for (int j = 0; j < n && rep.support_witness_ok; ++j)
                for (int i = 0; i < n; ++i)
                    if (w.exact[w.idx(i, j, k)] > 0 &&
                        !product_intersects_cell(*p, *model, i, j, k)) {
                        rep.support_witness_ok = false;
                        break;
                    }
    }

    rep.ok = rep.violations.empty() && rep.support_witness_ok;
    return rep;
}

}  // namespace latinapprox
