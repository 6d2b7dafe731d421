#pragma once

// Pointwise-emergence estimation from sampled accumulation measures: W1
// covering/packing counts via a deterministic farthest-point permutation,
// the volume-argument lower bound C_L eps^-L, the two-measure historic lower
// bound, emergence curves and fitted exponents, and net-coverage verification.

#include "emg/measure.hpp"
#include "emg/numeric.hpp"
#include "emg/shift.hpp"
#include "emg/transport.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace emg {

// ---------------------------------------------------------------------------
// Sampled accumulation set.

struct SampleInfo {
    int block_L = 0;
    int block_index = 0;   // index within the net of level L
    std::string time;      // checkpoint time (decimal string; may be astronomical)
    double prune_slack = 0.0;
};

struct AccumulationSample {
    std::vector<DiscreteMeasure> measures;
    std::vector<SampleInfo> info;

    std::size_t size() const { return measures.size(); }
};

// ---------------------------------------------------------------------------
// Farthest-point permutation: one O(n^2) pass yields, for every eps, both an
// internal eps-cover (the selected centers) and an eps-separated subset of the
// same size, so covering and packing counts share the certificate
//   N_cover(eps) <= count(eps) <= N_pack(eps),
// and the sandwich pack(2 eps) <= cover(eps) <= pack(eps) holds by
// monotonicity of count. Start = index 0, ties by smallest index.

struct GreedyPermutation {
    std::vector<std::size_t> order;      // selection order (deduplicated indices)
    std::vector<double> radii;           // insertion radii; radii[0] = +inf
    std::vector<std::size_t> dedup_map;  // original index -> representative index

    // number of selected points with insertion radius > eps
    int count_at(double eps) const {
        int c = 0;
        for (double r : radii)
            if (r > eps) ++c;
        return c;
    }
    double saturation_radius() const {  // smallest positive insertion radius
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < radii.size(); ++i) r = std::min(r, radii[i]);
        return r;
    }
};

namespace detail {

inline std::string measure_fingerprint(const DiscreteMeasure& mu) {
    std::string s;
    for (const auto& a : mu.atoms()) {
        s += std::to_string(a.point);
        s += ':';
        s += rat_to_string(a.weight);
        s += ';';
    }
    return s;
}

}  // namespace detail

// Pairwise-distance computation shards rows across threads; every entry is an
// independent solve written to its own slot, so results do not depend on the
// degree of parallelism.
class W1Matrix {
public:
    explicit W1Matrix(const std::vector<DiscreteMeasure>& measures, int jobs = 1)
        : n_(measures.size()) {
        d_.assign(n_ * n_, 0.0);
        const int threads = std::max(1, jobs);
        auto work = [&](std::size_t shard, std::size_t stride) {
            for (std::size_t i = shard; i < n_; i += stride)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double v = w1(measures[i], measures[j]);
                    d_[i * n_ + j] = v;
                    d_[j * n_ + i] = v;
                }
        };
        if (threads == 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
            for (auto& th : pool) th.join();
        }
    }
    double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

// Pairwise-W1 analysis of a sample set: deduplicated measures, the full
// distance matrix, and the farthest-point permutation. Built once and shared
// by curve, exponent, and historic-bound computations.
struct SampleSetAnalysis {
    std::vector<std::size_t> reps;  // unique-measure indices into the input
    W1Matrix matrix;                // distances between unique measures
    GreedyPermutation gp;

    // most distant pair (indices into the unique set) and its distance
    struct Extremes {
        std::size_t i = 0, j = 0;
        double d = 0.0;
    };
    Extremes most_distant() const {
        Extremes e;
        for (std::size_t i = 0; i < matrix.size(); ++i)
            for (std::size_t j = i + 1; j < matrix.size(); ++j)
                if (matrix.at(i, j) > e.d) e = {i, j, matrix.at(i, j)};
        return e;
    }
};

inline SampleSetAnalysis analyze_samples(const std::vector<DiscreteMeasure>& measures,
                                         int jobs = 1) {
    if (measures.empty()) throw std::invalid_argument("empty sample set");
    // dedupe by exact atom fingerprint, keeping first occurrences
    GreedyPermutation gp;
    std::vector<std::size_t> reps;
    std::map<std::string, std::size_t> seen;
    gp.dedup_map.resize(measures.size());
    for (std::size_t i = 0; i < measures.size(); ++i) {
        const auto fp = detail::measure_fingerprint(measures[i]);
        auto it = seen.find(fp);
        if (it == seen.end()) {
            seen.emplace(fp, reps.size());
            gp.dedup_map[i] = reps.size();
            reps.push_back(i);
        } else {
            gp.dedup_map[i] = it->second;
        }
    }
    std::vector<DiscreteMeasure> uniq;
    uniq.reserve(reps.size());
    for (std::size_t r : reps) uniq.push_back(measures[r]);
    W1Matrix mat(uniq, jobs);

    const std::size_t n = uniq.size();
    std::vector<double> mind(n, std::numeric_limits<double>::infinity());
    std::vector<bool> used(n, false);
    std::size_t cur = 0;
    gp.order.push_back(reps[0]);
    gp.radii.push_back(std::numeric_limits<double>::infinity());
    used[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        for (std::size_t j = 0; j < n; ++j) mind[j] = std::min(mind[j], mat.at(cur, j));
        std::size_t best = n;
        double bestd = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            if (mind[j] > bestd) {
                bestd = mind[j];
                best = j;
            }
        }
        if (best == n || bestd <= 0.0) break;
        used[best] = true;
        gp.order.push_back(reps[best]);
        gp.radii.push_back(bestd);
        cur = best;
    }
    return SampleSetAnalysis{std::move(reps), std::move(mat), std::move(gp)};
}

inline GreedyPermutation greedy_permutation(const std::vector<DiscreteMeasure>& measures) {
    return analyze_samples(measures).gp;
}

// Count of a valid internal eps-cover with centers in S (greedy farthest-point).
inline int covering_number_greedy(const std::vector<DiscreteMeasure>& S, double eps) {
    return std::max(1, greedy_permutation(S).count_at(eps));
}

// Size of a maximal greedily built eps-separated subset (same traversal; the
// selected centers are pairwise > eps apart until the stopping radius).
inline int packing_number_greedy(const std::vector<DiscreteMeasure>& S, double eps) {
    return std::max(1, greedy_permutation(S).count_at(eps));
}

// ---------------------------------------------------------------------------
// rho_L: minimal pairwise distance among the first L+1 anchors, clamped to <= 1.

struct RhoResult {
    double rho = 0.0;
    int pivot = 0;  // index attaining the minimum (smallest index on ties)
    BigRat exact{0};
};

inline RhoResult rho_L(const PeriodicFamily& fam, int L) {
    if (L < 1 || static_cast<std::size_t>(L) >= fam.size())
        throw std::invalid_argument("rho_L needs at least two anchors up to level L");
    std::optional<BigRat> best;
    int pivot = 0;
    for (int i = 0; i <= L; ++i)
        for (int j = i + 1; j <= L; ++j) {
            const BigRat d = shift::exact_periodic_distance(fam.anchors[static_cast<std::size_t>(i)],
                                                            fam.anchors[static_cast<std::size_t>(j)]);
            if (!best || d < *best) {
                best = d;
                pivot = i;
            }
        }
    if (*best == 0) throw std::invalid_argument("duplicate anchors (rho = 0)");
    RhoResult r;
    r.exact = (*best > 1) ? BigRat(1) : *best;  // the volume argument assumes rho <= 1
    r.rho = to_double(r.exact);
    r.pivot = pivot;
    return r;
}

// C_L eps^-L with C_L = (zeta rho / (2 sqrt(pi L)))^L Gamma(L/2 + 1).
inline double theory_lower_bound(double zeta, double rho, int L, double eps) {
    if (!(zeta > 0 && zeta < 1)) throw std::invalid_argument("zeta must lie in (0,1)");
    if (!(rho > 0 && rho <= 1)) throw std::invalid_argument("rho must lie in (0,1]");
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    const double cL = std::pow(zeta * rho / (2.0 * std::sqrt(M_PI * L)), L) *
                      std::tgamma(L / 2.0 + 1.0);
    return cL * std::pow(eps, -L);
}

// Rearranged volume inequality: the least N with
// N pi^{L/2}/Gamma(L/2+1) (2 sqrt(L) eps / (zeta rho))^L >= 1.
inline double volume_ratio_bound(double zeta, double rho, int L, double eps) {
    return std::tgamma(L / 2.0 + 1.0) / std::pow(M_PI, L / 2.0) *
           std::pow(zeta * rho / (2.0 * std::sqrt(static_cast<double>(L)) * eps), L);
}

// Two-measure lower bound: E_x(eps) >= W1(mu, nu) / (2 eps).
inline double historic_lower_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double eps) {
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    return w1(mu, nu) / (2.0 * eps);
}

// ---------------------------------------------------------------------------
// Emergence curves over a decreasing eps grid.

struct CurveRow {
    double eps = 0.0;
    int packing_lower = 0;
    int covering_upper = 0;
    double theory_lower = 0.0;  // 0 when no (zeta, rho, L) is attached
};

struct EmergenceCurve {
    std::vector<CurveRow> rows;  // eps strictly decreasing
    std::size_t sample_count = 0;
};

struct TheoryParams {
    double zeta = 0.5;
    double rho = 1.0;
    int L = 1;
};

inline std::vector<double> dyadic_grid(int a, int b) {
    if (b < a) throw std::invalid_argument("dyadic grid needs a <= b");
    std::vector<double> g;
    for (int j = a; j <= b; ++j) g.push_back(std::pow(2.0, -j));
    return g;
}

inline EmergenceCurve emergence_curve_from(const GreedyPermutation& gp,
                                           const std::vector<double>& eps_grid,
                                           const std::optional<TheoryParams>& theory = std::nullopt) {
    for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i)
        if (!(eps_grid[i] > eps_grid[i + 1]))
            throw std::invalid_argument("eps grid must be strictly decreasing");
    EmergenceCurve curve;
    curve.sample_count = gp.radii.size();
    for (double eps : eps_grid) {
        CurveRow row;
        row.eps = eps;
        row.packing_lower = std::max(1, gp.count_at(eps));
        row.covering_upper = row.packing_lower;
        if (theory)
            row.theory_lower = theory_lower_bound(theory->zeta, theory->rho, theory->L, eps);
        curve.rows.push_back(row);
    }
    // sandwich audit: pack(2 eps) <= cover(eps) <= pack(eps) row by row
    for (const auto& row : curve.rows) {
        const int pack2 = std::max(1, gp.count_at(2.0 * row.eps));
        if (!(pack2 <= row.covering_upper && row.covering_upper <= row.packing_lower))
            throw std::logic_error("covering/packing sandwich violated");
    }
    return curve;
}

inline EmergenceCurve emergence_curve(const std::vector<DiscreteMeasure>& S,
                                      const std::vector<double>& eps_grid,
                                      const std::optional<TheoryParams>& theory = std::nullopt) {
    return emergence_curve_from(greedy_permutation(S), eps_grid, theory);
}

// Least-squares slope of log(packing) against -log(eps) over rows [lo, hi].
inline double emergence_exponent(const EmergenceCurve& curve, std::size_t lo, std::size_t hi) {
    if (hi >= curve.rows.size() || lo + 2 > hi)
        throw std::invalid_argument("exponent window needs at least 3 rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
        const double x = -std::log(curve.rows[i].eps);
        const double y = std::log(static_cast<double>(curve.rows[i].packing_lower));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw std::invalid_argument("degenerate exponent window");
    return (n * sxy - sx * sy) / denom;
}

struct ExponentFit {
    double exponent = 0.0;
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
    double full_window_exponent = 0.0;
};

// Finite shadow of the limsup: the steepest least-squares slope over all
// contiguous windows of >= 3 rows inside the unsaturated region
// (1 < count < sample count). Exponent 0 for degenerate sample sets.
inline ExponentFit best_exponent(const EmergenceCurve& curve) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
        const int c = curve.rows[i].packing_lower;
        if (c > 1 && c < static_cast<int>(curve.sample_count)) live.push_back(i);
    }
    ExponentFit fit;
    if (live.size() < 3) return fit;  // saturated or trivial: exponent 0
    const std::size_t lo = live.front(), hi = live.back();
    fit.full_window_exponent = emergence_exponent(curve, lo, hi);
    for (std::size_t a = lo; a + 2 <= hi; ++a)
        for (std::size_t b = a + 2; b <= hi; ++b) {
            const double e = emergence_exponent(curve, a, b);
            if (e > fit.exponent) {
                fit.exponent = e;
                fit.window_lo = a;
                fit.window_hi = b;
            }
        }
    return fit;
}

// ---------------------------------------------------------------------------
// Net coverage: every net measure mu_t, t in a_L, is close to some sample.

struct NetCoverageRow {
    int L = 0;
    int net_index = 0;
    double nearest = 0.0;
    double tol = 0.0;
    bool ok = false;
};

struct NetCoverageReport {
    std::vector<NetCoverageRow> rows;
    bool all_ok = true;
};

// Per-net-point nearest-sample distance at a fixed tolerance.
inline NetCoverageReport verify_simplex_in_accumulation(
    const std::vector<DiscreteMeasure>& samples, const std::vector<DiscreteMeasure>& net_measures,
    int L, double tol) {
    NetCoverageReport rep;
    for (std::size_t i = 0; i < net_measures.size(); ++i) {
        NetCoverageRow row;
        row.L = L;
        row.net_index = static_cast<int>(i);
        row.tol = tol;
        row.nearest = std::numeric_limits<double>::infinity();
        for (const auto& s : samples)
            row.nearest = std::min(row.nearest, w1(net_measures[i], s));
        row.ok = row.nearest <= tol;
        rep.all_ok = rep.all_ok && row.ok;
        rep.rows.push_back(row);
    }
    return rep;
}

// tol per level: eps_L + eps_L + net covering radius (triangle argument
// through the block checkpoint and the net's approximation quality).
inline NetCoverageReport verify_net_coverage(
    const std::vector<DiscreteMeasure>& samples,
    const std::vector<std::vector<DiscreteMeasure>>& net_measures,
    const std::vector<BigRat>& eps_tilde, const std::vector<double>& net_radius) {
    NetCoverageReport rep;
    for (std::size_t L = 1; L < net_measures.size(); ++L) {
        const double tol = 2.0 * to_double(eps_tilde.at(L)) + net_radius.at(L);
        auto level = verify_simplex_in_accumulation(samples, net_measures[L],
                                                    static_cast<int>(L), tol);
        rep.all_ok = rep.all_ok && level.all_ok;
        for (auto& row : level.rows) rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace emg
