#pragma once

// Finitely supported probability measures with exact rational weights:
// empirical measures along orbits, periodic-orbit measures, convex mixtures
// over anchor families (the simplices Delta_L), and the simplex machinery
// (A_L, B_L, eta, iota, tbar/Tbar/Mbar, covering nets).

#include "emg/ground.hpp"
#include "emg/numeric.hpp"
#include "emg/shift.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace emg {

inline constexpr double WEIGHT_SUM_TOL = 1e-12;

struct Atom {
    PointId point = 0;
    BigRat weight;
};

class DiscreteMeasure {
public:
    DiscreteMeasure(std::shared_ptr<const GroundSpace> ground, std::vector<Atom> atoms)
        : ground_(std::move(ground)) {
        std::map<PointId, BigRat> merged;
        for (auto& a : atoms) {
            if (a.weight < 0) throw std::invalid_argument("negative atom weight");
            if (a.weight == 0) continue;
            merged[a.point] += a.weight;
        }
        if (merged.empty()) throw std::invalid_argument("measure must have at least one atom");
        BigRat total = 0;
        atoms_.reserve(merged.size());
        for (auto& [p, w] : merged) {
            total += w;
            atoms_.push_back({p, std::move(w)});
        }
        if (std::abs(to_double(total) - 1.0) > WEIGHT_SUM_TOL)
            throw std::invalid_argument("atom weights must sum to 1 within 1e-12");
        if (total != 1) {  // normalize away the residual so downstream sums are exact
            for (auto& a : atoms_) a.weight /= total;
        }
        real_weights_.reserve(atoms_.size());
        for (const auto& a : atoms_) real_weights_.push_back(to_double(a.weight));
    }

    const std::shared_ptr<const GroundSpace>& ground() const { return ground_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    // double view of the weights, cached at construction
    const std::vector<double>& real_weights() const { return real_weights_; }
    std::size_t support_size() const { return atoms_.size(); }

    BigRat total_weight() const {
        BigRat t = 0;
        for (const auto& a : atoms_) t += a.weight;
        return t;
    }

    BigRat weight_at(PointId p) const {
        for (const auto& a : atoms_)
            if (a.point == p) return a.weight;
        return BigRat(0);
    }

    bool operator==(const DiscreteMeasure& other) const {
        if (ground_ != other.ground_ || atoms_.size() != other.atoms_.size()) return false;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i].point != other.atoms_[i].point || atoms_[i].weight != other.atoms_[i].weight)
                return false;
        return true;
    }

    // 1/2 * mu + 1/2 * nu and general convex mixtures.
    static DiscreteMeasure mix(const std::vector<std::pair<BigRat, DiscreteMeasure>>& parts) {
        if (parts.empty()) throw std::invalid_argument("empty mixture");
        std::vector<Atom> atoms;
        for (const auto& [c, mu] : parts) {
            if (c < 0) throw std::invalid_argument("negative mixture coefficient");
            for (const auto& a : mu.atoms()) atoms.push_back({a.point, c * a.weight});
        }
        return DiscreteMeasure(parts.front().second.ground(), std::move(atoms));
    }

private:
    std::shared_ptr<const GroundSpace> ground_;
    std::vector<Atom> atoms_;  // sorted by point id, strictly positive weights
    std::vector<double> real_weights_;
};

// ---------------------------------------------------------------------------
// Simplex coordinates.

// t in A_L: nonnegative, sum within 1e-12 of 1 (L+1 coordinates).
struct SimplexCoord {
    std::vector<BigRat> t;

    explicit SimplexCoord(std::vector<BigRat> coords) : t(std::move(coords)) {
        if (t.empty()) throw std::invalid_argument("empty simplex coordinate");
        BigRat sum = 0;
        for (const auto& x : t) {
            if (x < 0 || x > 1) throw std::invalid_argument("simplex coordinate outside [0,1]");
            sum += x;
        }
        if (std::abs(to_double(sum) - 1.0) > WEIGHT_SUM_TOL)
            throw std::invalid_argument("simplex coordinates must sum to 1 within 1e-12");
    }

    static SimplexCoord from_doubles(const std::vector<double>& xs) {
        std::vector<BigRat> t;
        t.reserve(xs.size());
        for (double x : xs) t.push_back(rat_from_double(x));
        return SimplexCoord(std::move(t));
    }

    static SimplexCoord one_hot(int L, int at) {
        std::vector<BigRat> t(static_cast<std::size_t>(L + 1), BigRat(0));
        t.at(static_cast<std::size_t>(at)) = 1;
        return SimplexCoord(std::move(t));
    }

    int dim() const { return static_cast<int>(t.size()) - 1; }  // this is L
};

// T in [0,1]^L, optionally constrained to B_L = { sum T_l <= 1 }.
struct CubeCoord {
    std::vector<BigRat> T;
    bool b_constrained = false;

    explicit CubeCoord(std::vector<BigRat> coords, bool require_b = false)
        : T(std::move(coords)), b_constrained(require_b) {
        if (T.empty()) throw std::invalid_argument("empty cube coordinate");
        BigRat sum = 0;
        for (const auto& x : T) {
            if (x < 0 || x > 1) throw std::invalid_argument("cube coordinate outside [0,1]");
            sum += x;
        }
        if (require_b && sum > 1) throw std::invalid_argument("coordinate outside B_L (sum > 1)");
    }

    static CubeCoord from_doubles(const std::vector<double>& xs, bool require_b = false) {
        std::vector<BigRat> T;
        T.reserve(xs.size());
        for (double x : xs) T.push_back(rat_from_double(x));
        return CubeCoord(std::move(T), require_b);
    }

    int dim() const { return static_cast<int>(T.size()); }
};

inline BigRat sq_norm(const std::vector<BigRat>& a, const std::vector<BigRat>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    BigRat s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        BigRat d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Scaled squared deviation of tbar(M) from t, in pure integers (no rational
// normalization): |tbar(M) - t|^2 = dev_sq / (S D)^2 with S = sum M and D the
// small common denominator of t.
struct TbarDeviation {
    BigInt dev_sq{0};
    BigInt scale{1};  // S * D

    bool within(const BigRat& eps) const {
        const BigInt &en = numerator(eps), &ed = denominator(eps);
        return dev_sq * ed * ed <= en * en * scale * scale;
    }
    double value() const { return std::sqrt(ratio_double(dev_sq, scale * scale)); }
};

inline TbarDeviation tbar_deviation(const std::vector<BigInt>& M, const SimplexCoord& t) {
    if (M.size() != t.t.size()) throw std::invalid_argument("dimension mismatch");
    BigInt S = 0;
    for (const auto& m : M) S += m;
    BigInt D = 1;
    for (const auto& x : t.t) {
        const BigInt d = denominator(x);
        D = D / gcd(D, d) * d;
    }
    TbarDeviation out;
    for (std::size_t l = 0; l < M.size(); ++l) {
        const BigInt a = numerator(t.t[l]) * (D / denominator(t.t[l]));
        const BigInt diff = M[l] * D - a * S;
        out.dev_sq += diff * diff;
    }
    out.scale = S * D;
    return out;
}

inline bool tbar_within(const std::vector<BigInt>& M, const SimplexCoord& t, const BigRat& eps) {
    return tbar_deviation(M, t).within(eps);
}

inline double euclid(const std::vector<BigRat>& a, const std::vector<BigRat>& b) {
    return std::sqrt(to_double(sq_norm(a, b)));
}

// eta: [0,1]^L -> A_L,
//   eta(T)_0 = prod_{j=1..L} (1-T_j),
//   eta(T)_l = T_l * prod_{j=l+1..L} (1-T_j)   (0 < l < L),
//   eta(T)_L = T_L.
// Lipschitz constant bounded by L(L+1); eta(Tbar(M)) = tbar(M).
inline SimplexCoord eta_map(const CubeCoord& Tc) {
    const int L = Tc.dim();
    std::vector<BigRat> t(static_cast<std::size_t>(L + 1));
    BigRat suffix = 1;  // prod_{j>l} (1 - T_j), built from the right
    t[static_cast<std::size_t>(L)] = Tc.T[static_cast<std::size_t>(L - 1)];
    for (int l = L - 1; l >= 1; --l) {
        suffix *= 1 - Tc.T[static_cast<std::size_t>(l)];
        t[static_cast<std::size_t>(l)] = Tc.T[static_cast<std::size_t>(l - 1)] * suffix;
    }
    suffix *= 1 - Tc.T[0];
    t[0] = suffix;
    return SimplexCoord(std::move(t));
}

// Partial inverse used to steer eta: T_l = t_l / (t_0 + ... + t_l), 0 when the
// prefix sum vanishes (any value works there, eta collapses the factor).
inline CubeCoord eta_section(const SimplexCoord& t) {
    const int L = t.dim();
    std::vector<BigRat> T(static_cast<std::size_t>(L));
    BigRat S = t.t[0];
    for (int l = 1; l <= L; ++l) {
        S += t.t[static_cast<std::size_t>(l)];
        T[static_cast<std::size_t>(l - 1)] = (S == 0) ? BigRat(0) : BigRat(t.t[static_cast<std::size_t>(l)] / S);
    }
    return CubeCoord(std::move(T));
}

// iota: B_L -> A_L with pivot l_L; a homeomorphism. The pivot coordinate
// carries the slack mass 1 - sum T_j.
inline SimplexCoord iota_map(const CubeCoord& Tc, int pivot) {
    const int L = Tc.dim();
    if (pivot < 0 || pivot > L) throw std::invalid_argument("iota pivot out of range");
    BigRat sum = 0;
    for (const auto& x : Tc.T) sum += x;
    if (sum > 1) throw std::invalid_argument("iota requires sum T_l <= 1");
    std::vector<BigRat> t(static_cast<std::size_t>(L + 1));
    for (int l = 0; l <= pivot - 1; ++l) t[static_cast<std::size_t>(l)] = Tc.T[static_cast<std::size_t>(l)];
    t[static_cast<std::size_t>(pivot)] = 1 - sum;
    for (int l = pivot + 1; l <= L; ++l) t[static_cast<std::size_t>(l)] = Tc.T[static_cast<std::size_t>(l - 1)];
    return SimplexCoord(std::move(t));
}

inline CubeCoord iota_inverse(const SimplexCoord& t, int pivot) {
    const int L = t.dim();
    if (pivot < 0 || pivot > L) throw std::invalid_argument("iota pivot out of range");
    std::vector<BigRat> T(static_cast<std::size_t>(L));
    for (int j = 1; j <= pivot; ++j) T[static_cast<std::size_t>(j - 1)] = t.t[static_cast<std::size_t>(j - 1)];
    for (int j = pivot + 1; j <= L; ++j) T[static_cast<std::size_t>(j - 1)] = t.t[static_cast<std::size_t>(j)];
    return CubeCoord(std::move(T), true);
}

// tbar(M) = (M_0/S_L, ..., M_L/S_L); Tbar(M) = (M_1/S_1, ..., M_L/S_L).
inline SimplexCoord tbar(const std::vector<BigInt>& M) {
    if (M.empty()) throw std::invalid_argument("tbar of empty vector");
    BigInt S = 0;
    for (const auto& m : M) {
        if (m < 1) throw std::invalid_argument("tbar requires positive entries");
        S += m;
    }
    std::vector<BigRat> t;
    t.reserve(M.size());
    for (const auto& m : M) t.push_back(make_rat(m, S));
    return SimplexCoord(std::move(t));
}

inline CubeCoord Tbar(const std::vector<BigInt>& M) {
    if (M.size() < 2) throw std::invalid_argument("Tbar needs at least two entries");
    std::vector<BigRat> T;
    T.reserve(M.size() - 1);
    BigInt S = M[0];
    for (std::size_t l = 1; l < M.size(); ++l) {
        if (M[l] < 1) throw std::invalid_argument("Tbar requires positive entries");
        S += M[l];
        T.push_back(make_rat(M[l], S));
    }
    return CubeCoord(std::move(T));
}

// ---------------------------------------------------------------------------
// Periodic anchor families and the measures built from them.

struct PeriodicFamily {
    std::vector<shift::ShiftPoint> anchors;       // periodic, orbits pairwise disjoint
    std::optional<shift::ShiftPoint> fixed_point; // \hat p for the mixed variant
    std::optional<BigRat> zeta;                   // in (0,1); present iff fixed_point is

    PeriodicFamily(std::vector<shift::ShiftPoint> anchor_points,
                   std::optional<shift::ShiftPoint> phat = std::nullopt,
                   std::optional<BigRat> mix = std::nullopt)
        : anchors(std::move(anchor_points)), fixed_point(std::move(phat)), zeta(std::move(mix)) {
        if (anchors.empty()) throw std::invalid_argument("family needs at least one anchor");
        if (fixed_point.has_value() != zeta.has_value())
            throw std::invalid_argument("mixing weight present iff fixed point is");
        if (zeta && (*zeta <= 0 || *zeta >= 1))
            throw std::invalid_argument("zeta must lie in (0,1)");
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            if (!anchors[i].is_periodic())
                throw std::invalid_argument("family anchors must be periodic");
            for (std::size_t j = i + 1; j < anchors.size(); ++j)
                if (!shift::orbits_disjoint(anchors[i], anchors[j]))
                    throw std::invalid_argument("anchor orbits must be pairwise disjoint");
            if (fixed_point && !shift::orbits_disjoint(anchors[i], *fixed_point))
                throw std::invalid_argument("fixed point must avoid anchor orbits");
        }
        if (fixed_point && fixed_point->period() != 1)
            throw std::invalid_argument("\\hat p must be a fixed point");
    }

    bool mixed() const { return fixed_point.has_value(); }
    std::size_t size() const { return anchors.size(); }

    // Family with anchor words w_l = "1" + "2"^(l+offset) on {1,2}; periods l+offset+1.
    static PeriodicFamily tower(int count, int kappa_offset = 0, bool with_fixed_point = false,
                                BigRat mix = BigRat(1, 2)) {
        shift::Alphabet a(2);
        std::vector<shift::ShiftPoint> anchors;
        for (int l = 0; l < count; ++l) {
            std::vector<shift::Symbol> w{1};
            for (int j = 0; j < l + kappa_offset; ++j) w.push_back(2);
            anchors.push_back(shift::periodic_point(shift::Word(a, w)));
        }
        std::optional<shift::ShiftPoint> phat;
        std::optional<BigRat> z;
        if (with_fixed_point) {
            if (kappa_offset < 1)
                throw std::invalid_argument("mixed tower needs kappa offset >= 1 (\\hat p = 1^inf)");
            phat = shift::periodic_point(shift::Word(a, {1}));
            z = mix;
        }
        return PeriodicFamily(std::move(anchors), std::move(phat), std::move(z));
    }

    // Fixed-point anchors a^inf for a = first, ..., first+count-1 on {1..m}.
    static PeriodicFamily fixed_points(int m, int count, int first = 1,
                                       bool with_fixed_point = false, BigRat mix = BigRat(1, 2)) {
        shift::Alphabet a(m);
        if (first + count - 1 > m || first < 1)
            throw std::invalid_argument("fixed-point anchors exceed the alphabet");
        std::vector<shift::ShiftPoint> anchors;
        for (int v = first; v < first + count; ++v)
            anchors.push_back(shift::periodic_point(shift::Word(a, {static_cast<shift::Symbol>(v)})));
        std::optional<shift::ShiftPoint> phat;
        std::optional<BigRat> z;
        if (with_fixed_point) {
            if (first <= 1) throw std::invalid_argument("reserve symbol 1 for \\hat p");
            phat = shift::periodic_point(shift::Word(a, {1}));
            z = mix;
        }
        return PeriodicFamily(std::move(anchors), std::move(phat), std::move(z));
    }
};

// ---------------------------------------------------------------------------
// Measure constructors.

// delta_x^n = (1/n) sum_{j<n} delta_{f^j x}, atoms merged at depth T.
inline DiscreteMeasure empirical_measure(const shift::ShiftPoint& x, std::uint64_t n,
                                         const std::shared_ptr<ShiftGround>& ground) {
    if (n == 0) throw std::invalid_argument("empirical measure needs n >= 1");
    std::map<PointId, std::uint64_t> counts;
    for (std::uint64_t j = 0; j < n; ++j) counts[ground->add_point(x.shifted(j))]++;
    std::vector<Atom> atoms;
    atoms.reserve(counts.size());
    for (auto& [p, c] : counts) atoms.push_back({p, make_rat(BigInt(c), BigInt(n))});
    return DiscreteMeasure(ground, std::move(atoms));
}

// delta_x^{n,m} = (1/(m-n)) sum_{j=n}^{m-1} delta_{f^j x}.
inline DiscreteMeasure partial_empirical(const shift::ShiftPoint& x, std::uint64_t n, std::uint64_t m,
                                         const std::shared_ptr<ShiftGround>& ground) {
    if (m <= n) throw std::invalid_argument("partial empirical needs m > n");
    return empirical_measure(x.shifted(n), m - n, ground);
}

// Uniform measure on the orbit of a periodic point.
inline DiscreteMeasure periodic_measure(const shift::ShiftPoint& p,
                                        const std::shared_ptr<ShiftGround>& ground) {
    if (!p.is_periodic()) throw std::invalid_argument("periodic_measure needs a periodic point");
    const std::uint64_t per = p.period();
    std::vector<Atom> atoms;
    for (std::uint64_t j = 0; j < per; ++j)
        atoms.push_back({ground->add_point(p.shifted(j)), make_rat(BigInt(1), BigInt(per))});
    return DiscreteMeasure(ground, std::move(atoms));
}

// mu_t = sum_l t_l mubar^(l); with a mixed family mubar^(l) = (1-zeta) delta_phat + zeta mu^(l).
inline DiscreteMeasure simplex_measure(const SimplexCoord& t, const PeriodicFamily& fam,
                                       const std::shared_ptr<ShiftGround>& ground) {
    if (static_cast<std::size_t>(t.dim()) + 1 > fam.size())
        throw std::invalid_argument("simplex coordinate exceeds the anchor family");
    std::vector<Atom> atoms;
    BigRat zeta = fam.mixed() ? *fam.zeta : BigRat(1);
    if (fam.mixed()) {
        const PointId ph = ground->add_point(*fam.fixed_point);
        atoms.push_back({ph, 1 - zeta});  // sum_l t_l (1-zeta) = (1-zeta)
    }
    for (int l = 0; l <= t.dim(); ++l) {
        const auto& p = fam.anchors[static_cast<std::size_t>(l)];
        const std::uint64_t per = p.period();
        const BigRat w = t.t[static_cast<std::size_t>(l)] * zeta / per;
        if (w == 0) continue;
        for (std::uint64_t j = 0; j < per; ++j) atoms.push_back({ground->add_point(p.shifted(j)), w});
    }
    return DiscreteMeasure(ground, std::move(atoms));
}

// ---------------------------------------------------------------------------
// Covering nets of A_L.

// Triangular lattice { j/D : sum j = D } with D minimal such that the lattice
// spacing sqrt(2)/D is <= r. Largest-remainder rounding sends any point of A_L
// to a lattice point within sqrt(L+1)/(2D) <= r, so the net is an r-cover.
// Net points are emitted in lexicographic order.
inline std::vector<SimplexCoord> simplex_grid(int L, double radius) {
    if (L < 1) throw std::invalid_argument("simplex_grid needs L >= 1");
    if (radius <= 0) throw std::invalid_argument("covering radius must be positive");
    int D = static_cast<int>(std::ceil(std::sqrt(2.0) / radius));
    D = std::max(D, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(L + 1)) / (2.0 * radius))));
    D = std::max(D, 1);
    std::vector<SimplexCoord> net;
    std::vector<int> j(static_cast<std::size_t>(L + 1), 0);
    // enumerate compositions of D into L+1 parts, lexicographically
    std::function<void(int, int)> rec = [&](int slot, int rem) {
        if (slot == L) {
            j[static_cast<std::size_t>(slot)] = rem;
            std::vector<BigRat> t;
            t.reserve(j.size());
            for (int v : j) t.push_back(make_rat(BigInt(v), BigInt(D)));
            net.push_back(SimplexCoord(std::move(t)));
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            j[static_cast<std::size_t>(slot)] = v;
            rec(slot + 1, rem - v);
        }
    };
    rec(0, D);
    return net;
}

inline int simplex_grid_denominator(int L, double radius) {
    int D = static_cast<int>(std::ceil(std::sqrt(2.0) / radius));
    D = std::max(D, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(L + 1)) / (2.0 * radius))));
    return std::max(D, 1);
}

// Nearest-net rounding used by the covering certificate: largest-remainder.
inline SimplexCoord round_to_grid(const SimplexCoord& t, int D) {
    const int L = t.dim();
    std::vector<BigInt> lo(static_cast<std::size_t>(L + 1));
    std::vector<std::pair<BigRat, int>> frac;
    BigInt total = 0;
    for (int l = 0; l <= L; ++l) {
        BigRat scaled = t.t[static_cast<std::size_t>(l)] * D;
        BigInt fl = numerator(scaled) / denominator(scaled);
        lo[static_cast<std::size_t>(l)] = fl;
        total += fl;
        frac.push_back({scaled - BigRat(fl), l});
    }
    BigInt rem = D - total;
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (BigInt i = 0; i < rem; ++i)
        lo[static_cast<std::size_t>(frac[static_cast<std::size_t>(i)].second)] += 1;
    std::vector<BigRat> out;
    out.reserve(lo.size());
    for (const auto& v : lo) out.push_back(make_rat(v, BigInt(D)));
    return SimplexCoord(std::move(out));
}

}  // namespace emg
