#pragma once

// Combinatorial code constructions over a base order {m_k}: moderate-sequence
// checks, greedy index searches realizing target cube/simplex coordinates as
// window-length ratios, and the master / full-shift codes whose blocks chain
// through the countable family of simplex nets.
//
// Block conditions are evaluated in exact integer arithmetic. Base orders
// expose closed-form cumulative sums N_k so index searches can jump to the
// crossing point algebraically instead of scanning k (block indices reach
// 10^300 and beyond in the later blocks).

#include "emg/measure.hpp"
#include "emg/numeric.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace emg {

// ---------------------------------------------------------------------------
// Base orders {m_k}, k >= 1, with exact cumulative sums N_k.

class BaseOrder {
public:
    virtual ~BaseOrder() = default;

    virtual BigInt m(const BigInt& k) const = 0;
    // N_k = m_1 + ... + m_k, N_0 = 0.
    virtual BigInt N(const BigInt& k) const = 0;
    // Smallest k with N(k) >= target (target >= 1).
    virtual BigInt solve_N_at_least(const BigInt& target) const = 0;
    virtual std::string describe() const = 0;

    BigInt window(const BigInt& k1, const BigInt& k2) const { return N(k2) - N(k1); }
};

class ConstantOrder final : public BaseOrder {
public:
    explicit ConstantOrder(BigInt c) : c_(std::move(c)) {
        if (c_ < 1) throw std::invalid_argument("base order entries must be positive");
    }
    BigInt m(const BigInt&) const override { return c_; }
    BigInt N(const BigInt& k) const override { return c_ * k; }
    BigInt solve_N_at_least(const BigInt& target) const override {
        return (target + c_ - 1) / c_;
    }
    std::string describe() const override { return "constant:" + c_.str(); }

private:
    BigInt c_;
};

// m_k = 2^k; the canonical non-moderate sequence (m_k / N_k -> 1/2).
class GeometricOrder final : public BaseOrder {
public:
    BigInt m(const BigInt& k) const override {
        return big_pow(2, static_cast<unsigned>(k.convert_to<std::uint64_t>()));
    }
    BigInt N(const BigInt& k) const override { return 2 * m(k) - 2; }
    BigInt solve_N_at_least(const BigInt& target) const override {
        BigInt k = 1;
        while (N(k) < target) ++k;
        return k;
    }
    std::string describe() const override { return "geometric:2^k"; }
};

// Explicit finite sequence; horizon-limited (testing and custom configs).
class TabulatedOrder final : public BaseOrder {
public:
    explicit TabulatedOrder(std::vector<BigInt> ms) : ms_(std::move(ms)) {
        prefix_.reserve(ms_.size() + 1);
        prefix_.push_back(0);
        for (const auto& x : ms_) {
            if (x < 1) throw std::invalid_argument("base order entries must be positive");
            prefix_.push_back(prefix_.back() + x);
        }
    }
    BigInt m(const BigInt& k) const override {
        check(k);
        return ms_[static_cast<std::size_t>(k.convert_to<std::uint64_t>() - 1)];
    }
    BigInt N(const BigInt& k) const override {
        if (k == 0) return 0;
        check(k);
        return prefix_[static_cast<std::size_t>(k.convert_to<std::uint64_t>())];
    }
    BigInt solve_N_at_least(const BigInt& target) const override {
        for (std::size_t i = 1; i < prefix_.size(); ++i)
            if (prefix_[i] >= target) return BigInt(i);
        throw std::runtime_error("tabulated base order horizon exhausted");
    }
    std::string describe() const override {
        return "tabulated[" + std::to_string(ms_.size()) + "]";
    }

private:
    void check(const BigInt& k) const {
        if (k < 1 || k > BigInt(ms_.size()))
            throw std::runtime_error("tabulated base order horizon exhausted");
    }
    std::vector<BigInt> ms_;
    std::vector<BigInt> prefix_;
};

// m_k = (z0 + 1) k^2 + 3k + 1 + jhat(k) + nhat(k+1): the window consists of
// z0 k^2 steps parked at the saddle, a length k^2 + 3k + 1 itinerary through
// the periodic block, and the O(k) connector itineraries jhat / nhat. With
// jhat(k) = k + jr[k mod P] and nhat(k) = k + nr[k mod Q] (bounded residue
// tables) N_k stays in closed form and the residues can align m_k to a
// divisibility pattern. The interval share then satisfies
// #I_k / m_k -> 1/(z0+1) = zeta.
class NewhouseOrder final : public BaseOrder {
public:
    NewhouseOrder(int z0, std::vector<BigInt> jr = {0}, std::vector<BigInt> nr = {0})
        : z0_(z0), jr_(std::move(jr)), nr_(std::move(nr)) {
        if (z0_ < 1) throw std::invalid_argument("z0 must be a positive integer");
        if (jr_.empty() || nr_.empty()) throw std::invalid_argument("empty residue table");
        for (const auto& r : jr_)
            if (r < 0) throw std::invalid_argument("negative residue");
        for (const auto& r : nr_)
            if (r < 0) throw std::invalid_argument("negative residue");
        jr_prefix_ = prefix(jr_);
        nr_prefix_ = prefix(nr_);
    }

    // Residue table aligning m_k to 0 mod `modulus` (e.g. (z0+1) * lcm of the
    // anchor periods, so #I_k = zeta m_k is an exact multiple of every period).
    static NewhouseOrder aligned(int z0, const BigInt& modulus) {
        if (modulus < 1) throw std::invalid_argument("modulus must be positive");
        const std::uint64_t P = modulus.convert_to<std::uint64_t>();
        std::vector<BigInt> jr(P), nr{0};
        for (std::uint64_t rk = 0; rk < P; ++rk) {
            // base(k) for k == rk (mod P), with jr = 0: all terms mod P depend on k mod P only
            const BigInt k = rk;
            const BigInt base = BigInt(z0 + 1) * k * k + 3 * k + 1 + k + (k + 1);
            jr[rk] = (modulus - base % modulus) % modulus;
        }
        return NewhouseOrder(z0, std::move(jr), std::move(nr));
    }

    BigInt jhat(const BigInt& k) const { return k + jr_[mod_index(k, jr_)]; }
    BigInt nhat(const BigInt& k) const { return k + nr_[mod_index(k, nr_)]; }
    BigRat zeta() const { return make_rat(1, z0_ + 1); }
    int z0() const { return z0_; }

    BigInt m(const BigInt& k) const override {
        return BigInt(z0_ + 1) * k * k + 3 * k + 1 + jhat(k) + nhat(k + 1);
    }

    BigInt N(const BigInt& k) const override {
        if (k <= 0) return 0;
        // sum of the polynomial part + periodic residue prefix sums
        const BigInt sq = k * (k + 1) * (2 * k + 1) / 6;
        const BigInt lin = k * (k + 1) / 2;
        BigInt n = BigInt(z0_ + 1) * sq + 3 * lin + k  // (z0+1) k^2 + 3k + 1
                   + lin + periodic_sum(jr_, jr_prefix_, k)  // jhat(j) = j + jr
                   + (lin + k) + periodic_sum_shifted(nr_, nr_prefix_, k);  // nhat(j+1) = j+1 + nr
        return n;
    }

    BigInt solve_N_at_least(const BigInt& target) const override {
        if (target <= N(1)) return 1;
        // N(k) ~ (z0+1) k^3 / 3; gallop around the cube-root guess
        BigInt guess = icbrt(3 * target / (z0_ + 1));
        if (guess < 1) guess = 1;
        BigInt lo, hi;
        if (N(guess) >= target) {
            hi = guess;
            BigInt step = 1;
            lo = guess;
            while (lo > 1 && N(lo) >= target) {
                hi = lo;
                lo = (lo > step) ? lo - step : BigInt(1);
                step *= 2;
            }
            if (N(lo) >= target) return lo;  // lo == 1
        } else {
            lo = guess;
            BigInt step = 1;
            hi = guess + 1;
            while (N(hi) < target) {
                lo = hi;
                hi += step;
                step *= 2;
            }
        }
        while (lo + 1 < hi) {
            const BigInt mid = (lo + hi) / 2;
            if (N(mid) >= target) hi = mid;
            else lo = mid;
        }
        return hi;
    }

    std::string describe() const override {
        return "newhouse:z0=" + std::to_string(z0_) + ",P=" + std::to_string(jr_.size());
    }

private:
    static std::vector<BigInt> prefix(const std::vector<BigInt>& r) {
        std::vector<BigInt> p(r.size() + 1, 0);
        for (std::size_t i = 0; i < r.size(); ++i) p[i + 1] = p[i] + r[i];
        return p;
    }
    static std::size_t mod_index(const BigInt& k, const std::vector<BigInt>& r) {
        return static_cast<std::size_t>((k % BigInt(r.size())).convert_to<std::uint64_t>());
    }
    // sum_{j=1..k} r[j mod P]
    static BigInt periodic_sum(const std::vector<BigInt>& r, const std::vector<BigInt>& pre,
                               const BigInt& k) {
        const BigInt P = BigInt(r.size());
        const BigInt cycles = k / P;
        const std::uint64_t rem = (k % P).convert_to<std::uint64_t>();
        BigInt s = cycles * pre.back();
        // remaining j = cycles*P + 1 .. cycles*P + rem, residues 1..rem (mod P)
        for (std::uint64_t j = 1; j <= rem; ++j) s += r[j % r.size()];
        return s;
    }
    // sum_{j=1..k} r[(j+1) mod Q]
    static BigInt periodic_sum_shifted(const std::vector<BigInt>& r, const std::vector<BigInt>& pre,
                                       const BigInt& k) {
        const BigInt Q = BigInt(r.size());
        const BigInt cycles = k / Q;
        const std::uint64_t rem = (k % Q).convert_to<std::uint64_t>();
        BigInt s = cycles * pre.back();
        for (std::uint64_t j = 1; j <= rem; ++j) s += r[(j + 1) % r.size()];
        return s;
    }

    int z0_;
    std::vector<BigInt> jr_, nr_;
    std::vector<BigInt> jr_prefix_, nr_prefix_;
};

// The window-growth formula as a free operation (for parameter studies).
inline BigInt newhouse_mk(int z0, const std::function<BigInt(const BigInt&)>& jhat,
                          const std::function<BigInt(const BigInt&)>& nhat, const BigInt& k) {
    if (z0 < 1) throw std::invalid_argument("z0 must be a positive integer");
    return BigInt(z0 + 1) * k * k + 3 * k + 1 + jhat(k) + nhat(k + 1);
}

inline BigRat newhouse_zeta(int z0) { return make_rat(1, z0 + 1); }

// ---------------------------------------------------------------------------
// Moderate-sequence diagnostics: lim m_k / N_k = 0.

struct ModerateReport {
    double max_ratio = 0.0;        // max of m_k/N_k over [K/2, K]
    double prev_max_ratio = 0.0;   // same over [K/4, K/2)
    bool decreasing = false;
    bool flagged_non_moderate = false;
};

inline ModerateReport moderate_check(const BaseOrder& order, std::uint64_t K) {
    if (K < 2) throw std::invalid_argument("moderate_check needs K >= 2");
    ModerateReport rep;
    auto scan = [&](std::uint64_t lo, std::uint64_t hi) {
        double mx = 0.0;
        for (std::uint64_t k = std::max<std::uint64_t>(lo, 1); k <= hi; ++k) {
            const BigInt kk = k;
            mx = std::max(mx, to_double(make_rat(order.m(kk), order.N(kk))));
        }
        return mx;
    };
    rep.max_ratio = scan(K / 2, K);
    rep.prev_max_ratio = scan(K / 4, K / 2 > 0 ? K / 2 - 1 : 0);
    rep.decreasing = rep.max_ratio < rep.prev_max_ratio;
    // moderate sequences shed a constant factor per doubled horizon (m_k/N_k
    // -> 0); ratios that merely level off are flagged
    rep.flagged_non_moderate =
        !(rep.max_ratio <= 0.75 * rep.prev_max_ratio || rep.max_ratio < 1e-3);
    return rep;
}

// ---------------------------------------------------------------------------
// Index sequences k(-1) < k(0) < ... < k(L).

struct IncreasingIndices {
    std::vector<BigInt> k;  // size L+2, entry 0 is k(-1)

    explicit IncreasingIndices(std::vector<BigInt> ks) : k(std::move(ks)) {
        if (k.size() < 2) throw std::invalid_argument("index sequence too short");
        for (std::size_t i = 0; i + 1 < k.size(); ++i)
            if (!(k[i] < k[i + 1]))
                throw std::invalid_argument("index sequence must be strictly increasing");
        if (k.front() < 1) throw std::invalid_argument("indices must be positive");
    }

    int L() const { return static_cast<int>(k.size()) - 2; }
    const BigInt& at(int ell) const {  // ell in [-1, L]
        return k[static_cast<std::size_t>(ell + 1)];
    }
};

// (Mbar(k))_l = sum of m_k over the l-th index group.
inline std::vector<BigInt> Mbar(const IncreasingIndices& idx, const BaseOrder& order) {
    std::vector<BigInt> M;
    M.reserve(static_cast<std::size_t>(idx.L() + 1));
    for (int l = 0; l <= idx.L(); ++l) M.push_back(order.window(idx.at(l - 1), idx.at(l)));
    return M;
}

// ---------------------------------------------------------------------------
// Greedy index search: |Tbar(Mbar(k)) - T| <= eps with k(0) > c_tilde.
//
// Componentwise tolerance eps/ceil(sqrt(L)) (a rational lower bound of
// eps/sqrt(L)) keeps all comparisons exact; the Euclidean postcondition is
// verified exactly before returning.

namespace detail {

inline BigInt ceil_sqrt_int(int L) {
    int r = 1;
    while (r * r < L) ++r;
    return BigInt(r);
}

// smallest k > lo with N(k) >= target
inline BigInt first_index_with_N(const BaseOrder& order, const BigInt& lo, const BigInt& target) {
    BigInt k = order.solve_N_at_least(target);
    if (k <= lo) k = lo + 1;
    return k;
}

}  // namespace detail

struct IndexSearchOptions {
    BigInt k_minus1 = 1;          // chaining: fixed first entry
    int max_attempts = 64;        // horizon retries with growing c_tilde
    std::uint64_t scan_limit = 1u << 22;  // per-attempt scan bound for tabulated orders
};

// All comparisons below are integer cross-multiplications (no rational
// normalization): with the componentwise tolerance tol = eps/ceil(sqrt(L)),
// meeting every component implies the Euclidean postcondition exactly
// (L <= ceil(sqrt(L))^2).
inline IncreasingIndices find_k_for_T(const BaseOrder& order, const CubeCoord& T, const BigRat& eps,
                                      const BigInt& c_tilde, const IndexSearchOptions& opts = {}) {
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    const int L = T.dim();
    const BigInt tn = numerator(eps);
    const BigInt td = denominator(eps) * detail::ceil_sqrt_int(L);  // tol = tn/td
    BigInt ct = c_tilde;
    std::string last_err;

    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        try {
            std::vector<BigInt> ks;
            ks.push_back(opts.k_minus1);
            const BigInt Nm1 = order.N(opts.k_minus1);
            // k(0): first index above c_tilde whose next step ratio is already small
            BigInt k0 = std::max(ct, opts.k_minus1) + 1;
            for (std::uint64_t guard = 0;; ++guard) {
                if (guard > opts.scan_limit)
                    throw std::runtime_error("step-size condition not reached");
                // m(k0+1) / N_{k(-1), k0+1} <= tol
                const BigInt mk = order.m(k0 + 1);
                if (mk * td <= tn * order.window(opts.k_minus1, k0 + 1)) break;
                // jump: the window must reach m(k0+1)/tol
                BigInt needN = mk * td / tn + 1 + Nm1;
                BigInt jump = detail::first_index_with_N(order, k0, needN) - 1;
                k0 = (jump > k0) ? jump : k0 + 1;
            }
            ks.push_back(k0);
            // crossings for T_1 .. T_L
            for (int l = 1; l <= L; ++l) {
                const BigInt Tn = numerator(T.T[static_cast<std::size_t>(l - 1)]);
                const BigInt Td = denominator(T.T[static_cast<std::size_t>(l - 1)]);
                // q = T_l - tol = (Tn td - tn Td) / (Td td)
                const BigInt qn = Tn * td - tn * Td;
                const BigInt qd = Td * td;
                const BigInt& prev = ks.back();
                BigInt kl;
                if (qn <= 0) {
                    kl = prev + 1;
                } else {
                    // window(prev,k)/window(k(-1),k) >= qn/qd
                    // <=> N(k) (qd - qn) >= qd N(prev) - qn N(k(-1))
                    const BigInt num = qd * order.N(prev) - qn * Nm1;
                    const BigInt den = qd - qn;  // positive: T_l - tol < 1
                    BigInt needN = (num + den - 1) / den;
                    kl = detail::first_index_with_N(order, prev, needN);
                }
                // no overshoot: window(prev,kl)/window(k(-1),kl) <= T_l + tol
                const BigInt un = Tn * td + tn * Td;  // upper = un / qd
                if (order.window(prev, kl) * qd > un * order.window(opts.k_minus1, kl))
                    throw std::runtime_error("crossing overshoot (step too large)");
                ks.push_back(kl);
            }
            IncreasingIndices idx(ks);
            // componentwise certificate already implies |Tbar - T| <= eps; assert it
            for (int l = 1; l <= L; ++l) {
                const BigInt W = order.window(idx.at(l - 1), idx.at(l));
                const BigInt Wtot = order.window(opts.k_minus1, idx.at(l));
                const BigInt Tn = numerator(T.T[static_cast<std::size_t>(l - 1)]);
                const BigInt Td = denominator(T.T[static_cast<std::size_t>(l - 1)]);
                const BigInt lhs = W * Td - Tn * Wtot;  // (ratio - T_l) * Td * Wtot
                if (abs(lhs) * td > tn * Td * Wtot)
                    throw std::runtime_error("postcondition |Tbar - T| <= eps failed");
            }
            return idx;
        } catch (const std::runtime_error& e) {
            last_err = e.what();
            ct = 2 * ct + 16;  // retry from a later start; moderate orders settle eventually
        }
    }
    throw std::runtime_error(
        "find_k_for_T: horizon exhausted before the step-size condition was met (sequence not "
        "moderate enough at this horizon): " +
        last_err);
}

inline IncreasingIndices find_k_for_t(const BaseOrder& order, const SimplexCoord& t,
                                      const BigRat& eps, const BigInt& c_tilde,
                                      const IndexSearchOptions& opts = {}) {
    const int L = t.dim();
    if (L < 1) throw std::invalid_argument("find_k_for_t needs L >= 1");
    // steer through eta: Lipschitz constant L(L+1)
    BigRat inner = eps / (L * (L + 1));
    const CubeCoord target = eta_section(t);
    for (int halving = 0; halving < 8; ++halving) {
        IncreasingIndices idx = find_k_for_T(order, target, inner, c_tilde, opts);
        if (tbar_within(Mbar(idx, order), t, eps)) return idx;
        inner /= 2;
    }
    throw std::runtime_error("find_k_for_t: could not meet the simplex tolerance");
}

// ---------------------------------------------------------------------------
// Master code: blocks (L, t, k_{L,t}) chained through the ordered nets.

struct MasterBlock {
    int L = 1;
    SimplexCoord t;
    IncreasingIndices k;
    // growth condition (prev chaining): 2 N_{k_prev(L')} / N_{k(L)} < eps_L;
    // the ok flags are decided in exact integer arithmetic, the lhs/rhs pairs
    // are double renditions for reports
    double growth_lhs = 0.0;
    double growth_rhs = 0.0;
    bool growth_ok = true;
    // approximation condition: |tbar(Mbar(k)) - t| <= eps_L / (L+1)
    double approx_dev = 0.0;
    double approx_rhs = 0.0;
    bool approx_ok = true;
};

struct MasterCode {
    std::vector<MasterBlock> blocks;
    std::vector<BigRat> eps_tilde;  // index L -> eps_L (1-based, entry 0 unused)
    std::string order_desc;

    // ell_k assignment: block-local groups; before the first block ell = 0.
    int ell_at(const BigInt& k) const {
        for (const auto& b : blocks) {
            if (k <= b.k.at(-1)) return 0;
            if (k <= b.k.at(b.L)) {
                for (int l = 0; l <= b.k.L(); ++l)
                    if (k <= b.k.at(l)) return l;
            }
        }
        throw std::out_of_range("index beyond the realized master code");
    }
    const BigInt& last_index() const { return blocks.back().k.at(blocks.back().k.L()); }
};

// eps_tilde defaults: eps_L = 2^-L (< 2, decreasing to 0).
inline std::vector<BigRat> default_eps_tilde(int L_max) {
    std::vector<BigRat> eps(static_cast<std::size_t>(L_max) + 1, BigRat(0));
    for (int L = 1; L <= L_max; ++L) eps[static_cast<std::size_t>(L)] = make_rat(1, big_pow(2, static_cast<unsigned>(L)));
    return eps;
}

inline void check_eps_schedule(const std::vector<BigRat>& eps, int L_max) {
    if (static_cast<int>(eps.size()) < L_max + 1)
        throw std::invalid_argument("eps schedule too short");
    for (int L = 1; L <= L_max; ++L) {
        if (!(eps[static_cast<std::size_t>(L)] > 0 && eps[static_cast<std::size_t>(L)] < 2))
            throw std::invalid_argument("eps_tilde entries must lie in (0,2)");
        if (L > 1 && !(eps[static_cast<std::size_t>(L)] <= eps[static_cast<std::size_t>(L - 1)]))
            throw std::invalid_argument("eps_tilde must be non-increasing");
    }
}

inline MasterCode build_master_code(const BaseOrder& order, const std::vector<BigRat>& eps_tilde,
                                    const std::vector<std::vector<SimplexCoord>>& nets, int L_max) {
    check_eps_schedule(eps_tilde, L_max);
    if (static_cast<int>(nets.size()) < L_max + 1)
        throw std::invalid_argument("net list too short");
    MasterCode code;
    code.eps_tilde = eps_tilde;
    code.order_desc = order.describe();
    BigInt prev_last = 1;  // k(-1) of the first block
    bool first = true;
    for (int L = 1; L <= L_max; ++L) {
        const BigRat& eps = eps_tilde[static_cast<std::size_t>(L)];
        for (const auto& t : nets[static_cast<std::size_t>(L)]) {
            if (t.dim() != L) throw std::invalid_argument("net point dimension mismatch");
            IndexSearchOptions opts;
            opts.k_minus1 = prev_last;
            // c_tilde: the 2 k_prev / eps hint, raised when needed so that
            // N(k(0)) already clears the growth condition 2 N_prev / N(k(L)) < eps
            BigRat hint = 2 * BigRat(prev_last) / eps;
            BigInt ct = numerator(hint) / denominator(hint) + 1;
            if (!first) {
                const BigRat needN = 2 * BigRat(order.N(prev_last)) / eps;
                const BigInt target = numerator(needN) / denominator(needN) + 1;
                const BigInt c2 = order.solve_N_at_least(target);
                if (c2 > ct) ct = c2;
            }
            MasterBlock blk{L, t, find_k_for_t(order, t, eps / (L + 1), ct, opts)};
            // record both conditions, deciding them in exact integer arithmetic
            if (!first) {
                const BigInt NP = order.N(prev_last);
                const BigInt NL = order.N(blk.k.at(L));
                blk.growth_ok = 2 * NP * denominator(eps) < numerator(eps) * NL;
                blk.growth_lhs = 2.0 * ratio_double(NP, NL);
                blk.growth_rhs = to_double(eps);
            }
            const BigRat approx_eps = eps / (L + 1);
            const auto dev = tbar_deviation(Mbar(blk.k, order), t);
            blk.approx_ok = dev.within(approx_eps);
            blk.approx_dev = dev.value();
            blk.approx_rhs = to_double(approx_eps);
            if (!blk.growth_ok || !blk.approx_ok)
                throw std::logic_error("master block failed its defining conditions");
            if (blk.k.at(-1) != prev_last)
                throw std::logic_error("master block chaining broken");
            prev_last = blk.k.at(L);
            first = false;
            code.blocks.push_back(std::move(blk));
        }
    }
    return code;
}

// Independent re-verification by direct integer arithmetic.
inline bool verify_master_code(const MasterCode& code, const BaseOrder& order,
                               std::vector<std::string>* failures = nullptr) {
    bool ok = true;
    const BigInt* prev_last = nullptr;
    for (std::size_t b = 0; b < code.blocks.size(); ++b) {
        const auto& blk = code.blocks[b];
        const BigRat& eps = code.eps_tilde.at(static_cast<std::size_t>(blk.L));
        if (prev_last) {
            if (blk.k.at(-1) != *prev_last) {
                ok = false;
                if (failures) failures->push_back("block " + std::to_string(b) + ": chain break");
            }
            const BigInt lhs = 2 * order.N(*prev_last);
            // 2 N_prev / N(k(L)) < eps  <=>  2 N_prev * den < num * N(k(L))
            if (!(lhs * denominator(eps) < numerator(eps) * order.N(blk.k.at(blk.L)))) {
                ok = false;
                if (failures) failures->push_back("block " + std::to_string(b) + ": growth");
            }
        }
        std::vector<BigInt> M;
        for (int l = 0; l <= blk.L; ++l) M.push_back(order.window(blk.k.at(l - 1), blk.k.at(l)));
        if (!tbar_within(M, blk.t, eps / (blk.L + 1))) {
            ok = false;
            if (failures) failures->push_back("block " + std::to_string(b) + ": approx");
        }
        prev_last = &blk.k.at(blk.L);
    }
    return ok;
}

// ---------------------------------------------------------------------------
// Full-shift code: blocks (L, t, n_{L,t}) with lengths s = sum n(l) per(l).

struct ShiftBlock {
    int L = 1;
    SimplexCoord t;
    std::vector<BigInt> n;   // n(0..L), all >= 1
    BigInt s{0};             // sum n(l) per(l)
    BigInt checkpoint{0};    // cumulative length through this block
    // block condition lhs: prev/(prev+s) + 2(L+1)/s < eps_L (ok flags exact,
    // lhs/rhs doubles for reports)
    double cond_lhs = 0.0;
    double cond_rhs = 0.0;
    bool cond_ok = true;
    double approx_dev = 0.0;
    double approx_rhs = 0.0;
    bool approx_ok = true;
};

struct ShiftCode {
    std::vector<ShiftBlock> blocks;
    std::vector<BigRat> eps_tilde;
    std::vector<std::int64_t> periods;  // anchor periods per(0..L_max)

    const BigInt& total_length() const { return blocks.back().checkpoint; }
};

// n(l) >= c_tilde realizing |tbar(mbar(n)) - t| <= eps: exact rational scaling
// when t is rational (zero coordinates forced up to n = 1 and re-verified).
inline std::vector<BigInt> select_n_for_t(const SimplexCoord& t,
                                          const std::vector<std::int64_t>& periods,
                                          const BigRat& eps, const BigInt& c_tilde,
                                          const BigInt& s_min = 1) {
    const int L = t.dim();
    if (static_cast<int>(periods.size()) < L + 1)
        throw std::invalid_argument("period list too short");
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    // common denominator of t and lcm of periods
    BigInt D = 1;
    for (const auto& x : t.t) {
        const BigInt d = denominator(x);
        D = D / gcd(D, d) * d;
    }
    BigInt lcmper = 1;
    for (int l = 0; l <= L; ++l) {
        const BigInt p = periods[static_cast<std::size_t>(l)];
        if (p < 1) throw std::invalid_argument("periods must be positive");
        lcmper = lcmper / gcd(lcmper, p) * p;
    }
    const BigInt unit = D * lcmper;
    BigInt sstar = unit;
    auto bump_to = [&](const BigRat& lower) {
        if (BigRat(sstar) < lower) {
            const BigInt q = numerator(lower) / denominator(lower) + 1;
            sstar = ((q + unit - 1) / unit) * unit;
        }
    };
    bump_to(BigRat(s_min));
    bump_to(BigRat(c_tilde) * lcmper * (L + 1));  // ensures n(l) >= c_tilde after scaling
    for (int tries = 0; tries < 512; ++tries) {
        std::vector<BigInt> n(static_cast<std::size_t>(L + 1));
        for (int l = 0; l <= L; ++l) {
            const BigRat exact = t.t[static_cast<std::size_t>(l)] * sstar / periods[static_cast<std::size_t>(l)];
            BigInt v = numerator(exact) / denominator(exact);  // exact integer by construction
            if (v < 1) v = 1;
            if (v < c_tilde) v = c_tilde;
            n[static_cast<std::size_t>(l)] = v;
        }
        BigInt s = 0;
        std::vector<BigInt> mb;
        for (int l = 0; l <= L; ++l) {
            mb.push_back(n[static_cast<std::size_t>(l)] * periods[static_cast<std::size_t>(l)]);
            s += mb.back();
        }
        if (s >= s_min && tbar_within(mb, t, eps)) return n;
        sstar *= 2;
    }
    throw std::runtime_error("select_n_for_t: tolerance not reached");
}

inline ShiftCode build_shift_code(const std::vector<BigRat>& eps_tilde,
                                  const std::vector<std::vector<SimplexCoord>>& nets,
                                  const std::vector<std::int64_t>& periods, int L_max) {
    check_eps_schedule(eps_tilde, L_max);
    if (static_cast<int>(periods.size()) < L_max + 1)
        throw std::invalid_argument("need an anchor period for each level");
    ShiftCode code;
    code.eps_tilde = eps_tilde;
    code.periods = periods;
    BigInt prev = 0;  // cumulative length of all previous blocks
    for (int L = 1; L <= L_max; ++L) {
        const BigRat& eps = eps_tilde[static_cast<std::size_t>(L)];
        for (const auto& t : nets[static_cast<std::size_t>(L)]) {
            if (t.dim() != L) throw std::invalid_argument("net point dimension mismatch");
            // strengthened block growth: 2 prev/(prev+s) + 2(L+1)/s < eps
            // (implies the defining condition prev/(prev+s) + 2(L+1)/s < eps)
            BigRat smin = 8 * BigRat(L + 1) / eps;  // 2(L+1)/s <= eps/4
            if (prev > 0) {
                const BigRat s2 = BigRat(prev) * (4 - eps) / eps;  // 2prev/(prev+s) <= eps/2
                if (s2 > smin) smin = s2;
            }
            const BigInt s_min = numerator(smin) / denominator(smin) + 1;
            ShiftBlock blk{L, t, select_n_for_t(t, periods, eps / ((L + 1) * (L + 1)), 1, s_min)};
            blk.s = 0;
            for (int l = 0; l <= L; ++l)
                blk.s += blk.n[static_cast<std::size_t>(l)] * periods[static_cast<std::size_t>(l)];
            blk.checkpoint = prev + blk.s;
            // prev/(prev+s) + 2(L+1)/s < eps in integers
            const BigInt den = denominator(eps), num = numerator(eps);
            blk.cond_ok = prev * blk.s * den + 2 * BigInt(L + 1) * blk.checkpoint * den <
                          num * blk.checkpoint * blk.s;
            blk.cond_lhs = ratio_double(prev, blk.checkpoint) +
                           2.0 * (L + 1) * ratio_double(1, blk.s);
            blk.cond_rhs = to_double(eps);
            std::vector<BigInt> mb;
            for (int l = 0; l <= L; ++l)
                mb.push_back(blk.n[static_cast<std::size_t>(l)] * periods[static_cast<std::size_t>(l)]);
            const BigRat approx_eps = eps / (L + 1);
            const auto dev = tbar_deviation(mb, t);
            blk.approx_ok = dev.within(approx_eps);
            blk.approx_dev = dev.value();
            blk.approx_rhs = to_double(approx_eps);
            if (!blk.cond_ok || !blk.approx_ok)
                throw std::logic_error("shift block failed its defining conditions");
            prev = blk.checkpoint;
            code.blocks.push_back(std::move(blk));
        }
    }
    return code;
}

inline bool verify_shift_code(const ShiftCode& code, std::vector<std::string>* failures = nullptr) {
    bool ok = true;
    BigInt prev = 0;
    for (std::size_t b = 0; b < code.blocks.size(); ++b) {
        const auto& blk = code.blocks[b];
        const BigRat& eps = code.eps_tilde.at(static_cast<std::size_t>(blk.L));
        BigInt s = 0;
        std::vector<BigInt> mb;
        for (int l = 0; l <= blk.L; ++l) {
            const BigInt seg = blk.n[static_cast<std::size_t>(l)] *
                               code.periods[static_cast<std::size_t>(l)];
            mb.push_back(seg);
            s += seg;
        }
        if (s != blk.s) {
            ok = false;
            if (failures) failures->push_back("block " + std::to_string(b) + ": s mismatch");
        }
        if (prev + s != blk.checkpoint) {
            ok = false;
            if (failures) failures->push_back("block " + std::to_string(b) + ": checkpoint");
        }
        // defining condition (prev sums) in pure integers:
        // prev/(prev+s) + 2(L+1)/s < eps  <=>  prev*s*den + 2(L+1)(prev+s)*den < num*(prev+s)*s
        const BigInt den = denominator(eps), num = numerator(eps);
        if (!(prev * s * den + 2 * BigInt(blk.L + 1) * (prev + s) * den < num * (prev + s) * s)) {
            ok = false;
            if (failures) failures->push_back("block " + std::to_string(b) + ": growth");
        }
        if (!tbar_within(mb, blk.t, eps / (blk.L + 1))) {
            ok = false;
            if (failures) failures->push_back("block " + std::to_string(b) + ": approx");
        }
        prev = blk.checkpoint;
    }
    return ok;
}

// kappa(a) = min{ k : ell_k = a } over a realized code prefix; the anchor at
// level a then has period kappa(a) + 1 in the quadratic-window construction.
inline std::optional<BigInt> kappa_of_level(const MasterCode& code, int a) {
    if (code.blocks.empty()) return std::nullopt;
    if (a == 0) return BigInt(1);  // ell_k = 0 already before the first block
    for (const auto& blk : code.blocks) {
        if (a > blk.L) continue;
        // within this block, level a covers (k(a-1), k(a)]
        return blk.k.at(a - 1) + 1;
    }
    return std::nullopt;
}

}  // namespace emg
