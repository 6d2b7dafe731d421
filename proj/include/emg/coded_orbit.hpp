#pragma once

// Orbit realization from codes: the concrete coded point on the full shift
// (concatenation of repeated periodic words) and a synthetic orbit in an
// abstract finite metric space satisfying the coded-wandering-domain
// conditions (C1)-(C3), plus verification of those conditions and the
// checkpoint bounds.
//
// Checkpoint empirical measures are computed in closed form from the code's
// segment structure (window positions inside one repeated word contribute the
// word's rotations with exact multiplicities; only positions near segment
// joints need explicit symbols), so checkpoints at astronomical times stay
// cheap and exact.

#include "emg/ground.hpp"
#include "emg/measure.hpp"
#include "emg/numeric.hpp"
#include "emg/scheduling.hpp"
#include "emg/shift.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace emg {

// ---------------------------------------------------------------------------
// Coded shift point: x = word(l_1)^{n_1} word(l_2)^{n_2} ...

struct CodedSegment {
    int level = 0;        // anchor index
    BigInt reps{0};       // repetitions of the anchor word
    BigInt start{0};      // cumulative offset of the segment
    BigInt length{0};     // reps * per(level)
};

class CodedPoint {
public:
    CodedPoint(std::vector<CodedSegment> segments, std::vector<shift::Word> words,
               shift::Alphabet a)
        : segments_(std::move(segments)), words_(std::move(words)), alphabet_(a) {
        if (segments_.empty()) throw std::invalid_argument("coded point needs segments");
        total_ = segments_.back().start + segments_.back().length;
    }

    const shift::Alphabet& alphabet() const { return alphabet_; }
    const std::vector<CodedSegment>& segments() const { return segments_; }
    const shift::Word& word(int level) const { return words_.at(static_cast<std::size_t>(level)); }
    const BigInt& total_length() const { return total_; }

    shift::Symbol at(const BigInt& j) const {
        if (j < 0 || j >= total_) throw std::out_of_range("symbol index beyond realized prefix");
        // binary search for the segment containing j
        std::size_t lo = 0, hi = segments_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (segments_[mid].start <= j) lo = mid;
            else hi = mid - 1;
        }
        const auto& seg = segments_[lo];
        const auto& w = words_[static_cast<std::size_t>(seg.level)];
        const BigInt phase = (j - seg.start) % BigInt(w.size());
        return w.at(static_cast<std::size_t>(phase.convert_to<std::uint64_t>()));
    }

    std::vector<shift::Symbol> window(const BigInt& j, int T) const {
        std::vector<shift::Symbol> out(static_cast<std::size_t>(T));
        for (int i = 0; i < T; ++i) out[static_cast<std::size_t>(i)] = at(j + i);
        return out;
    }

    // View as a ShiftPoint (small horizons only).
    shift::ShiftPoint as_shift_point() const {
        if (total_ > BigInt(std::uint64_t{1} << 62))
            throw std::invalid_argument("coded point too long for direct indexing");
        const std::uint64_t horizon = total_.convert_to<std::uint64_t>();
        auto self = std::make_shared<CodedPoint>(*this);
        return shift::ShiftPoint::from_generator(
            alphabet_, [self](std::uint64_t j) { return self->at(BigInt(j)); }, horizon,
            shift::ShiftPoint::Kind::Coded);
    }

private:
    std::vector<CodedSegment> segments_;
    std::vector<shift::Word> words_;
    shift::Alphabet alphabet_;
    BigInt total_;
};

// Realizes the code prefix plus `extra` symbols of the canonical continuation
// (the next block would start at level 0, so the tail repeats word(0)).
inline CodedPoint realize_shift_point(const ShiftCode& code, const PeriodicFamily& fam,
                                      const BigInt& extra = 0) {
    if (code.blocks.empty()) throw std::invalid_argument("empty code");
    std::vector<shift::Word> words;
    for (const auto& p : fam.anchors) words.push_back(p.cycle_word());
    std::vector<CodedSegment> segs;
    BigInt pos = 0;
    for (const auto& blk : code.blocks) {
        for (int l = 0; l <= blk.L; ++l) {
            CodedSegment s;
            s.level = l;
            s.reps = blk.n[static_cast<std::size_t>(l)];
            s.start = pos;
            s.length = s.reps * BigInt(code.periods[static_cast<std::size_t>(l)]);
            pos += s.length;
            segs.push_back(std::move(s));
        }
    }
    if (extra > 0) {
        const BigInt per0 = code.periods.at(0);
        CodedSegment s;
        s.level = 0;
        s.reps = (extra + per0 - 1) / per0;
        s.start = pos;
        s.length = s.reps * per0;
        segs.push_back(std::move(s));
    }
    return CodedPoint(std::move(segs), std::move(words), fam.anchors.front().alphabet());
}

// ---------------------------------------------------------------------------
// Closed-form empirical measures along a coded point.

struct Snapshot {
    DiscreteMeasure measure;
    double prune_slack = 0.0;  // dropped mass times ground diameter
};

class CodedEmpiricalAccumulator {
public:
    CodedEmpiricalAccumulator(std::shared_ptr<ShiftGround> ground, const CodedPoint& point)
        : ground_(std::move(ground)), point_(point), T_(ground_->depth()) {}

    // Advance through segment `g` of the point (segments must be consumed in order).
    void advance_segment(std::size_t g) {
        if (g != next_) throw std::logic_error("segments must be consumed in order");
        const auto& seg = point_.segments()[g];
        const auto& w = point_.word(seg.level);
        const BigInt per(w.size());
        // positions with the whole window inside this segment: j - start in [0, len - T]
        if (seg.length >= T_) {
            const BigInt hi = seg.length - T_;  // inclusive
            for (BigInt r = 0; r < per && r <= hi; ++r) {
                // count of q in [0, hi], q == r (mod per)
                const BigInt cnt = (hi - r) / per + 1;
                counts_[pure_id(seg.level, r)] += cnt;
            }
        }
        // joint positions: the final min(T-1, len) positions spill into the next
        // segments; resolve their windows explicitly
        const BigInt spill_from = seg.start + ((seg.length >= T_) ? (seg.length - T_ + 1) : BigInt(0));
        for (BigInt j = spill_from; j < seg.start + seg.length; ++j) {
            counts_[ground_->add_prefix(point_.window(j, T_))] += 1;
        }
        processed_ = seg.start + seg.length;
        ++next_;
    }

    // Empirical measure at time `processed_` with tiny atoms pruned (their
    // relative mass is below 2^-120; the slack records the induced W1 shift).
    // The prune test is a plain integer comparison so that no reduced
    // rational is ever built for an atom that is about to be dropped.
    Snapshot snapshot() const {
        if (processed_ <= 0) throw std::logic_error("snapshot before any segment");
        std::vector<Atom> atoms;
        BigInt dropped_count = 0;
        BigRat kept = 0;
        const unsigned mp = static_cast<unsigned>(msb(processed_));
        for (const auto& [p, c] : counts_) {
            const unsigned mc = static_cast<unsigned>(msb(c));
            bool drop;
            if (mc + 121 <= mp) drop = true;          // c 2^120 < 2^{mc+121} <= 2^{mp} <= N
            else if (mc + 120 > mp) drop = false;     // c 2^120 >= 2^{mc+120} >= 2^{mp+1} > N
            else drop = (c << 120) < processed_;
            if (drop) {
                dropped_count += c;
            } else {
                BigRat w = make_rat(c, processed_);
                kept += w;
                atoms.push_back({p, std::move(w)});
            }
        }
        for (auto& a : atoms) a.weight /= kept;  // exact renormalization
        Snapshot s{DiscreteMeasure(ground_, std::move(atoms)),
                   to_double(make_rat(dropped_count, processed_)) * ground_->diameter_bound()};
        return s;
    }

    const BigInt& time() const { return processed_; }

private:
    PointId pure_id(int level, const BigInt& rotation) {
        const auto key = std::make_pair(level, static_cast<std::int64_t>(rotation.convert_to<std::int64_t>()));
        auto it = pure_cache_.find(key);
        if (it != pure_cache_.end()) return it->second;
        const auto& w = point_.word(level);
        std::vector<shift::Symbol> prefix(static_cast<std::size_t>(T_));
        for (int i = 0; i < T_; ++i)
            prefix[static_cast<std::size_t>(i)] =
                w.at(static_cast<std::size_t>((rotation.convert_to<std::uint64_t>() + static_cast<std::uint64_t>(i)) % w.size()));
        const PointId id = ground_->add_prefix(std::move(prefix));
        pure_cache_.emplace(key, id);
        return id;
    }

    std::shared_ptr<ShiftGround> ground_;
    const CodedPoint& point_;
    int T_;
    std::size_t next_ = 0;
    BigInt processed_{0};
    std::map<PointId, BigInt> counts_;
    std::map<std::pair<int, std::int64_t>, PointId> pure_cache_;
};

// Empirical measures of the coded point at every block checkpoint.
inline std::vector<Snapshot> shift_checkpoint_measures(const ShiftCode& code,
                                                       const CodedPoint& point,
                                                       const std::shared_ptr<ShiftGround>& ground) {
    CodedEmpiricalAccumulator acc(ground, point);
    std::vector<Snapshot> out;
    out.reserve(code.blocks.size());
    std::size_t seg = 0;
    for (const auto& blk : code.blocks) {
        for (int l = 0; l <= blk.L; ++l) acc.advance_segment(seg++);
        if (acc.time() != blk.checkpoint) throw std::logic_error("checkpoint misalignment");
        out.push_back(acc.snapshot());
    }
    return out;
}

// Intermediate-time variant: a snapshot after every code segment (the block
// checkpoints are the last snapshot of each block).
struct TimedSnapshot {
    BigInt time;
    int level = 0;
    Snapshot snap;
};

inline std::vector<TimedSnapshot> shift_segment_measures(const ShiftCode& code,
                                                         const CodedPoint& point,
                                                         const std::shared_ptr<ShiftGround>& ground) {
    CodedEmpiricalAccumulator acc(ground, point);
    std::vector<TimedSnapshot> out;
    std::size_t seg = 0;
    for (const auto& blk : code.blocks)
        for (int l = 0; l <= blk.L; ++l) {
            acc.advance_segment(seg++);
            out.push_back({acc.time(), l, acc.snapshot()});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic space: \hat p plus the anchor orbits as abstract points, metric
// inherited from the symbolic anchors (exact periodic distances).

struct SyntheticSpace {
    std::shared_ptr<TableGround> ground;
    PointId phat = 0;
    std::vector<std::vector<PointId>> orbit;  // [anchor][phase]
    std::vector<std::int64_t> periods;
    std::function<double(const BigInt&)> eps_at;  // perturbation radius eps_k

    const PointId& orbit_point(int anchor, const BigInt& time) const {
        const auto& orb = orbit[static_cast<std::size_t>(anchor)];
        return orb[static_cast<std::size_t>((time % BigInt(orb.size())).convert_to<std::uint64_t>())];
    }
};

inline SyntheticSpace build_synthetic_space(const PeriodicFamily& fam) {
    if (!fam.mixed()) throw std::invalid_argument("synthetic space needs the mixed family");
    SyntheticSpace sp;
    sp.ground = std::make_shared<TableGround>();
    std::vector<shift::ShiftPoint> pts;
    sp.phat = sp.ground->add_point("phat");
    pts.push_back(*fam.fixed_point);
    for (std::size_t a = 0; a < fam.anchors.size(); ++a) {
        const auto& p = fam.anchors[a];
        sp.periods.push_back(static_cast<std::int64_t>(p.period()));
        std::vector<PointId> orb;
        for (std::size_t j = 0; j < p.period(); ++j) {
            orb.push_back(sp.ground->add_point("p" + std::to_string(a) + "." + std::to_string(j)));
            pts.push_back(p.shifted(j));
        }
        sp.orbit.push_back(std::move(orb));
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = to_double(shift::exact_periodic_distance(pts[i], pts[j]));
            sp.ground->set_distance(static_cast<PointId>(i), static_cast<PointId>(j), d);
        }
    sp.eps_at = [](const BigInt& k) { return 1.0 / std::max(1.0, to_double(k)); };
    return sp;
}

// Mixed simplex measure on the synthetic ground: (1-zeta) delta_phat + zeta sum t_l mu^(l).
inline DiscreteMeasure synthetic_simplex_measure(const SimplexCoord& t, const SyntheticSpace& sp,
                                                 const BigRat& zeta) {
    std::vector<Atom> atoms;
    atoms.push_back({sp.phat, 1 - zeta});
    for (int l = 0; l <= t.dim(); ++l) {
        const auto& orb = sp.orbit.at(static_cast<std::size_t>(l));
        const BigRat w = t.t[static_cast<std::size_t>(l)] * zeta / BigInt(orb.size());
        if (w == 0) continue;
        for (PointId p : orb) atoms.push_back({p, w});
    }
    return DiscreteMeasure(sp.ground, std::move(atoms));
}

// ---------------------------------------------------------------------------
// Interval layout per window: [hat | I | gap], lengths summing to m_k.
// Exact mode: #I_k = zeta m_k on the nose (requires per(l_k) | zeta m_k);
// rounded mode: #I_k = per * floor(zeta (m_k - gap) / per).

class CodeRealizationSpec {
public:
    enum class Mode { ExactShare, RoundedShare };

    CodeRealizationSpec(Mode mode, BigRat zeta, std::function<BigInt(const BigInt&)> gap,
                        BigInt k_D = 1)
        : mode_(mode), zeta_(std::move(zeta)), gap_(std::move(gap)), k_D_(std::move(k_D)) {
        if (zeta_ <= 0 || zeta_ >= 1) throw std::invalid_argument("zeta must lie in (0,1)");
    }

    static CodeRealizationSpec exact_share(BigRat zeta) {
        return CodeRealizationSpec(Mode::ExactShare, std::move(zeta),
                                   [](const BigInt&) { return BigInt(0); });
    }
    static CodeRealizationSpec rounded_share(BigRat zeta, std::function<BigInt(const BigInt&)> gap) {
        return CodeRealizationSpec(Mode::RoundedShare, std::move(zeta), std::move(gap));
    }

    Mode mode() const { return mode_; }
    const BigRat& zeta() const { return zeta_; }
    const BigInt& k_D() const { return k_D_; }

    struct Layout {
        BigInt hat_len{0};
        BigInt i_len{0};
        BigInt gap_len{0};
    };

    Layout layout(const BigInt& k, const BigInt& m_k, std::int64_t per) const {
        Layout lay;
        if (mode_ == Mode::ExactShare) {
            const BigRat exact = zeta_ * m_k;
            if (denominator(exact) != 1)
                throw std::invalid_argument("exact share: zeta * m_k is not an integer");
            lay.i_len = numerator(exact);
            if (lay.i_len % per != 0)
                throw std::invalid_argument("exact share: #I_k is not a multiple of the period");
            lay.gap_len = 0;
        } else {
            lay.gap_len = gap_(k);
            if (lay.gap_len < 0) lay.gap_len = 0;
            if (lay.gap_len > m_k) lay.gap_len = m_k;
            const BigRat tgt = zeta_ * (m_k - lay.gap_len);
            BigInt q = numerator(tgt) / denominator(tgt);
            lay.i_len = (q / per) * per;  // round down to a multiple of the period
        }
        lay.hat_len = m_k - lay.i_len - lay.gap_len;
        if (lay.hat_len < 0) throw std::logic_error("interval layout exceeds the window");
        return lay;
    }

    // Exact-mode sums over a window range (k1, k2]: #I = zeta * (N_k2 - N_k1).
    BigInt i_sum(const BaseOrder& order, const BigInt& k1, const BigInt& k2) const {
        if (mode_ != Mode::ExactShare)
            throw std::logic_error("closed-form sums need the exact-share mode");
        const BigRat s = zeta_ * BigRat(order.window(k1, k2));
        if (denominator(s) != 1) throw std::logic_error("exact share broke divisibility");
        return numerator(s);
    }

private:
    Mode mode_;
    BigRat zeta_;
    std::function<BigInt(const BigInt&)> gap_;
    BigInt k_D_;
};

// ---------------------------------------------------------------------------
// Synthetic orbit: n -> (point, tag). Locations are exact anchors by default
// (displacements are the worst case of the bounds but default to zero).

struct OrbitLocation {
    PointId point = 0;
    enum class Tag { Hat, I, Gap } tag = Tag::Hat;
    BigInt window_index{0};
};

class SyntheticOrbit {
public:
    SyntheticOrbit(const SyntheticSpace& space, const CodeRealizationSpec& spec,
                   std::function<int(const BigInt&)> ell_at, std::shared_ptr<const BaseOrder> order)
        : space_(space), spec_(spec), ell_at_(std::move(ell_at)), order_(std::move(order)) {}

    const SyntheticSpace& space() const { return space_; }
    const CodeRealizationSpec& spec() const { return spec_; }
    const BaseOrder& order() const { return *order_; }
    int ell(const BigInt& k) const { return ell_at_(k); }

    OrbitLocation location(const BigInt& n) const {
        if (n < 0) throw std::out_of_range("negative orbit time");
        const BigInt k = order_->solve_N_at_least(n + 1);  // n in [N_{k-1}, N_k)
        const BigInt off = n - order_->N(k - 1);
        const int l = ell_at_(k);
        const auto lay = spec_.layout(k, order_->m(k), space_.periods.at(static_cast<std::size_t>(l)));
        OrbitLocation loc;
        loc.window_index = k;
        if (off < lay.hat_len) {
            loc.point = space_.phat;
            loc.tag = OrbitLocation::Tag::Hat;
        } else if (off < lay.hat_len + lay.i_len) {
            loc.point = space_.orbit_point(l, n);  // phase locked to absolute time
            loc.tag = OrbitLocation::Tag::I;
        } else {
            loc.point = space_.phat;  // gap times sit at the transit anchor
            loc.tag = OrbitLocation::Tag::Gap;
        }
        return loc;
    }

private:
    const SyntheticSpace& space_;
    CodeRealizationSpec spec_;
    std::function<int(const BigInt&)> ell_at_;
    std::shared_ptr<const BaseOrder> order_;
};

inline SyntheticOrbit realize_synthetic_orbit(const SyntheticSpace& space,
                                              const CodeRealizationSpec& spec,
                                              const MasterCode& code,
                                              std::shared_ptr<const BaseOrder> order) {
    // validate the layout on the first windows (and implicitly on demand later)
    for (BigInt k = 1; k <= 16; ++k) {
        const int l = code.ell_at(k);
        spec.layout(k, order->m(k), space.periods.at(static_cast<std::size_t>(l)));
    }
    return SyntheticOrbit(space, spec, [&code](const BigInt& k) { return code.ell_at(k); }, order);
}

// Empirical measure of the synthetic orbit at time N_K (end of window K),
// computed window-by-window; feasible for enumerable K.
inline DiscreteMeasure synthetic_empirical(const SyntheticOrbit& orbit, const BigInt& K) {
    const auto& order = orbit.order();
    std::map<PointId, BigRat> mass;
    const BigInt N = order.N(K);
    for (BigInt k = 1; k <= K; ++k) {
        const int l = orbit.ell(k);
        const std::int64_t per = orbit.space().periods.at(static_cast<std::size_t>(l));
        const auto lay = orbit.spec().layout(k, order.m(k), per);
        mass[orbit.space().phat] += make_rat(lay.hat_len + lay.gap_len, N);
        // I-interval is phase locked and a multiple of the period: uniform
        const BigRat each = make_rat(lay.i_len / per, N);
        for (PointId p : orbit.space().orbit[static_cast<std::size_t>(l)]) mass[p] += each;
    }
    std::vector<Atom> atoms;
    for (auto& [p, w] : mass)
        if (w > 0) atoms.push_back({p, std::move(w)});
    return DiscreteMeasure(orbit.space().ground, std::move(atoms));
}

// Empirical measure at an arbitrary time (full windows in closed form, the
// trailing partial window walked position by position; desk-scale tails only).
inline DiscreteMeasure synthetic_empirical_at_time(const SyntheticOrbit& orbit, const BigInt& n) {
    if (n < 1) throw std::invalid_argument("empirical measure needs n >= 1");
    const auto& order = orbit.order();
    BigInt kstar = order.solve_N_at_least(n);
    const BigInt K = (order.N(kstar) == n) ? kstar : kstar - 1;
    std::map<PointId, BigInt> counts;
    for (BigInt k = 1; k <= K; ++k) {
        const int l = orbit.ell(k);
        const std::int64_t per = orbit.space().periods.at(static_cast<std::size_t>(l));
        const auto lay = orbit.spec().layout(k, order.m(k), per);
        counts[orbit.space().phat] += lay.hat_len + lay.gap_len;
        const BigInt each = lay.i_len / per;
        for (PointId p : orbit.space().orbit[static_cast<std::size_t>(l)]) counts[p] += each;
    }
    for (BigInt t = order.N(K); t < n; ++t) counts[orbit.location(t).point] += 1;
    std::vector<Atom> atoms;
    for (auto& [p, c] : counts)
        if (c > 0) atoms.push_back({p, make_rat(c, n)});
    return DiscreteMeasure(orbit.space().ground, std::move(atoms));
}

// Exact-share fast path: per-level window totals accumulate block by block.
struct MasterCheckpoint {
    DiscreteMeasure measure;        // empirical measure at N_{k(L)}
    DiscreteMeasure target;         // mu_{tbar(Mbar(k))}
    SimplexCoord target_coord;      // tbar(Mbar(k))
    double bound = 0.0;             // checkpoint bound (reset + eps + residual terms)
    const MasterBlock* block = nullptr;
};

inline std::vector<MasterCheckpoint> master_checkpoint_measures(const MasterCode& code,
                                                                const SyntheticOrbit& orbit) {
    if (orbit.spec().mode() != CodeRealizationSpec::Mode::ExactShare)
        throw std::invalid_argument("closed-form checkpoints need the exact-share spec");
    const auto& order = orbit.order();
    const auto& sp = orbit.space();
    const BigRat zeta = orbit.spec().zeta();
    const std::size_t nlev = sp.orbit.size();
    std::vector<BigInt> level_time(nlev, BigInt(0));  // total window length at each level
    BigInt covered = 0;
    std::vector<MasterCheckpoint> out;
    for (const auto& blk : code.blocks) {
        // pre-block region (only before the first block): level 0
        if (covered == 0 && blk.k.at(-1) >= 1) {
            level_time[0] += order.N(blk.k.at(-1));
            covered = blk.k.at(-1);
        }
        for (int l = 0; l <= blk.L; ++l) {
            level_time[static_cast<std::size_t>(l)] += order.window(blk.k.at(l - 1), blk.k.at(l));
        }
        covered = blk.k.at(blk.L);
        const BigInt N = order.N(covered);
        // measure: (1-zeta) at phat, zeta * level_time[l]/N over orbit l
        std::vector<Atom> atoms;
        atoms.push_back({sp.phat, 1 - zeta});
        std::vector<BigRat> w;
        for (std::size_t l = 0; l < nlev; ++l) {
            const BigRat share = zeta * make_rat(level_time[l], N);
            w.push_back(make_rat(level_time[l], N));
            if (share == 0) continue;
            const BigRat each = share / BigInt(sp.orbit[l].size());
            for (PointId p : sp.orbit[l]) atoms.push_back({p, each});
        }
        MasterCheckpoint cp{
            DiscreteMeasure(sp.ground, std::move(atoms)),
            synthetic_simplex_measure(tbar(Mbar(blk.k, order)), sp, zeta),
            tbar(Mbar(blk.k, order)),
            0.0,
            &blk};
        // bound: 2 N_{k(-1)}/N_{k(L)} + 2 max eps_k + residual terms (zero in exact mode)
        cp.bound = 2.0 * ratio_double(order.N(blk.k.at(-1)), N) +
                   2.0 * sp.eps_at(blk.k.at(-1) + 1);
        out.push_back(std::move(cp));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Condition verification over an enumerable horizon.

struct CodeConditionReport {
    double sup_i_residual = 0.0;    // sup over windows of |sum #I / sum m - zeta|
    double sup_cover_residual = 0.0;  // sup of |1 - sum(#I + #hat I)/sum m|
    double max_containment_violation = 0.0;
    std::uint64_t windows_checked = 0;
};

inline CodeConditionReport verify_code_conditions(const SyntheticOrbit& orbit, std::uint64_t K) {
    const auto& order = orbit.order();
    const auto& spec = orbit.spec();
    if (K < 2) throw std::invalid_argument("horizon too small");
    std::vector<BigInt> i_pre{0}, hat_pre{0}, m_pre{0};
    for (std::uint64_t k = 1; k <= K; ++k) {
        const BigInt kk = k;
        const int l = orbit.ell(kk);
        const auto lay = spec.layout(kk, order.m(kk),
                                     orbit.space().periods.at(static_cast<std::size_t>(l)));
        i_pre.push_back(i_pre.back() + lay.i_len);
        hat_pre.push_back(hat_pre.back() + lay.hat_len);
        m_pre.push_back(m_pre.back() + order.m(kk));
    }
    CodeConditionReport rep;
    const std::uint64_t kD = spec.k_D().convert_to<std::uint64_t>();
    for (std::uint64_t k1 = kD; k1 < K; ++k1)
        for (std::uint64_t k2 = k1 + 1; k2 <= K; ++k2) {
            const BigInt im = i_pre[k2] - i_pre[k1 - 1];
            const BigInt hm = hat_pre[k2] - hat_pre[k1 - 1];
            const BigInt mm = m_pre[k2] - m_pre[k1 - 1];
            rep.sup_i_residual = std::max(
                rep.sup_i_residual, std::abs(to_double(make_rat(im, mm) - spec.zeta())));
            rep.sup_cover_residual = std::max(
                rep.sup_cover_residual, std::abs(1.0 - to_double(make_rat(im + hm, mm))));
            ++rep.windows_checked;
        }
    // containment: sample the interval endpoints of each window
    for (std::uint64_t k = kD; k <= K; ++k) {
        const BigInt kk = k;
        const int l = orbit.ell(kk);
        const auto lay = spec.layout(kk, order.m(kk),
                                     orbit.space().periods.at(static_cast<std::size_t>(l)));
        const BigInt base = order.N(kk - 1);
        auto check = [&](const BigInt& n, OrbitLocation::Tag expect, PointId target) {
            const auto loc = orbit.location(n);
            if (loc.tag != expect) {
                rep.max_containment_violation = std::max(rep.max_containment_violation, 1.0);
                return;
            }
            const double d = orbit.space().ground->distance(loc.point, target);
            rep.max_containment_violation = std::max(rep.max_containment_violation, d);
        };
        if (lay.hat_len > 0) {
            check(base, OrbitLocation::Tag::Hat, orbit.space().phat);
            check(base + lay.hat_len - 1, OrbitLocation::Tag::Hat, orbit.space().phat);
        }
        if (lay.i_len > 0) {
            const BigInt first = base + lay.hat_len;
            const BigInt last = base + lay.hat_len + lay.i_len - 1;
            check(first, OrbitLocation::Tag::I, orbit.space().orbit_point(l, first));
            check(last, OrbitLocation::Tag::I, orbit.space().orbit_point(l, last));
        }
    }
    return rep;
}

}  // namespace emg
