#pragma once

// End-to-end experiment pipeline: config -> code -> realized orbit ->
// checkpoint samples -> emergence curve + verification summary. Used by both
// the CLI and the acceptance suite; all outputs are deterministic functions
// of the config.

#include "emg/coded_orbit.hpp"
#include "emg/emergence.hpp"
#include "emg/io.hpp"
#include "emg/measure.hpp"
#include "emg/scheduling.hpp"
#include "emg/transport.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace emg::pipeline {

using nlohmann::json;

struct ExperimentConfig {
    std::string kind = "shift";  // shift | master
    io::FamilySpec family;
    io::OrderSpec order;           // master only
    BigRat share_zeta{1, 2};       // master interval share (defaults to the family zeta)
    std::vector<BigRat> eps_tilde;  // index L (entry 0 unused)
    std::vector<double> net_radius;  // per level; empty = eps_tilde values
    int L_max = 1;
    int grid_lo = 0, grid_hi = 12;  // dyadic eps grid 2^-lo .. 2^-hi
    int depth = 0;                  // 0 = default for the alphabet
    std::uint64_t seed = 1;
    int jobs = 1;
};

inline void parse_eps_grid(const std::string& s, int& lo, int& hi) {
    if (s.rfind("dyadic:", 0) != 0)
        throw std::invalid_argument("eps grid must be 'dyadic:a,b'");
    const auto body = s.substr(7);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("eps grid must be 'dyadic:a,b'");
    lo = std::stoi(body.substr(0, comma));
    hi = std::stoi(body.substr(comma + 1));
    if (hi < lo) throw std::invalid_argument("eps grid needs a <= b");
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.kind = j.value("kind", std::string("shift"));
    if (c.kind != "shift" && c.kind != "master")
        throw std::invalid_argument("kind must be 'shift' or 'master'");
    c.family = io::FamilySpec::from_json(j.at("family"));
    if (j.contains("order")) c.order = io::OrderSpec::from_json(j.at("order"));
    if (j.contains("share_zeta")) c.share_zeta = io::parse_rat(j.at("share_zeta").get<std::string>());
    else if (c.family.mixed) c.share_zeta = c.family.zeta;
    c.L_max = j.value("L_max", 1);
    if (c.L_max < 1) throw std::invalid_argument("L_max must be >= 1");
    if (j.contains("eps_tilde")) {
        c.eps_tilde = io::eps_from_json(j.at("eps_tilde"));
    } else {
        c.eps_tilde = default_eps_tilde(c.L_max);
    }
    check_eps_schedule(c.eps_tilde, c.L_max);
    if (j.contains("net_radius"))
        c.net_radius = j.at("net_radius").get<std::vector<double>>();
    if (j.contains("eps_grid")) parse_eps_grid(j.at("eps_grid").get<std::string>(), c.grid_lo, c.grid_hi);
    c.depth = j.value("depth", 0);
    c.seed = j.value("seed", std::uint64_t{1});
    c.jobs = j.value("jobs", 1);
    if (static_cast<int>(c.family.anchor_words.size()) < c.L_max + 1)
        throw std::invalid_argument("family needs an anchor word for each level 0..L_max");
    return c;
}

inline std::vector<double> net_radii(const ExperimentConfig& c) {
    std::vector<double> r(static_cast<std::size_t>(c.L_max) + 1, 0.0);
    for (int L = 1; L <= c.L_max; ++L) {
        if (!c.net_radius.empty() && L < static_cast<int>(c.net_radius.size()) &&
            c.net_radius[static_cast<std::size_t>(L)] > 0)
            r[static_cast<std::size_t>(L)] = c.net_radius[static_cast<std::size_t>(L)];
        else
            r[static_cast<std::size_t>(L)] = to_double(c.eps_tilde[static_cast<std::size_t>(L)]);
    }
    return r;
}

inline std::vector<std::vector<SimplexCoord>> build_nets(const ExperimentConfig& c) {
    std::vector<std::vector<SimplexCoord>> nets(static_cast<std::size_t>(c.L_max) + 1);
    const auto radii = net_radii(c);
    for (int L = 1; L <= c.L_max; ++L)
        nets[static_cast<std::size_t>(L)] = simplex_grid(L, radii[static_cast<std::size_t>(L)]);
    return nets;
}

// ---------------------------------------------------------------------------
// Code construction.

struct BuiltCode {
    json code_json;
    bool all_conditions_ok = true;
    std::optional<ShiftCode> shift_code;
    std::optional<MasterCode> master_code;
    std::shared_ptr<BaseOrder> order;  // master only
};

inline BuiltCode build_code(const ExperimentConfig& c) {
    BuiltCode out;
    const auto fam = c.family.build();
    const auto nets = build_nets(c);
    if (c.kind == "shift") {
        std::vector<std::int64_t> periods;
        for (const auto& p : fam.anchors) periods.push_back(static_cast<std::int64_t>(p.period()));
        auto code = build_shift_code(c.eps_tilde, nets, periods, c.L_max);
        out.all_conditions_ok = verify_shift_code(code);
        out.code_json = io::shift_code_to_json(code, c.family);
        out.shift_code = std::move(code);
    } else {
        if (!fam.mixed()) throw std::invalid_argument("master pipeline needs a mixed family");
        out.order = c.order.build();
        auto code = build_master_code(*out.order, c.eps_tilde, nets, c.L_max);
        out.all_conditions_ok = verify_master_code(code, *out.order);
        out.code_json = io::master_code_to_json(code, c.family, c.order);
        out.master_code = std::move(code);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling: checkpoint measures plus per-checkpoint bound checks.

struct CheckpointRecord {
    int L = 0;
    int index_in_level = 0;
    std::string time;
    double measured = 0.0;  // W1 to the block target
    double bound = 0.0;     // stated checkpoint bound
    double slack = 0.0;     // truncation + pruning slack
    bool ok = false;
};

struct SampledRun {
    std::vector<DiscreteMeasure> samples;
    std::vector<CheckpointRecord> records;
    // net measures per level (targets for the coverage check)
    std::vector<std::vector<DiscreteMeasure>> net_measures;
    std::shared_ptr<ShiftGround> shift_ground;  // set for shift runs
};

inline SampledRun sample_shift_run(const ExperimentConfig& c, const ShiftCode& code) {
    const auto fam = c.family.build();
    shift::Alphabet a(c.family.alphabet);
    const int depth = c.depth > 0 ? c.depth : shift::default_depth(a);
    auto ground = ShiftGround::create(a, shift::TruncationDepth(depth));
    auto point = realize_shift_point(code, fam, BigInt(depth) + 8);
    auto snaps = shift_checkpoint_measures(code, point, ground);

    SampledRun run;
    run.shift_ground = ground;
    std::vector<int> level_counter(static_cast<std::size_t>(c.L_max) + 1, 0);
    BigInt prev = 0;
    for (std::size_t b = 0; b < code.blocks.size(); ++b) {
        const auto& blk = code.blocks[b];
        CheckpointRecord rec;
        rec.L = blk.L;
        rec.index_in_level = level_counter[static_cast<std::size_t>(blk.L)]++;
        rec.time = blk.checkpoint.str();
        std::vector<BigInt> mb;
        for (int l = 0; l <= blk.L; ++l)
            mb.push_back(blk.n[static_cast<std::size_t>(l)] * code.periods[static_cast<std::size_t>(l)]);
        auto target = simplex_measure(tbar(mb), fam, ground);
        auto res = w1_exact(snaps[b].measure, target);
        rec.measured = res.value;
        rec.bound = 2.0 * ratio_double(prev, blk.checkpoint) +
                    2.0 * (blk.L + 1) * ratio_double(1, blk.s);
        rec.slack = res.slack() + snaps[b].prune_slack + 1e-9;
        rec.ok = rec.measured <= rec.bound + rec.slack;
        run.records.push_back(rec);
        run.samples.push_back(snaps[b].measure);
        prev = blk.checkpoint;
    }
    run.net_measures.resize(static_cast<std::size_t>(c.L_max) + 1);
    const auto nets = build_nets(c);
    for (int L = 1; L <= c.L_max; ++L)
        for (const auto& t : nets[static_cast<std::size_t>(L)])
            run.net_measures[static_cast<std::size_t>(L)].push_back(simplex_measure(t, fam, ground));
    return run;
}

inline SampledRun sample_master_run(const ExperimentConfig& c, const MasterCode& code,
                                    const std::shared_ptr<BaseOrder>& order,
                                    const PeriodicFamily& fam, const SyntheticSpace& space) {
    auto spec = CodeRealizationSpec::exact_share(c.share_zeta);
    auto orbit = realize_synthetic_orbit(space, spec, code, order);
    auto cps = master_checkpoint_measures(code, orbit);

    SampledRun run;
    std::vector<int> level_counter(static_cast<std::size_t>(c.L_max) + 1, 0);
    for (const auto& cp : cps) {
        CheckpointRecord rec;
        rec.L = cp.block->L;
        rec.index_in_level = level_counter[static_cast<std::size_t>(cp.block->L)]++;
        rec.time = order->N(cp.block->k.at(cp.block->L)).str();
        auto res = w1_exact(cp.measure, cp.target);
        rec.measured = res.value;
        rec.bound = cp.bound;
        rec.slack = res.slack() + 1e-9;
        rec.ok = rec.measured <= rec.bound + rec.slack;
        run.records.push_back(rec);
        run.samples.push_back(cp.measure);
    }
    run.net_measures.resize(static_cast<std::size_t>(c.L_max) + 1);
    const auto nets = build_nets(c);
    for (int L = 1; L <= c.L_max; ++L)
        for (const auto& t : nets[static_cast<std::size_t>(L)])
            run.net_measures[static_cast<std::size_t>(L)].push_back(
                synthetic_simplex_measure(t, space, *fam.zeta));
    return run;
}

// Checkpoint samples with provenance, the spec'd accumulation view of a run.
inline AccumulationSample accumulation_samples(const SampledRun& run) {
    AccumulationSample acc;
    acc.measures = run.samples;
    for (const auto& rec : run.records) {
        SampleInfo info;
        info.block_L = rec.L;
        info.block_index = rec.index_in_level;
        info.time = rec.time;
        info.prune_slack = rec.slack;
        acc.info.push_back(std::move(info));
    }
    return acc;
}

// Net coverage with early exit per net point.
inline NetCoverageReport net_coverage(const SampledRun& run, const ExperimentConfig& c) {
    NetCoverageReport rep;
    const auto radii = net_radii(c);
    for (int L = 1; L <= c.L_max; ++L) {
        const double tol =
            2.0 * to_double(c.eps_tilde[static_cast<std::size_t>(L)]) + radii[static_cast<std::size_t>(L)];
        const auto& nets = run.net_measures[static_cast<std::size_t>(L)];
        for (std::size_t i = 0; i < nets.size(); ++i) {
            NetCoverageRow row;
            row.L = L;
            row.net_index = static_cast<int>(i);
            row.tol = tol;
            row.nearest = std::numeric_limits<double>::infinity();
            for (const auto& s : run.samples) {
                row.nearest = std::min(row.nearest, w1(nets[i], s));
                if (row.nearest <= tol) break;
            }
            row.ok = row.nearest <= tol;
            rep.all_ok = rep.all_ok && row.ok;
            rep.rows.push_back(row);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Full pipeline.

struct PipelineResult {
    json code_json;
    std::string curve_csv;
    json summary;
    bool ok = true;
};

inline PipelineResult run_pipeline(const ExperimentConfig& c) {
    PipelineResult out;
    auto built = build_code(c);
    out.code_json = built.code_json;
    out.ok = built.all_conditions_ok;

    SampledRun run;
    if (c.kind == "shift") {
        run = sample_shift_run(c, *built.shift_code);
    } else {
        const auto fam = c.family.build();
        auto space = build_synthetic_space(fam);
        run = sample_master_run(c, *built.master_code, built.order, fam, space);
    }

    auto analysis = analyze_samples(run.samples, c.jobs);
    auto curve = emergence_curve_from(analysis.gp, dyadic_grid(c.grid_lo, c.grid_hi));
    out.curve_csv = io::curve_to_csv(curve);
    const auto fit = best_exponent(curve);

    std::size_t bound_failures = 0;
    double max_excess = 0.0;
    for (const auto& r : run.records) {
        if (!r.ok) {
            ++bound_failures;
            max_excess = std::max(max_excess, r.measured - r.bound - r.slack);
        }
    }
    auto coverage = net_coverage(run, c);
    std::size_t cover_failures = 0;
    for (const auto& row : coverage.rows)
        if (!row.ok) ++cover_failures;

    const auto extremes = analysis.most_distant();
    out.summary = json{
        {"kind", c.kind},
        {"L_max", c.L_max},
        {"blocks", run.records.size()},
        {"samples", run.samples.size()},
        {"unique_samples", analysis.matrix.size()},
        {"conditions_ok", built.all_conditions_ok},
        {"checkpoint_bounds", {{"checked", run.records.size()}, {"violations", bound_failures}, {"max_excess", max_excess}}},
        {"net_coverage", {{"points", coverage.rows.size()}, {"violations", cover_failures}}},
        {"exponent",
         {{"best", fit.exponent},
          {"window", {fit.window_lo, fit.window_hi}},
          {"full_window", fit.full_window_exponent}}},
        {"max_pair_distance", extremes.d},
    };
    out.ok = out.ok && bound_failures == 0 && cover_failures == 0;
    return out;
}

}  // namespace emg::pipeline
