#pragma once

// Serialization: codes, measures, and curves to JSON; curves, plans, and
// orbits to CSV. CSV uses '.' decimals and LF line endings; JSON objects are
// key-sorted, so identical inputs produce byte-identical files.

#include "emg/coded_orbit.hpp"
#include "emg/emergence.hpp"
#include "emg/measure.hpp"
#include "emg/scheduling.hpp"
#include "emg/transport.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace emg::io {

using nlohmann::json;

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string rat_str(const BigRat& q) { return q.str(); }

inline BigRat parse_rat(const std::string& s) {
    try {
        return BigRat(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse rational '" + s + "'");
    }
}

inline BigInt parse_int(const std::string& s) {
    try {
        return BigInt(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse integer '" + s + "'");
    }
}

// ---------------------------------------------------------------------------
// Measures.

inline json measure_to_json(const DiscreteMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms()) {
        atoms.push_back({{"key", mu.ground()->key_string(a.point)},
                         {"weight", rat_str(a.weight)},
                         {"weight_real", to_double(a.weight)}});
    }
    return json{{"atoms", atoms}, {"meta", {{"support", mu.support_size()}}}};
}

// ---------------------------------------------------------------------------
// Simplex coordinates.

inline json coord_to_json(const SimplexCoord& t) {
    json arr = json::array();
    for (const auto& v : t.t) arr.push_back(rat_str(v));
    return arr;
}

inline SimplexCoord coord_from_json(const json& arr) {
    std::vector<BigRat> t;
    for (const auto& v : arr) t.push_back(parse_rat(v.get<std::string>()));
    return SimplexCoord(std::move(t));
}

// ---------------------------------------------------------------------------
// Codes. Files are self-contained: they carry the anchor family, the epsilon
// schedule, and (for master codes) the base-order parameters.

struct FamilySpec {
    int alphabet = 2;
    std::vector<std::string> anchor_words;
    bool mixed = false;
    BigRat zeta{1, 2};
    std::string phat_word = "1";

    PeriodicFamily build() const {
        shift::Alphabet a(alphabet);
        std::vector<shift::ShiftPoint> anchors;
        for (const auto& w : anchor_words)
            anchors.push_back(shift::periodic_point(shift::Word::parse(a, w)));
        if (!mixed) return PeriodicFamily(std::move(anchors));
        return PeriodicFamily(std::move(anchors),
                              shift::periodic_point(shift::Word::parse(a, phat_word)), zeta);
    }

    json to_json() const {
        return json{{"alphabet", alphabet},
                    {"anchor_words", anchor_words},
                    {"mixed", mixed},
                    {"zeta", rat_str(zeta)},
                    {"phat_word", phat_word}};
    }

    static FamilySpec from_json(const json& j) {
        FamilySpec f;
        f.alphabet = j.at("alphabet").get<int>();
        f.anchor_words = j.at("anchor_words").get<std::vector<std::string>>();
        f.mixed = j.value("mixed", false);
        if (j.contains("zeta")) f.zeta = parse_rat(j.at("zeta").get<std::string>());
        f.phat_word = j.value("phat_word", std::string("1"));
        return f;
    }
};

struct OrderSpec {
    std::string kind = "newhouse";  // newhouse | constant | tabulated
    int z0 = 1;
    BigInt align_modulus{0};  // 0 = plain residues
    BigInt constant{1};
    std::vector<BigInt> table;

    std::shared_ptr<BaseOrder> build() const {
        if (kind == "newhouse") {
            if (align_modulus > 0)
                return std::make_shared<NewhouseOrder>(NewhouseOrder::aligned(z0, align_modulus));
            return std::make_shared<NewhouseOrder>(z0);
        }
        if (kind == "constant") return std::make_shared<ConstantOrder>(constant);
        if (kind == "tabulated") return std::make_shared<TabulatedOrder>(table);
        throw std::invalid_argument("unknown base order kind '" + kind + "'");
    }

    json to_json() const {
        json j{{"kind", kind}, {"z0", z0}, {"align_modulus", align_modulus.str()},
               {"constant", constant.str()}};
        if (!table.empty()) {
            json arr = json::array();
            for (const auto& v : table) arr.push_back(v.str());
            j["table"] = arr;
        }
        return j;
    }

    static OrderSpec from_json(const json& j) {
        OrderSpec o;
        o.kind = j.value("kind", std::string("newhouse"));
        o.z0 = j.value("z0", 1);
        o.align_modulus = parse_int(j.value("align_modulus", std::string("0")));
        o.constant = parse_int(j.value("constant", std::string("1")));
        if (j.contains("table"))
            for (const auto& v : j.at("table")) o.table.push_back(parse_int(v.get<std::string>()));
        return o;
    }
};

inline json eps_to_json(const std::vector<BigRat>& eps) {
    json arr = json::array();
    for (const auto& e : eps) arr.push_back(rat_str(e));
    return arr;
}

inline std::vector<BigRat> eps_from_json(const json& arr) {
    std::vector<BigRat> eps;
    for (const auto& v : arr) eps.push_back(parse_rat(v.get<std::string>()));
    return eps;
}

inline json shift_code_to_json(const ShiftCode& code, const FamilySpec& fam) {
    json blocks = json::array();
    for (const auto& b : code.blocks) {
        json n = json::array();
        for (const auto& v : b.n) n.push_back(v.str());
        blocks.push_back(json{
            {"L", b.L},
            {"t", coord_to_json(b.t)},
            {"n", n},
            {"s", b.s.str()},
            {"checkpoint", b.checkpoint.str()},
            {"conditions",
             {{"growth", {{"lhs", b.cond_lhs}, {"rhs", b.cond_rhs}, {"ok", b.cond_ok}}},
              {"approx", {{"lhs", b.approx_dev}, {"rhs", b.approx_rhs}, {"ok", b.approx_ok}}}}}});
    }
    json periods = json::array();
    for (auto p : code.periods) periods.push_back(p);
    return json{{"kind", "shift"},
                {"family", fam.to_json()},
                {"periods", periods},
                {"eps_tilde", eps_to_json(code.eps_tilde)},
                {"blocks", blocks}};
}

inline json master_code_to_json(const MasterCode& code, const FamilySpec& fam,
                                const OrderSpec& order) {
    json blocks = json::array();
    for (const auto& b : code.blocks) {
        json k = json::array();
        for (int l = -1; l <= b.L; ++l) k.push_back(b.k.at(l).str());
        blocks.push_back(json{
            {"L", b.L},
            {"t", coord_to_json(b.t)},
            {"indices", k},
            {"conditions",
             {{"growth", {{"lhs", b.growth_lhs}, {"rhs", b.growth_rhs}, {"ok", b.growth_ok}}},
              {"approx", {{"lhs", b.approx_dev}, {"rhs", b.approx_rhs}, {"ok", b.approx_ok}}}}}});
    }
    return json{{"kind", "master"},
                {"family", fam.to_json()},
                {"order", order.to_json()},
                {"eps_tilde", eps_to_json(code.eps_tilde)},
                {"blocks", blocks}};
}

inline ShiftCode shift_code_from_json(const json& j) {
    if (j.at("kind") != "shift") throw std::invalid_argument("not a shift code file");
    ShiftCode code;
    code.eps_tilde = eps_from_json(j.at("eps_tilde"));
    for (const auto& p : j.at("periods")) code.periods.push_back(p.get<std::int64_t>());
    for (const auto& jb : j.at("blocks")) {
        ShiftBlock b{jb.at("L").get<int>(), coord_from_json(jb.at("t")), {}};
        for (const auto& v : jb.at("n")) b.n.push_back(parse_int(v.get<std::string>()));
        b.s = parse_int(jb.at("s").get<std::string>());
        b.checkpoint = parse_int(jb.at("checkpoint").get<std::string>());
        code.blocks.push_back(std::move(b));
    }
    // recompute the condition records from the data
    BigInt prev = 0;
    for (auto& b : code.blocks) {
        const BigRat eps = code.eps_tilde.at(static_cast<std::size_t>(b.L));
        const BigInt den = denominator(eps), num = numerator(eps);
        b.cond_ok = prev * b.s * den + 2 * BigInt(b.L + 1) * b.checkpoint * den <
                    num * b.checkpoint * b.s;
        b.cond_lhs = ratio_double(prev, b.checkpoint) + 2.0 * (b.L + 1) * ratio_double(1, b.s);
        b.cond_rhs = to_double(eps);
        std::vector<BigInt> mb;
        for (int l = 0; l <= b.L; ++l)
            mb.push_back(b.n[static_cast<std::size_t>(l)] * code.periods[static_cast<std::size_t>(l)]);
        const auto dev = tbar_deviation(mb, b.t);
        b.approx_ok = dev.within(eps / (b.L + 1));
        b.approx_dev = dev.value();
        b.approx_rhs = to_double(eps) / (b.L + 1);
        prev = b.checkpoint;
    }
    return code;
}

inline MasterCode master_code_from_json(const json& j, const BaseOrder& order) {
    if (j.at("kind") != "master") throw std::invalid_argument("not a master code file");
    MasterCode code;
    code.eps_tilde = eps_from_json(j.at("eps_tilde"));
    code.order_desc = order.describe();
    const BigInt* prev = nullptr;
    for (const auto& jb : j.at("blocks")) {
        std::vector<BigInt> ks;
        for (const auto& v : jb.at("indices")) ks.push_back(parse_int(v.get<std::string>()));
        MasterBlock b{jb.at("L").get<int>(), coord_from_json(jb.at("t")),
                      IncreasingIndices(std::move(ks))};
        const BigRat eps = code.eps_tilde.at(static_cast<std::size_t>(b.L));
        if (prev) {
            const BigInt NP = order.N(*prev);
            const BigInt NL = order.N(b.k.at(b.L));
            b.growth_ok = 2 * NP * denominator(eps) < numerator(eps) * NL;
            b.growth_lhs = 2.0 * ratio_double(NP, NL);
            b.growth_rhs = to_double(eps);
        }
        const auto dev = tbar_deviation(Mbar(b.k, order), b.t);
        b.approx_ok = dev.within(eps / (b.L + 1));
        b.approx_dev = dev.value();
        b.approx_rhs = to_double(eps) / (b.L + 1);
        code.blocks.push_back(std::move(b));
        prev = &code.blocks.back().k.at(code.blocks.back().L);
    }
    return code;
}

// ---------------------------------------------------------------------------
// CSV writers.

inline std::string curve_to_csv(const EmergenceCurve& curve) {
    std::string out = "eps,pack,cover,theory\n";
    for (const auto& r : curve.rows) {
        out += fmt_double(r.eps);
        out += ',';
        out += std::to_string(r.packing_lower);
        out += ',';
        out += std::to_string(r.covering_upper);
        out += ',';
        out += fmt_double(r.theory_lower);
        out += '\n';
    }
    return out;
}

inline std::string plan_to_csv(const TransportResult& r) {
    std::string out = "i,j,mass,cost\n";
    for (const auto& e : r.plan) {
        out += std::to_string(e.i);
        out += ',';
        out += std::to_string(e.j);
        out += ',';
        out += fmt_double(e.mass);
        out += ',';
        out += fmt_double(e.cost);
        out += '\n';
    }
    return out;
}

// Synthetic orbit rows (n, anchor, phase, tag) up to a horizon.
inline std::string orbit_to_csv(const SyntheticOrbit& orbit, std::uint64_t limit) {
    std::string out = "n,anchor,phase,tag\n";
    for (std::uint64_t n = 0; n < limit; ++n) {
        const auto loc = orbit.location(BigInt(n));
        out += std::to_string(n);
        out += ',';
        out += orbit.space().ground->key_string(loc.point);
        out += ',';
        const int l = orbit.ell(loc.window_index);
        const auto per = orbit.space().periods.at(static_cast<std::size_t>(l));
        out += std::to_string(static_cast<long long>(n % static_cast<std::uint64_t>(per)));
        out += ',';
        switch (loc.tag) {
            case OrbitLocation::Tag::Hat: out += "hat"; break;
            case OrbitLocation::Tag::I: out += "I"; break;
            case OrbitLocation::Tag::Gap: out += "gap"; break;
        }
        out += '\n';
    }
    return out;
}

// Coded shift point prefix (j, symbol).
inline std::string point_prefix_to_csv(const CodedPoint& x, std::uint64_t limit) {
    std::string out = "j,symbol\n";
    const BigInt total = x.total_length();
    for (std::uint64_t j = 0; j < limit && BigInt(j) < total; ++j) {
        out += std::to_string(j);
        out += ',';
        out += std::to_string(static_cast<int>(x.at(BigInt(j))));
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline json load_json(const std::string& path) { return json::parse(read_file(path)); }

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace emg::io
