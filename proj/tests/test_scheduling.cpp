#include <catch2/catch_amalgamated.hpp>

#include "emg/scheduling.hpp"

#include <random>

using namespace emg;

TEST_CASE("moderate check on canonical sequences", "[scheduling]") {
    // m_k = 1: ratio 1/k, passes
    auto rep = moderate_check(ConstantOrder(1), 400);
    CHECK(rep.max_ratio <= 1.0 / 200.0 + 1e-12);
    CHECK_FALSE(rep.flagged_non_moderate);
    // m_k = 2^k: N_k = 2^{k+1} - 2, ratio -> 1/2, flagged
    auto geo = moderate_check(GeometricOrder(), 64);
    CHECK(geo.max_ratio == Catch::Approx(0.5).margin(1e-6));
    CHECK(geo.flagged_non_moderate);
    // quadratic-window order: ratio O(1/k), passes
    auto nh = moderate_check(NewhouseOrder(1), 400);
    CHECK(nh.max_ratio < 0.02);
    CHECK_FALSE(nh.flagged_non_moderate);
}

TEST_CASE("window-growth formula values", "[scheduling]") {
    // z0 = 1, jhat_k = k, nhat_{k+1} = k, k = 1: 1*2 + 3 + 1 + 1 + 1 = 8
    auto jhat = [](const BigInt& k) { return k; };
    auto nhat_shift = [](const BigInt& x) { return x - 1; };  // nhat(k+1) = k
    CHECK(newhouse_mk(1, jhat, nhat_shift, 1) == 8);
    // companion constant zeta = 1/(z0+1)
    CHECK(newhouse_zeta(1) == BigRat(1, 2));
    CHECK(newhouse_zeta(3) == BigRat(1, 4));
    // m_k / k^2 -> z0 + 1 when jhat, nhat are linear: leading term extraction
    NewhouseOrder ord(3);
    const BigInt k = 100000;
    const double ratio = to_double(make_rat(ord.m(k), k * k));
    CHECK(ratio == Catch::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("newhouse order closed-form N matches direct summation", "[scheduling]") {
    NewhouseOrder plain(1);
    auto aligned = NewhouseOrder::aligned(1, 120);
    for (const auto* ord : {&plain, &aligned}) {
        BigInt acc = 0;
        for (int k = 1; k <= 500; ++k) {
            acc += ord->m(k);
            REQUIRE(ord->N(k) == acc);
        }
    }
    // alignment: m_k divisible by 120 so that m_k/2 is a multiple of lcm(2..5)
    for (int k = 1; k <= 200; ++k) CHECK(aligned.m(k) % 120 == 0);
    // jhat stays O(k): jhat(k) - k is a bounded residue
    for (int k = 1; k <= 200; ++k) CHECK(aligned.jhat(k) - k < 120);
}

TEST_CASE("solve_N_at_least is the first index", "[scheduling]") {
    NewhouseOrder ord(1);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint64_t> d(1, 2'000'000);
    for (int rep = 0; rep < 50; ++rep) {
        const BigInt target = d(rng);
        const BigInt k = ord.solve_N_at_least(target);
        CHECK(ord.N(k) >= target);
        if (k > 1) CHECK(ord.N(k - 1) < target);
    }
    // astronomically large targets still resolve
    const BigInt huge = big_pow(10, 120);
    const BigInt k = ord.solve_N_at_least(huge);
    CHECK(ord.N(k) >= huge);
    CHECK(ord.N(k - 1) < huge);
}

TEST_CASE("find_k_for_T meets the componentwise targets", "[scheduling]") {
    // m_k = 1, L = 1, T = (1/2): ratios are integer fractions
    ConstantOrder ones(1);
    auto idx = find_k_for_T(ones, CubeCoord({BigRat(1, 2)}), BigRat(1, 100), 4);
    REQUIRE(idx.L() == 1);
    auto M = Mbar(idx, ones);
    const BigRat ratio = make_rat(M[1], M[0] + M[1]);
    CHECK(std::abs(to_double(ratio) - 0.5) <= 0.01);
    CHECK(idx.at(0) > 4);

    // T = 0 target: minimal extensions, each ratio <= eps
    auto idx0 = find_k_for_T(ones, CubeCoord({BigRat(0), BigRat(0)}), BigRat(1, 50), 0);
    auto Tm = Tbar(Mbar(idx0, ones));
    for (const auto& v : Tm.T) CHECK(to_double(v) <= 0.02 + 1e-12);
}

TEST_CASE("find_k_for_T on random targets over the quadratic order", "[scheduling]") {
    NewhouseOrder ord(1);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const int L = 1 + static_cast<int>(rng() % 3);
        std::vector<BigRat> T;
        for (int l = 0; l < L; ++l) T.push_back(rat_from_double(u(rng)));
        const BigRat eps(1, 20);
        auto idx = find_k_for_T(ord, CubeCoord(T), eps, 2);
        // postcondition: |Tbar(Mbar(k)) - T| <= eps, verified independently
        auto Tm = Tbar(Mbar(idx, ord));
        CHECK(sq_norm(Tm.T, T) <= eps * eps);
    }
}

TEST_CASE("find_k_for_t via eta steering", "[scheduling]") {
    NewhouseOrder ord(1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // one-hot at 0 is the all-zero cube target
    auto idx = find_k_for_t(ord, SimplexCoord::one_hot(2, 0), BigRat(1, 10), 2);
    auto tm = tbar(Mbar(idx, ord));
    CHECK(to_double(tm.t[0]) >= 0.9);
    // random targets in A_2 with eps = 0.05
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<BigRat> t;
        BigRat sum = 0;
        for (int l = 0; l <= 2; ++l) {
            BigRat v = rat_from_double(u(rng) + 1e-6);
            t.push_back(v);
            sum += v;
        }
        for (auto& v : t) v /= sum;
        SimplexCoord tc(t);
        auto k = find_k_for_t(ord, tc, BigRat(1, 20), 2);
        CHECK(sq_norm(tbar(Mbar(k, ord)).t, tc.t) <= BigRat(1, 400));
    }
}

TEST_CASE("find_k errors on horizon exhaustion", "[scheduling]") {
    // the geometric order is not moderate; the step-size condition never holds
    GeometricOrder geo;
    IndexSearchOptions opts;
    opts.max_attempts = 3;
    opts.scan_limit = 64;
    CHECK_THROWS_AS(find_k_for_T(geo, CubeCoord({BigRat(1, 2)}), BigRat(1, 10), 1, opts),
                    std::runtime_error);
}

TEST_CASE("master code construction and verification", "[scheduling]") {
    NewhouseOrder ord(1);
    const int L_max = 2;
    auto eps = default_eps_tilde(L_max);
    std::vector<std::vector<SimplexCoord>> nets(static_cast<std::size_t>(L_max) + 1);
    for (int L = 1; L <= L_max; ++L)
        nets[static_cast<std::size_t>(L)] = simplex_grid(L, to_double(eps[static_cast<std::size_t>(L)]));
    auto code = build_master_code(ord, eps, nets, L_max);
    // every block satisfies its two conditions; chaining holds
    CHECK(verify_master_code(code, ord));
    // block boundary: k(-1) equals the previous block's last index
    for (std::size_t b = 1; b < code.blocks.size(); ++b)
        CHECK(code.blocks[b].k.at(-1) == code.blocks[b - 1].k.at(code.blocks[b - 1].L));
    // growth: N at successive block ends increases by the prescribed factor
    for (std::size_t b = 1; b < code.blocks.size(); ++b) {
        const auto& blk = code.blocks[b];
        const BigRat eps_L = eps[static_cast<std::size_t>(blk.L)];
        CHECK(BigRat(ord.N(blk.k.at(blk.L))) >
              (2 / eps_L) * BigRat(ord.N(code.blocks[b - 1].k.at(code.blocks[b - 1].L))));
    }
    // ell_k pattern: within each block the levels appear in increasing runs
    const auto& blk = code.blocks[1];
    for (int l = 0; l <= blk.L; ++l) {
        CHECK(code.ell_at(blk.k.at(l - 1) + 1) == l);
        CHECK(code.ell_at(blk.k.at(l)) == l);
    }
    // a single-block construction with the midpoint net
    std::vector<std::vector<SimplexCoord>> net1(2);
    net1[1] = {SimplexCoord({BigRat(1, 2), BigRat(1, 2)})};
    auto one = build_master_code(ord, {BigRat(0), BigRat(1)}, net1, 1);
    CHECK(one.blocks.size() == 1);
    CHECK(verify_master_code(one, ord));
}

TEST_CASE("kappa of level and induced periods", "[scheduling]") {
    NewhouseOrder ord(1);
    std::vector<std::vector<SimplexCoord>> nets(3);
    nets[1] = simplex_grid(1, 0.5);
    nets[2] = simplex_grid(2, 0.25);
    auto code = build_master_code(ord, default_eps_tilde(2), nets, 2);
    // kappa(a) = min{k : ell_k = a}; per(p^(l_k)) = kappa(a) + 1 <= k + 1
    CHECK(*kappa_of_level(code, 0) == 1);
    const BigInt k1 = *kappa_of_level(code, 1);
    CHECK(code.ell_at(k1) == 1);
    CHECK(code.ell_at(k1 - 1) == 0);
    CHECK_FALSE(kappa_of_level(code, 5).has_value());
}

TEST_CASE("select_n_for_t exact and approximate targets", "[scheduling]") {
    // unit periods, rational target with common denominator: exact representation
    auto n = select_n_for_t(SimplexCoord({BigRat(1, 3), BigRat(2, 3)}), {1, 2}, BigRat(1, 1000), 1);
    const BigRat r0 = make_rat(n[0], n[0] + 2 * n[1]);
    CHECK(std::abs(to_double(r0) - 1.0 / 3.0) <= 1e-3);
    // scaling by an integer keeps the ratios invariant
    std::vector<BigInt> scaled{n[0] * 7, n[1] * 7};
    const BigRat r1 = make_rat(scaled[0], scaled[0] + 2 * scaled[1]);
    CHECK(r0 == r1);
    // c_tilde respected
    auto n2 = select_n_for_t(SimplexCoord({BigRat(1, 2), BigRat(1, 2)}), {1, 1}, BigRat(1, 100),
                             50);
    CHECK(n2[0] >= 50);
    CHECK(n2[1] >= 50);
}

TEST_CASE("shift code construction and verification", "[scheduling]") {
    const int L_max = 2;
    auto eps = default_eps_tilde(L_max);
    std::vector<std::vector<SimplexCoord>> nets(static_cast<std::size_t>(L_max) + 1);
    for (int L = 1; L <= L_max; ++L)
        nets[static_cast<std::size_t>(L)] = simplex_grid(L, to_double(eps[static_cast<std::size_t>(L)]));
    std::vector<std::int64_t> periods{1, 2, 3};
    auto code = build_shift_code(eps, nets, periods, L_max);
    CHECK(verify_shift_code(code));
    // s recomputed from n matches the stored value; checkpoints strictly increase
    BigInt prev = 0;
    for (const auto& blk : code.blocks) {
        BigInt s = 0;
        for (int l = 0; l <= blk.L; ++l)
            s += blk.n[static_cast<std::size_t>(l)] * periods[static_cast<std::size_t>(l)];
        CHECK(s == blk.s);
        CHECK(blk.checkpoint == prev + s);
        CHECK(blk.checkpoint > prev);
        prev = blk.checkpoint;
    }
    // the defining growth condition in its original form
    prev = 0;
    for (const auto& blk : code.blocks) {
        const BigRat lhs = make_rat(prev, prev + blk.s) + 2 * BigRat(blk.L + 1) / BigRat(blk.s);
        CHECK(lhs < code.eps_tilde[static_cast<std::size_t>(blk.L)]);
        prev = blk.checkpoint;
    }
}

TEST_CASE("verification rejects corrupted codes", "[scheduling]") {
    auto eps = default_eps_tilde(1);
    std::vector<std::vector<SimplexCoord>> nets(2);
    nets[1] = simplex_grid(1, 0.5);
    auto code = build_shift_code(eps, nets, {1, 2}, 1);
    code.blocks[0].n[0] += 1;  // break s bookkeeping
    std::vector<std::string> failures;
    CHECK_FALSE(verify_shift_code(code, &failures));
    CHECK_FALSE(failures.empty());

    NewhouseOrder ord(1);
    auto mcode = build_master_code(ord, eps, nets, 1);
    mcode.blocks[0].t = SimplexCoord({BigRat(1), BigRat(0)});  // wrong target
    CHECK_FALSE(verify_master_code(mcode, ord));
}

TEST_CASE("eps schedule validation", "[scheduling]") {
    std::vector<std::vector<SimplexCoord>> nets(2);
    nets[1] = simplex_grid(1, 0.9);
    CHECK_THROWS(build_shift_code({BigRat(0), BigRat(2)}, nets, {1, 2}, 1));   // eps >= 2
    CHECK_THROWS(build_shift_code({BigRat(0), BigRat(0)}, nets, {1, 2}, 1));   // eps <= 0
}
