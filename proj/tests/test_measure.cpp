#include <catch2/catch_amalgamated.hpp>

#include "emg/measure.hpp"

#include <random>

using namespace emg;
using namespace emg::shift;

namespace {

SimplexCoord random_simplex(int L, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<BigRat> t;
    BigRat sum = 0;
    for (int l = 0; l <= L; ++l) {
        BigRat v = rat_from_double(u(rng) + 1e-9);
        t.push_back(v);
        sum += v;
    }
    for (auto& v : t) v /= sum;
    return SimplexCoord(std::move(t));
}

}  // namespace

TEST_CASE("empirical measure basics", "[measure]") {
    Alphabet a(2);
    auto ground = ShiftGround::create(a);
    auto fix = periodic_point(Word(a, {1}));
    // fixed point: delta at 1^inf for any n
    for (std::uint64_t n : {1ull, 5ull, 40ull}) {
        auto mu = empirical_measure(fix, n, ground);
        REQUIRE(mu.support_size() == 1);
        CHECK(mu.atoms()[0].weight == BigRat(1));
    }
    auto p12 = periodic_point(Word(a, {1, 2}));
    auto mu2 = empirical_measure(p12, 2, ground);
    REQUIRE(mu2.support_size() == 2);
    CHECK(mu2.atoms()[0].weight == BigRat(1, 2));
    // n = 3: (2/3, 1/3) by direct enumeration of f^0, f^1, f^2
    auto mu3 = empirical_measure(p12, 3, ground);
    REQUIRE(mu3.support_size() == 2);
    CHECK(mu3.weight_at(ground->add_point(p12)) == BigRat(2, 3));
    CHECK(mu3.weight_at(ground->add_point(p12.shifted(1))) == BigRat(1, 3));
    CHECK_THROWS(empirical_measure(fix, 0, ground));
}

TEST_CASE("partial empirical windows", "[measure]") {
    Alphabet a(2);
    auto ground = ShiftGround::create(a);
    auto p12 = periodic_point(Word(a, {1, 2}));
    // n = 0 equals the plain empirical measure
    CHECK(partial_empirical(p12, 0, 7, ground) == empirical_measure(p12, 7, ground));
    // window [1,2): single atom at f(x)
    auto w = partial_empirical(p12, 1, 2, ground);
    REQUIRE(w.support_size() == 1);
    CHECK(w.weight_at(ground->add_point(p12.shifted(1))) == BigRat(1));
    // window [1,4): f^1, f^2, f^3 -> (2/3) at 21..., (1/3) at 12...
    auto w2 = partial_empirical(p12, 1, 4, ground);
    CHECK(w2.weight_at(ground->add_point(p12.shifted(1))) == BigRat(2, 3));
    CHECK(w2.weight_at(ground->add_point(p12))== BigRat(1, 3));
    CHECK_THROWS(partial_empirical(p12, 4, 4, ground));
}

TEST_CASE("periodic measure is uniform on the orbit", "[measure]") {
    Alphabet a(2);
    auto ground = ShiftGround::create(a);
    auto fix = periodic_point(Word(a, {1}));
    CHECK(periodic_measure(fix, ground).support_size() == 1);
    auto p122 = periodic_point(Word(a, {1, 2, 2}));
    auto mu = periodic_measure(p122, ground);
    REQUIRE(mu.support_size() == 3);
    for (const auto& atom : mu.atoms()) CHECK(atom.weight == BigRat(1, 3));
    // n = multiple of the period: empirical equals periodic exactly
    CHECK(empirical_measure(p122, 9, ground) == mu);
    CHECK(empirical_measure(p122, 300, ground) == mu);
}

TEST_CASE("simplex measure mixtures", "[measure]") {
    auto fam = PeriodicFamily::tower(3);  // anchors 1^inf, (12)^inf, (122)^inf
    auto ground = ShiftGround::create(Alphabet(2));
    // one-hot reproduces the periodic measure
    auto e0 = simplex_measure(SimplexCoord::one_hot(1, 0), fam, ground);
    CHECK(e0 == periodic_measure(fam.anchors[0], ground));
    // t = (1/2, 1/2) with periods (1, 2): weights (1/2, 1/4, 1/4)
    auto mu = simplex_measure(SimplexCoord({BigRat(1, 2), BigRat(1, 2)}), fam, ground);
    REQUIRE(mu.support_size() == 3);
    CHECK(mu.weight_at(ground->add_point(fam.anchors[0])) == BigRat(1, 2));
    CHECK(mu.weight_at(ground->add_point(fam.anchors[1])) == BigRat(1, 4));
    CHECK(mu.weight_at(ground->add_point(fam.anchors[1].shifted(1))) == BigRat(1, 4));
}

TEST_CASE("mixed family adds the fixed-point mass", "[measure]") {
    auto fam = PeriodicFamily::tower(2, 1, true);  // anchors (12),(122); phat = 1^inf, zeta = 1/2
    auto ground = ShiftGround::create(Alphabet(2));
    auto mu = simplex_measure(SimplexCoord::one_hot(1, 0), fam, ground);
    // (1/2) delta_phat + (1/2) mu^(0)
    CHECK(mu.weight_at(ground->add_point(*fam.fixed_point)) == BigRat(1, 2));
    CHECK(mu.weight_at(ground->add_point(fam.anchors[0])) == BigRat(1, 4));
    CHECK(mu.weight_at(ground->add_point(fam.anchors[0].shifted(1))) == BigRat(1, 4));
}

TEST_CASE("simplex measure is affine in t", "[measure]") {
    auto fam = PeriodicFamily::tower(3);
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        auto t = random_simplex(2, rng);
        auto s = random_simplex(2, rng);
        std::vector<BigRat> mid;
        for (int l = 0; l <= 2; ++l)
            mid.push_back((t.t[static_cast<std::size_t>(l)] + s.t[static_cast<std::size_t>(l)]) / 2);
        auto lhs = simplex_measure(SimplexCoord(mid), fam, ground);
        auto rhs = DiscreteMeasure::mix({{BigRat(1, 2), simplex_measure(t, fam, ground)},
                                         {BigRat(1, 2), simplex_measure(s, fam, ground)}});
        CHECK(lhs == rhs);
    }
}

TEST_CASE("weights always sum to one", "[measure]") {
    auto fam = PeriodicFamily::tower(4, 1, true);
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        auto mu = simplex_measure(random_simplex(3, rng), fam, ground);
        CHECK(mu.total_weight() == BigRat(1));
    }
}

TEST_CASE("eta map formula and corners", "[measure]") {
    // corners
    auto t0 = eta_map(CubeCoord({BigRat(0), BigRat(0), BigRat(0)}));
    CHECK(t0.t == std::vector<BigRat>{BigRat(1), BigRat(0), BigRat(0), BigRat(0)});
    auto t1 = eta_map(CubeCoord({BigRat(1), BigRat(1), BigRat(1)}));
    CHECK(t1.t == std::vector<BigRat>{BigRat(0), BigRat(0), BigRat(0), BigRat(1)});
    // direct evaluation at L = 2, T = (1/2, 1/2)
    auto t = eta_map(CubeCoord({BigRat(1, 2), BigRat(1, 2)}));
    CHECK(t.t == std::vector<BigRat>{BigRat(1, 4), BigRat(1, 4), BigRat(1, 2)});
}

TEST_CASE("eta Lipschitz bound L(L+1)", "[measure]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int L : {1, 2, 3, 5}) {
        for (int rep = 0; rep < 250; ++rep) {
            std::vector<BigRat> A, B;
            for (int l = 0; l < L; ++l) {
                A.push_back(rat_from_double(u(rng)));
                B.push_back(rat_from_double(u(rng)));
            }
            CubeCoord Ta(A), Tb(B);
            const double lhs = euclid(eta_map(Ta).t, eta_map(Tb).t);
            const double rhs = L * (L + 1) * euclid(Ta.T, Tb.T);
            CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("eta section is a right inverse", "[measure]") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        auto t = random_simplex(3, rng);
        auto back = eta_map(eta_section(t));
        CHECK(sq_norm(back.t, t.t) == BigRat(0));
    }
    // degenerate prefix: t = (0, 1)
    auto t = SimplexCoord::one_hot(1, 1);
    CHECK(sq_norm(eta_map(eta_section(t)).t, t.t) == BigRat(0));
}

TEST_CASE("iota map and its inverse", "[measure]") {
    // L=1, pivot 0, T=(0.3) -> (0.7, 0.3)
    auto t = iota_map(CubeCoord({rat_from_double(0.3)}, true), 0);
    CHECK(to_double(t.t[0]) == Catch::Approx(0.7));
    CHECK(to_double(t.t[1]) == Catch::Approx(0.3));
    // zero vector -> one-hot at the pivot
    for (int pivot = 0; pivot <= 2; ++pivot) {
        auto z = iota_map(CubeCoord({BigRat(0), BigRat(0)}, true), pivot);
        CHECK(z.t[static_cast<std::size_t>(pivot)] == BigRat(1));
    }
    // round trip on random B_L samples
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int L = 3;
        std::vector<BigRat> T;
        BigRat sum = 0;
        for (int l = 0; l < L; ++l) {
            BigRat v = rat_from_double(u(rng) / L);
            T.push_back(v);
            sum += v;
        }
        REQUIRE(sum <= 1);
        for (int pivot = 0; pivot <= L; ++pivot) {
            CubeCoord Tc(T, true);
            auto round = iota_inverse(iota_map(Tc, pivot), pivot);
            CHECK(sq_norm(round.T, T) == BigRat(0));
        }
    }
    // sum > 1 rejected
    CHECK_THROWS(iota_map(CubeCoord({BigRat(3, 4), BigRat(3, 4)}), 0));
}

TEST_CASE("tbar, Tbar, and the eta identity", "[measure]") {
    CHECK(tbar({BigInt(1), BigInt(1)}).t == std::vector<BigRat>{BigRat(1, 2), BigRat(1, 2)});
    auto Tb = Tbar({BigInt(2), BigInt(1), BigInt(1)});
    CHECK(Tb.T == std::vector<BigRat>{BigRat(1, 3), BigRat(1, 4)});
    // eta(Tbar(M)) = tbar(M) on random positive vectors
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> d(1, 1000);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<BigInt> M;
        for (int l = 0; l < 4; ++l) M.push_back(d(rng));
        CHECK(sq_norm(eta_map(Tbar(M)).t, tbar(M).t) == BigRat(0));
    }
    CHECK_THROWS(tbar({BigInt(1), BigInt(0)}));
}

TEST_CASE("simplex grid covers A_L", "[measure]") {
    std::mt19937_64 rng(31);
    for (int L : {1, 2, 3}) {
        for (double r : {1.0, 0.5, 0.25}) {
            auto net = simplex_grid(L, r);
            const int D = simplex_grid_denominator(L, r);
            // every grid point is in A_L (constructor guarantees the sum)
            // Monte-Carlo covering oracle: random points within r of the net
            for (int rep = 0; rep < 400; ++rep) {
                std::vector<BigRat> t;
                BigRat sum = 0;
                std::uniform_real_distribution<double> u(0.0, 1.0);
                for (int l = 0; l <= L; ++l) {
                    BigRat v = rat_from_double(u(rng) + 1e-12);
                    t.push_back(v);
                    sum += v;
                }
                for (auto& v : t) v /= sum;
                SimplexCoord tc(t);
                // certified constructive rounding
                auto near = round_to_grid(tc, D);
                CHECK(euclid(near.t, tc.t) <= r + 1e-12);
            }
            // L=1, r=1: the netted segment is covered by few points
            if (L == 1 && r == 1.0) CHECK(net.size() <= 3);
        }
    }
}

TEST_CASE("grid points are ordered and within the net", "[measure]") {
    auto net = simplex_grid(2, 0.25);
    for (std::size_t i = 1; i < net.size(); ++i) CHECK(net[i - 1].t < net[i].t);
    for (const auto& t : net) {
        BigRat sum = 0;
        for (const auto& v : t.t) sum += v;
        CHECK(sum == BigRat(1));
    }
}

TEST_CASE("measure validation errors", "[measure]") {
    auto ground = ShiftGround::create(Alphabet(2));
    auto fix = periodic_point(Word(Alphabet(2), {1}));
    const PointId p = ground->add_point(fix);
    CHECK_THROWS(DiscreteMeasure(ground, {{p, BigRat(1, 2)}}));     // sums to 1/2
    CHECK_THROWS(DiscreteMeasure(ground, {{p, BigRat(-1)}}));       // negative
    CHECK_THROWS(SimplexCoord({BigRat(1, 2), BigRat(1, 4)}));        // not a simplex point
    CHECK_THROWS(simplex_measure(SimplexCoord::one_hot(5, 0), PeriodicFamily::tower(2), ground));
}
