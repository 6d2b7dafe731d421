#include <catch2/catch_amalgamated.hpp>

#include "emg/shift.hpp"

#include <cmath>
#include <random>

using namespace emg;
using namespace emg::shift;

namespace {

ShiftPoint random_point(Alphabet a, std::mt19937_64& rng, int len = 96) {
    std::uniform_int_distribution<int> sym(1, a.m);
    std::vector<Symbol> prefix;
    for (int i = 0; i < len; ++i) prefix.push_back(static_cast<Symbol>(sym(rng)));
    return ShiftPoint::prefix_padded(a, std::move(prefix));
}

}  // namespace

TEST_CASE("metric identity case", "[shift]") {
    Alphabet a(2);
    auto x = periodic_point(Word(a, {1, 2}));
    for (int T : {1, 5, 20}) {
        auto mv = shift_metric(x, x, TruncationDepth(T));
        CHECK(mv.value == 0.0);
        CHECK(mv.error_bound == Catch::Approx(std::pow(2.0, 1 - T)));
    }
}

TEST_CASE("metric geometric series: 1^inf vs 2^inf", "[shift]") {
    // closed form: sum_j 1/2^j = 2, truncated at T gives 2 - 2^(1-T)
    Alphabet a(2);
    auto x = periodic_point(Word(a, {1}));
    auto y = periodic_point(Word(a, {2}));
    for (int T : {4, 10, 30, 41}) {
        auto mv = shift_metric(x, y, TruncationDepth(T));
        CHECK(mv.value == Catch::Approx(2.0 - std::pow(2.0, 1.0 - T)));
    }
    // T -> infinity limit reaches 2 within the reported error
    auto mv = shift_metric(x, y, TruncationDepth(a));
    CHECK(std::abs(mv.value - 2.0) <= mv.error_bound);
    // exact rational value
    CHECK(exact_periodic_distance(x, y) == BigRat(2));
}

TEST_CASE("metric single differing coordinate", "[shift]") {
    Alphabet a(2);
    auto x = periodic_point(Word(a, {1}));
    // y = 2 1 1 1 ...
    std::vector<Symbol> pre{2};
    for (int i = 0; i < 40; ++i) pre.push_back(1);
    auto y = ShiftPoint::prefix_padded(a, pre);
    auto mv = shift_metric(x, y, TruncationDepth(20));
    CHECK(mv.value == Catch::Approx(1.0));
    CHECK(mv.error_bound == Catch::Approx(std::pow(2.0, -19)));
}

TEST_CASE("metric error bracket against deeper truncation", "[shift]") {
    Alphabet a(3);
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        auto x = random_point(a, rng);
        auto y = random_point(a, rng);
        auto coarse = shift_metric(x, y, TruncationDepth(8));
        auto fine = shift_metric(x, y, TruncationDepth(60));
        CHECK(fine.value >= coarse.value - 1e-15);
        CHECK(fine.value <= coarse.value + coarse.error_bound + 1e-15);
    }
}

TEST_CASE("alphabet mismatch rejected", "[shift]") {
    auto x = periodic_point(Word(Alphabet(2), {1}));
    auto y = periodic_point(Word(Alphabet(3), {1}));
    CHECK_THROWS(shift_metric(x, y, TruncationDepth(10)));
}

TEST_CASE("apply_shift semigroup and rotation", "[shift]") {
    Alphabet a(2);
    auto x = periodic_point(Word(a, {1, 2}));
    auto once = apply_shift(x, 1);
    // rotation of "12" is "21"
    CHECK(once.at(0) == 2);
    CHECK(once.at(1) == 1);
    // n = 0 identity
    auto zero = apply_shift(x, 0);
    for (int j = 0; j < 8; ++j) CHECK(zero.at(j) == x.at(j));
    // shift twice equals shift by two
    std::mt19937_64 rng(3);
    auto g = random_point(a, rng);
    auto twice = apply_shift(apply_shift(g, 1), 1);
    auto two = apply_shift(g, 2);
    for (int j = 0; j < 16; ++j) CHECK(twice.at(j) == two.at(j));
}

TEST_CASE("periodic points and periods", "[shift]") {
    Alphabet a(2);
    auto fix = periodic_point(Word(a, {1}));
    CHECK(fix.period() == 1);
    for (int j = 0; j < 5; ++j) CHECK(fix.at(j) == 1);

    auto p2 = periodic_point(Word(a, {1, 2}));
    CHECK(p2.period() == 2);

    // word "1" + "2"^k has period k+1
    for (int k = 0; k <= 5; ++k) {
        std::vector<Symbol> w{1};
        for (int i = 0; i < k; ++i) w.push_back(2);
        CHECK(periodic_point(Word(a, w)).period() == static_cast<std::size_t>(k + 1));
    }

    // non-primitive word collapses
    CHECK(periodic_point(Word(a, {1, 2, 1, 2})).period() == 2);

    CHECK_THROWS(Word(a, {}));
    CHECK_THROWS(Word(a, {3}));
}

TEST_CASE("exact periodic distance closed forms", "[shift]") {
    Alphabet a(2);
    auto p1 = periodic_point(Word(a, {1}));
    auto p12 = periodic_point(Word(a, {1, 2}));
    auto p122 = periodic_point(Word(a, {1, 2, 2}));
    // d(1^inf, (12)^inf): differences at odd positions: (1/2)/(1-1/4) = 2/3
    CHECK(exact_periodic_distance(p1, p12) == BigRat(2, 3));
    // d((12)^inf, (122)^inf) = 4/9 (period-6 difference pattern)
    CHECK(exact_periodic_distance(p12, p122) == BigRat(4, 9));
    // truncated metric agrees within its error bound
    auto mv = shift_metric(p12, p122, TruncationDepth(a));
    CHECK(std::abs(mv.value - 4.0 / 9.0) <= mv.error_bound);
}

TEST_CASE("metric properties on random points", "[shift]") {
    Alphabet a(2);
    TruncationDepth T(a);
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        auto x = random_point(a, rng);
        auto y = random_point(a, rng);
        auto z = random_point(a, rng);
        const double dxy = shift_metric(x, y, T).value;
        const double dyx = shift_metric(y, x, T).value;
        const double dxz = shift_metric(x, z, T).value;
        const double dzy = shift_metric(z, y, T).value;
        const double err = 2.0 * shift_metric(x, y, T).error_bound;
        CHECK(dxy == Catch::Approx(dyx));                      // symmetry
        CHECK(dxy <= dxz + dzy + err);                         // triangle
        // Lipschitz constant of the shift map: d(fx, fy) <= m d(x,y) + slack
        const double dfxy = shift_metric(apply_shift(x, 1), apply_shift(y, 1), T).value;
        CHECK(dfxy <= a.m * dxy + a.m * shift_metric(x, y, T).error_bound + 1e-12);
    }
}

TEST_CASE("orbit disjointness matches brute rotation check", "[shift]") {
    Alphabet a(2);
    auto p12 = periodic_point(Word(a, {1, 2}));
    auto p21 = periodic_point(Word(a, {2, 1}));
    CHECK_FALSE(orbits_disjoint(p12, p21));  // same orbit, different phase
    auto p122 = periodic_point(Word(a, {1, 2, 2}));
    CHECK(orbits_disjoint(p12, p122));
    // distinct primitive words of coprime lengths always disjoint
    auto p11212 = periodic_point(Word(a, {1, 1, 2, 1, 2}));
    CHECK(orbits_disjoint(p12, p11212));
    CHECK(orbits_disjoint(p122, p11212));
}

TEST_CASE("default depth meets the 1e-12 target", "[shift]") {
    for (int m : {2, 3, 4, 6, 9}) {
        Alphabet a(m);
        CHECK(metric_tail_bound(a, default_depth(a)) <= 1e-12);
    }
}
