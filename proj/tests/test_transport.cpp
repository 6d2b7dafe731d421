#include <catch2/catch_amalgamated.hpp>

#include "emg/measure.hpp"
#include "emg/transport.hpp"

#include <random>

using namespace emg;
using namespace emg::shift;

namespace {

ShiftPoint random_point(Alphabet a, std::mt19937_64& rng, int len = 64) {
    std::uniform_int_distribution<int> sym(1, a.m);
    std::vector<Symbol> prefix;
    for (int i = 0; i < len; ++i) prefix.push_back(static_cast<Symbol>(sym(rng)));
    return ShiftPoint::prefix_padded(a, std::move(prefix));
}

DiscreteMeasure random_measure(const std::shared_ptr<ShiftGround>& ground, std::mt19937_64& rng,
                               int max_atoms) {
    std::uniform_int_distribution<int> na(1, max_atoms);
    std::uniform_int_distribution<int> wd(1, 12);
    const int n = na(rng);
    std::vector<Atom> atoms;
    BigRat total = 0;
    std::vector<BigRat> w;
    for (int i = 0; i < n; ++i) {
        auto x = random_point(ground->alphabet(), rng);
        BigRat v(wd(rng));
        total += v;
        atoms.push_back({ground->add_point(x), v});
    }
    for (auto& a : atoms) a.weight /= total;
    return DiscreteMeasure(ground, std::move(atoms));
}

}  // namespace

TEST_CASE("w1 of identical measures is zero", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        auto mu = random_measure(ground, rng, 5);
        auto res = w1_exact(mu, mu);
        CHECK(res.value <= 1e-12);
        check_certificates(mu, mu, res);
    }
}

TEST_CASE("Dirac vs Dirac equals the ground distance", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        auto x = random_point(ground->alphabet(), rng);
        auto y = random_point(ground->alphabet(), rng);
        DiscreteMeasure mu(ground, {{ground->add_point(x), BigRat(1)}});
        DiscreteMeasure nu(ground, {{ground->add_point(y), BigRat(1)}});
        const double d = shift_metric(x, y, TruncationDepth(ground->depth())).value;
        auto res = w1_exact(mu, nu);
        CHECK(res.value == Catch::Approx(d).margin(1e-12));
    }
}

TEST_CASE("two-atom vs one-atom w1 by hand", "[transport]") {
    // mu = 1/2 delta_a + 1/2 delta_b, nu = delta_a, d(a,b) = 1 -> value 1/2.
    // Independent oracle: the transportation polytope is one dimensional; the
    // only extreme plan sends the b-mass to a at cost d(a,b)/2.
    auto ground = std::make_shared<TableGround>();
    auto pa = ground->add_point("a");
    auto pb = ground->add_point("b");
    ground->set_distance(pa, pb, 1.0);
    DiscreteMeasure mu(ground, {{pa, BigRat(1, 2)}, {pb, BigRat(1, 2)}});
    DiscreteMeasure nu(ground, {{pa, BigRat(1)}});
    auto res = w1_exact(mu, nu);
    CHECK(res.value == Catch::Approx(0.5));
    CHECK(brute_force_w1(mu, nu) == Catch::Approx(0.5));
}

TEST_CASE("brute force enumeration examples", "[transport]") {
    auto ground = std::make_shared<TableGround>();
    auto a0 = ground->add_point("0");
    auto a1 = ground->add_point("1");
    ground->set_distance(a0, a1, 1.0);
    DiscreteMeasure mu(ground, {{a0, BigRat(1, 2)}, {a1, BigRat(1, 2)}});
    // 2x2 uniform marginals, cost [[0,1],[1,0]] -> 0 (identity coupling)
    CostMatrix cm;
    cm.rows = cm.cols = 2;
    cm.c = {0.0, 1.0, 1.0, 0.0};
    CHECK(brute_force_w1(mu, mu, cm) == Catch::Approx(0.0));
    CHECK(w1_exact(mu, mu, cm).value == Catch::Approx(0.0));
    // cost [[0,1],[1,2]]: both vertex plans (x00 = 1/2 and x01 = 1/2) cost
    // exactly 1, so the optimum is 1 (the cost is constant on the polytope)
    cm.c = {0.0, 1.0, 1.0, 2.0};
    CHECK(brute_force_w1(mu, mu, cm) == Catch::Approx(1.0));
    CHECK(w1_exact(mu, mu, cm).value == Catch::Approx(1.0));
    // an instance whose two vertices differ: cost [[0,1],[2,1]] -> 1/2 via x00
    cm.c = {0.0, 1.0, 2.0, 1.0};
    CHECK(brute_force_w1(mu, mu, cm) == Catch::Approx(0.5));
    CHECK(w1_exact(mu, mu, cm).value == Catch::Approx(0.5));
    // support too large
    auto ground2 = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(3);
    auto big1 = random_measure(ground2, rng, 5);
    auto big2 = random_measure(ground2, rng, 5);
    if (big1.support_size() * big2.support_size() > 16)
        CHECK_THROWS(brute_force_w1(big1, big2));
}

TEST_CASE("solver agrees with brute force on random pairs", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        auto mu = random_measure(ground, rng, 4);
        auto nu = random_measure(ground, rng, 4);
        auto res = w1_exact(mu, nu);
        const double oracle = brute_force_w1(mu, nu);
        CHECK(res.value == Catch::Approx(oracle).margin(1e-9));
        check_certificates(mu, nu, res);
    }
}

TEST_CASE("triangle inequality and symmetry", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 40; ++rep) {
        auto mu = random_measure(ground, rng, 6);
        auto nu = random_measure(ground, rng, 6);
        auto rho = random_measure(ground, rng, 6);
        const double dmn = w1(mu, nu);
        const double dnm = w1(nu, mu);
        const double dmr = w1(mu, rho);
        const double drn = w1(rho, nu);
        const double slack = 3.0 * ground->entry_error() + 1e-10;
        CHECK(dmn == Catch::Approx(dnm).margin(1e-10));
        CHECK(dmn <= dmr + drn + slack);
    }
}

TEST_CASE("weight mismatch rejected", "[transport]") {
    auto ground = std::make_shared<TableGround>();
    auto pa = ground->add_point("a");
    auto pb = ground->add_point("b");
    ground->set_distance(pa, pb, 1.0);
    DiscreteMeasure mu(ground, {{pa, BigRat(1)}});
    DiscreteMeasure nu(ground, {{pb, BigRat(1)}});
    // feasible case fine
    CHECK(w1(mu, nu) == Catch::Approx(1.0));
    // an unbalanced instance can only be produced at the solver layer
    CHECK_THROWS(detail::TransportSimplex({0.6, 0.6}, {1.0}, {0.0, 1.0}));
}

TEST_CASE("dual lower bound with explicit witnesses", "[transport]") {
    auto ground = std::make_shared<TableGround>();
    auto px = ground->add_point("x");
    auto py = ground->add_point("y");
    ground->set_distance(px, py, 0.8);
    DiscreteMeasure mu(ground, {{px, BigRat(1)}});
    DiscreteMeasure nu(ground, {{py, BigRat(1)}});
    // phi == 0 gives 0
    CHECK(w1_dual_lower_bound(mu, nu, {0.0}, {0.0}) == 0.0);
    // phi0(z) = max(d(x,y) - d(x,z), 0): phi0(x) = d, phi0(y) = 0, matches w1
    const double d = 0.8;
    CHECK(w1_dual_lower_bound(mu, nu, {d}, {0.0}) == Catch::Approx(w1(mu, nu)).margin(1e-12));
    // Lipschitz violation detected
    CHECK_THROWS(w1_dual_lower_bound(mu, nu, {1.0}, {0.0}));
    // range violation detected
    CHECK_THROWS(w1_dual_lower_bound(mu, nu, {1.5}, {0.9}));
}

TEST_CASE("dual lower bound never exceeds the exact value", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        auto mu = random_measure(ground, rng, 4);
        auto nu = random_measure(ground, rng, 4);
        // random 1-Lipschitz witness: phi(p) = min over anchors of (c_i + d(p, a_i))
        auto anchor = random_point(ground->alphabet(), rng);
        const PointId ap = ground->add_point(anchor);
        const double c = u(rng) * 0.2;
        auto phi = [&](const DiscreteMeasure& m) {
            std::vector<double> v;
            for (const auto& at : m.atoms())
                v.push_back(std::clamp(c + ground->distance(at.point, ap) - 1.0, -1.0, 1.0));
            return v;
        };
        const double lb = w1_dual_lower_bound(mu, nu, phi(mu), phi(nu));
        const double exact = w1(mu, nu);
        CHECK(lb <= exact + ground->entry_error() + 1e-10);
    }
}

TEST_CASE("strong duality on every solve", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(3));
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 60; ++rep) {
        auto mu = random_measure(ground, rng, 8);
        auto nu = random_measure(ground, rng, 8);
        auto res = w1_exact(mu, nu);
        check_certificates(mu, nu, res);  // includes the duality-gap check
    }
}

TEST_CASE("moderately large supports stay exact", "[transport]") {
    auto ground = ShiftGround::create(Alphabet(2));
    std::mt19937_64 rng(8);
    // 60-atom empirical-style measures; compare against the dual objective
    std::vector<Atom> a1, a2;
    BigRat t1 = 0, t2 = 0;
    for (int i = 0; i < 60; ++i) {
        a1.push_back({ground->add_point(random_point(ground->alphabet(), rng)), BigRat(1, 60)});
        a2.push_back({ground->add_point(random_point(ground->alphabet(), rng)), BigRat(1, 60)});
    }
    DiscreteMeasure mu(ground, a1), nu(ground, a2);
    auto res = w1_exact(mu, nu);
    check_certificates(mu, nu, res);
    CHECK(res.value >= 0.0);
}
