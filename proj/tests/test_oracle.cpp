#include "annulus/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace annulus;

namespace {

// Greedy matching of two root multisets; returns the largest pair distance.
double matchDistance(std::vector<Complex> a, std::vector<Complex> b)
{
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (Complex x : a) {
        auto best = std::min_element(b.begin(), b.end(),
                                     [x](Complex p, Complex q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*best - x));
        b.erase(best);
    }
    return worst;
}

}  // namespace

TEST_CASE("polyRoots examples")
{
    const auto a = polyRoots(PolyCoeffs({-1.0, 0.0, 1.0}));
    CHECK(a.converged);
    CHECK(matchDistance(a.roots, {1.0, -1.0}) < 1e-13);

    const auto b = polyRoots(PolyCoeffs({1.0, 0.0, 1.0}));
    CHECK(matchDistance(b.roots, {{0.0, 1.0}, {0.0, -1.0}}) < 1e-13);

    const std::vector<Complex> triple{2.0, 2.0, -0.5};
    const auto c = polyRoots(PolyCoeffs::fromRoots(triple));
    REQUIRE(c.roots.size() == 3);
    CHECK(matchDistance(c.roots, triple) < 1e-6);
    for (double r : c.residuals) CHECK(r < 1e-12);
}

TEST_CASE("polyRoots round trip on random roots")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> logMod(std::log(0.2), std::log(5.0));
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 200; ++trial) {
        const int degree = 1 + static_cast<int>(rng() % 8);
        std::vector<Complex> roots;
        for (int k = 0; k < degree; ++k) roots.push_back(std::polar(std::exp(logMod(rng)), ang(rng)));
        double minGap = 1e300;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            for (std::size_t j = i + 1; j < roots.size(); ++j) minGap = std::min(minGap, std::abs(roots[i] - roots[j]));
        }
        const auto s = polyRoots(PolyCoeffs::fromRoots(roots, std::polar(1.5, ang(rng))));
        INFO("trial ", trial);
        CHECK(matchDistance(s.roots, roots) < (minGap < 1e-2 ? 1e-4 : 1e-8));
    }
}

TEST_CASE("polyRoots is deterministic")
{
    const PolyCoeffs p({{1.0, 2.0}, {-3.0, 0.5}, 0.0, {0.2, -1.0}, 1.0});
    const auto a = polyRoots(p);
    const auto b = polyRoots(p);
    CHECK(a.roots == b.roots);
}

TEST_CASE("PolyCoeffs basics")
{
    const PolyCoeffs p({1.0, 2.0, 0.0, 0.0});
    CHECK(p.degree() == 1);
    CHECK(p(3.0) == Complex{7.0, 0.0});
    CHECK(p.derivativeAt(3.0) == Complex{2.0, 0.0});
    const PolyCoeffs q({1.0, 1.0, 1e-15});
    CHECK(q.trimmed(1e-12).degree() == 1);
    CHECK((q - q).degree() <= 0);
}

TEST_CASE("solveAPoints examples")
{
    const auto sq = solveAPoints(FunctionModel::monomial(2), 1.0);
    CHECK(matchDistance(sq.points, {1.0, -1.0}) < 1e-13);
    CHECK_FALSE(sq.degreeDrop);

    const FunctionModel mob = FunctionModel::rational(1.0, {{2.0, 1}, {0.5, -1}});
    const auto drop = solveAPoints(mob, 1.0);
    CHECK(drop.points.empty());
    CHECK(drop.degreeDrop);

    for (double phi : {0.0, 0.7, 2.0, 4.5}) {
        const Complex a = std::polar(1.0, phi);
        const auto s = solveAPoints(FunctionModel::monomial(1), a);
        REQUIRE(s.points.size() == 1);
        CHECK(std::abs(s.points[0] - a) < 1e-14);
    }

    CHECK_THROWS_AS(solveAPoints(FunctionModel::constant(1.0), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(solveAPoints(FunctionModel::parse("exp(z)"), 1.0), std::invalid_argument);
}

TEST_CASE("a-points satisfy f(z) = a")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> m(0.3, 3.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RootFactor> fs;
        for (int k = 0; k < 4; ++k) fs.push_back({std::polar(m(rng), ang(rng)), k % 2 ? -1 : 1 + k / 2});
        const FunctionModel f = FunctionModel::rational(std::polar(m(rng), ang(rng)), fs);
        const Complex a = std::polar(m(rng), ang(rng));
        const auto s = solveAPoints(f, a);
        CHECK(s.points.size() == 3);
        for (Complex z : s.points) CHECK(std::abs(f.eval(z) - a) < 1e-8 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("exact index counts roots inside and half on the circle")
{
    const std::vector<RootFactor> fs{{2.0, 1}, {0.5, -1}, {{0.0, 1.0}, 2}};
    CHECK(exactIndex(fs, 0.25) == 0);
    CHECK(exactIndex(fs, 0.75) == -2);
    CHECK(exactIndex(fs, 1.0) == -2 + 2);
    CHECK(exactIndex(fs, 1.5) == -2 + 4);
    CHECK(exactIndex(fs, 3.0) == 4);
}

TEST_CASE("exactN examples")
{
    const std::vector<RootFactor> pole2{{2.0, -1}};
    CHECK(std::abs(exactN(pole2, {3.0, 4.0}).value - std::log(2.0)) < 1e-15);

    const std::vector<RootFactor> pole1{{1.0, -2}};
    CHECK(std::abs(exactN(pole1, {M_E, M_E}).value - 2.0) < 1e-15);

    const std::vector<RootFactor> none{{3.0, 1}};
    CHECK(exactN(none, {2.0, 5.0}).value == 0.0);

    const std::vector<RootFactor> inner{{{0.0, 0.5}, -1}};
    CHECK(std::abs(exactN(inner, {3.0, 2.0}).value - std::log(1.5)) < 1e-15);

    const std::vector<RootFactor> onEdge{{2.0, -1}};
    const auto flagged = exactN(onEdge, {2.0, 2.0});
    CHECK(flagged.boundaryFlag);
    CHECK(flagged.value == 0.0);
}

TEST_CASE("exactN vanishes on the degenerate window")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> m(0.2, 5.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RootFactor> fs;
        for (int k = 0; k < 5; ++k) fs.push_back({std::polar(m(rng), ang(rng)), k % 2 ? -1 : 1});
        CHECK(exactN(fs, {1.0, 1.0}).value == 0.0);
    }
}

TEST_CASE("classical counting function")
{
    const std::vector<RootFactor> fs{{0.5, -1}, {2.0, -2}, {1.0, 1}};
    CHECK(classicalN(fs, 0.25) == 0.0);
    CHECK(std::abs(classicalN(fs, 1.0) - std::log(2.0)) < 1e-15);
    CHECK(std::abs(classicalN(fs, 4.0) - (std::log(8.0) + 2.0 * std::log(2.0))) < 1e-14);
}

TEST_CASE("reciprocalShift turns a-points into poles")
{
    const FunctionModel f = FunctionModel::rational(1.0, {{2.0, 1}, {0.5, -1}});
    const Complex a{0.3, -1.2};
    const FunctionModel g = reciprocalShift(f, a);
    REQUIRE(g.isRational());
    for (Complex z : {Complex{0.1, 0.7}, Complex{-1.4, 0.2}, Complex{3.0, 3.0}}) {
        CHECK(std::abs(g.eval(z) - 1.0 / (f.eval(z) - a)) < 1e-12 * std::abs(g.eval(z)));
    }
}

TEST_CASE("rationalForm factors rational expressions")
{
    const auto r = rationalForm(FunctionModel::parse("(z-2)/(z+0.5)^2"));
    REQUIRE(r);
    REQUIRE(r->isRational());
    CHECK(r->asRational().factors.size() == 2);
    for (Complex z : {Complex{0.3, 0.1}, Complex{-2.0, 1.0}}) {
        CHECK(std::abs(r->eval(z) - (z - 2.0) / ((z + 0.5) * (z + 0.5))) < 1e-12);
    }

    const auto sum = rationalForm(FunctionModel::parse("z^2 - 1 + 1/z"));
    REQUIRE(sum);
    for (Complex z : {Complex{0.3, 0.1}, Complex{-2.0, 1.0}}) {
        CHECK(std::abs(sum->eval(z) - (z * z - 1.0 + 1.0 / z)) < 1e-10);
    }

    const auto cancel = rationalForm(FunctionModel::parse("(z^2-1)/(z-1)"));
    REQUIRE(cancel);
    REQUIRE(cancel->asRational().factors.size() == 1);
    CHECK(std::abs(cancel->asRational().factors[0].root + 1.0) < 1e-9);

    CHECK_FALSE(rationalForm(FunctionModel::parse("exp(z)")));
    CHECK_FALSE(rationalForm(FunctionModel::parse("z-z")));
    CHECK(rationalForm(FunctionModel::parse("exp(2)*z")));
}
