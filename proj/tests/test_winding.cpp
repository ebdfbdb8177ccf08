#include "annulus/errors.hpp"
#include "annulus/oracle.hpp"
#include "annulus/winding.hpp"

#include "corpus.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace annulus;

namespace {

FunctionModel rat(Complex scale, std::vector<RootFactor> fs) { return FunctionModel::rational(scale, std::move(fs)); }

}  // namespace

TEST_CASE("index examples")
{
    CHECK(index(FunctionModel::monomial(3), 1.0) == 6);
    CHECK(indexQuadrature(FunctionModel::monomial(3), 1.0).value == 6);

    const FunctionModel g = rat(1.0, {{2.0, 1}});
    CHECK(index(g, 1.0) == 0);
    CHECK(index(g, 3.0) == 2);
    CHECK(index(g, 2.0) == 1);

    CHECK(index(rat(1.0, {{0.5, 1}, {2.0, -2}}), 1.0) == 2);
}

TEST_CASE("index of expression models")
{
    CHECK(index(FunctionModel::parse("z^3"), 1.0) == 6);
    CHECK(index(FunctionModel::parse("z-2"), 3.0) == 2);
    // Zero on the circle: half weight from the two neighbouring circles.
    CHECK(index(FunctionModel::parse("z-2"), 2.0) == 1);
    CHECK(index(FunctionModel::parse("exp(z)*(z-0.5)"), 1.0) == 2);
    CHECK(index(FunctionModel::parse("exp(1/z)"), 1.0) == 0);
    CHECK(index(FunctionModel::parse("1/(z-0.3i)^2"), 1.0) == -4);
}

TEST_CASE("quadrature index flags on-circle roots")
{
    CHECK_THROWS_AS(indexQuadrature(rat(1.0, {{1.0, 1}}), 1.0), IntegralityError);
}

TEST_CASE("exactIndex examples")
{
    for (int m : {1, 2, 5}) {
        for (double t : {0.3, 1.0, 4.0}) {
            CHECK(exactIndex(FunctionModel::monomial(m), t) == 2 * m);
            CHECK(exactIndex(FunctionModel::monomial(-m), t) == -2 * m);
        }
    }
    CHECK(exactIndex(rat(1.0, {{1.0, 1}, {0.5, 1}, {2.0, -1}}), 1.0) == 3);
    CHECK_THROWS_AS(exactIndex(FunctionModel::parse("z"), 1.0), UnsupportedError);
}

TEST_CASE("quadrature index equals the exact index on the corpus")
{
    std::mt19937_64 rng(31);
    const auto fs = corpus::rationalCorpus(17, 20, 4);
    for (const FunctionModel& f : fs) {
        for (double t : corpus::safeRadii(f, rng, 20, 0.2, 5.0)) {
            const auto q = indexQuadrature(f, t);
            CHECK(q.value == exactIndex(f, t));
            CHECK(std::abs(q.raw - q.value) < 1e-6);
        }
    }
}

TEST_CASE("index is odd under reciprocal and additive under products")
{
    std::mt19937_64 rng(32);
    const auto fs = corpus::rationalCorpus(18, 10, 3);
    for (std::size_t k = 0; k + 1 < fs.size(); ++k) {
        const FunctionModel& f = fs[k];
        const FunctionModel& g = fs[k + 1];
        auto factors = f.asRational().factors;
        for (const RootFactor& x : g.asRational().factors) factors.push_back(x);
        const FunctionModel fg = FunctionModel::rational(f.asRational().scale * g.asRational().scale, factors);
        for (double t : corpus::safeRadii(fg, rng, 5, 0.3, 3.0)) {
            CHECK(index(f.reciprocal(), t) == -index(f, t));
            CHECK(indexQuadrature(FunctionModel::expression(fg.toExpr()), t).value ==
                  indexQuadrature(f, t).value + indexQuadrature(g, t).value);
        }
    }
}

TEST_CASE("countAPoints examples")
{
    const auto a = countAPoints(FunctionModel::monomial(2), 0.0, 0.5, 2.0);
    CHECK(a.zerosInterior == 0);
    CHECK(a.exact);

    const auto b = countAPoints(rat(1.0, {{2.0, 1}, {0.5, 1}}), 0.0, 1.0, 3.0);
    CHECK(b.zerosInterior == 1);

    const auto c = countAPoints(FunctionModel::monomial(2), 1.0, 0.5, 2.0);
    CHECK(c.zerosInterior == 2);
    CHECK(c.zerosOnUnitCircle == 2);

    const auto e = countAPoints(FunctionModel::parse("z^2"), 1.0, 0.5, 2.0);
    CHECK(e.zerosInterior == 2);
    CHECK_FALSE(e.exact);

    CHECK_THROWS_AS(countAPoints(FunctionModel::monomial(2), 1.0, 1.0, 2.0), BoundaryRootError);
    CHECK_THROWS_AS(countAPoints(FunctionModel::parse("1/(z-1.5)"), 1.0, 1.0, 2.0), UnsupportedError);
}

TEST_CASE("argument-principle count agrees with polynomial a-points")
{
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    const FunctionModel f = rat({0.6, 0.2}, {{{1.3, 0.2}, 1}, {{-0.4, 0.5}, 2}});
    const FunctionModel e = FunctionModel::expression(f.toExpr());
    for (int k = 0; k < 10; ++k) {
        const Complex a = std::polar(0.8, ang(rng));
        const auto exact = countAPoints(f, a, 0.4, 2.2);
        const auto quad = countAPoints(e, a, 0.4, 2.2);
        CHECK(exact.zerosInterior == quad.zerosInterior);
    }
}

TEST_CASE("locateJumpRadii examples")
{
    const auto a = locateJumpRadii(rat(1.0, {{2.0, 1}}), 0.0, 1.0, 3.0);
    REQUIRE(a.size() == 1);
    CHECK(std::abs(a[0].radius - 2.0) < 2e-10);
    CHECK(a[0].jump == 1);

    const auto b = locateJumpRadii(FunctionModel::monomial(2), 1.0, 0.5, 2.0);
    REQUIRE(b.size() == 1);
    CHECK(std::abs(b[0].radius - 1.0) < 1e-10);
    CHECK(b[0].jump == 2);

    const auto c = locateJumpRadii(rat(1.0, {{0.5, 1}, {2.0, 1}}), 0.0, 0.25, 3.0);
    REQUIRE(c.size() == 2);
    CHECK(std::abs(c[0].radius - 0.5) < 1e-10);
    CHECK(std::abs(c[1].radius - 2.0) < 2e-10);
    CHECK(c[0].jump == 1);
    CHECK(c[1].jump == 1);
}

TEST_CASE("jump radii match the exact root moduli")
{
    const auto fs = corpus::rationalCorpus(19, 15, 4);
    for (const FunctionModel& f : fs) {
        const auto jumps = locateJumpRadii(f, 0.0, 0.7, 2.5);
        int total = 0;
        for (const JumpRadius& j : jumps) {
            total += j.jump;
            int expected = 0;
            for (const RootFactor& x : f.asRational().factors) {
                if (std::abs(std::abs(x.root) - j.radius) < 1e-9 * j.radius) expected += x.multiplicity;
            }
            CHECK(j.jump == expected);
        }
        CHECK(total == (index(f, 2.5) - index(f, 0.7)) / 2);
    }
}

TEST_CASE("pole freedom")
{
    CHECK(poleFreeOn(FunctionModel::parse("exp(z)*(z-3)"), 0.5, 2.0));
    CHECK_FALSE(poleFreeOn(FunctionModel::parse("1/(z-1)"), 0.5, 2.0));
    CHECK(poleFreeOn(FunctionModel::parse("1/(z-3)"), 0.5, 2.0));
    CHECK(poleFreeOn(rat(1.0, {{0.2, -1}}), 0.5, 2.0));
    CHECK_FALSE(poleFreeOn(rat(1.0, {{1.2, -1}}), 0.5, 2.0));
}

TEST_CASE("argument-principle relations")
{
    CHECK(checkEq12Eq13(FunctionModel::monomial(3), 1.7) == std::pair{0, 0});
    CHECK(checkEq12Eq13(rat(1.0, {{2.0, 1}, {0.5, -1}}), 3.0) == std::pair{0, 0});
    CHECK(checkEq12Eq13(rat(1.0, {{1.0, 1}}), 2.0) == std::pair{0, 0});
    CHECK_THROWS_AS(checkEq12Eq13(rat(1.0, {{2.0, 1}}), 2.0), BoundaryRootError);
    CHECK_THROWS_AS(checkEq12Eq13(FunctionModel::parse("z"), 2.0), UnsupportedError);

    const auto fs = corpus::rationalCorpus(20, 30, 4);
    for (const FunctionModel& f : fs) {
        for (double t : {1.5, 2.0, 2.7}) CHECK(checkEq12Eq13(f, t) == std::pair{0, 0});
    }
}
