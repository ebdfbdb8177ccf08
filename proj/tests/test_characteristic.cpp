#include "annulus/characteristic.hpp"
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

const FunctionModel kMobius = FunctionModel::rational(1.0, {{2.0, 1}, {0.5, -1}});

// (1/2pi) int log+|f(t e^{i theta})| by a 2^20-node midpoint rule.
double bruteProximity(const FunctionModel& f, double t)
{
    constexpr int n = 1 << 20;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = std::abs(f.eval(std::polar(t, 2.0 * M_PI * (k + 0.5) / n)));
        if (v > 1.0) s += std::log(v);
    }
    return s / n;
}

}  // namespace

TEST_CASE("proximity examples")
{
    const FunctionModel sq = FunctionModel::monomial(2);
    for (double r : {1.0, 1.5, 4.0}) CHECK(std::abs(proximity(sq, r).value - 2.0 * std::log(r)) < 1e-12);
    for (double tau : {1.0, 2.0, 7.0}) CHECK(std::abs(proximity(sq, 1.0 / tau).value) < 1e-12);
    for (double t : {0.3, 1.0, 3.0}) {
        CHECK(std::abs(proximity(FunctionModel::constant(5.0), t).value - std::log(5.0)) < 1e-12);
    }
    // |f| = 2 on the unit circle.
    CHECK(std::abs(proximity(kMobius, 1.0).value - std::log(2.0)) < 1e-12);
}

TEST_CASE("proximity agrees with a brute-force rule")
{
    const auto fs = corpus::rationalCorpus(41, 8, 4);
    for (const FunctionModel& f : fs) {
        for (double t : {0.6, 1.0, 2.2}) {
            const Measured m = proximity(f, t);
            CHECK(m.converged);
            CHECK(std::abs(m.value - bruteProximity(f, t)) < 1e-8);
        }
    }
}

TEST_CASE("proximity with a pole on the circle")
{
    const FunctionModel f = rat(1.0, {{1.0, -1}});
    const Measured m = proximity(f, 1.0);
    // On |z| = 1, |z - 1| = 2|sin(theta/2)| <= 1 exactly on [-pi/3, pi/3].
    // The mean of -log(2 sin(theta/2)) over that arc is the Clausen value Cl2(pi/3) / pi.
    const double clausen = 1.0149416064096536;
    CHECK(std::abs(m.value - clausen / M_PI) < 1e-8);
}

TEST_CASE("proximityAnnulus examples")
{
    for (int m : {1, 3}) {
        const AnnulusWindow w{2.0, 3.0};
        CHECK(std::abs(proximityAnnulus(FunctionModel::monomial(m), w).value - m * std::log(3.0)) < 1e-12);
        CHECK(std::abs(proximityAnnulus(FunctionModel::monomial(-m), w).value - m * std::log(2.0)) < 1e-12);
    }
    CHECK(std::abs(proximityAnnulus(FunctionModel::constant(5.0), {2.0, 3.0}).value) < 1e-12);
}

TEST_CASE("countingN examples")
{
    CHECK(std::abs(countingN(rat(1.0, {{2.0, -1}}), {3.0, 4.0}).value - std::log(2.0)) < 1e-15);
    CHECK(countingN(FunctionModel::monomial(4), {5.0, 2.0}).value == 0.0);
    CHECK(std::abs(countingN(rat(1.0, {{1.0, -1}}), {std::exp(2.0), std::exp(2.0)}).value - 2.0) < 1e-14);
}

TEST_CASE("countingN routes agree")
{
    CountingOptions jumps;
    jumps.route = CountingOptions::Route::Jumps;
    const auto fs = corpus::rationalCorpus(42, 12, 4);
    for (const FunctionModel& f : fs) {
        for (AnnulusWindow w : {AnnulusWindow{2.0, 3.0}, AnnulusWindow{1.0, 2.5}, AnnulusWindow{3.0, 1.0}}) {
            const double exact = exactN(*f.exactZerosPoles(), w).value;
            CHECK(std::abs(countingN(f, w).value - exact) < 1e-12);
            CHECK(std::abs(countingN(f, w, {}, jumps).value - exact) < 1e-8);
        }
    }
}

TEST_CASE("countingN for expression models")
{
    CHECK(countingN(FunctionModel::parse("exp(z)*(z-0.5)"), {2.0, 3.0}).value == 0.0);
    CHECK_THROWS_AS(countingN(FunctionModel::parse("1/(z-2)"), {3.0, 4.0}), UnsupportedError);
    CountingOptions opts;
    opts.poles = std::vector<Complex>{2.0};
    CHECK(std::abs(countingN(FunctionModel::parse("exp(z)/(z-2)"), {3.0, 4.0}, {}, opts).value - std::log(2.0)) <
          1e-15);
}

TEST_CASE("cConstant examples")
{
    for (int m : {1, 2, 5}) CHECK(std::abs(cConstant(FunctionModel::monomial(m)).value - m / 2.0) < 1e-12);
    CHECK(std::abs(cConstant(FunctionModel::constant(5.0)).value) < 1e-15);
    CHECK(std::abs(cConstant(rat(2.0, {{0.0, 1}})).value - 1.0) < 1e-12);
    // |f| = 2 on the circle, so c_f = nu(1, f) / 2.
    CHECK(std::abs(cConstant(kMobius).value + 1.0) < 1e-12);
    CHECK_THROWS_AS(cConstant(rat(1.0, {{1.0, 1}, {0.3, -1}})), BoundaryRootError);
    CHECK(std::abs(cConstant(FunctionModel::parse("z^2")).value - 1.0) < 1e-9);
}

TEST_CASE("the strange example")
{
    for (int m : {1, 2, 4}) {
        for (AnnulusWindow w : {AnnulusWindow{1.0, 1.0}, AnnulusWindow{2.0, 3.0}, AnnulusWindow{M_E, 1.3}}) {
            const double expected = m * (std::log(w.tau) + std::log(w.r)) / 2.0;
            CHECK(std::abs(characteristic(FunctionModel::monomial(m), w).T - expected) < 1e-12);
            CHECK(std::abs(characteristic(FunctionModel::monomial(-m), w).T - expected) < 1e-12);
        }
    }
}

TEST_CASE("characteristic assembly")
{
    const auto fs = corpus::rationalCorpus(43, 10, 4);
    for (const FunctionModel& f : fs) {
        CHECK(std::abs(characteristic(f, {1.0, 1.0}).T) < 1e-12);
        const AnnulusWindow w{2.0, 3.0};
        const CharacteristicReport rep = characteristic(f, w);
        CHECK(rep.converged);
        CHECK(rep.mAnnulus == rep.mInner + rep.mOuter - 2.0 * rep.mUnit);
        CHECK(rep.T == rep.N + rep.mAnnulus + rep.cf * std::log(w.tau / w.r));
        CHECK(rep.T >= -10.0 * rep.quadError);
        CHECK(std::abs(rep.mOuter - bruteProximity(f, 3.0)) < 1e-8);
        CHECK(std::abs(rep.N - exactN(*f.exactZerosPoles(), w).value) < 1e-15);
    }
    for (AnnulusWindow w : {AnnulusWindow{1.0, 1.0}, AnnulusWindow{4.0, 2.0}}) {
        CHECK(std::abs(characteristic(FunctionModel::constant(5.0), w).T) < 1e-12);
    }
}

TEST_CASE("strange example is symmetric in tau and r")
{
    for (auto [a, b] : {std::pair{2.0, 3.0}, std::pair{1.2, 6.0}}) {
        const FunctionModel f = FunctionModel::monomial(3);
        CHECK(std::abs(characteristic(f, {a, b}).T - characteristic(f, {b, a}).T) < 1e-12);
    }
}

TEST_CASE("evaluator matches direct evaluation")
{
    const FunctionModel f = corpus::rationalCorpus(44, 1, 4).front();
    QuadConfig cfg;
    cfg.jobs = 4;
    CharacteristicEvaluator ev(f, cfg);
    const std::vector<double> radii{0.5, 1.0, 2.0, 3.0};
    ev.prefetch(radii);
    const CharacteristicReport a = ev.at({2.0, 3.0});
    const CharacteristicReport b = characteristic(f, {2.0, 3.0});
    CHECK(a.T == b.T);
    CHECK(ev.proximityAt(2.0).value == proximity(f, 2.0).value);
}

TEST_CASE("Jensen version 1")
{
    CHECK(jensenV1Residual(FunctionModel::monomial(3), 1.0, M_E).residual < 1e-12);
    CHECK(jensenV1Residual(FunctionModel::constant(4.0), 0.5, 2.0).residual < 1e-12);
    CHECK(jensenV1Residual(rat(1.0, {{2.0, 1}, {0.5, 1}}), 1.0, 3.0).residual < 1e-8);
    CHECK(jensenV1Residual(FunctionModel::parse("exp(z)*(z-1.5)"), 1.0, 2.0).residual < 1e-8);
    CHECK_THROWS_AS(jensenV1Residual(FunctionModel::monomial(1), 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("Jensen version 2")
{
    for (int m : {1, 2, 3}) CHECK(jensenV2Residual(FunctionModel::monomial(m), {2.0, 5.0}).residual < 1e-12);
    CHECK(jensenV2Residual(FunctionModel::constant(3.0), {2.0, 5.0}).residual < 1e-12);
    CHECK(jensenV2Residual(kMobius, {4.0, 4.0}).residual < 1e-8);
    const auto fs = corpus::rationalCorpus(45, 10, 4);
    for (const FunctionModel& f : fs) {
        for (AnnulusWindow w : {AnnulusWindow{2.0, 3.0}, AnnulusWindow{1.0, 5.0}, AnnulusWindow{4.0, 1.5}}) {
            const ResidualReport rep = jensenV2Residual(f, w);
            CHECK(rep.residual <= 1e-8 + rep.quadError);
        }
    }
}

TEST_CASE("counting weight")
{
    const AnnulusWindow w{2.0, 3.0};
    CHECK(countingWeight(0.4, w) == 0.0);
    CHECK(std::abs(countingWeight(0.8, w) - std::log(1.6)) < 1e-15);
    CHECK(std::abs(countingWeight(1.0, w) - 0.5 * std::log(6.0)) < 1e-15);
    CHECK(std::abs(countingWeight(1.5, w) - std::log(2.0)) < 1e-15);
    CHECK(countingWeight(3.5, w) == 0.0);
}

TEST_CASE("Cartan identity")
{
    CHECK(cartanResidual(FunctionModel::constant(5.0), {2.0, 3.0}, 64).residual < 1e-12);
    CHECK(cartanResidual(FunctionModel::monomial(1), {2.0, 3.0}, 64).residual < 1e-12);
    CHECK(cartanResidual(FunctionModel::monomial(2), {2.0, 3.0}, 256).residual < 1e-6);
    CHECK(cartanResidual(kMobius, {2.0, 5.0}, 128).residual < 1e-6);
    CHECK_THROWS_AS(cartanResidual(FunctionModel::parse("z"), {2.0, 3.0}, 64), UnsupportedError);
}

TEST_CASE("phi-averages are reproducible across worker counts")
{
    const FunctionModel f = corpus::rationalCorpus(46, 1, 3).front();
    QuadConfig one;
    QuadConfig many;
    many.jobs = 6;
    CHECK(cartanResidual(f, {2.0, 3.0}, 128, one).residual == cartanResidual(f, {2.0, 3.0}, 128, many).residual);
}

TEST_CASE("unit index average equals c_f")
{
    CHECK(lemma4Residual(FunctionModel::constant(5.0), 64).residual < 1e-12);
    CHECK(lemma4Residual(rat(2.0, {{0.0, 1}}), 64).residual < 1e-12);
    CHECK(lemma4Residual(FunctionModel::parse("z+3"), 64).residual < 1e-9);
    CHECK(lemma4Residual(kMobius, 256).residual < 1e-6);
}

TEST_CASE("index shift for f minus a constant")
{
    CHECK(lemma5Residual(kMobius, 1.0, 0.0).residual < 1e-12);
    CHECK(lemma5Residual(FunctionModel::monomial(1), 1.0, 2.0).residual < 1e-9);
    CHECK(lemma5Residual(FunctionModel::monomial(2), 1.0, -4.0).residual < 1e-9);
    CHECK(lemma5Residual(FunctionModel::parse("exp(z)*(z-0.2)"), 1.3, {0.5, 0.5}).residual < 1e-9);
}

TEST_CASE("torus double integral")
{
    CHECK(lemma6Residual(FunctionModel::constant(5.0), 64).residual < 1e-12);
    CHECK(lemma6Residual(rat(0.5, {{0.0, 1}}), 256).residual < 1e-9);
    const double coarse = lemma6Residual(FunctionModel::monomial(1), 256).residual;
    const double fine = lemma6Residual(FunctionModel::monomial(1), 1024).residual;
    CHECK(fine < 1e-3);
    CHECK(fine <= coarse + 1e-12);
}

TEST_CASE("first fundamental theorem")
{
    for (AnnulusWindow w : {AnnulusWindow{2.0, 3.0}, AnnulusWindow{5.0, 1.5}}) {
        const FftReport sq = fft(FunctionModel::monomial(2), 0.0, w);
        CHECK(std::abs(sq.lhs - 2.0 * std::log(w.tau)) < 1e-12);
        CHECK(std::abs(sq.T - (std::log(w.tau) + std::log(w.r))) < 1e-12);
        CHECK(std::abs(sq.eps1) < 1e-12);
        CHECK(std::abs(sq.eps2 - 1.0) < 1e-12);
        CHECK(std::abs(sq.identityResidual) < 1e-12);

        const FftReport z = fft(FunctionModel::monomial(1), 0.0, w);
        CHECK(std::abs(z.eps2 - 0.5) < 1e-12);
        CHECK(std::abs(z.identityResidual) < 1e-12);
    }
    for (double re = -3.0; re <= 3.0; re += 1.5) {
        for (double im = -3.0; im <= 3.0; im += 1.5) {
            const Complex a{re, im};
            try {
                const FftReport rep = fft(kMobius, a, {2.0, 5.0});
                CHECK(std::abs(rep.identityResidual) < 1e-7);
                CHECK(std::abs(rep.eps1) <= rep.eps1Bound + 1e-9);
                CHECK(rep.eps1Bound == doctest::Approx(4.0 * std::max(0.0, std::log(std::abs(a))) + 4.0 * std::log(2.0)));
            } catch (const BoundaryRootError&) {
            }
        }
    }
    CHECK(std::abs(fft(kMobius, 0.0, {2.0, 3.0}).eps1) < 1e-12);
    CHECK_THROWS_AS(fft(FunctionModel::monomial(1), 2.0, {1.0, 2.0}), BoundaryRootError);
}

TEST_CASE("classical characteristic")
{
    for (double r : {1.0, 2.0, 5.0}) {
        CHECK(std::abs(classicalT(FunctionModel::monomial(2), r).value - 2.0 * std::log(r)) < 1e-12);
        CHECK(std::abs(classicalT(FunctionModel::monomial(-1), r).value - std::log(r)) < 1e-12);
    }
    const double expected = bruteProximity(kMobius, 4.0) + std::log(8.0);
    CHECK(std::abs(classicalT(kMobius, 4.0).value - expected) < 1e-8);
}

TEST_CASE("Theorem 1 scan")
{
    const std::vector<double> grid{1.0, std::exp(0.5), M_E, std::exp(1.5), std::exp(2.0)};
    QuadConfig cfg;
    cfg.jobs = 4;
    for (const FunctionModel& f : {FunctionModel::monomial(2), FunctionModel::constant(3.0), kMobius}) {
        const Theorem1Report rep = theorem1Scan(f, grid, grid, cfg);
        REQUIRE(rep.checks.size() == 9);
        for (const Theorem1Check& c : rep.checks) {
            INFO(c.name, " worst ", c.worst, " tol ", c.tolerance, " at ", c.where);
            CHECK(c.pass);
        }
        CHECK(rep.allPass());
        CHECK(rep.T.size() == grid.size() * grid.size());
    }
    const Theorem1Report sq = theorem1Scan(FunctionModel::monomial(2), grid, grid, cfg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            CHECK(std::abs(sq.T[i * grid.size() + j] - (std::log(grid[i]) + std::log(grid[j]))) < 1e-8);
        }
    }
}

TEST_CASE("Theorem 1 scan reports a violated check")
{
    const std::vector<double> grid{1.0, 2.0, 4.0};
    Theorem1Options opts;
    opts.baseTol = -1.0;  // impossible tolerance: every applicable check must fail
    const Theorem1Report rep = theorem1Scan(FunctionModel::monomial(1), grid, grid, {}, opts);
    CHECK_FALSE(rep.allPass());
    for (const Theorem1Check& c : rep.checks) {
        if (c.applicable) {
            CHECK_FALSE(c.pass);
            CHECK_FALSE(c.where.empty());
        }
    }
}
