#pragma once

// The two-parameter characteristic T(tau, r; f) on the annulus {1/tau < |z| < r}
// and the identities it satisfies.
//
//   T(tau, r; f) = N(tau, r; f) + m(tau, r; f) + c_f log(tau / r)
//   m(tau, r; f) = m(1/tau, f) + m(r, f) - 2 m(1, f)
//   N(tau, r; f) = sum over poles b of f in the annulus of
//                    log(tau |b|)        1/tau < |b| < 1
//                    log(r / |b|)        1 < |b| < r
//                    log sqrt(tau r)     |b| = 1
//   c_f = (1/2pi) int_{|f|>1} Im(f'/f dz) + (1/4pi) int_{|f|=1} Im(f'/f dz)
//
// All residual functions return the difference of two independently
// computed sides together with the accumulated quadrature error estimate.

#include "annulus/function.hpp"
#include "annulus/quadrature.hpp"
#include "annulus/window.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace annulus {

struct Measured {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

struct CountingOptions {
    enum class Route { Auto, Exact, Jumps };
    Route route = Route::Auto;
    /// Pole list (with repetition) for expression models. Without it an
    /// expression must be pole-free on the window, otherwise N is unsupported.
    std::optional<std::vector<Complex>> poles;
};

/// m(t, f) = (1/2pi) int log+|f(t e^{i theta})| d theta, integrated over the
/// arcs where |f| > 1. Poles of a rational model on the circle are split out
/// as integrable endpoint singularities; `singularAngles` adds more.
Measured proximity(const FunctionModel& f, double t, const QuadConfig& cfg = {},
                   std::span<const double> singularAngles = {});

/// (1/2pi) int log|f(t e^{i theta})| d theta.
Measured circleLogMean(const FunctionModel& f, double t, const QuadConfig& cfg = {});

Measured proximityAnnulus(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg = {});

/// N(tau, r; f). Rational models use the closed form; the Jumps route finds
/// pole radii of a model through locateJumpRadii on 1/f (it cannot separate a
/// zero and a pole sharing a modulus).
Measured countingN(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg = {},
                   const CountingOptions& opts = {});

/// c_f. Throws BoundaryRootError for an isolated zero or pole on |z| = 1.
Measured cConstant(const FunctionModel& f, const QuadConfig& cfg = {});

struct CharacteristicReport {
    double N = 0.0;
    double mInner = 0.0;    // m(1/tau, f)
    double mOuter = 0.0;    // m(r, f)
    double mUnit = 0.0;     // m(1, f)
    double mAnnulus = 0.0;  // mInner + mOuter - 2 mUnit
    double cf = 0.0;
    double T = 0.0;
    AnnulusWindow window;
    double quadError = 0.0;
    bool converged = true;
};

/// Evaluates T for one function over many windows, caching m(t, f) per
/// radius and c_f. Not safe for concurrent use; prefetch() fills the cache in
/// parallel (cfg.jobs) ahead of time.
class CharacteristicEvaluator {
public:
    explicit CharacteristicEvaluator(FunctionModel f, QuadConfig cfg = {}, CountingOptions opts = {});

    const FunctionModel& function() const { return f_; }

    void prefetch(std::span<const double> radii);

    Measured proximityAt(double t);
    Measured cf();
    CharacteristicReport at(const AnnulusWindow& w);

private:
    FunctionModel f_;
    QuadConfig cfg_;
    CountingOptions opts_;
    std::map<double, Measured> proximity_;
    std::optional<Measured> cf_;
};

CharacteristicReport characteristic(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg = {},
                                    const CountingOptions& opts = {});

struct ResidualReport {
    double residual = 0.0;
    double quadError = 0.0;
};

/// int_s^r nu(t, f)/t dt against (1/pi) int log|f(r e^{i theta})| - (same at s).
ResidualReport jensenV1Residual(const FunctionModel& f, double s, double r, const QuadConfig& cfg = {});

/// N(tau,r;1/f) - N(tau,r;f) against the three circle means of log|f| plus
/// nu(1, f) log sqrt(tau/r).
ResidualReport jensenV2Residual(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg = {},
                                const CountingOptions& opts = {});

/// Weight of an a-point of modulus rho in N(tau, r; .).
double countingWeight(double rho, const AnnulusWindow& w);

/// (1/2pi) int_0^{2pi} F(a-points of f = e^{i phi}) d phi for rational f.
/// The circle is cut into nPanels equal panels, each integrated by adaptive
/// Gauss-Kronrod (7/15). Panels are also split at jumpAngles, the angles
/// where F is known to jump (a-points crossing a circle); other jumps are
/// left to bisection down to 1e-13 rad.
Measured unitValueAverage(const FunctionModel& f, const std::function<double(std::span<const Complex>)>& F,
                          int nPanels, const QuadConfig& cfg = {}, std::span<const double> jumpAngles = {});

/// |T(tau, r; f) - (1/2pi) int N(tau, r; 1/(f - e^{i phi})) d phi|.
ResidualReport cartanResidual(const FunctionModel& f, const AnnulusWindow& w, int nPhi, const QuadConfig& cfg = {});

/// |(1/4pi) (2pi/nPhi) sum_j nu(1, f - e^{i phi_j}) - c_f|.
ResidualReport lemma4Residual(const FunctionModel& f, int nPhi, const QuadConfig& cfg = {});

/// nu(t, f - zeta) against nu(t, f) - (1/pi) int Im(zeta f'/(f (zeta - f)) dz).
ResidualReport lemma5Residual(const FunctionModel& f, double t, Complex zeta, const QuadConfig& cfg = {});

/// Product-trapezoid double integral over the torus against the arc integrals
/// over {|f| < 1} and {|f| = 1}. Grid points with |f(z) - zeta| < 1e-8 are skipped.
ResidualReport lemma6Residual(const FunctionModel& f, int nGrid, const QuadConfig& cfg = {});

struct FftReport {
    Complex a;
    double lhs = 0.0;  // N(tau,r;1/(f-a)) + m(tau,r;1/(f-a))
    double T = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double eps1Bound = 0.0;  // 4 log+|a| + 4 log 2
    double identityResidual = 0.0;  // lhs - (T + eps1 + eps2 log(tau/r))
    double quadError = 0.0;
    AnnulusWindow window;
};

/// First fundamental theorem terms for a rational model. Throws
/// BoundaryRootError when an a-point lies on |z| = 1/tau or |z| = r.
FftReport fft(const FunctionModel& f, Complex a, const AnnulusWindow& w, const QuadConfig& cfg = {});

/// Classical Nevanlinna characteristic m(r, f) + N(r, f) for a rational model.
Measured classicalT(const FunctionModel& f, double r, const QuadConfig& cfg = {});

struct Theorem1Check {
    std::string name;
    double worst = 0.0;      // largest violation (or residual) seen
    double tolerance = 0.0;  // tolerance at the worst point
    bool pass = true;
    bool applicable = true;
    std::string where;  // offending grid point
};

struct Theorem1Report {
    std::vector<double> taus;
    std::vector<double> rs;
    std::vector<double> T;  // row-major, tau outer
    std::vector<Theorem1Check> checks;

    bool allPass() const;
};

struct Theorem1Options {
    double baseTol = 1e-6;
    int nPhi = 512;
    double logStep = 1e-6;  // finite-difference step in log tau / log r
};

/// Checks nonnegativity, monotonicity and log-convexity in each variable,
/// T(1/f) = T(f), nu(1,f)/2 = c_f - c_{1/f}, the classical sandwich on the
/// diagonal, and the Euler-derivative identity against averaged a-point
/// counts. Grids must be increasing and >= 1.
Theorem1Report theorem1Scan(const FunctionModel& f, std::span<const double> taus, std::span<const double> rs,
                            const QuadConfig& cfg = {}, const Theorem1Options& opts = {});

}  // namespace annulus
