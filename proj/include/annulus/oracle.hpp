#pragma once

// Exact reference computations for rational models. Nothing here touches
// quadrature; these are the ground truth the contour paths are checked
// against.

#include "annulus/function.hpp"
#include "annulus/window.hpp"

#include <optional>
#include <span>
#include <vector>

namespace annulus {

/// Polynomial with ascending-degree coefficients; trailing zeros stripped.
class PolyCoeffs {
public:
    PolyCoeffs() = default;
    explicit PolyCoeffs(std::vector<Complex> ascending);

    /// prod (z - r_i) * lead.
    static PolyCoeffs fromRoots(std::span<const Complex> roots, Complex lead = {1.0, 0.0});

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }

    Complex operator()(Complex z) const;
    Complex derivativeAt(Complex z) const;

    PolyCoeffs operator-(const PolyCoeffs& other) const;
    PolyCoeffs operator*(Complex c) const;

    /// Drops leading coefficients smaller than relTol * max|c_k|.
    PolyCoeffs trimmed(double relTol) const;

private:
    std::vector<Complex> coeffs_;
};

struct RootSolve {
    std::vector<Complex> roots;
    std::vector<double> residuals;  // |p(root)| per root
    int iterations = 0;
    bool converged = false;
};

/// Aberth-Ehrlich simultaneous iteration. Converged when every step is below
/// 1e-13 * (1 + |root|); gives up after 500 sweeps and returns the best iterate.
RootSolve polyRoots(const PolyCoeffs& p);

struct APointSolve {
    std::vector<Complex> points;  // with multiplicity
    bool degreeDrop = false;      // some a-points escaped to infinity
    bool converged = true;
};

/// Roots of numerator(f) - a * denominator(f). Throws std::invalid_argument for
/// non-rational models and when f - a vanishes identically.
APointSolve solveAPoints(const FunctionModel& f, Complex a);

/// Same, on a factor list directly.
APointSolve solveAPoints(Complex scale, std::span<const RootFactor> factors, Complex a);

/// Numerator and denominator of a factor list as expanded polynomials
/// (numerator carries the scale).
std::pair<PolyCoeffs, PolyCoeffs> expandRational(Complex scale, std::span<const RootFactor> factors);

/// Moduli compare against 1 (and the window radii) with this tolerance.
inline constexpr double kModulusTol = 1e-12;

/// 2 * (sum of multiplicities with |root| < t) + (sum with |root| = t).
int exactIndex(std::span<const RootFactor> factors, double t);

struct ExactNResult {
    double value = 0.0;
    bool boundaryFlag = false;  // a pole sits within kModulusTol of 1/tau or r
};

/// Closed-form N(tau, r; f) from the pole list (negative multiplicities).
ExactNResult exactN(std::span<const RootFactor> factors, const AnnulusWindow& w);

/// Classical counting function N(r, f) for a model meromorphic at the origin.
double classicalN(std::span<const RootFactor> factors, double r);

/// Rational model of 1/(f - a) for rational f: the a-points become simple
/// poles and the poles of f become zeros.
FunctionModel reciprocalShift(const FunctionModel& f, Complex a, APointSolve* solve = nullptr);

/// Factored form of an expression tree built from z, constants, + - * /,
/// integer powers and exp of constants. Sums are expanded and their numerator
/// roots found numerically; roots closer than 1e-6 relative are merged into one
/// multiple root. Returns the model unchanged when it is already rational and
/// absent when the tree is not rational (or is identically zero).
std::optional<FunctionModel> rationalForm(const FunctionModel& f);

}  // namespace annulus
