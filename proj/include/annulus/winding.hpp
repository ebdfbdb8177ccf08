#pragma once

// Circle index nu(t, f) and argument-principle counting on annuli.

#include "annulus/function.hpp"
#include "annulus/quadrature.hpp"

#include <span>
#include <utility>
#include <vector>

namespace annulus {

struct IndexResult {
    int value = 0;
    double raw = 0.0;  // (1/pi) * integral before rounding
    QuadratureResult quad;
};

/// Integrality slack on the raw index.
inline constexpr double kIntegralitySlack = 0.05;

/// Quadrature route: raw = (1/pi) * periodicIntegrate(Re(z f'/f)).
/// Throws IntegralityError when raw is more than 0.05 from an integer or the
/// quadrature failed to converge.
IndexResult indexQuadrature(const FunctionModel& f, double t, const QuadConfig& cfg = {});

/// nu(t, f). Rational models with a root on the circle go to exactIndex;
/// expression models whose quadrature breaks down are evaluated at
/// t(1 -+ 1e-4) and the midpoint is returned (half weight for on-circle roots).
int index(const FunctionModel& f, double t, const QuadConfig& cfg = {});

/// Exact index from a factor list (counts an on-circle root once, interior twice).
int exactIndex(const FunctionModel& f, double t);

/// Zero and pole counts with multiplicity.
struct CountingData {
    double inner = 0.0;
    double outer = 0.0;
    int zerosInterior = 0;
    int polesInterior = 0;
    int zerosOnUnitCircle = 0;
    int polesOnUnitCircle = 0;
    bool exact = false;
};

/// Solutions of f(z) = a in {s < |z| < r}, reported as zerosInterior.
/// Rational models: polynomial a-points (exact = true); the a-points on the
/// unit circle are reported in zerosOnUnitCircle and the poles of f as
/// polesInterior / polesOnUnitCircle. Expression models: (nu(r) - nu(s)) / 2,
/// valid only when f is pole-free in the closed annulus. Throws
/// BoundaryRootError for an a-point on either boundary circle.
CountingData countAPoints(const FunctionModel& f, Complex a, double s, double r, const QuadConfig& cfg = {});

struct JumpRadius {
    double radius;
    int jump;  // (nu just outside - nu just inside) / 2
};

/// Radii in (tmin, tmax) where nu(t, f - a) changes, found by bisection on
/// the quadrature index and finished by Newton polishing of the roots.
/// Radii are accurate to about 1e-10 relative.
std::vector<JumpRadius> locateJumpRadii(const FunctionModel& f, Complex a, double tmin, double tmax,
                                        const QuadConfig& cfg = {});

/// Whether an expression model is pole-free on the closed annulus s <= |z| <= r.
/// Poles can only come from Div and negative IntPow nodes; each denominator
/// that is itself pole-free has its zeros counted by the argument principle.
/// Returns false when a pole is found or the nesting cannot be resolved.
/// Rational models answer from their factor list.
bool poleFreeOn(const FunctionModel& f, double s, double r, const QuadConfig& cfg = {});

/// Residuals (left - right) of the two argument-principle relations at radii
/// t and 1/t for a rational model; both must be zero. Throws
/// BoundaryRootError for a zero or pole on |z| = t or |z| = 1/t.
std::pair<int, int> checkEq12Eq13(const FunctionModel& f, double t);

}  // namespace annulus
