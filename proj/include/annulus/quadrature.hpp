#pragma once

// Quadrature on circles |z| = t centred at the origin.

#include "annulus/function.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace annulus {

struct QuadConfig {
    double tol = 1e-10;
    std::int64_t maxNodes = std::int64_t{1} << 20;
    double unitTol = 1e-9;             // ||f| - 1| threshold for Zero arcs
    double singularityPadding = 1e-4;  // radians excluded around a singular sample
    unsigned jobs = 1;                 // worker threads for grid / phi sweeps
};

struct QuadratureResult {
    double value = 0.0;
    double errorEstimate = 0.0;
    std::int64_t nodes = 0;
    bool nearSingular = false;
    bool converged = true;
};

/// Angle -> value; std::nullopt (or a non-finite value) marks a singular sample.
using AngleSampler = std::function<std::optional<double>(double)>;

/// Periodic trapezoid on [0, 2pi) with node doubling from 64.
///
/// Stops once successive levels differ by less than tol * max(1, |value|).
/// A singular node is dropped and its panel is integrated on 8 geometrically
/// graded sub-panels per side that stop `singularityPadding` short of the
/// singular angle; the excluded measure is added to `errorEstimate`.
QuadratureResult periodicIntegrate(const AngleSampler& g, const QuadConfig& cfg = {});

/// Sum of integrals of g over the given [start, end) angle ranges. Each range is
/// split at the listed singular angles and integrated by tanh-sinh, which
/// tolerates integrable endpoint singularities.
QuadratureResult arcIntegrate(const AngleSampler& g, std::span<const std::pair<double, double>> arcs,
                              const QuadConfig& cfg = {}, std::span<const double> singularAngles = {});

enum class ArcLabel { Plus, Zero, Minus };

struct Arc {
    double start;
    double end;
    ArcLabel label;
};

/// Circle split by |f| against 1. Arcs are sorted and cover [0, 2pi); when the
/// run through angle 0 wraps around, the first and last arcs share a label.
struct ArcPartition {
    double radius = 1.0;
    std::vector<Arc> arcs;

    std::vector<std::pair<double, double>> ranges(ArcLabel label) const;
    double measure(ArcLabel label) const;
};

inline constexpr int kClassifySamples = 4096;

/// Labels 4096 equispaced samples of |f(t e^{i theta})| and refines every label
/// change by bisection to 1e-13 rad. Isolated Zero samples join a neighbour.
ArcPartition classifyCircle(const FunctionModel& f, double t, const QuadConfig& cfg = {});

/// theta -> Im(f'/f dz / dtheta) = Re(z f'(z)/f(z)) on |z| = t.
AngleSampler argumentRateSampler(const FunctionModel& f, double t);

/// theta -> log|f(t e^{i theta})|.
AngleSampler logAbsSampler(const FunctionModel& f, double t);

}  // namespace annulus
