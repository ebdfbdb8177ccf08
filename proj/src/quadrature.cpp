#include "annulus/quadrature.hpp"

#include "annulus/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace annulus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kInitialNodes = 64;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGlNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                         -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

std::optional<double> sample(const AngleSampler& g, double theta)
{
    std::optional<double> v;
    try {
        v = g(theta);
    } catch (const SingularPointError&) {
        return std::nullopt;
    }
    if (v && !std::isfinite(*v)) {
        return std::nullopt;
    }
    return v;
}

struct PanelPiece {
    double value = 0.0;
    double bias = 0.0;
    bool hitSingular = false;
};

// Integral of g over [s - h/2, s + h/2] minus the padding around s.
PanelPiece singularPanel(const AngleSampler& g, double s, double h, double pad)
{
    PanelPiece out;
    const double half = h / 2.0;
    const double excluded = std::min(pad, half);
    double edge = 0.0;
    for (int side : {-1, 1}) {
        if (auto v = sample(g, s + side * excluded)) {
            edge = std::max(edge, std::abs(*v));
        }
    }
    out.bias = 2.0 * excluded * (edge + 1.0);
    if (half <= pad) return out;
    constexpr int kSub = 8;
    for (int side : {-1, 1}) {
        for (int k = 0; k < kSub; ++k) {
            const double a = pad * std::pow(half / pad, static_cast<double>(k) / kSub);
            const double b = pad * std::pow(half / pad, static_cast<double>(k + 1) / kSub);
            const double mid = 0.5 * (a + b);
            const double rad = 0.5 * (b - a);
            for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                auto v = sample(g, s + side * (mid + rad * kGlNodes[q]));
                if (!v) {
                    out.hitSingular = true;
                    continue;
                }
                out.value += rad * kGlWeights[q] * *v;
            }
        }
    }
    return out;
}

constexpr int kMaxArcSplits = 12;

template <class Integrator, class F>
void tanhSinhPiece(Integrator& integrator, const F& integrand, double a, double b, double tol, int depth,
                   QuadratureResult& out)
{
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double v = integrator.integrate(integrand, a, b, tol, &error, &l1, &levels);
    const bool ok = error <= 10.0 * tol * std::max(1.0, l1);
    if (!ok && depth < kMaxArcSplits) {
        const double mid = 0.5 * (a + b);
        tanhSinhPiece(integrator, integrand, a, mid, tol, depth + 1, out);
        tanhSinhPiece(integrator, integrand, mid, b, tol, depth + 1, out);
        return;
    }
    out.value += v;
    out.errorEstimate += error;
    out.nodes += static_cast<std::int64_t>(std::size_t{12} << levels);
    if (!ok) out.converged = false;
}

}  // namespace

QuadratureResult periodicIntegrate(const AngleSampler& g, const QuadConfig& cfg)
{
    QuadratureResult out;
    std::vector<double> singular;
    double regularSum = 0.0;

    auto visit = [&](double theta) {
        if (auto v = sample(g, theta)) {
            regularSum += *v;
        } else {
            singular.push_back(theta);
        }
    };

    auto levelValue = [&](std::int64_t n, double& bias) {
        const double h = kTwoPi / static_cast<double>(n);
        double value = h * regularSum;
        bias = 0.0;
        for (double s : singular) {
            PanelPiece p = singularPanel(g, s, h, cfg.singularityPadding);
            value += p.value;
            bias += p.bias;
        }
        return value;
    };

    std::int64_t n = kInitialNodes;
    for (std::int64_t k = 0; k < n; ++k) {
        visit(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    }
    double bias = 0.0;
    double previous = levelValue(n, bias);
    out.value = previous;
    out.nodes = n;
    out.converged = false;

    while (2 * n <= cfg.maxNodes) {
        const std::int64_t next = 2 * n;
        for (std::int64_t k = 1; k < next; k += 2) {
            visit(kTwoPi * static_cast<double>(k) / static_cast<double>(next));
        }
        n = next;
        out.value = levelValue(n, bias);
        out.nodes = n;
        const double delta = std::abs(out.value - previous);
        out.errorEstimate = delta;
        previous = out.value;
        if (delta < cfg.tol * std::max(1.0, std::abs(out.value))) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        out.converged = out.errorEstimate <= 10.0 * cfg.tol * std::max(1.0, std::abs(out.value));
    }
    out.nearSingular = !singular.empty();
    out.errorEstimate += bias;
    return out;
}

QuadratureResult arcIntegrate(const AngleSampler& g, std::span<const std::pair<double, double>> arcs,
                              const QuadConfig& cfg, std::span<const double> singularAngles)
{
    QuadratureResult out;
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    bool hitSingular = false;
    auto integrand = [&](double theta) {
        auto v = sample(g, theta);
        if (!v) {
            hitSingular = true;
            return 0.0;
        }
        return *v;
    };

    for (auto [start, end] : arcs) {
        if (!(end > start)) continue;
        std::vector<double> cuts{start};
        for (double s : singularAngles) {
            // Singular angles are compared modulo 2pi against the range.
            for (double shifted : {s - kTwoPi, s, s + kTwoPi}) {
                if (shifted > start && shifted < end) cuts.push_back(shifted);
            }
        }
        cuts.push_back(end);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k];
            const double b = cuts[k + 1];
            if (!(b > a)) continue;
            // Pieces no longer than 2pi/16; a piece that misses the tolerance is halved.
            const int pieces = static_cast<int>(std::ceil((b - a) / (kTwoPi / 16.0)));
            for (int p = 0; p < pieces; ++p) {
                const double lo = a + (b - a) * p / pieces;
                const double hi = p + 1 == pieces ? b : a + (b - a) * (p + 1) / pieces;
                tanhSinhPiece(integrator, integrand, lo, hi, cfg.tol, 0, out);
            }
        }
    }
    out.nearSingular = hitSingular || !singularAngles.empty();
    return out;
}

std::vector<std::pair<double, double>> ArcPartition::ranges(ArcLabel label) const
{
    std::vector<std::pair<double, double>> out;
    for (const Arc& a : arcs) {
        if (a.label == label) out.emplace_back(a.start, a.end);
    }
    return out;
}

double ArcPartition::measure(ArcLabel label) const
{
    double total = 0.0;
    for (const Arc& a : arcs) {
        if (a.label == label) total += a.end - a.start;
    }
    return total;
}

ArcPartition classifyCircle(const FunctionModel& f, double t, const QuadConfig& cfg)
{
    auto labelAt = [&](double theta) {
        double modulus = 0.0;
        try {
            modulus = std::abs(f.eval(std::polar(t, theta)));
        } catch (const SingularPointError&) {
            return ArcLabel::Plus;
        }
        if (!std::isfinite(modulus)) {
            return ArcLabel::Plus;
        }
        const double d = modulus - 1.0;
        if (std::abs(d) < cfg.unitTol) return ArcLabel::Zero;
        return d > 0.0 ? ArcLabel::Plus : ArcLabel::Minus;
    };

    auto rawSide = [&](double theta) {
        try {
            const double modulus = std::abs(f.eval(std::polar(t, theta)));
            return std::isfinite(modulus) && modulus <= 1.0 ? ArcLabel::Minus : ArcLabel::Plus;
        } catch (const SingularPointError&) {
            return ArcLabel::Plus;
        }
    };

    constexpr int n = kClassifySamples;
    const double h = kTwoPi / n;
    std::vector<ArcLabel> labels(n);
    for (int k = 0; k < n; ++k) {
        labels[static_cast<std::size_t>(k)] = labelAt(h * k);
    }
    auto at = [&](int k) -> ArcLabel& { return labels[static_cast<std::size_t>((k % n + n) % n)]; };

    // Isolated Zero samples are crossings of |f| = 1, not arcs.
    std::vector<ArcLabel> copy = labels;
    for (int k = 0; k < n; ++k) {
        const ArcLabel prev = copy[static_cast<std::size_t>((k + n - 1) % n)];
        const ArcLabel next = copy[static_cast<std::size_t>((k + 1) % n)];
        if (copy[static_cast<std::size_t>(k)] == ArcLabel::Zero && prev != ArcLabel::Zero &&
            next != ArcLabel::Zero) {
            at(k) = prev;
        }
    }

    ArcPartition out;
    out.radius = t;
    std::vector<std::pair<double, ArcLabel>> boundaries;  // angle, label after it
    for (int k = 0; k < n; ++k) {
        const ArcLabel a = at(k);
        const ArcLabel b = at(k + 1);
        if (a == b) continue;
        double lo = h * k;
        double hi = h * (k + 1);
        // A direct Plus/Minus change is located on the sign of |f| - 1 itself.
        const bool crossing = a != ArcLabel::Zero && b != ArcLabel::Zero;
        auto side = [&](double theta) { return crossing ? rawSide(theta) : labelAt(theta); };
        while (hi - lo > 1e-13) {
            const double mid = 0.5 * (lo + hi);
            if (side(mid) == a) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        boundaries.emplace_back(0.5 * (lo + hi), b);
    }
    if (boundaries.empty()) {
        out.arcs.push_back({0.0, kTwoPi, labels.front()});
        return out;
    }
    double start = 0.0;
    ArcLabel current = labels.front();
    for (auto [angle, next] : boundaries) {
        const double cut = std::min(angle, kTwoPi);
        if (cut > start) out.arcs.push_back({start, cut, current});
        start = cut;
        current = next;
    }
    if (start < kTwoPi) {
        out.arcs.push_back({start, kTwoPi, current});
    }
    return out;
}

AngleSampler argumentRateSampler(const FunctionModel& f, double t)
{
    return [&f, t](double theta) -> std::optional<double> {
        const Complex z = std::polar(t, theta);
        return (z * f.logDeriv(z)).real();
    };
}

AngleSampler logAbsSampler(const FunctionModel& f, double t)
{
    return [&f, t](double theta) -> std::optional<double> {
        return std::log(std::abs(f.eval(std::polar(t, theta))));
    };
}

}  // namespace annulus
