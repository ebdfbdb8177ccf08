#include "annulus/winding.hpp"

#include "annulus/errors.hpp"
#include "annulus/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace annulus {

namespace {

constexpr double kMidpointOffset = 1e-4;  // relative radius offset for on-circle expression roots
constexpr double kBracketWidth = 1e-3;    // relative width before Newton polishing
constexpr double kSameModulus = 1e-9;
constexpr double kBisectionFloor = 1e-10;

bool hasRootNear(const RationalFactored& r, double t, double rel)
{
    return std::any_of(r.factors.begin(), r.factors.end(),
                       [&](const RootFactor& f) { return std::abs(std::abs(f.root) - t) <= rel * t; });
}

// Index by quadrature at t; on failure retries at nearby radii inside (lo, hi).
struct Probe {
    double radius;
    int nu;
};

// Index at t, or at a nearby radius inside (lo, hi) when t is too close to a root.
std::optional<Probe> robustIndex(const FunctionModel& g, double t, double lo, double hi, const QuadConfig& cfg)
{
    static constexpr double kNudges[] = {0.0, 0.137, -0.211, 0.293, -0.347, 0.419};
    for (double nudge : kNudges) {
        const double candidate = t * std::pow(hi / lo, nudge * 0.5);
        if (nudge != 0.0 && (candidate <= lo || candidate >= hi)) continue;
        try {
            return Probe{candidate, indexQuadrature(g, candidate, cfg).value};
        } catch (const Error&) {
        }
    }
    return std::nullopt;
}

// Newton iteration for a zero (sign = +1) or a pole (sign = -1) of g.
std::optional<Complex> newtonPolish(const FunctionModel& g, Complex z, int sign)
{
    for (int it = 0; it < 200; ++it) {
        Complex ld;
        try {
            ld = g.logDeriv(z);
        } catch (const SingularPointError&) {
            return z;  // landed on the root
        }
        if (ld == Complex{}) return std::nullopt;
        const Complex step = static_cast<double>(sign) / ld;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) return z;
    }
    return z;
}

// Moduli of zeros and poles of g near the circle |z| = t (local extrema of |g|).
std::vector<double> nearbyRootModuli(const FunctionModel& g, double lo, double hi)
{
    constexpr int kSamples = 512;
    const double t = std::sqrt(lo * hi);
    std::vector<double> logAbs(kSamples);
    for (int k = 0; k < kSamples; ++k) {
        try {
            logAbs[static_cast<std::size_t>(k)] =
                std::log(std::abs(g.eval(std::polar(t, 2.0 * std::numbers::pi * k / kSamples))));
        } catch (const SingularPointError&) {
            logAbs[static_cast<std::size_t>(k)] = std::numeric_limits<double>::infinity();
        }
    }
    std::vector<double> moduli;
    auto at = [&](int k) { return logAbs[static_cast<std::size_t>((k + kSamples) % kSamples)]; };
    for (int k = 0; k < kSamples; ++k) {
        const double v = at(k);
        for (int sign : {1, -1}) {
            // sign = +1: local minimum of |g| (zero); sign = -1: local maximum (pole).
            if (sign * v <= sign * at(k - 1) && sign * v < sign * at(k + 1)) {
                const Complex start = std::polar(t, 2.0 * std::numbers::pi * k / kSamples);
                if (auto z = newtonPolish(g, start, sign)) {
                    const double m = std::abs(*z);
                    if (m >= lo * (1.0 - 1e-9) && m <= hi * (1.0 + 1e-9)) moduli.push_back(m);
                }
            }
        }
    }
    std::sort(moduli.begin(), moduli.end());
    return moduli;
}

struct Bracket {
    double lo, hi;
    int nuLo, nuHi;
};

void refineBracket(const FunctionModel& g, Bracket b, const QuadConfig& cfg, std::vector<JumpRadius>& out, int depth)
{
    if (b.nuLo == b.nuHi) return;
    if (depth > 80) {
        throw IntegralityError("jump radius bisection did not terminate", 0.0);
    }
    if (b.hi / b.lo - 1.0 > kBracketWidth) {
        const double mid = std::sqrt(b.lo * b.hi);
        auto probe = robustIndex(g, mid, b.lo, b.hi, cfg);
        if (!probe) {
            throw IntegralityError("index failed inside jump bracket", mid);
        }
        refineBracket(g, {b.lo, probe->radius, b.nuLo, probe->nu}, cfg, out, depth + 1);
        refineBracket(g, {probe->radius, b.hi, probe->nu, b.nuHi}, cfg, out, depth + 1);
        return;
    }

    std::vector<double> moduli = nearbyRootModuli(g, b.lo, b.hi);
    // Group moduli that agree to kSameModulus.
    std::vector<double> groups;
    for (double m : moduli) {
        if (groups.empty() || m > groups.back() * (1.0 + kSameModulus)) {
            groups.push_back(m);
        }
    }
    if (groups.empty() && b.hi / b.lo - 1.0 > kBisectionFloor) {
        // Polishing found nothing; fall back to plain bisection.
        const double mid = std::sqrt(b.lo * b.hi);
        auto probe = robustIndex(g, mid, b.lo, b.hi, cfg);
        if (!probe) {
            throw IntegralityError("index failed inside jump bracket", mid);
        }
        refineBracket(g, {b.lo, probe->radius, b.nuLo, probe->nu}, cfg, out, depth + 1);
        refineBracket(g, {probe->radius, b.hi, probe->nu, b.nuHi}, cfg, out, depth + 1);
        return;
    }
    if (groups.size() <= 1) {
        const double radius = groups.empty() ? std::sqrt(b.lo * b.hi) : groups.front();
        out.push_back({radius, (b.nuHi - b.nuLo) / 2});
        return;
    }
    // Several distinct moduli: split between them and recurse.
    int nuLo = b.nuLo;
    for (std::size_t k = 0; k + 1 < groups.size(); ++k) {
        const double cut = std::sqrt(groups[k] * groups[k + 1]);
        auto probe = robustIndex(g, cut, groups[k], groups[k + 1], cfg);
        if (!probe) {
            throw IntegralityError("index failed between clustered roots", cut);
        }
        if (probe->nu != nuLo) {
            out.push_back({groups[k], (probe->nu - nuLo) / 2});
        }
        nuLo = probe->nu;
    }
    if (nuLo != b.nuHi) {
        out.push_back({groups.back(), (b.nuHi - nuLo) / 2});
    }
}

void collectDenominators(const ExprPtr& e, std::vector<ExprPtr>& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Add> || std::is_same_v<T, node::Sub> ||
                          std::is_same_v<T, node::Mul>) {
                collectDenominators(n.lhs, out);
                collectDenominators(n.rhs, out);
            } else if constexpr (std::is_same_v<T, node::Div>) {
                collectDenominators(n.lhs, out);
                collectDenominators(n.rhs, out);
                out.push_back(n.rhs);
            } else if constexpr (std::is_same_v<T, node::IntPow>) {
                collectDenominators(n.base, out);
                if (n.exponent < 0) out.push_back(n.base);
            } else if constexpr (std::is_same_v<T, node::Exp> || std::is_same_v<T, node::Neg>) {
                collectDenominators(n.arg, out);
            }
        },
        e->value);
}

}  // namespace

IndexResult indexQuadrature(const FunctionModel& f, double t, const QuadConfig& cfg)
{
    IndexResult out;
    out.quad = periodicIntegrate(argumentRateSampler(f, t), cfg);
    out.raw = out.quad.value / std::numbers::pi;
    if (out.quad.nearSingular) {
        throw IntegralityError("zero or pole on the circle", out.raw);
    }
    const double rounded = std::round(out.raw);
    if (!out.quad.converged || std::abs(out.raw - rounded) > kIntegralitySlack) {
        throw IntegralityError("circle index is not integral (root near the circle?)", out.raw);
    }
    out.value = static_cast<int>(rounded);
    return out;
}

int exactIndex(const FunctionModel& f, double t)
{
    auto factors = f.exactZerosPoles();
    if (!factors) {
        throw UnsupportedError("exactIndex needs a rational model");
    }
    return annulus::exactIndex(std::span<const RootFactor>(*factors), t);
}

int index(const FunctionModel& f, double t, const QuadConfig& cfg)
{
    if (f.isRational()) {
        if (hasRootNear(f.asRational(), t, 1e-9)) {
            return exactIndex(f, t);
        }
        try {
            return indexQuadrature(f, t, cfg).value;
        } catch (const IntegralityError&) {
            return exactIndex(f, t);
        }
    }
    try {
        return indexQuadrature(f, t, cfg).value;
    } catch (const Error&) {
        const int inside = indexQuadrature(f, t * (1.0 - kMidpointOffset), cfg).value;
        const int outside = indexQuadrature(f, t * (1.0 + kMidpointOffset), cfg).value;
        if ((outside - inside) % 2 != 0) {
            throw IntegralityError("odd index jump across the circle", 0.5 * (inside + outside));
        }
        return (inside + outside) / 2;
    }
}

CountingData countAPoints(const FunctionModel& f, Complex a, double s, double r, const QuadConfig& cfg)
{
    if (!(s < r) || !(s > 0.0)) {
        throw std::invalid_argument("countAPoints needs 0 < s < r");
    }
    CountingData out;
    out.inner = s;
    out.outer = r;
    if (f.isRational()) {
        out.exact = true;
        const RationalFactored& rf = f.asRational();
        auto onCircle = [](double m, double t) { return std::abs(m - t) <= kModulusTol * std::max(1.0, t); };
        if (!(rf.factors.empty() && rf.scale == a)) {
            for (Complex b : solveAPoints(f, a).points) {
                const double m = std::abs(b);
                if (onCircle(m, s) || onCircle(m, r)) {
                    throw BoundaryRootError("a-point on a boundary circle");
                }
                if (m > s && m < r) {
                    ++out.zerosInterior;
                    if (onCircle(m, 1.0)) ++out.zerosOnUnitCircle;
                }
            }
        }
        for (const RootFactor& p : rf.factors) {
            if (p.multiplicity >= 0) continue;
            const double m = std::abs(p.root);
            if (m > s && m < r) {
                out.polesInterior -= p.multiplicity;
                if (onCircle(m, 1.0)) out.polesOnUnitCircle -= p.multiplicity;
            }
        }
        return out;
    }
    if (!poleFreeOn(f, s, r, cfg)) {
        throw UnsupportedError("a-point counting for an expression with poles in the annulus");
    }
    const FunctionModel g = f.shift(a);
    int nuOuter = 0;
    int nuInner = 0;
    try {
        nuOuter = indexQuadrature(g, r, cfg).value;
        nuInner = indexQuadrature(g, s, cfg).value;
    } catch (const IntegralityError&) {
        throw BoundaryRootError("a-point on (or too near) a boundary circle");
    }
    out.zerosInterior = (nuOuter - nuInner) / 2;
    return out;
}

std::vector<JumpRadius> locateJumpRadii(const FunctionModel& f, Complex a, double tmin, double tmax,
                                        const QuadConfig& cfg)
{
    if (!(tmin > 0.0) || !(tmax > tmin)) {
        throw std::invalid_argument("locateJumpRadii needs 0 < tmin < tmax");
    }
    const FunctionModel g = f.shift(a);
    // About 64 log-spaced radii per doubling of t.
    const int n = std::max(64, static_cast<int>(std::ceil(64.0 * std::log2(tmax / tmin))));
    std::vector<double> radii(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        radii[static_cast<std::size_t>(k)] = tmin * std::pow(tmax / tmin, static_cast<double>(k) / n);
    }
    radii.back() = tmax;

    std::vector<int> nu(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (k == 0 || k + 1 == radii.size()) {
            nu[k] = indexQuadrature(g, radii[k], cfg).value;  // endpoints must be root-free
            continue;
        }
        auto v = robustIndex(g, radii[k], radii[k - 1], radii[k + 1], cfg);
        if (!v) {
            throw IntegralityError("index failed on the search grid", radii[k]);
        }
        radii[k] = v->radius;
        nu[k] = v->nu;
    }

    std::vector<JumpRadius> out;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
        refineBracket(g, {radii[k], radii[k + 1], nu[k], nu[k + 1]}, cfg, out, 0);
    }
    std::sort(out.begin(), out.end(), [](const JumpRadius& x, const JumpRadius& y) { return x.radius < y.radius; });
    return out;
}

bool poleFreeOn(const FunctionModel& f, double s, double r, const QuadConfig& cfg)
{
    if (f.isRational()) {
        for (const RootFactor& p : f.asRational().factors) {
            const double m = std::abs(p.root);
            if (p.multiplicity < 0 && m >= s * (1.0 - kModulusTol) && m <= r * (1.0 + kModulusTol)) {
                return false;
            }
        }
        return true;
    }
    std::vector<ExprPtr> denominators;
    collectDenominators(f.asExpression().tree, denominators);
    for (const ExprPtr& d : denominators) {
        const FunctionModel den = FunctionModel::expression(d);
        if (den.isConstant()) continue;
        if (!poleFreeOn(den, s, r, cfg)) return false;
        try {
            const int outer = indexQuadrature(den, r, cfg).value;
            const int inner = indexQuadrature(den, s, cfg).value;
            if (outer != inner) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

std::pair<int, int> checkEq12Eq13(const FunctionModel& f, double t)
{
    auto factors = f.exactZerosPoles();
    if (!factors) {
        throw UnsupportedError("argument-principle relations need a rational model");
    }
    if (t < 1.0) t = 1.0 / t;
    const double inv = 1.0 / t;
    if (t > 1.0) {
        for (const RootFactor& x : *factors) {
            const double m = std::abs(x.root);
            if (std::abs(m - t) <= kModulusTol * t || std::abs(m - inv) <= kModulusTol) {
                throw BoundaryRootError("a zero or pole lies on |z| = t or |z| = 1/t");
            }
        }
    }

    // n(s, r; f): poles of f in s < |z| < r; n(s, r; 1/f): zeros of f there.
    auto count = [&](double s, double r, int sign) {
        int total = 0;
        for (const RootFactor& x : *factors) {
            const double m = std::abs(x.root);
            if (sign * x.multiplicity > 0 && m > s * (1.0 + kModulusTol) && m < r * (1.0 - kModulusTol)) {
                total += std::abs(x.multiplicity);
            }
        }
        return total;
    };
    auto onUnit = [&](int sign) {
        int total = 0;
        for (const RootFactor& x : *factors) {
            if (sign * x.multiplicity > 0 && std::abs(std::abs(x.root) - 1.0) <= kModulusTol) {
                total += std::abs(x.multiplicity);
            }
        }
        return total;
    };
    const int zerosT = onUnit(+1);
    const int polesT = onUnit(-1);

    const int left12 = exactIndex(f, t) - exactIndex(f, 1.0);
    const int right12 = 2 * count(1.0, t, +1) + zerosT - 2 * count(1.0, t, -1) - polesT;
    const int left13 = exactIndex(f, 1.0) - exactIndex(f, inv);
    const int right13 = 2 * count(inv, 1.0, +1) + zerosT - 2 * count(inv, 1.0, -1) - polesT;
    return {left12 - right12, left13 - right13};
}

}  // namespace annulus
