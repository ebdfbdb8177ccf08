#include "annulus/characteristic.hpp"

#include "annulus/errors.hpp"
#include "annulus/oracle.hpp"
#include "annulus/parallel.hpp"
#include "annulus/winding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <memory>
#include <sstream>

namespace annulus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOnCircleRel = 1e-9;

// Angles of the roots (or only the poles) of a rational model on |z| = t.
std::vector<double> rootAnglesOn(const FunctionModel& f, double t, bool polesOnly)
{
    std::vector<double> out;
    if (!f.isRational()) return out;
    for (const RootFactor& k : f.asRational().factors) {
        if (polesOnly && k.multiplicity > 0) continue;
        if (std::abs(std::abs(k.root) - t) <= kOnCircleRel * t) {
            double a = std::arg(k.root);
            if (a < 0.0) a += kTwoPi;
            out.push_back(a);
        }
    }
    return out;
}

Measured fromQuad(const QuadratureResult& q, double scale)
{
    return {q.value * scale, q.errorEstimate * std::abs(scale), q.converged};
}

void accumulate(Measured& into, const Measured& part, double weight)
{
    into.value += weight * part.value;
    into.error += std::abs(weight) * part.error;
    into.converged = into.converged && part.converged;
}

const RationalFactored& requireRational(const FunctionModel& f, const char* what)
{
    if (!f.isRational()) {
        throw UnsupportedError(std::string(what) + " needs a rational model");
    }
    return f.asRational();
}

// 7-point Gauss / 15-point Kronrod on [-1, 1]; index 7 is the centre.
constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975,
                                              0.417959183673469387755102040816327};

constexpr int kRulePoints = 15;
constexpr double kPhiTolPerRad = 1e-12;
constexpr double kPhiMinWidth = 1e-13;
constexpr int kPhiMaxDepth = 48;

std::array<double, kRulePoints> ruleAbscissae(double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, kRulePoints> x{};
    for (int k = 0; k < 7; ++k) {
        x[static_cast<std::size_t>(k)] = c - h * kKronrodNodes[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(14 - k)] = c + h * kKronrodNodes[static_cast<std::size_t>(k)];
    }
    x[7] = c;
    return x;
}

// A-point sets of a rational f at e^{i phi}; the top-level rule nodes of every
// panel are solved once and reused across integrands.
class APointField {
public:
    APointField(const FunctionModel& f, int nPanels, unsigned jobs) : f_(f), nPanels_(nPanels), jobs_(jobs)
    {
        requireRational(f, "phi-averaging");
        if (nPanels < 1) throw std::invalid_argument("nPhi must be positive");
        top_.resize(static_cast<std::size_t>(nPanels));
        parallelFor(top_.size(), jobs_, [&](std::size_t p) {
            auto [a, b] = panel(p);
            const auto x = ruleAbscissae(a, b);
            for (int k = 0; k < kRulePoints; ++k) {
                top_[p][static_cast<std::size_t>(k)] = solve(x[static_cast<std::size_t>(k)]);
            }
        });
    }

    // breaks: sorted angles in [0, 2pi) where F may jump; panels are split there.
    Measured average(const std::function<double(std::span<const Complex>)>& F,
                     std::span<const double> breaks = {}) const
    {
        std::vector<Measured> parts(top_.size());
        parallelFor(top_.size(), jobs_, [&](std::size_t p) {
            auto [a, b] = panel(p);
            auto first = std::upper_bound(breaks.begin(), breaks.end(), a);
            auto last = std::lower_bound(breaks.begin(), breaks.end(), b);
            if (first == last) {
                std::array<double, kRulePoints> values{};
                for (int k = 0; k < kRulePoints; ++k) {
                    values[static_cast<std::size_t>(k)] = F(top_[p][static_cast<std::size_t>(k)]);
                }
                parts[p] = refine(F, a, b, values, 0);
                return;
            }
            double lo = a;
            for (auto it = first; it != last; ++it) {
                accumulate(parts[p], fresh(F, lo, *it), 1.0);
                lo = *it;
            }
            accumulate(parts[p], fresh(F, lo, b), 1.0);
        });
        Measured out;
        for (const Measured& m : parts) accumulate(out, m, 1.0 / kTwoPi);
        return out;
    }

private:
    std::pair<double, double> panel(std::size_t p) const
    {
        const double h = kTwoPi / nPanels_;
        return {h * static_cast<double>(p), h * static_cast<double>(p + 1)};
    }

    std::vector<Complex> solve(double phi) const { return solveAPoints(f_, std::polar(1.0, phi)).points; }

    Measured fresh(const std::function<double(std::span<const Complex>)>& F, double lo, double hi) const
    {
        if (!(hi > lo)) return {};
        const auto x = ruleAbscissae(lo, hi);
        std::array<double, kRulePoints> w{};
        for (int k = 0; k < kRulePoints; ++k) {
            w[static_cast<std::size_t>(k)] = F(solve(x[static_cast<std::size_t>(k)]));
        }
        return refine(F, lo, hi, w, 0);
    }

    Measured refine(const std::function<double(std::span<const Complex>)>& F, double a, double b,
                    const std::array<double, kRulePoints>& v, int depth) const
    {
        const double h = 0.5 * (b - a);
        double kronrod = kKronrodWeights[7] * v[7];
        double gauss = kGaussWeights[3] * v[7];
        for (int k = 0; k < 7; ++k) {
            const double pair = v[static_cast<std::size_t>(k)] + v[static_cast<std::size_t>(14 - k)];
            kronrod += kKronrodWeights[static_cast<std::size_t>(k)] * pair;
            if (k % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(k / 2)] * pair;
        }
        kronrod *= h;
        gauss *= h;
        const double err = std::abs(kronrod - gauss);
        if (err <= kPhiTolPerRad * (b - a) || b - a < kPhiMinWidth || depth >= kPhiMaxDepth) {
            return {kronrod, err, true};
        }
        const double mid = 0.5 * (a + b);
        Measured out;
        for (auto [lo, hi] : {std::pair{a, mid}, std::pair{mid, b}}) {
            const auto x = ruleAbscissae(lo, hi);
            std::array<double, kRulePoints> w{};
            for (int k = 0; k < kRulePoints; ++k) {
                w[static_cast<std::size_t>(k)] = F(solve(x[static_cast<std::size_t>(k)]));
            }
            accumulate(out, refine(F, lo, hi, w, depth + 1), 1.0);
        }
        return out;
    }

    const FunctionModel& f_;
    int nPanels_;
    unsigned jobs_;
    std::vector<std::array<std::vector<Complex>, kRulePoints>> top_;
};

// Angles phi at which some solution of f(z) = e^{i phi} has modulus in radii.
std::vector<double> crossingAngles(const FunctionModel& f, std::initializer_list<double> radii, const QuadConfig& cfg)
{
    std::vector<double> out;
    for (double t : radii) {
        for (const Arc& arc : classifyCircle(f, t, cfg).arcs) {
            for (double theta : {arc.start, arc.end}) {
                try {
                    const double phi = std::arg(f.eval(std::polar(t, theta)));
                    out.push_back(phi < 0.0 ? phi + kTwoPi : phi);
                } catch (const SingularPointError&) {
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string pointLabel(double tau, double r)
{
    std::ostringstream os;
    os.precision(17);
    os << "tau=" << tau << " r=" << r;
    return os.str();
}

// Tracks the point with the smallest margin (tolerance - violation).
struct CheckTracker {
    Theorem1Check check;
    double margin = std::numeric_limits<double>::infinity();
    bool seen = false;

    explicit CheckTracker(std::string name) { check.name = std::move(name); }

    void observe(double violation, double tolerance, const std::string& where)
    {
        const double m = tolerance - violation;
        if (!seen || m < margin) {
            margin = m;
            check.worst = violation;
            check.tolerance = tolerance;
            check.where = where;
            seen = true;
        }
        if (!(violation <= tolerance)) check.pass = false;
    }

    Theorem1Check done()
    {
        if (!seen) check.applicable = false;
        return check;
    }
};

}  // namespace

Measured circleLogMean(const FunctionModel& f, double t, const QuadConfig& cfg)
{
    const std::vector<double> angles = rootAnglesOn(f, t, false);
    if (angles.empty()) {
        return fromQuad(periodicIntegrate(logAbsSampler(f, t), cfg), 1.0 / kTwoPi);
    }
    const std::pair<double, double> whole{0.0, kTwoPi};
    return fromQuad(arcIntegrate(logAbsSampler(f, t), {&whole, 1}, cfg, angles), 1.0 / kTwoPi);
}

Measured proximity(const FunctionModel& f, double t, const QuadConfig& cfg, std::span<const double> singularAngles)
{
    const ArcPartition part = classifyCircle(f, t, cfg);
    const auto plus = part.ranges(ArcLabel::Plus);
    if (plus.empty()) return {};
    std::vector<double> angles = rootAnglesOn(f, t, true);
    angles.insert(angles.end(), singularAngles.begin(), singularAngles.end());
    return fromQuad(arcIntegrate(logAbsSampler(f, t), plus, cfg, angles), 1.0 / kTwoPi);
}

Measured proximityAnnulus(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg)
{
    Measured out;
    const Measured unit = proximity(f, 1.0, cfg);
    accumulate(out, proximity(f, w.inner(), cfg), 1.0);
    accumulate(out, proximity(f, w.outer(), cfg), 1.0);
    accumulate(out, unit, -2.0);
    return out;
}

double countingWeight(double rho, const AnnulusWindow& w)
{
    if (std::abs(rho - 1.0) <= kModulusTol) return 0.5 * (std::log(w.tau) + std::log(w.r));
    if (rho < 1.0) return rho > w.inner() ? std::log(w.tau * rho) : 0.0;
    return rho < w.r ? std::log(w.r / rho) : 0.0;
}

Measured countingN(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg,
                   const CountingOptions& opts)
{
    using Route = CountingOptions::Route;
    if (opts.route != Route::Jumps) {
        if (f.isRational()) {
            return {exactN(f.asRational().factors, w).value, 0.0, true};
        }
        if (opts.poles) {
            std::vector<RootFactor> factors;
            for (Complex b : *opts.poles) factors.push_back({b, -1});
            return {exactN(factors, w).value, 0.0, true};
        }
        if (opts.route == Route::Exact) {
            throw UnsupportedError("exact counting needs a rational model or a pole list");
        }
        if (poleFreeOn(f, w.inner(), w.r, cfg)) return {};
        throw UnsupportedError("poles of the expression are not enumerable; supply a pole list");
    }
    const FunctionModel g = f.reciprocal();
    Measured out;
    for (const JumpRadius& j : locateJumpRadii(g, 0.0, w.inner() * (1.0 - 1e-6), w.r * (1.0 + 1e-6), cfg)) {
        if (j.jump <= 0) continue;
        const double rho = std::abs(j.radius - 1.0) <= 1e-9 ? 1.0 : j.radius;
        out.value += j.jump * countingWeight(rho, w);
    }
    return out;
}

Measured cConstant(const FunctionModel& f, const QuadConfig& cfg)
{
    if (!rootAnglesOn(f, 1.0, false).empty()) {
        throw BoundaryRootError("c_f is undefined for a zero or pole on |z| = 1");
    }
    const ArcPartition part = classifyCircle(f, 1.0, cfg);
    const AngleSampler rate = argumentRateSampler(f, 1.0);
    Measured out;
    const auto plus = part.ranges(ArcLabel::Plus);
    const auto zero = part.ranges(ArcLabel::Zero);
    for (auto [ranges, weight] : {std::pair{&plus, 1.0 / kTwoPi}, std::pair{&zero, 0.5 / kTwoPi}}) {
        if (ranges->empty()) continue;
        const QuadratureResult q = arcIntegrate(rate, *ranges, cfg);
        if (q.nearSingular) {
            throw BoundaryRootError("c_f is undefined for a zero or pole on |z| = 1");
        }
        accumulate(out, fromQuad(q, 1.0), weight);
    }
    return out;
}

CharacteristicEvaluator::CharacteristicEvaluator(FunctionModel f, QuadConfig cfg, CountingOptions opts)
    : f_(std::move(f)), cfg_(cfg), opts_(std::move(opts))
{
}

void CharacteristicEvaluator::prefetch(std::span<const double> radii)
{
    std::vector<double> missing;
    for (double t : radii) {
        if (!proximity_.contains(t)) missing.push_back(t);
    }
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::vector<Measured> values(missing.size());
    parallelFor(missing.size(), cfg_.jobs, [&](std::size_t i) { values[i] = proximity(f_, missing[i], cfg_); });
    for (std::size_t i = 0; i < missing.size(); ++i) proximity_.emplace(missing[i], values[i]);
}

Measured CharacteristicEvaluator::proximityAt(double t)
{
    auto it = proximity_.find(t);
    if (it == proximity_.end()) it = proximity_.emplace(t, proximity(f_, t, cfg_)).first;
    return it->second;
}

Measured CharacteristicEvaluator::cf()
{
    if (!cf_) cf_ = cConstant(f_, cfg_);
    return *cf_;
}

CharacteristicReport CharacteristicEvaluator::at(const AnnulusWindow& w)
{
    CharacteristicReport rep;
    rep.window = w;
    const Measured n = countingN(f_, w, cfg_, opts_);
    const Measured inner = proximityAt(w.inner());
    const Measured outer = proximityAt(w.r);
    const Measured unit = proximityAt(1.0);
    const Measured c = cf();
    rep.N = n.value;
    rep.mInner = inner.value;
    rep.mOuter = outer.value;
    rep.mUnit = unit.value;
    rep.mAnnulus = rep.mInner + rep.mOuter - 2.0 * rep.mUnit;
    rep.cf = c.value;
    const double logRatio = std::log(w.tau / w.r);
    rep.T = rep.N + rep.mAnnulus + rep.cf * logRatio;
    rep.quadError = n.error + inner.error + outer.error + 2.0 * unit.error + std::abs(logRatio) * c.error;
    rep.converged = n.converged && inner.converged && outer.converged && unit.converged && c.converged;
    return rep;
}

CharacteristicReport characteristic(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg,
                                    const CountingOptions& opts)
{
    return CharacteristicEvaluator(f, cfg, opts).at(w);
}

ResidualReport jensenV1Residual(const FunctionModel& f, double s, double r, const QuadConfig& cfg)
{
    if (!(s > 0.0) || !(s < r)) throw std::invalid_argument("jensen1 needs 0 < s < r");
    int nu = index(f, s, cfg);
    double lhs = 0.0;
    double lo = s;
    for (const JumpRadius& j : locateJumpRadii(f, 0.0, s, r, cfg)) {
        lhs += nu * std::log(j.radius / lo);
        nu += 2 * j.jump;
        lo = j.radius;
    }
    lhs += nu * std::log(r / lo);
    const Measured outer = circleLogMean(f, r, cfg);
    const Measured inner = circleLogMean(f, s, cfg);
    const double rhs = 2.0 * (outer.value - inner.value);
    return {std::abs(lhs - rhs), 2.0 * (outer.error + inner.error)};
}

ResidualReport jensenV2Residual(const FunctionModel& f, const AnnulusWindow& w, const QuadConfig& cfg,
                                const CountingOptions& opts)
{
    const Measured nRecip = countingN(f.reciprocal(), w, cfg);
    const Measured nSelf = countingN(f, w, cfg, opts);
    const double lhs = nRecip.value - nSelf.value;
    Measured rhs;
    accumulate(rhs, circleLogMean(f, w.inner(), cfg), 1.0);
    accumulate(rhs, circleLogMean(f, w.r, cfg), 1.0);
    accumulate(rhs, circleLogMean(f, 1.0, cfg), -2.0);
    rhs.value += index(f, 1.0, cfg) * 0.5 * std::log(w.tau / w.r);
    return {std::abs(lhs - rhs.value), rhs.error + nRecip.error + nSelf.error};
}

Measured unitValueAverage(const FunctionModel& f, const std::function<double(std::span<const Complex>)>& F,
                          int nPanels, const QuadConfig& cfg, std::span<const double> jumpAngles)
{
    std::vector<double> breaks(jumpAngles.begin(), jumpAngles.end());
    std::sort(breaks.begin(), breaks.end());
    return APointField(f, nPanels, cfg.jobs).average(F, breaks);
}

ResidualReport cartanResidual(const FunctionModel& f, const AnnulusWindow& w, int nPhi, const QuadConfig& cfg)
{
    requireRational(f, "cartan");
    const CharacteristicReport rep = characteristic(f, w, cfg);
    const Measured avg = unitValueAverage(
        f,
        [&w](std::span<const Complex> pts) {
            double s = 0.0;
            for (Complex z : pts) s += countingWeight(std::abs(z), w);
            return s;
        },
        nPhi, cfg, crossingAngles(f, {w.inner(), 1.0, w.r}, cfg));
    return {std::abs(rep.T - avg.value), rep.quadError + avg.error};
}

ResidualReport lemma4Residual(const FunctionModel& f, int nPhi, const QuadConfig& cfg)
{
    if (nPhi < 1) throw std::invalid_argument("nPhi must be positive");
    const Measured c = cConstant(f, cfg);
    const std::size_t n = static_cast<std::size_t>(nPhi);
    std::vector<std::optional<int>> nu(n);
    parallelFor(n, cfg.jobs, [&](std::size_t j) {
        const Complex a = std::polar(1.0, kTwoPi * static_cast<double>(j) / nPhi);
        if (f.isRational()) {
            std::vector<RootFactor> factors;
            for (Complex z : solveAPoints(f, a).points) factors.push_back({z, 1});
            for (const RootFactor& k : f.asRational().factors) {
                if (k.multiplicity < 0) factors.push_back(k);
            }
            nu[j] = exactIndex(factors, 1.0);
            return;
        }
        try {
            nu[j] = index(f.shift(a), 1.0, cfg);
        } catch (const Error&) {
            nu[j] = std::nullopt;
        }
    });
    // Failed nodes take the mean of the nearest valid neighbours.
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (nu[j]) {
            sum += *nu[j];
            continue;
        }
        std::optional<int> prev;
        std::optional<int> next;
        for (std::size_t d = 1; d < n && !(prev && next); ++d) {
            if (!prev && nu[(j + n - d) % n]) prev = nu[(j + n - d) % n];
            if (!next && nu[(j + d) % n]) next = nu[(j + d) % n];
        }
        if (!prev) throw IntegralityError("no phi node produced an index", 0.0);
        sum += 0.5 * (*prev + *next);
    }
    const double lhs = sum / (2.0 * nPhi);
    return {std::abs(lhs - c.value), c.error};
}

ResidualReport lemma5Residual(const FunctionModel& f, double t, Complex zeta, const QuadConfig& cfg)
{
    const int shifted = index(f.shift(zeta), t, cfg);
    const int base = index(f, t, cfg);
    if (zeta == Complex{}) return {static_cast<double>(std::abs(shifted - base)), 0.0};
    const AngleSampler correction = [&f, t, zeta](double theta) -> std::optional<double> {
        const Complex z = std::polar(t, theta);
        return (zeta * z * f.logDeriv(z) / (zeta - f.eval(z))).real();
    };
    const QuadratureResult q = periodicIntegrate(correction, cfg);
    if (q.nearSingular || !q.converged) {
        throw IntegralityError("correction integral did not converge", q.value);
    }
    const double rhs = base - q.value / std::numbers::pi;
    return {std::abs(shifted - rhs), q.errorEstimate / std::numbers::pi};
}

ResidualReport lemma6Residual(const FunctionModel& f, int nGrid, const QuadConfig& cfg)
{
    if (nGrid < 1) throw std::invalid_argument("nGrid must be positive");
    const std::size_t n = static_cast<std::size_t>(nGrid);
    std::vector<Complex> zeta(n);
    std::vector<Complex> w(n);
    std::vector<Complex> L(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / nGrid;
        zeta[k] = std::polar(1.0, theta);
        w[k] = f.eval(zeta[k]);
        L[k] = zeta[k] * f.derivative(zeta[k]) / w[k];
    }
    std::vector<double> rows(n);
    parallelFor(n, cfg.jobs, [&](std::size_t j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const Complex d = zeta[k] - w[j];
            if (std::abs(d) < 1e-8) continue;
            s += (-zeta[k] * L[j] / d).real();
        }
        rows[j] = s;
    });
    double lhs = 0.0;
    for (double v : rows) lhs += v;
    lhs /= static_cast<double>(n) * static_cast<double>(n);

    const ArcPartition part = classifyCircle(f, 1.0, cfg);
    const AngleSampler rate = argumentRateSampler(f, 1.0);
    Measured rhs;
    const auto minus = part.ranges(ArcLabel::Minus);
    const auto zero = part.ranges(ArcLabel::Zero);
    if (!minus.empty()) accumulate(rhs, fromQuad(arcIntegrate(rate, minus, cfg), 1.0), -1.0 / kTwoPi);
    if (!zero.empty()) accumulate(rhs, fromQuad(arcIntegrate(rate, zero, cfg), 1.0), -0.5 / kTwoPi);
    return {std::abs(lhs - rhs.value), rhs.error};
}

FftReport fft(const FunctionModel& f, Complex a, const AnnulusWindow& w, const QuadConfig& cfg)
{
    requireRational(f, "fft");
    if (f.isConstant()) throw std::invalid_argument("fft needs a non-constant function");
    APointSolve solve;
    const FunctionModel g = reciprocalShift(f, a, &solve);  // 1/(f - a)
    for (Complex z : solve.points) {
        for (double t : {w.inner(), w.r}) {
            if (std::abs(std::abs(z) - t) <= kOnCircleRel * t) {
                throw BoundaryRootError("an a-point lies on a measurement circle");
            }
        }
    }
    const FunctionModel shifted = g.reciprocal();  // f - a
    FftReport rep;
    rep.a = a;
    rep.window = w;
    const CharacteristicReport t = characteristic(f, w, cfg);
    const Measured mg = proximityAnnulus(g, w, cfg);
    const Measured ms = proximityAnnulus(shifted, w, cfg);
    const Measured cf{t.cf, 0.0, true};
    rep.lhs = exactN(g.asRational().factors, w).value + mg.value;
    rep.T = t.T;
    rep.eps1 = ms.value - t.mAnnulus;
    rep.eps2 = 0.5 * exactIndex(shifted.asRational().factors, 1.0) - cf.value;
    rep.eps1Bound = 4.0 * std::max(0.0, std::log(std::abs(a))) + 4.0 * std::numbers::ln2;
    rep.identityResidual = rep.lhs - (rep.T + rep.eps1 + rep.eps2 * std::log(w.tau / w.r));
    rep.quadError = t.quadError + mg.error + ms.error;
    return rep;
}

Measured classicalT(const FunctionModel& f, double r, const QuadConfig& cfg)
{
    const RationalFactored& rf = requireRational(f, "classical characteristic");
    Measured out = proximity(f, r, cfg);
    out.value += classicalN(rf.factors, r);
    return out;
}

bool Theorem1Report::allPass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Theorem1Check& c) { return !c.applicable || c.pass; });
}

Theorem1Report theorem1Scan(const FunctionModel& f, std::span<const double> taus, std::span<const double> rs,
                            const QuadConfig& cfg, const Theorem1Options& opts)
{
    for (auto grid : {taus, rs}) {
        if (grid.empty()) throw std::invalid_argument("theorem1 grids must be non-empty");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] >= 1.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
                throw std::invalid_argument("theorem1 grids must be increasing and >= 1");
            }
        }
    }
    const std::size_t nt = taus.size();
    const std::size_t nr = rs.size();
    const double h = opts.logStep;
    const double base = opts.baseTol;

    CharacteristicEvaluator ef(f, cfg);
    CharacteristicEvaluator eg(f.reciprocal(), cfg);
    std::vector<double> radii{1.0};
    for (double tau : taus) {
        radii.push_back(1.0 / tau);
        if (tau > 1.0) {
            radii.push_back(1.0 / (tau * std::exp(h)));
            radii.push_back(1.0 / (tau * std::exp(-h)));
        }
    }
    for (double r : rs) {
        radii.push_back(r);
        if (r > 1.0) {
            radii.push_back(r * std::exp(h));
            radii.push_back(r * std::exp(-h));
        }
    }
    ef.prefetch(radii);
    eg.prefetch(radii);

    Theorem1Report rep;
    rep.taus.assign(taus.begin(), taus.end());
    rep.rs.assign(rs.begin(), rs.end());
    rep.T.resize(nt * nr);
    std::vector<double> err(nt * nr);
    std::vector<double> tRecip(nt * nr);
    std::vector<double> errRecip(nt * nr);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nr; ++j) {
            const AnnulusWindow w(taus[i], rs[j]);
            const CharacteristicReport a = ef.at(w);
            const CharacteristicReport b = eg.at(w);
            rep.T[i * nr + j] = a.T;
            err[i * nr + j] = a.quadError;
            tRecip[i * nr + j] = b.T;
            errRecip[i * nr + j] = b.quadError;
        }
    }
    auto T = [&](std::size_t i, std::size_t j) { return rep.T[i * nr + j]; };
    auto E = [&](std::size_t i, std::size_t j) { return err[i * nr + j]; };

    CheckTracker nonneg("nonnegativity");
    CheckTracker monoTau("monotone_tau");
    CheckTracker monoR("monotone_r");
    CheckTracker convTau("convex_log_tau");
    CheckTracker convR("convex_log_r");
    CheckTracker symmetry("reciprocal_symmetry");
    CheckTracker relation("c_relation");
    CheckTracker sandwich("classical_sandwich");
    CheckTracker derivative("derivative_identity");

    // Second difference normalised to a uniform step: equals T0 - 2T1 + T2 on uniform grids.
    auto secondDifference = [](double x0, double x1, double x2, double t0, double t1, double t2) {
        const double s1 = (t1 - t0) / (x1 - x0);
        const double s2 = (t2 - t1) / (x2 - x1);
        return (s2 - s1) * 0.5 * (x2 - x0);
    };

    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nr; ++j) {
            const std::string at = pointLabel(taus[i], rs[j]);
            nonneg.observe(-T(i, j), base + 10.0 * E(i, j), at);
            symmetry.observe(std::abs(T(i, j) - tRecip[i * nr + j]), base + 10.0 * (E(i, j) + errRecip[i * nr + j]),
                             at);
            if (i + 1 < nt) monoTau.observe(T(i, j) - T(i + 1, j), base + 10.0 * (E(i, j) + E(i + 1, j)), at);
            if (j + 1 < nr) monoR.observe(T(i, j) - T(i, j + 1), base + 10.0 * (E(i, j) + E(i, j + 1)), at);
            if (i + 2 < nt) {
                const double d = secondDifference(std::log(taus[i]), std::log(taus[i + 1]), std::log(taus[i + 2]),
                                                  T(i, j), T(i + 1, j), T(i + 2, j));
                convTau.observe(-d, base + 10.0 * (E(i, j) + 2.0 * E(i + 1, j) + E(i + 2, j)), at);
            }
            if (j + 2 < nr) {
                const double d = secondDifference(std::log(rs[j]), std::log(rs[j + 1]), std::log(rs[j + 2]), T(i, j),
                                                  T(i, j + 1), T(i, j + 2));
                convR.observe(-d, base + 10.0 * (E(i, j) + 2.0 * E(i, j + 1) + E(i, j + 2)), at);
            }
        }
    }

    const Measured cf = ef.cf();
    const Measured cg = eg.cf();
    relation.observe(std::abs(0.5 * index(f, 1.0, cfg) - (cf.value - cg.value)), base + 10.0 * (cf.error + cg.error),
                     "unit circle");

    if (f.isRational()) {
        const Measured classicalOne = classicalT(f, 1.0, cfg);
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nr; ++j) {
                if (std::abs(taus[i] - rs[j]) > 1e-12 * rs[j]) continue;
                const Measured classical = classicalT(f, rs[j], cfg);
                const double tol = base + 10.0 * (E(i, j) + classical.error + 2.0 * classicalOne.error);
                const double lower = classical.value - 2.0 * classicalOne.value - T(i, j);
                const double upper = T(i, j) - classical.value;
                sandwich.observe(std::max(lower, upper), tol, pointLabel(taus[i], rs[j]));
            }
        }

        std::unique_ptr<APointField> field;
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nr; ++j) {
                if (!(taus[i] > 1.0 && rs[j] > 1.0)) continue;
                if (!field) field = std::make_unique<APointField>(f, opts.nPhi, cfg.jobs);
                const double tau = taus[i];
                const double r = rs[j];
                const auto tp = ef.at({tau * std::exp(h), r});
                const auto tm = ef.at({tau * std::exp(-h), r});
                const auto rp = ef.at({tau, r * std::exp(h)});
                const auto rm = ef.at({tau, r * std::exp(-h)});
                const double lhs = (tp.T - tm.T + rp.T - rm.T) / (2.0 * h);
                const double inner = 1.0 / tau;
                const Measured avg = field->average([inner, r](std::span<const Complex> pts) {
                    double count = 0.0;
                    for (Complex z : pts) {
                        const double rho = std::abs(z);
                        if (rho > inner && rho < r) count += 1.0;
                    }
                    return count;
                }, crossingAngles(f, {inner, r}, cfg));
                derivative.observe(std::abs(lhs - avg.value), base + 10.0 * avg.error, pointLabel(tau, r));
            }
        }
    }

    for (CheckTracker* c : {&nonneg, &monoTau, &monoR, &convTau, &convR, &symmetry, &relation, &sandwich, &derivative}) {
        rep.checks.push_back(c->done());
    }
    return rep;
}

}  // namespace annulus
