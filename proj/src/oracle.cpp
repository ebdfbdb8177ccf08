#include "annulus/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <variant>

namespace annulus {

PolyCoeffs::PolyCoeffs(std::vector<Complex> ascending) : coeffs_(std::move(ascending))
{
    while (coeffs_.size() > 1 && coeffs_.back() == Complex{}) {
        coeffs_.pop_back();
    }
    if (coeffs_.empty()) {
        coeffs_.push_back({});
    }
}

PolyCoeffs PolyCoeffs::fromRoots(std::span<const Complex> roots, Complex lead)
{
    std::vector<Complex> c{lead};
    for (Complex r : roots) {
        std::vector<Complex> next(c.size() + 1);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    return PolyCoeffs(std::move(c));
}

Complex PolyCoeffs::operator()(Complex z) const
{
    Complex acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

Complex PolyCoeffs::derivativeAt(Complex z) const
{
    Complex acc{};
    for (std::size_t k = coeffs_.size(); k-- > 1;) {
        acc = acc * z + static_cast<double>(k) * coeffs_[k];
    }
    return acc;
}

PolyCoeffs PolyCoeffs::operator-(const PolyCoeffs& other) const
{
    std::vector<Complex> c(std::max(coeffs_.size(), other.coeffs_.size()));
    for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
    for (std::size_t k = 0; k < other.coeffs_.size(); ++k) c[k] -= other.coeffs_[k];
    return PolyCoeffs(std::move(c));
}

PolyCoeffs PolyCoeffs::operator*(Complex s) const
{
    std::vector<Complex> c = coeffs_;
    for (Complex& x : c) x *= s;
    return PolyCoeffs(std::move(c));
}

PolyCoeffs PolyCoeffs::trimmed(double relTol) const
{
    double biggest = 0.0;
    for (Complex c : coeffs_) biggest = std::max(biggest, std::abs(c));
    std::vector<Complex> c = coeffs_;
    while (c.size() > 1 && std::abs(c.back()) < relTol * biggest) {
        c.pop_back();
    }
    return PolyCoeffs(std::move(c));
}

namespace {

constexpr int kMaxSweeps = 500;
constexpr double kStepTol = 1e-13;

// Horner rounding-error bound for p at z.
double evalErrorBound(const std::vector<Complex>& c, Complex z)
{
    const double az = std::abs(z);
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * az + std::abs(*it);
    }
    return 4.0 * static_cast<double>(c.size()) * std::numeric_limits<double>::epsilon() * acc;
}

}  // namespace

RootSolve polyRoots(const PolyCoeffs& p)
{
    if (p.degree() < 1) {
        throw std::invalid_argument("polyRoots needs degree >= 1");
    }
    RootSolve out;
    // Exact zero roots are split off so the iteration never starts on them.
    const auto& all = p.coeffs();
    std::size_t zeros = 0;
    while (zeros < all.size() && all[zeros] == Complex{}) {
        ++zeros;
    }
    out.roots.assign(zeros, Complex{});
    PolyCoeffs q(std::vector<Complex>(all.begin() + static_cast<std::ptrdiff_t>(zeros), all.end()));
    const int n = q.degree();
    const auto& c = q.coeffs();

    if (n >= 1) {
        // Start on a circle of radius |c0/cn|^(1/n), angles offset from the axes.
        const double radius = std::pow(std::abs(c.front()) / std::abs(c.back()), 1.0 / n);
        std::vector<Complex> z(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            z[static_cast<std::size_t>(k)] =
                std::polar(radius, 2.0 * std::numbers::pi * k / n + 0.4);
        }
        std::vector<bool> done(z.size(), false);
        for (out.iterations = 0; out.iterations < kMaxSweeps; ++out.iterations) {
            bool allDone = true;
            for (std::size_t k = 0; k < z.size(); ++k) {
                if (done[k]) continue;
                Complex pv = q(z[k]);
                if (std::abs(pv) <= evalErrorBound(c, z[k])) {
                    done[k] = true;
                    continue;
                }
                Complex ratio = pv / q.derivativeAt(z[k]);
                Complex sum{};
                for (std::size_t j = 0; j < z.size(); ++j) {
                    if (j != k) sum += Complex{1.0, 0.0} / (z[k] - z[j]);
                }
                Complex step = ratio / (Complex{1.0, 0.0} - ratio * sum);
                z[k] -= step;
                if (std::abs(step) < kStepTol * (1.0 + std::abs(z[k]))) {
                    done[k] = true;
                } else {
                    allDone = false;
                }
            }
            if (allDone) {
                out.converged = true;
                break;
            }
        }
        out.roots.insert(out.roots.end(), z.begin(), z.end());
    } else {
        out.converged = true;
    }
    out.residuals.reserve(out.roots.size());
    for (Complex r : out.roots) {
        out.residuals.push_back(std::abs(p(r)));
    }
    return out;
}

std::pair<PolyCoeffs, PolyCoeffs> expandRational(Complex scale, std::span<const RootFactor> factors)
{
    std::vector<Complex> zeros;
    std::vector<Complex> poles;
    for (const RootFactor& f : factors) {
        auto& dst = f.multiplicity > 0 ? zeros : poles;
        dst.insert(dst.end(), static_cast<std::size_t>(std::abs(f.multiplicity)), f.root);
    }
    return {PolyCoeffs::fromRoots(zeros, scale), PolyCoeffs::fromRoots(poles)};
}

APointSolve solveAPoints(Complex scale, std::span<const RootFactor> factors, Complex a)
{
    APointSolve out;
    if (a == Complex{}) {
        for (const RootFactor& f : factors) {
            if (f.multiplicity > 0) {
                out.points.insert(out.points.end(), static_cast<std::size_t>(f.multiplicity), f.root);
            }
        }
        return out;
    }
    auto [num, den] = expandRational(scale, factors);
    PolyCoeffs full = num - den * a;
    const int fullDegree = std::max(num.degree(), den.degree());
    PolyCoeffs p = full.trimmed(1e-12);
    out.degreeDrop = p.degree() < fullDegree;
    if (p.degree() == 0) {
        double biggest = 0.0;
        for (Complex c : full.coeffs()) biggest = std::max(biggest, std::abs(c));
        if (std::abs(p.coeffs()[0]) <= 1e-14 * std::max(1.0, biggest)) {
            throw std::invalid_argument("f - a vanishes identically");
        }
        return out;
    }
    RootSolve rs = polyRoots(p);
    out.converged = rs.converged;

    // Newton polish on the factored form, kept only when it reduces |f - a|.
    const FunctionModel f = FunctionModel::rational(scale, {factors.begin(), factors.end()});
    for (Complex& z : rs.roots) {
        for (int it = 0; it < 3; ++it) {
            try {
                Complex g = f.eval(z) - a;
                Complex dg = f.derivative(z);
                if (dg == Complex{}) break;
                Complex candidate = z - g / dg;
                if (std::abs(f.eval(candidate) - a) < std::abs(g)) {
                    z = candidate;
                } else {
                    break;
                }
            } catch (const std::exception&) {
                break;
            }
        }
    }
    out.points = std::move(rs.roots);
    return out;
}

APointSolve solveAPoints(const FunctionModel& f, Complex a)
{
    if (!f.isRational()) {
        throw std::invalid_argument("solveAPoints needs a rational model");
    }
    const RationalFactored& r = f.asRational();
    if (r.factors.empty() && r.scale == a) {
        throw std::invalid_argument("f - a vanishes identically");
    }
    return solveAPoints(r.scale, r.factors, a);
}

int exactIndex(std::span<const RootFactor> factors, double t)
{
    int total = 0;
    for (const RootFactor& f : factors) {
        const double rho = std::abs(f.root);
        if (std::abs(rho - t) <= kModulusTol * std::max(1.0, t)) {
            total += f.multiplicity;
        } else if (rho < t) {
            total += 2 * f.multiplicity;
        }
    }
    return total;
}

ExactNResult exactN(std::span<const RootFactor> factors, const AnnulusWindow& w)
{
    ExactNResult out;
    const double inner = w.inner();
    const double logTau = std::log(w.tau);
    const double logR = std::log(w.r);
    for (const RootFactor& f : factors) {
        if (f.multiplicity >= 0) continue;
        const double k = -f.multiplicity;
        const double rho = std::abs(f.root);
        if (std::abs(rho - 1.0) <= kModulusTol) {
            out.value += k * 0.5 * (logTau + logR);
            continue;
        }
        if ((w.tau > 1.0 && std::abs(rho - inner) <= kModulusTol) ||
            (w.r > 1.0 && std::abs(rho - w.r) <= kModulusTol * w.r)) {
            out.boundaryFlag = true;
            continue;
        }
        if (rho > inner && rho < 1.0) {
            out.value += k * std::log(w.tau * rho);
        } else if (rho > 1.0 && rho < w.r) {
            out.value += k * std::log(w.r / rho);
        }
    }
    return out;
}

double classicalN(std::span<const RootFactor> factors, double r)
{
    double total = 0.0;
    for (const RootFactor& f : factors) {
        if (f.multiplicity >= 0) continue;
        const double k = -f.multiplicity;
        const double rho = std::abs(f.root);
        if (rho == 0.0) {
            total += k * std::log(r);
        } else if (rho < r) {
            total += k * std::log(r / rho);
        }
    }
    return total;
}

FunctionModel reciprocalShift(const FunctionModel& f, Complex a, APointSolve* solve)
{
    if (!f.isRational()) {
        throw std::invalid_argument("reciprocalShift needs a rational model");
    }
    const RationalFactored& rf = f.asRational();
    APointSolve s = solveAPoints(f, a);
    std::vector<RootFactor> factors;
    for (const RootFactor& p : rf.factors) {
        if (p.multiplicity < 0) factors.push_back({p.root, -p.multiplicity});
    }
    for (Complex b : s.points) {
        factors.push_back({b, -1});
    }
    // Leading coefficient of numerator - a * denominator.
    auto [num, den] = expandRational(rf.scale, rf.factors);
    PolyCoeffs p = (num - den * a).trimmed(1e-12);
    Complex lead = p.coeffs().back();
    if (solve) *solve = std::move(s);
    return FunctionModel::rational(Complex{1.0, 0.0} / lead, std::move(factors));
}

namespace {

struct Factored {
    Complex scale{1.0, 0.0};
    std::vector<RootFactor> factors;
};

PolyCoeffs polyProduct(const PolyCoeffs& a, const PolyCoeffs& b)
{
    std::vector<Complex> c(a.coeffs().size() + b.coeffs().size() - 1);
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs().size(); ++j) c[i + j] += a.coeffs()[i] * b.coeffs()[j];
    }
    return PolyCoeffs(std::move(c));
}

PolyCoeffs polySum(const PolyCoeffs& a, const PolyCoeffs& b, double sign)
{
    std::vector<Complex> c(std::max(a.coeffs().size(), b.coeffs().size()));
    for (std::size_t k = 0; k < a.coeffs().size(); ++k) c[k] += a.coeffs()[k];
    for (std::size_t k = 0; k < b.coeffs().size(); ++k) c[k] += sign * b.coeffs()[k];
    return PolyCoeffs(std::move(c));
}

std::optional<Factored> factorTree(const ExprPtr& e)
{
    if (isConstantTree(e)) {
        const Complex v = evaluate(e, Complex{});
        if (v == Complex{}) return std::nullopt;
        return Factored{v, {}};
    }
    return std::visit(
        [&](const auto& n) -> std::optional<Factored> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Var>) {
                return Factored{{1.0, 0.0}, {{Complex{}, 1}}};
            } else if constexpr (std::is_same_v<T, node::Neg>) {
                auto a = factorTree(n.arg);
                if (a) a->scale = -a->scale;
                return a;
            } else if constexpr (std::is_same_v<T, node::Mul> || std::is_same_v<T, node::Div>) {
                auto a = factorTree(n.lhs);
                auto b = factorTree(n.rhs);
                if (!a || !b) return std::nullopt;
                const int sign = std::is_same_v<T, node::Div> ? -1 : 1;
                a->scale = sign > 0 ? a->scale * b->scale : a->scale / b->scale;
                for (const RootFactor& k : b->factors) a->factors.push_back({k.root, sign * k.multiplicity});
                return a;
            } else if constexpr (std::is_same_v<T, node::IntPow>) {
                auto a = factorTree(n.base);
                if (!a) return std::nullopt;
                Complex s{1.0, 0.0};
                const Complex base = n.exponent >= 0 ? a->scale : Complex{1.0, 0.0} / a->scale;
                for (int k = 0; k < std::abs(n.exponent); ++k) s *= base;
                a->scale = s;
                for (RootFactor& k : a->factors) k.multiplicity *= n.exponent;
                return a;
            } else if constexpr (std::is_same_v<T, node::Add> || std::is_same_v<T, node::Sub>) {
                auto a = factorTree(n.lhs);
                auto b = factorTree(n.rhs);
                if (!a || !b) return std::nullopt;
                // Common denominator: the poles of both sides are known exactly.
                auto [na, da] = expandRational(a->scale, a->factors);
                auto [nb, db] = expandRational(b->scale, b->factors);
                const double sign = std::is_same_v<T, node::Sub> ? -1.0 : 1.0;
                const PolyCoeffs num = polySum(polyProduct(na, db), polyProduct(nb, da), sign);
                double biggest = 0.0;
                for (Complex c : num.coeffs()) biggest = std::max(biggest, std::abs(c));
                if (biggest == 0.0) return std::nullopt;
                Factored out;
                out.scale = num.coeffs().back();
                for (const auto* side : {&*a, &*b}) {
                    for (const RootFactor& k : side->factors) {
                        if (k.multiplicity < 0) out.factors.push_back(k);
                    }
                }
                if (num.degree() >= 1) {
                    std::vector<Complex> roots = polyRoots(num).roots;
                    std::vector<bool> used(roots.size(), false);
                    for (std::size_t i = 0; i < roots.size(); ++i) {
                        if (used[i]) continue;
                        Complex sum = roots[i];
                        int mult = 1;
                        for (std::size_t j = i + 1; j < roots.size(); ++j) {
                            if (!used[j] && std::abs(roots[j] - roots[i]) <= 1e-6 * std::max(1.0, std::abs(roots[i]))) {
                                used[j] = true;
                                sum += roots[j];
                                ++mult;
                            }
                        }
                        out.factors.push_back({sum / static_cast<double>(mult), mult});
                    }
                }
                // A numerator root sitting on a denominator root cancels it.
                for (RootFactor& z : out.factors) {
                    if (z.multiplicity <= 0) continue;
                    for (RootFactor& p : out.factors) {
                        if (p.multiplicity >= 0) continue;
                        if (std::abs(p.root - z.root) <= 1e-9 * std::max(1.0, std::abs(p.root))) {
                            const int c = std::min(z.multiplicity, -p.multiplicity);
                            z.root = p.root;
                            z.multiplicity -= c;
                            p.multiplicity += c;
                        }
                    }
                }
                std::erase_if(out.factors, [](const RootFactor& k) { return k.multiplicity == 0; });
                return out;
            } else {
                return std::nullopt;
            }
        },
        e->value);
}

}  // namespace

std::optional<FunctionModel> rationalForm(const FunctionModel& f)
{
    if (f.isRational()) return f;
    auto r = factorTree(f.asExpression().tree);
    if (!r) return std::nullopt;
    return FunctionModel::rational(r->scale, std::move(r->factors));
}

}  // namespace annulus
