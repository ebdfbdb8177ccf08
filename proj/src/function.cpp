#include "annulus/function.hpp"

#include "annulus/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace annulus {

namespace {

Complex ipow(Complex base, int k)
{
    if (k < 0) {
        base = Complex{1.0, 0.0} / base;
    }
    Complex acc{1.0, 0.0};
    for (unsigned m = static_cast<unsigned>(std::abs(k)); m != 0; m >>= 1) {
        if (m & 1u) acc *= base;
        base *= base;
    }
    return acc;
}

}  // namespace

FunctionModel FunctionModel::rational(Complex scale, std::vector<RootFactor> factors)
{
    if (scale == Complex{}) {
        throw std::invalid_argument("rational scale must be nonzero");
    }
    std::vector<RootFactor> merged;
    for (const RootFactor& f : factors) {
        if (f.multiplicity == 0) {
            continue;
        }
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const RootFactor& g) { return g.root == f.root; });
        if (it == merged.end()) {
            merged.push_back(f);
        } else {
            it->multiplicity += f.multiplicity;
        }
    }
    std::erase_if(merged, [](const RootFactor& f) { return f.multiplicity == 0; });
    return FunctionModel(RationalFactored{scale, std::move(merged)});
}

FunctionModel FunctionModel::constant(Complex value) { return rational(value, {}); }

FunctionModel FunctionModel::monomial(int m, Complex scale)
{
    return rational(scale, {{Complex{}, m}});
}

FunctionModel FunctionModel::expression(ExprPtr tree)
{
    ExprPtr d = differentiate(tree);
    return FunctionModel(Expression{std::move(tree), std::move(d)});
}

FunctionModel FunctionModel::parse(std::string_view text) { return expression(parseExpr(text)); }

Complex FunctionModel::eval(Complex z) const
{
    if (const auto* r = std::get_if<RationalFactored>(&repr_)) {
        Complex value = r->scale;
        const double cutoff = kOnRootTol * std::max(1.0, std::abs(z));
        for (const RootFactor& f : r->factors) {
            Complex d = z - f.root;
            if (f.multiplicity < 0 && std::abs(d) < cutoff) {
                throw SingularPointError("pole of rational model");
            }
            value *= ipow(d, f.multiplicity);
        }
        return value;
    }
    return evaluate(asExpression().tree, z);
}

Complex FunctionModel::derivative(Complex z) const
{
    if (isRational()) {
        return eval(z) * logDeriv(z);
    }
    return evaluate(asExpression().derivative, z);
}

Complex FunctionModel::logDeriv(Complex z) const
{
    if (const auto* r = std::get_if<RationalFactored>(&repr_)) {
        Complex sum{};
        const double cutoff = kOnRootTol * std::max(1.0, std::abs(z));
        for (const RootFactor& f : r->factors) {
            Complex d = z - f.root;
            if (std::abs(d) < cutoff) {
                throw SingularPointError("logarithmic derivative at a zero or pole");
            }
            sum += static_cast<double>(f.multiplicity) / d;
        }
        return sum;
    }
    const Expression& e = asExpression();
    Complex value = evaluate(e.tree, z);
    if (value == Complex{}) {
        throw SingularPointError("logarithmic derivative at a zero");
    }
    return evaluate(e.derivative, z) / value;
}

FunctionModel FunctionModel::shift(Complex a) const
{
    if (a == Complex{}) {
        return *this;
    }
    return expression(makeSub(toExpr(), makeConst(a)));
}

FunctionModel FunctionModel::reciprocal() const
{
    if (const auto* r = std::get_if<RationalFactored>(&repr_)) {
        RationalFactored inv{Complex{1.0, 0.0} / r->scale, r->factors};
        for (RootFactor& f : inv.factors) {
            f.multiplicity = -f.multiplicity;
        }
        return FunctionModel(std::move(inv));
    }
    return expression(makeDiv(makeConst({1.0, 0.0}), asExpression().tree));
}

std::optional<std::vector<RootFactor>> FunctionModel::exactZerosPoles() const
{
    if (const auto* r = std::get_if<RationalFactored>(&repr_)) {
        return r->factors;
    }
    return std::nullopt;
}

ExprPtr FunctionModel::toExpr() const
{
    if (const auto* r = std::get_if<RationalFactored>(&repr_)) {
        ExprPtr e = makeConst(r->scale);
        for (const RootFactor& f : r->factors) {
            e = makeMul(e, makeIntPow(makeSub(makeVar(), makeConst(f.root)), f.multiplicity));
        }
        return e;
    }
    return asExpression().tree;
}

bool FunctionModel::isConstant() const
{
    if (const auto* r = std::get_if<RationalFactored>(&repr_)) {
        return r->factors.empty();
    }
    return isConstantTree(asExpression().tree);
}

}  // namespace annulus
