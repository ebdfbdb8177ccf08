#pragma once

#include "annulus/expr.hpp"

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace annulus {

/// One factor (z - root)^multiplicity; multiplicity > 0 is a zero, < 0 a pole.
struct RootFactor {
    Complex root;
    int multiplicity;

    friend bool operator==(const RootFactor&, const RootFactor&) = default;
};

/// scale * prod (z - root_k)^mult_k. Empty factor list is a nonzero constant.
struct RationalFactored {
    Complex scale{1.0, 0.0};
    std::vector<RootFactor> factors;
};

/// A parsed tree together with its derivative tree, built once.
struct Expression {
    ExprPtr tree;
    ExprPtr derivative;
};

/// Tolerance for "z sits on a zero/pole": |z - root| < kOnRootTol * max(1, |z|).
inline constexpr double kOnRootTol = 1e-12;

/// An immutable meromorphic function model.
class FunctionModel {
public:
    /// Merges equal roots and drops factors whose multiplicities cancel.
    /// Throws std::invalid_argument for a zero scale.
    static FunctionModel rational(Complex scale, std::vector<RootFactor> factors);
    static FunctionModel constant(Complex value);
    static FunctionModel monomial(int m, Complex scale = {1.0, 0.0});
    static FunctionModel expression(ExprPtr tree);

    /// Parses DSL text into an Expression model.
    static FunctionModel parse(std::string_view text);

    bool isRational() const { return std::holds_alternative<RationalFactored>(repr_); }
    const RationalFactored& asRational() const { return std::get<RationalFactored>(repr_); }
    const Expression& asExpression() const { return std::get<Expression>(repr_); }

    /// f(z). Throws SingularPointError at a pole.
    Complex eval(Complex z) const;

    /// f'(z).
    Complex derivative(Complex z) const;

    /// f'(z)/f(z). Throws SingularPointError at a zero or a pole.
    Complex logDeriv(Complex z) const;

    /// f - a. Always an Expression; the roots of f - a are not known in closed form.
    FunctionModel shift(Complex a) const;

    /// 1/f.
    FunctionModel reciprocal() const;

    /// Factor list for rational models, absent for expressions.
    std::optional<std::vector<RootFactor>> exactZerosPoles() const;

    /// Equivalent Expression tree (identity for expression models).
    ExprPtr toExpr() const;

    /// True if the model is a constant (no factors / no Var in the tree).
    bool isConstant() const;

private:
    explicit FunctionModel(RationalFactored r) : repr_(std::move(r)) {}
    explicit FunctionModel(Expression e) : repr_(std::move(e)) {}

    std::variant<RationalFactored, Expression> repr_;
};

}  // namespace annulus
