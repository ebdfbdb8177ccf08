#pragma once

// Expression trees for the function DSL.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' int)?
//   atom   := number | 'i' | 'z' | 'exp' '(' expr ')' | '(' expr ')' | '-' atom
//
// Numbers may carry an `i` suffix (`0.5i`). Constant subtrees are not folded:
// `(1+2i)` parses to Add(Const 1, Const 2i).

#include <complex>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace annulus {

using Complex = std::complex<double>;

inline constexpr int kDefaultMaxExponent = 64;

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

namespace node {
struct Const { Complex value; };
struct Var {};
struct Add { ExprPtr lhs, rhs; };
struct Sub { ExprPtr lhs, rhs; };
struct Mul { ExprPtr lhs, rhs; };
struct Div { ExprPtr lhs, rhs; };
struct IntPow { ExprPtr base; int exponent; };
struct Exp { ExprPtr arg; };
struct Neg { ExprPtr arg; };
}  // namespace node

struct ExprNode {
    std::variant<node::Const, node::Var, node::Add, node::Sub, node::Mul,
                 node::Div, node::IntPow, node::Exp, node::Neg>
        value;
};

// Node constructors.
ExprPtr makeConst(Complex c);
ExprPtr makeVar();
ExprPtr makeAdd(ExprPtr lhs, ExprPtr rhs);
ExprPtr makeSub(ExprPtr lhs, ExprPtr rhs);
ExprPtr makeMul(ExprPtr lhs, ExprPtr rhs);
ExprPtr makeDiv(ExprPtr lhs, ExprPtr rhs);
ExprPtr makeIntPow(ExprPtr base, int exponent);
ExprPtr makeExp(ExprPtr arg);
ExprPtr makeNeg(ExprPtr arg);

/// Parses DSL text. Throws ParseError on syntax errors and when an
/// exponent exceeds `maxExponent` in magnitude.
ExprPtr parseExpr(std::string_view text, int maxExponent = kDefaultMaxExponent);

/// Fully parenthesized text that parses back to the same tree for constants
/// that are non-negative reals or non-negative pure imaginaries.
std::string printExpr(const ExprPtr& e);

bool structurallyEqual(const ExprPtr& a, const ExprPtr& b);

/// d/dz by structural rules; trivially zero/one subterms are pruned.
ExprPtr differentiate(const ExprPtr& e);

/// Evaluates at z. Throws SingularPointError when a division or negative
/// power meets a vanishing denominator.
Complex evaluate(const ExprPtr& e, Complex z);

/// True when the tree contains no Var.
bool isConstantTree(const ExprPtr& e);

}  // namespace annulus
