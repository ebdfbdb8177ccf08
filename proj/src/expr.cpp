#include "annulus/expr.hpp"

#include "annulus/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>

namespace annulus {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ExprPtr wrap(auto n) { return std::make_shared<const ExprNode>(ExprNode{std::move(n)}); }

class Parser {
public:
    Parser(std::string_view text, int maxExponent) : text_(text), maxExponent_(maxExponent) {}

    ExprPtr run()
    {
        skipSpace();
        if (pos_ >= text_.size()) {
            throw ParseError("empty expression", pos_);
        }
        ExprPtr e = expr();
        skipSpace();
        if (pos_ != text_.size()) {
            throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
        }
        return e;
    }

private:
    std::string_view text_;
    int maxExponent_;
    std::size_t pos_ = 0;

    void skipSpace()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skipSpace();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    ExprPtr expr()
    {
        ExprPtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = makeAdd(lhs, term());
            } else if (accept('-')) {
                lhs = makeSub(lhs, term());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr term()
    {
        ExprPtr lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = makeMul(lhs, factor());
            } else if (accept('/')) {
                std::size_t at = pos_;
                ExprPtr rhs = factor();
                if (const auto* c = std::get_if<node::Const>(&rhs->value); c && c->value == Complex{}) {
                    throw ParseError("division by literal zero", at);
                }
                lhs = makeDiv(lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    ExprPtr factor()
    {
        ExprPtr base = atom();
        if (accept('^')) {
            skipSpace();
            std::size_t start = pos_;
            bool negative = false;
            if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
                negative = text_[pos_] == '-';
                ++pos_;
            }
            std::size_t digits = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
            if (digits == pos_) {
                throw ParseError("expected integer exponent", digits);
            }
            long long value = 0;
            auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, value);
            if (ec != std::errc{} || value > maxExponent_) {
                throw ParseError("exponent overflow (limit " + std::to_string(maxExponent_) + ")", start);
            }
            base = makeIntPow(base, static_cast<int>(negative ? -value : value));
        }
        return base;
    }

    ExprPtr atom()
    {
        skipSpace();
        if (pos_ >= text_.size()) {
            throw ParseError("unexpected end of input", pos_);
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (c == '-') {
            ++pos_;
            return makeNeg(atom());
        }
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (c == 'z') {
            ++pos_;
            return makeVar();
        }
        if (c == 'i' && !isIdentChar(pos_ + 1)) {
            ++pos_;
            return makeConst({0.0, 1.0});
        }
        if (text_.substr(pos_, 3) == "exp") {
            pos_ += 3;
            expect('(');
            ExprPtr e = expr();
            expect(')');
            return makeExp(e);
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    bool isIdentChar(std::size_t at) const
    {
        return at < text_.size() && std::isalpha(static_cast<unsigned char>(text_[at]));
    }

    ExprPtr number()
    {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
            }
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            throw ParseError("malformed number", start);
        }
        if (pos_ < text_.size() && text_[pos_] == 'i' && !isIdentChar(pos_ + 1)) {
            ++pos_;
            return makeConst({0.0, value});
        }
        return makeConst({value, 0.0});
    }
};

std::string formatDouble(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool isZero(const ExprPtr& e)
{
    const auto* c = std::get_if<node::Const>(&e->value);
    return c && c->value == Complex{};
}

bool isOne(const ExprPtr& e)
{
    const auto* c = std::get_if<node::Const>(&e->value);
    return c && c->value == Complex{1.0, 0.0};
}

// Pruning constructors used only while building derivative trees.
ExprPtr dAdd(ExprPtr a, ExprPtr b)
{
    if (isZero(a)) return b;
    if (isZero(b)) return a;
    return makeAdd(std::move(a), std::move(b));
}

ExprPtr dSub(ExprPtr a, ExprPtr b)
{
    if (isZero(b)) return a;
    if (isZero(a)) return makeNeg(std::move(b));
    return makeSub(std::move(a), std::move(b));
}

ExprPtr dMul(ExprPtr a, ExprPtr b)
{
    if (isZero(a) || isZero(b)) return makeConst({});
    if (isOne(a)) return b;
    if (isOne(b)) return a;
    return makeMul(std::move(a), std::move(b));
}

void checkDenominator(Complex den, Complex num)
{
    if (std::abs(den) <= 1e-14 * std::max(1.0, std::abs(num))) {
        throw SingularPointError("pole: vanishing denominator");
    }
}

}  // namespace

ExprPtr makeConst(Complex c) { return wrap(node::Const{c}); }
ExprPtr makeVar() { return wrap(node::Var{}); }
ExprPtr makeAdd(ExprPtr lhs, ExprPtr rhs) { return wrap(node::Add{std::move(lhs), std::move(rhs)}); }
ExprPtr makeSub(ExprPtr lhs, ExprPtr rhs) { return wrap(node::Sub{std::move(lhs), std::move(rhs)}); }
ExprPtr makeMul(ExprPtr lhs, ExprPtr rhs) { return wrap(node::Mul{std::move(lhs), std::move(rhs)}); }
ExprPtr makeDiv(ExprPtr lhs, ExprPtr rhs) { return wrap(node::Div{std::move(lhs), std::move(rhs)}); }
ExprPtr makeIntPow(ExprPtr base, int exponent) { return wrap(node::IntPow{std::move(base), exponent}); }
ExprPtr makeExp(ExprPtr arg) { return wrap(node::Exp{std::move(arg)}); }
ExprPtr makeNeg(ExprPtr arg) { return wrap(node::Neg{std::move(arg)}); }

ExprPtr parseExpr(std::string_view text, int maxExponent)
{
    return Parser(text, maxExponent).run();
}

std::string printExpr(const ExprPtr& e)
{
    return std::visit(
        overloaded{
            [](const node::Const& c) -> std::string {
                if (c.value.imag() == 0.0 && !std::signbit(c.value.real())) {
                    return formatDouble(c.value.real());
                }
                if (c.value.real() == 0.0 && !std::signbit(c.value.imag())) {
                    return formatDouble(c.value.imag()) + "i";
                }
                return "(" + formatDouble(c.value.real()) + "+" + formatDouble(c.value.imag()) + "i)";
            },
            [](const node::Var&) -> std::string { return "z"; },
            [](const node::Add& n) { return "(" + printExpr(n.lhs) + "+" + printExpr(n.rhs) + ")"; },
            [](const node::Sub& n) { return "(" + printExpr(n.lhs) + "-" + printExpr(n.rhs) + ")"; },
            [](const node::Mul& n) { return "(" + printExpr(n.lhs) + "*" + printExpr(n.rhs) + ")"; },
            [](const node::Div& n) { return "(" + printExpr(n.lhs) + "/" + printExpr(n.rhs) + ")"; },
            [](const node::IntPow& n) {
                return "(" + printExpr(n.base) + ")^" + std::to_string(n.exponent);
            },
            [](const node::Exp& n) { return "exp(" + printExpr(n.arg) + ")"; },
            [](const node::Neg& n) { return "-(" + printExpr(n.arg) + ")"; },
        },
        e->value);
}

bool structurallyEqual(const ExprPtr& a, const ExprPtr& b)
{
    if (a->value.index() != b->value.index()) {
        return false;
    }
    return std::visit(
        overloaded{
            [&](const node::Const& x) { return x.value == std::get<node::Const>(b->value).value; },
            [](const node::Var&) { return true; },
            [&](const node::Add& x) {
                const auto& y = std::get<node::Add>(b->value);
                return structurallyEqual(x.lhs, y.lhs) && structurallyEqual(x.rhs, y.rhs);
            },
            [&](const node::Sub& x) {
                const auto& y = std::get<node::Sub>(b->value);
                return structurallyEqual(x.lhs, y.lhs) && structurallyEqual(x.rhs, y.rhs);
            },
            [&](const node::Mul& x) {
                const auto& y = std::get<node::Mul>(b->value);
                return structurallyEqual(x.lhs, y.lhs) && structurallyEqual(x.rhs, y.rhs);
            },
            [&](const node::Div& x) {
                const auto& y = std::get<node::Div>(b->value);
                return structurallyEqual(x.lhs, y.lhs) && structurallyEqual(x.rhs, y.rhs);
            },
            [&](const node::IntPow& x) {
                const auto& y = std::get<node::IntPow>(b->value);
                return x.exponent == y.exponent && structurallyEqual(x.base, y.base);
            },
            [&](const node::Exp& x) { return structurallyEqual(x.arg, std::get<node::Exp>(b->value).arg); },
            [&](const node::Neg& x) { return structurallyEqual(x.arg, std::get<node::Neg>(b->value).arg); },
        },
        a->value);
}

ExprPtr differentiate(const ExprPtr& e)
{
    return std::visit(
        overloaded{
            [](const node::Const&) { return makeConst({}); },
            [](const node::Var&) { return makeConst({1.0, 0.0}); },
            [](const node::Add& n) { return dAdd(differentiate(n.lhs), differentiate(n.rhs)); },
            [](const node::Sub& n) { return dSub(differentiate(n.lhs), differentiate(n.rhs)); },
            [](const node::Mul& n) {
                return dAdd(dMul(differentiate(n.lhs), n.rhs), dMul(n.lhs, differentiate(n.rhs)));
            },
            [](const node::Div& n) {
                // (u/v)' = u'/v - u v'/v^2
                ExprPtr du = differentiate(n.lhs);
                ExprPtr dv = differentiate(n.rhs);
                ExprPtr first = isZero(du) ? makeConst({}) : makeDiv(du, n.rhs);
                ExprPtr second = isZero(dv) ? makeConst({}) : makeDiv(dMul(n.lhs, dv), makeIntPow(n.rhs, 2));
                return dSub(first, second);
            },
            [](const node::IntPow& n) {
                if (n.exponent == 0) {
                    return makeConst({});
                }
                ExprPtr db = differentiate(n.base);
                ExprPtr power = n.exponent == 1 ? makeConst({1.0, 0.0}) : makeIntPow(n.base, n.exponent - 1);
                return dMul(dMul(makeConst({static_cast<double>(n.exponent), 0.0}), power), db);
            },
            [&e](const node::Exp& n) { return dMul(e, differentiate(n.arg)); },
            [](const node::Neg& n) {
                ExprPtr d = differentiate(n.arg);
                return isZero(d) ? d : makeNeg(d);
            },
        },
        e->value);
}

Complex evaluate(const ExprPtr& e, Complex z)
{
    return std::visit(
        overloaded{
            [](const node::Const& c) { return c.value; },
            [z](const node::Var&) { return z; },
            [z](const node::Add& n) { return evaluate(n.lhs, z) + evaluate(n.rhs, z); },
            [z](const node::Sub& n) { return evaluate(n.lhs, z) - evaluate(n.rhs, z); },
            [z](const node::Mul& n) { return evaluate(n.lhs, z) * evaluate(n.rhs, z); },
            [z](const node::Div& n) {
                Complex num = evaluate(n.lhs, z);
                Complex den = evaluate(n.rhs, z);
                checkDenominator(den, num);
                return num / den;
            },
            [z](const node::IntPow& n) {
                Complex b = evaluate(n.base, z);
                int k = n.exponent;
                if (k < 0 && std::abs(b) == 0.0) {
                    throw SingularPointError("pole: negative power of zero");
                }
                Complex acc{1.0, 0.0};
                Complex base = k < 0 ? Complex{1.0, 0.0} / b : b;
                for (unsigned m = static_cast<unsigned>(std::abs(k)); m != 0; m >>= 1) {
                    if (m & 1u) acc *= base;
                    base *= base;
                }
                return acc;
            },
            [z](const node::Exp& n) { return std::exp(evaluate(n.arg, z)); },
            [z](const node::Neg& n) { return -evaluate(n.arg, z); },
        },
        e->value);
}

bool isConstantTree(const ExprPtr& e)
{
    return std::visit(
        overloaded{
            [](const node::Const&) { return true; },
            [](const node::Var&) { return false; },
            [](const node::Add& n) { return isConstantTree(n.lhs) && isConstantTree(n.rhs); },
            [](const node::Sub& n) { return isConstantTree(n.lhs) && isConstantTree(n.rhs); },
            [](const node::Mul& n) { return isConstantTree(n.lhs) && isConstantTree(n.rhs); },
            [](const node::Div& n) { return isConstantTree(n.lhs) && isConstantTree(n.rhs); },
            [](const node::IntPow& n) { return isConstantTree(n.base); },
            [](const node::Exp& n) { return isConstantTree(n.arg); },
            [](const node::Neg& n) { return isConstantTree(n.arg); },
        },
        e->value);
}

}  // namespace annulus
