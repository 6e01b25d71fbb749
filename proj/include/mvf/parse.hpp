#pragma once

// Recursive-descent parser for the expression grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' exponent)?
//   base   := integer | name | func '(' expr ')' | '(' expr ')'
//   func   in {sin, cos, exp, log, sqrt}; names match [a-zA-Z][a-zA-Z0-9_]*.
// Rationals are written with term-level division (e.g. 1/2) and fold exactly.
// Unary +/- before a factor is accepted as a convenience extension.

#include "mvf/expr.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <string>

namespace mvf {

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string>* allowed)
        : text_(text), allowed_(allowed) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    const std::set<std::string>* allowed_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c))
            throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    Expr parse_expr() {
        Expr acc = parse_term();
        while (true) {
            char c = peek();
            if (c == '+') {
                ++pos_;
                acc = acc + parse_term();
            } else if (c == '-') {
                ++pos_;
                acc = acc - parse_term();
            } else {
                return acc;
            }
        }
    }

    Expr parse_term() {
        Expr acc = parse_factor();
        while (true) {
            char c = peek();
            if (c == '*') {
                ++pos_;
                acc = acc * parse_factor();
            } else if (c == '/') {
                ++pos_;
                Expr d = parse_factor();
                if (d.is_zero_constant()) throw ParseError("division by zero", pos_);
                acc = acc / d;
            } else {
                return acc;
            }
        }
    }

    Expr parse_factor() {
        int sign = 1;
        while (true) {
            char c = peek();
            if (c == '-') {
                sign = -sign;
                ++pos_;
            } else if (c == '+') {
                ++pos_;
            } else {
                break;
            }
        }
        Expr b = parse_base();
        if (peek() == '^') {
            ++pos_;
            Rational e = parse_exponent();
            b = Expr::pow(b, e);
        }
        return sign < 0 ? -b : b;
    }

    Rational parse_exponent() {
        bool paren = eat('(');
        int sign = 1;
        if (paren) {
            if (eat('-')) sign = -1;
        }
        skip_ws();
        BigInt n = parse_integer();
        BigInt d = 1;
        if (paren && peek() == '/') {
            ++pos_;
            skip_ws();
            d = parse_integer();
            if (d == 0) throw ParseError("zero denominator in exponent", pos_);
        }
        if (paren) expect(')');
        return Rational(sign * n, d);
    }

    BigInt parse_integer() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError("expected integer", pos_);
        return BigInt(std::string(text_.substr(start, pos_ - start)));
    }

    Expr parse_base() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)))
            return Expr::constant(Rational(parse_integer()));
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            if (peek() == '(') {
                FuncKind f;
                if (name == "sin") f = FuncKind::Sin;
                else if (name == "cos") f = FuncKind::Cos;
                else if (name == "exp") f = FuncKind::Exp;
                else if (name == "log") f = FuncKind::Log;
                else if (name == "sqrt") f = FuncKind::Sqrt;
                else throw ParseError("unknown function '" + name + "'", start);
                ++pos_;
                Expr arg = parse_expr();
                expect(')');
                return Expr::apply(f, arg);
            }
            if (allowed_ && !allowed_->count(name))
                throw ParseError("unknown variable '" + name + "'", start);
            return Expr::var(name);
        }
        throw ParseError("unexpected character", pos_);
    }
};

}  // namespace detail

/// Parses `text` against the grammar; every variable must be in `allowed_vars`.
inline Expr parse(std::string_view text, const std::set<std::string>& allowed_vars) {
    return detail::Parser(text, &allowed_vars).run();
}

/// Parses with no variable restriction (internal/testing convenience).
inline Expr parse(std::string_view text) {
    return detail::Parser(text, nullptr).run();
}

}  // namespace mvf
