#pragma once

// Symbolic partial differentiation and simultaneous substitution.

#include "mvf/expr.hpp"

#include <map>
#include <string>
#include <vector>

namespace mvf {

using Bindings = std::map<std::string, Expr>;

/// Partial derivative d e / d v.
inline Expr differentiate(const Expr& e, const std::string& v) {
    switch (e.kind()) {
        case NodeKind::Constant:
            return Expr::num(0);
        case NodeKind::Variable:
            return Expr::num(e.name() == v ? 1 : 0);
        case NodeKind::Sum: {
            std::vector<Expr> parts;
            parts.reserve(e.kids().size());
            for (const Expr& k : e.kids()) parts.push_back(differentiate(k, v));
            return Expr::sum(std::move(parts));
        }
        case NodeKind::Product: {
            std::vector<Expr> parts;
            for (std::size_t i = 0; i < e.kids().size(); ++i) {
                std::vector<Expr> fs = e.kids();
                fs[i] = differentiate(fs[i], v);
                parts.push_back(Expr::product(std::move(fs)));
            }
            return Expr::sum(std::move(parts));
        }
        case NodeKind::Power: {
            const Expr& b = e.kids()[0];
            const Rational& r = e.value();
            return Expr::constant(r) * Expr::pow(b, r - 1) * differentiate(b, v);
        }
        case NodeKind::Quotient: {
            const Expr& n = e.kids()[0];
            const Expr& d = e.kids()[1];
            return (differentiate(n, v) * d - n * differentiate(d, v)) / (d * d);
        }
        case NodeKind::Func: {
            const Expr& a = e.kids()[0];
            Expr da = differentiate(a, v);
            switch (e.func()) {
                case FuncKind::Sin: return cos(a) * da;
                case FuncKind::Cos: return -(sin(a) * da);
                case FuncKind::Exp: return exp(a) * da;
                case FuncKind::Log: return da / a;
                case FuncKind::Sqrt: return da / (Expr::num(2) * sqrt(a));
            }
        }
    }
    return Expr::num(0);
}

/// Simultaneous substitution of variables, then light renormalization.
inline Expr substitute(const Expr& e, const Bindings& bindings) {
    if (bindings.empty()) return e;
    switch (e.kind()) {
        case NodeKind::Constant:
            return e;
        case NodeKind::Variable: {
            auto it = bindings.find(e.name());
            return it == bindings.end() ? e : it->second;
        }
        case NodeKind::Sum: {
            std::vector<Expr> parts;
            parts.reserve(e.kids().size());
            for (const Expr& k : e.kids()) parts.push_back(substitute(k, bindings));
            return Expr::sum(std::move(parts));
        }
        case NodeKind::Product: {
            std::vector<Expr> parts;
            parts.reserve(e.kids().size());
            for (const Expr& k : e.kids()) parts.push_back(substitute(k, bindings));
            return Expr::product(std::move(parts));
        }
        case NodeKind::Power:
            return Expr::pow(substitute(e.kids()[0], bindings), e.value());
        case NodeKind::Quotient:
            return Expr::quotient(substitute(e.kids()[0], bindings),
                                  substitute(e.kids()[1], bindings));
        case NodeKind::Func:
            return Expr::apply(e.func(), substitute(e.kids()[0], bindings));
    }
    return e;
}

}  // namespace mvf
