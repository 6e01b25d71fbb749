#pragma once

// Immutable symbolic expression trees over named variables with exact
// rational coefficients. Construction applies light local simplification
// (constant folding, flattening, collection of structurally equal terms);
// heavy normalization lives in the zero-testing machinery.

#include "mvf/rational.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mvf {

enum class NodeKind { Constant, Variable, Sum, Product, Power, Quotient, Func };
enum class FuncKind { Sin, Cos, Exp, Log, Sqrt };

inline const char* func_name(FuncKind f) {
    switch (f) {
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
        case FuncKind::Sqrt: return "sqrt";
    }
    return "?";
}

class Expr;
int compare(const Expr& a, const Expr& b);

struct ExprNode {
    NodeKind kind;
    Rational value;          // Constant payload, or Power exponent
    std::string name;        // Variable payload
    FuncKind func{};         // Func payload
    std::vector<Expr> kids;  // ordered children
};

class Expr {
public:
    Expr() : Expr(constant(0)) {}

    static Expr constant(Rational v) {
        return raw({NodeKind::Constant, std::move(v), {}, {}, {}});
    }
    static Expr num(long long v) { return constant(Rational(v)); }
    static Expr var(std::string name) {
        return raw({NodeKind::Variable, {}, std::move(name), {}, {}});
    }

    static Expr sum(std::vector<Expr> terms);
    static Expr product(std::vector<Expr> factors);
    static Expr pow(const Expr& base, const Rational& exp);
    static Expr quotient(const Expr& n, const Expr& d);
    static Expr apply(FuncKind f, const Expr& arg);

    NodeKind kind() const { return node_->kind; }
    const Rational& value() const { return node_->value; }
    const std::string& name() const { return node_->name; }
    FuncKind func() const { return node_->func; }
    const std::vector<Expr>& kids() const { return node_->kids; }

    bool is_constant() const { return kind() == NodeKind::Constant; }
    bool is_constant(long long v) const {
        return is_constant() && value() == Rational(v);
    }
    bool is_zero_constant() const { return is_constant(0); }

    /// Collects every variable name occurring in the tree.
    void variables(std::set<std::string>& out) const {
        if (kind() == NodeKind::Variable) out.insert(name());
        for (const Expr& k : kids()) k.variables(out);
    }
    std::set<std::string> variables() const {
        std::set<std::string> out;
        variables(out);
        return out;
    }

    std::string str() const;

    friend int compare(const Expr& a, const Expr& b);

private:
    static Expr raw(ExprNode&& n) {
        Expr e{Uninit{}};
        e.node_ = std::make_shared<const ExprNode>(std::move(n));
        return e;
    }
    struct Uninit {};
    explicit Expr(Uninit) {}

    std::shared_ptr<const ExprNode> node_;

    friend struct ExprBuilder;
};

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
inline bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }

// Internal access to the raw node constructor for the builder routines.
struct ExprBuilder {
    static Expr make(ExprNode&& n) { return Expr::raw(std::move(n)); }
};

inline int compare(const Expr& a, const Expr& b) {
    auto rank = [](NodeKind k) {
        switch (k) {
            case NodeKind::Constant: return 0;
            case NodeKind::Variable: return 1;
            case NodeKind::Func: return 2;
            case NodeKind::Power: return 3;
            case NodeKind::Product: return 4;
            case NodeKind::Quotient: return 5;
            case NodeKind::Sum: return 6;
        }
        return 7;
    };
    if (a.node_ == b.node_) return 0;
    int ra = rank(a.kind()), rb = rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
        case NodeKind::Constant:
            return a.value() == b.value() ? 0 : (a.value() < b.value() ? -1 : 1);
        case NodeKind::Variable:
            return a.name().compare(b.name());
        case NodeKind::Func:
            if (a.func() != b.func()) return a.func() < b.func() ? -1 : 1;
            return compare(a.kids()[0], b.kids()[0]);
        case NodeKind::Power: {
            int c = compare(a.kids()[0], b.kids()[0]);
            if (c != 0) return c;
            return a.value() == b.value() ? 0 : (a.value() < b.value() ? -1 : 1);
        }
        default: {
            const auto& ka = a.kids();
            const auto& kb = b.kids();
            for (std::size_t i = 0; i < std::min(ka.size(), kb.size()); ++i) {
                int c = compare(ka[i], kb[i]);
                if (c != 0) return c;
            }
            if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
            return 0;
        }
    }
}

namespace detail {

// Syntactic degree used only to order sum terms for display.
inline long term_degree(const Expr& e) {
    switch (e.kind()) {
        case NodeKind::Constant: return 0;
        case NodeKind::Variable: return 1;
        case NodeKind::Func: return 1;
        case NodeKind::Power: {
            auto n = to_long(e.value());
            long base = term_degree(e.kids()[0]);
            return (n && *n > 0) ? static_cast<long>(*n) * base : 1;
        }
        case NodeKind::Product: {
            long d = 0;
            for (const Expr& k : e.kids()) d += term_degree(k);
            return d;
        }
        case NodeKind::Quotient: return term_degree(e.kids()[0]);
        case NodeKind::Sum: {
            long d = 0;
            for (const Expr& k : e.kids()) d = std::max(d, term_degree(k));
            return d;
        }
    }
    return 0;
}

// Splits a term into (rational coefficient, monic part).
inline std::pair<Rational, Expr> split_coeff(const Expr& e) {
    if (e.kind() == NodeKind::Constant) return {e.value(), Expr::num(1)};
    if (e.kind() == NodeKind::Product && !e.kids().empty() &&
        e.kids()[0].kind() == NodeKind::Constant) {
        std::vector<Expr> rest(e.kids().begin() + 1, e.kids().end());
        Expr base = rest.size() == 1
                        ? rest[0]
                        : ExprBuilder::make({NodeKind::Product, {}, {}, {}, std::move(rest)});
        return {e.kids()[0].value(), base};
    }
    return {Rational(1), e};
}

inline Expr with_coeff(const Rational& c, const Expr& base) {
    if (base.is_constant(1)) return Expr::constant(c);
    if (c == 1) return base;
    std::vector<Expr> kids;
    kids.push_back(Expr::constant(c));
    if (base.kind() == NodeKind::Product)
        kids.insert(kids.end(), base.kids().begin(), base.kids().end());
    else
        kids.push_back(base);
    return ExprBuilder::make({NodeKind::Product, {}, {}, {}, std::move(kids)});
}

}  // namespace detail

inline Expr Expr::sum(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    for (Expr& t : terms) {
        if (t.kind() == NodeKind::Sum)
            flat.insert(flat.end(), t.kids().begin(), t.kids().end());
        else
            flat.push_back(std::move(t));
    }
    std::map<Expr, Rational, ExprLess> acc;
    for (const Expr& t : flat) {
        auto [c, base] = detail::split_coeff(t);
        acc[base] += c;
    }
    std::vector<Expr> out;
    for (const auto& [base, c] : acc)
        if (c != 0) out.push_back(detail::with_coeff(c, base));
    std::stable_sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
        long da = detail::term_degree(a), db = detail::term_degree(b);
        if (da != db) return da > db;
        auto [ca, ba] = detail::split_coeff(a);
        auto [cb, bb] = detail::split_coeff(b);
        int c = compare(ba, bb);
        if (c != 0) return c < 0;
        return ca < cb;
    });
    if (out.empty()) return num(0);
    if (out.size() == 1) return out[0];
    return raw({NodeKind::Sum, {}, {}, {}, std::move(out)});
}

inline Expr Expr::product(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    for (Expr& f : factors) {
        if (f.kind() == NodeKind::Product)
            flat.insert(flat.end(), f.kids().begin(), f.kids().end());
        else
            flat.push_back(std::move(f));
    }
    Rational coeff(1);
    std::map<Expr, Rational, ExprLess> powers;  // base -> accumulated exponent
    std::vector<Expr> quotients;
    for (const Expr& f : flat) {
        if (f.kind() == NodeKind::Constant) {
            coeff *= f.value();
        } else if (f.kind() == NodeKind::Power) {
            powers[f.kids()[0]] += f.value();
        } else if (f.kind() == NodeKind::Quotient) {
            quotients.push_back(f);
        } else {
            powers[f] += 1;
        }
    }
    if (coeff == 0) return num(0);
    std::vector<Expr> out;
    for (const auto& [base, e] : powers) {
        if (e == 0) continue;
        out.push_back(pow(base, e));
    }
    // Re-fold constants that pow() may have produced (e.g. x^0 or 2^3).
    std::vector<Expr> kept;
    for (Expr& f : out) {
        if (f.kind() == NodeKind::Constant)
            coeff *= f.value();
        else
            kept.push_back(std::move(f));
    }
    if (coeff == 0) return num(0);
    std::sort(kept.begin(), kept.end(), ExprLess{});
    Expr base_part = [&]() -> Expr {
        if (kept.empty()) return constant(coeff);
        std::vector<Expr> kids;
        if (coeff != 1) kids.push_back(constant(coeff));
        kids.insert(kids.end(), kept.begin(), kept.end());
        if (kids.size() == 1) return kids[0];
        return raw({NodeKind::Product, {}, {}, {}, std::move(kids)});
    }();
    // Fold quotient factors: (a/b)*c -> (a*c)/b.
    for (const Expr& q : quotients)
        base_part = quotient(product({base_part, q.kids()[0]}), q.kids()[1]);
    return base_part;
}

inline Expr Expr::pow(const Expr& base, const Rational& exp) {
    if (exp == 0) return num(1);
    if (exp == 1) return base;
    if (base.is_constant()) {
        const Rational& c = base.value();
        if (auto n = to_long(exp)) {
            if (c == 0 && *n < 0) throw Error("division by zero in constant power");
            Rational r(1);
            Rational b = *n > 0 ? c : Rational(1) / c;
            for (long long i = 0; i < std::abs(*n); ++i) r *= b;
            return constant(r);
        }
        if (c == 0) return num(0);
        if (c == 1) return num(1);
        // Fold perfect square roots of constants: 4^(1/2) -> 2.
        if (denominator(exp) == 2) {
            if (auto s = rational_sqrt(c)) return pow(constant(*s), exp * 2);
        }
    }
    if (base.kind() == NodeKind::Power && is_integer(exp))
        return pow(base.kids()[0], base.value() * exp);
    if (base.kind() == NodeKind::Quotient && is_integer(exp) && exp > 0)
        return quotient(pow(base.kids()[0], exp), pow(base.kids()[1], exp));
    return raw({NodeKind::Power, exp, {}, {}, {base}});
}

inline Expr Expr::quotient(const Expr& n, const Expr& d) {
    if (d.is_constant()) {
        if (d.value() == 0) throw Error("division by zero");
        return product({constant(Rational(1) / d.value()), n});
    }
    if (n.is_zero_constant()) return num(0);
    Expr nn = n, dd = d;
    if (nn.kind() == NodeKind::Quotient) {
        dd = product({nn.kids()[1], dd});
        nn = nn.kids()[0];
    }
    if (dd.kind() == NodeKind::Quotient) {
        nn = product({nn, dd.kids()[1]});
        dd = dd.kids()[0];
    }
    if (nn == dd) return num(1);
    return raw({NodeKind::Quotient, {}, {}, {}, {nn, dd}});
}

inline Expr Expr::apply(FuncKind f, const Expr& arg) {
    if (arg.is_constant()) {
        const Rational& c = arg.value();
        switch (f) {
            case FuncKind::Sin:
                if (c == 0) return num(0);
                break;
            case FuncKind::Cos:
                if (c == 0) return num(1);
                break;
            case FuncKind::Exp:
                if (c == 0) return num(1);
                break;
            case FuncKind::Log:
                if (c == 1) return num(0);
                break;
            case FuncKind::Sqrt:
                if (auto s = rational_sqrt(c)) return constant(*s);
                break;
        }
    }
    return raw({NodeKind::Func, {}, {}, f, {arg}});
}

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) {
    return Expr::sum({a, Expr::product({Expr::num(-1), b})});
}
inline Expr operator-(const Expr& a) { return Expr::product({Expr::num(-1), a}); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::quotient(a, b); }

inline Expr pow(const Expr& b, const Rational& e) { return Expr::pow(b, e); }
inline Expr pow(const Expr& b, long long e) { return Expr::pow(b, Rational(e)); }
inline Expr sin(const Expr& e) { return Expr::apply(FuncKind::Sin, e); }
inline Expr cos(const Expr& e) { return Expr::apply(FuncKind::Cos, e); }
inline Expr exp(const Expr& e) { return Expr::apply(FuncKind::Exp, e); }
inline Expr log(const Expr& e) { return Expr::apply(FuncKind::Log, e); }
inline Expr sqrt(const Expr& e) { return Expr::apply(FuncKind::Sqrt, e); }

// ---------------------------------------------------------------------------
// Printing. The output re-parses to an equal expression (round-trip identity
// up to normalization).

namespace detail {

inline int print_level(const Expr& e) {
    switch (e.kind()) {
        case NodeKind::Sum: return 1;
        case NodeKind::Product:
        case NodeKind::Quotient: return 2;
        case NodeKind::Power: return 3;
        default: return 4;
    }
}

inline void print_to(const Expr& e, int parent_level, std::string& out);

inline void print_wrapped(const Expr& e, int parent_level, std::string& out) {
    bool paren = print_level(e) < parent_level ||
                 (e.is_constant() && e.value() < 0 && parent_level >= 2) ||
                 (e.is_constant() && !is_integer(e.value()) && parent_level >= 3);
    if (paren) out += "(";
    print_to(e, paren ? 0 : parent_level, out);
    if (paren) out += ")";
}

inline void print_to(const Expr& e, int parent_level, std::string& out) {
    (void)parent_level;
    switch (e.kind()) {
        case NodeKind::Constant:
            out += rational_str(e.value());
            return;
        case NodeKind::Variable:
            out += e.name();
            return;
        case NodeKind::Func:
            out += func_name(e.func());
            out += "(";
            print_to(e.kids()[0], 0, out);
            out += ")";
            return;
        case NodeKind::Power: {
            print_wrapped(e.kids()[0], 4, out);
            out += "^";
            const Rational& x = e.value();
            if (is_integer(x) && x > 0) {
                out += rational_str(x);
            } else {
                out += "(" + rational_str(x) + ")";
            }
            return;
        }
        case NodeKind::Quotient:
            print_wrapped(e.kids()[0], 2, out);
            out += "/";
            print_wrapped(e.kids()[1], 3, out);
            return;
        case NodeKind::Product: {
            auto [c, base] = split_coeff(e);
            if (c < 0) {
                out += "-";
                print_wrapped(with_coeff(-c, base), 2, out);
                return;
            }
            bool first = true;
            for (const Expr& k : e.kids()) {
                if (!first) out += "*";
                print_wrapped(k, 3, out);
                first = false;
            }
            return;
        }
        case NodeKind::Sum: {
            bool first = true;
            for (const Expr& t : e.kids()) {
                auto [c, base] = split_coeff(t);
                if (first) {
                    print_wrapped(t, 1, out);
                } else if (c < 0) {
                    out += " - ";
                    print_wrapped(with_coeff(-c, base), 2, out);
                } else {
                    out += " + ";
                    print_wrapped(t, 1, out);
                }
                first = false;
            }
            return;
        }
    }
}

}  // namespace detail

inline std::string Expr::str() const {
    std::string out;
    detail::print_to(*this, 0, out);
    return out;
}

inline std::string to_string(const Expr& e) { return e.str(); }

}  // namespace mvf
