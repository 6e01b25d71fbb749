#pragma once

// Sparse distributed multivariate polynomials over exact rationals, and the
// rational normal form (quotient of expanded polynomials) used for
// zero-testing. Subexpressions outside the rational fragment (transcendental
// functions, fractional powers) are mapped to opaque atom variables keyed by
// the normal form of their argument.

#include "mvf/expr.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvf {

// Thrown internally when expansion exceeds the configured budget; callers
// fall back to numeric evaluation.
struct BudgetExceeded {};

struct PolyBudget {
    long max_total_degree = 64;
    std::size_t max_terms = 200000;
};

/// Product of variables with positive integer exponents, sorted by id.
struct Monomial {
    std::vector<std::pair<int, int>> factors;  // (var id, exponent)

    long total_degree() const {
        long d = 0;
        for (auto& [v, e] : factors) d += e;
        return d;
    }
    bool empty() const { return factors.empty(); }

    Monomial operator*(const Monomial& o) const {
        Monomial r;
        auto a = factors.begin(), b = o.factors.begin();
        while (a != factors.end() || b != o.factors.end()) {
            if (b == o.factors.end() || (a != factors.end() && a->first < b->first))
                r.factors.push_back(*a++);
            else if (a == factors.end() || b->first < a->first)
                r.factors.push_back(*b++);
            else {
                r.factors.emplace_back(a->first, a->second + b->second);
                ++a, ++b;
            }
        }
        return r;
    }

    /// Exact division; nullopt when some exponent would go negative.
    std::optional<Monomial> divide(const Monomial& o) const {
        Monomial r;
        auto a = factors.begin();
        for (auto& [v, e] : o.factors) {
            while (a != factors.end() && a->first < v) r.factors.push_back(*a++);
            if (a == factors.end() || a->first != v || a->second < e) return std::nullopt;
            if (a->second > e) r.factors.emplace_back(v, a->second - e);
            ++a;
        }
        while (a != factors.end()) r.factors.push_back(*a++);
        return r;
    }

    int degree_in(int var) const {
        for (auto& [v, e] : factors)
            if (v == var) return e;
        return 0;
    }
};

/// Graded lexicographic order (total degree first, then lex on exponents).
struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        long da = a.total_degree(), db = b.total_degree();
        if (da != db) return da < db;
        auto ia = a.factors.begin(), ib = b.factors.begin();
        while (ia != a.factors.end() && ib != b.factors.end()) {
            if (ia->first != ib->first) return ia->first > ib->first;  // smaller id = higher power present
            if (ia->second != ib->second) return ia->second < ib->second;
            ++ia, ++ib;
        }
        return ia == a.factors.end() && ib != b.factors.end();
    }
};

class Poly {
public:
    using Terms = std::map<Monomial, Rational, MonoLess>;

    Poly() = default;
    explicit Poly(Rational c) {
        if (c != 0) terms_[Monomial{}] = std::move(c);
    }
    static Poly variable(int id) {
        Poly p;
        p.terms_[Monomial{{{id, 1}}}] = 1;
        return p;
    }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
    }
    Rational constant_term() const {
        auto it = terms_.find(Monomial{});
        return it == terms_.end() ? Rational(0) : it->second;
    }
    long total_degree() const {
        return terms_.empty() ? 0 : terms_.rbegin()->first.total_degree();
    }
    int degree_in(int var) const {
        int d = 0;
        for (auto& [m, c] : terms_) d = std::max(d, m.degree_in(var));
        return d;
    }
    std::pair<Monomial, Rational> leading() const { return *terms_.rbegin(); }

    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_[m] = c;
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }
    Poly operator-(const Poly& o) const {
        Poly r = *this;
        for (auto& [m, c] : o.terms_) r.add_term(m, -c);
        return r;
    }
    Poly operator-() const {
        Poly r;
        for (auto& [m, c] : terms_) r.terms_[m] = -c;
        return r;
    }
    Poly mul(const Poly& o, const PolyBudget& budget) const {
        if (is_zero() || o.is_zero()) return {};
        if (total_degree() + o.total_degree() > budget.max_total_degree) throw BudgetExceeded{};
        Poly r;
        for (auto& [ma, ca] : terms_) {
            for (auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
            if (r.terms_.size() > budget.max_terms) throw BudgetExceeded{};
        }
        return r;
    }
    Poly pow(long long n, const PolyBudget& budget) const {
        Poly r(Rational(1));
        for (long long i = 0; i < n; ++i) r = r.mul(*this, budget);
        return r;
    }

    /// Rational content: gcd of numerators over lcm of denominators.
    Rational content() const {
        if (terms_.empty()) return 0;
        BigInt g = 0, l = 1;
        for (auto& [m, c] : terms_) {
            g = gcd(g, numerator(c));
            l = lcm(l, denominator(c));
        }
        return Rational(g, l);
    }

    /// Componentwise minimum of all monomials (the monomial content).
    Monomial monomial_content() const {
        if (terms_.empty()) return {};
        Monomial r = terms_.begin()->first;
        for (auto& [m, c] : terms_) {
            Monomial next;
            for (auto& [v, e] : r.factors) {
                int d = std::min(e, m.degree_in(v));
                if (d > 0) next.factors.emplace_back(v, d);
            }
            r = next;
            if (r.empty()) break;
        }
        return r;
    }

    Poly scaled(const Rational& c) const {
        Poly r;
        if (c == 0) return r;
        for (auto& [m, k] : terms_) r.terms_[m] = k * c;
        return r;
    }

    /// Exact division by a monomial (must divide every term).
    std::optional<Poly> divide_monomial(const Monomial& m) const {
        Poly r;
        for (auto& [mm, c] : terms_) {
            auto q = mm.divide(m);
            if (!q) return std::nullopt;
            r.terms_[*q] = c;
        }
        return r;
    }

    /// Exact polynomial division; nullopt when not divisible.
    std::optional<Poly> divide_exact(const Poly& d, const PolyBudget& budget) const {
        if (d.is_zero()) return std::nullopt;
        Poly rem = *this, quot;
        auto [dm, dc] = d.leading();
        std::size_t guard = terms_.size() * d.terms_.size() + terms_.size() + 16;
        while (!rem.is_zero()) {
            if (guard-- == 0) return std::nullopt;
            auto [rm, rc] = rem.leading();
            auto qm = rm.divide(dm);
            if (!qm) return std::nullopt;
            Rational qc = rc / dc;
            Poly t;
            t.terms_[*qm] = qc;
            quot = quot + t;
            rem = rem - d.mul(t, budget);
        }
        return quot;
    }

    /// Collects coefficients of powers of `var`: result[k] = coeff of var^k.
    std::vector<Poly> coefficients_in(int var) const {
        std::vector<Poly> out(static_cast<std::size_t>(degree_in(var)) + 1);
        for (auto& [m, c] : terms_) {
            int k = m.degree_in(var);
            Monomial rest;
            for (auto& [v, e] : m.factors)
                if (v != var) rest.factors.emplace_back(v, e);
            out[static_cast<std::size_t>(k)].add_term(rest, c);
        }
        return out;
    }

    std::set<int> variable_ids() const {
        std::set<int> out;
        for (auto& [m, c] : terms_)
            for (auto& [v, e] : m.factors) out.insert(v);
        return out;
    }

    bool operator==(const Poly& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        auto a = terms_.begin();
        for (auto b = o.terms_.begin(); b != o.terms_.end(); ++a, ++b) {
            MonoLess less;
            if (less(a->first, b->first) || less(b->first, a->first) || a->second != b->second)
                return false;
        }
        return true;
    }

private:
    Terms terms_;
};

/// Square root of a polynomial when it is a perfect square.
inline std::optional<Poly> poly_sqrt(const Poly& d, const PolyBudget& budget) {
    if (d.is_zero()) return Poly{};
    auto [lm, lc] = d.leading();
    auto root_c = rational_sqrt(lc);
    if (!root_c) return std::nullopt;
    Monomial half;
    for (auto& [v, e] : lm.factors) {
        if (e % 2 != 0) return std::nullopt;
        half.factors.emplace_back(v, e / 2);
    }
    Poly s;
    s.add_term(half, *root_c);
    std::size_t guard = 4 * d.terms().size() + 16;
    while (true) {
        Poly r = d - s.mul(s, budget);
        if (r.is_zero()) return s;
        if (guard-- == 0) return std::nullopt;
        auto [rm, rc] = r.leading();
        auto um = rm.divide(half);
        if (!um) return std::nullopt;
        Poly u;
        u.add_term(*um, rc / (2 * *root_c));
        if (u.is_zero()) return std::nullopt;
        s = s + u;
    }
}

// ---------------------------------------------------------------------------
// Variable table: maps chart variables and opaque atoms to polynomial ids.

class VarTable {
public:
    int intern(const std::string& name, bool atom) {
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        int id = static_cast<int>(names_.size());
        names_.push_back(name);
        is_atom_.push_back(atom);
        ids_[name] = id;
        return id;
    }
    const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
    bool is_atom(int id) const { return is_atom_[static_cast<std::size_t>(id)]; }
    bool any_atom(const Poly& p) const {
        for (int v : p.variable_ids())
            if (is_atom(v)) return true;
        return false;
    }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::vector<bool> is_atom_;
    std::map<std::string, int> ids_;
};

/// Quotient of polynomials; den is never the zero polynomial.
struct Frac {
    Poly num;
    Poly den{Rational(1)};
};

namespace detail {

inline std::string poly_key(const Poly& p) {
    std::string s;
    for (auto& [m, c] : p.terms()) {
        s += rational_str(c);
        for (auto& [v, e] : m.factors) s += "." + std::to_string(v) + "^" + std::to_string(e);
        s += ";";
    }
    return s;
}

inline std::string frac_key(const Frac& f) {
    return poly_key(f.num) + "|" + poly_key(f.den);
}

inline Frac frac_mul(const Frac& a, const Frac& b, const PolyBudget& budget) {
    return {a.num.mul(b.num, budget), a.den.mul(b.den, budget)};
}

inline Frac frac_add(const Frac& a, const Frac& b, const PolyBudget& budget) {
    return {a.num.mul(b.den, budget) + b.num.mul(a.den, budget), a.den.mul(b.den, budget)};
}

inline Frac frac_pow(const Frac& a, long long n, const PolyBudget& budget) {
    if (n >= 0) return {a.num.pow(n, budget), a.den.pow(n, budget)};
    if (a.num.is_zero()) throw EvalError("division by an identically zero expression");
    return {a.den.pow(-n, budget), a.num.pow(-n, budget)};
}

}  // namespace detail

/// Expands an expression into rational normal form over `vars`.
/// Non-rational subexpressions become atom variables.
inline Frac to_rnf(const Expr& e, VarTable& vars, const PolyBudget& budget) {
    using namespace detail;
    switch (e.kind()) {
        case NodeKind::Constant:
            return {Poly(e.value()), Poly(Rational(1))};
        case NodeKind::Variable:
            return {Poly::variable(vars.intern(e.name(), false)), Poly(Rational(1))};
        case NodeKind::Sum: {
            Frac acc{Poly{}, Poly(Rational(1))};
            for (const Expr& k : e.kids()) acc = frac_add(acc, to_rnf(k, vars, budget), budget);
            return acc;
        }
        case NodeKind::Product: {
            Frac acc{Poly(Rational(1)), Poly(Rational(1))};
            for (const Expr& k : e.kids()) acc = frac_mul(acc, to_rnf(k, vars, budget), budget);
            return acc;
        }
        case NodeKind::Quotient: {
            Frac n = to_rnf(e.kids()[0], vars, budget);
            Frac d = to_rnf(e.kids()[1], vars, budget);
            if (d.num.is_zero()) throw EvalError("division by an identically zero expression");
            return {n.num.mul(d.den, budget), n.den.mul(d.num, budget)};
        }
        case NodeKind::Power: {
            Frac b = to_rnf(e.kids()[0], vars, budget);
            if (auto n = to_long(e.value())) return frac_pow(b, *n, budget);
            // Fractional powers are opaque atoms keyed by the base normal form.
            std::string key = "pow[" + frac_key(b) + "]^" + rational_str(e.value());
            return {Poly::variable(vars.intern(key, true)), Poly(Rational(1))};
        }
        case NodeKind::Func: {
            Frac a = to_rnf(e.kids()[0], vars, budget);
            std::string key;
            if (e.func() == FuncKind::Sqrt)
                key = "pow[" + frac_key(a) + "]^1/2";  // sqrt(x) and x^(1/2) coincide
            else
                key = std::string(func_name(e.func())) + "[" + frac_key(a) + "]";
            return {Poly::variable(vars.intern(key, true)), Poly(Rational(1))};
        }
    }
    return {Poly{}, Poly(Rational(1))};
}

/// Rebuilds a canonical expression (expanded, collected) from a polynomial.
inline Expr poly_to_expr(const Poly& p, const VarTable& vars) {
    std::vector<Expr> terms;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        std::vector<Expr> factors;
        factors.push_back(Expr::constant(it->second));
        for (auto& [v, e] : it->first.factors)
            factors.push_back(Expr::pow(Expr::var(vars.name(v)), Rational(e)));
        terms.push_back(Expr::product(std::move(factors)));
    }
    return Expr::sum(std::move(terms));
}

}  // namespace mvf
